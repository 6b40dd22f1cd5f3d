"""Periodic grids and real fields with cached physical/spectral representations.

The domain is [0, 2*pi)^d with the measure normalized to total mass 1, so a
pure Fourier mode e^{ik.x} has unit L_p norm for every p.  Spectral
coefficients use the forward-normalized FFT: spec = fftn(phys) / n^d, hence
Parseval reads mean(|phys|^2) = sum(|spec|^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def _is_three_smooth(n: int) -> bool:
    while n % 2 == 0:
        n //= 2
    while n % 3 == 0:
        n //= 3
    return n == 1


@lru_cache(maxsize=None)
def _cached_grid(dim: int, n: int) -> "PeriodicGrid":
    return PeriodicGrid(dim, n)


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the torus [0, 2*pi)^d, d in {2, 3}.

    n is the number of points per axis.  Powers of two are the normal choice;
    3 * 2^k is also accepted so that intermediate resolutions (e.g. n = 48)
    remain FFT-friendly.
    """

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2 != 0 or not _is_three_smooth(self.n):
            raise ValueError(
                f"n must be >= 8 and of the form 2^a * 3^b (even), got {self.n}"
            )

    @staticmethod
    def of(dim: int, n: int) -> "PeriodicGrid":
        return _cached_grid(dim, n)

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def h(self) -> float:
        """Grid spacing."""
        return 2.0 * np.pi / self.n

    # -- frequency tables (computed once per grid) ---------------------------

    @property
    def k_axis(self) -> np.ndarray:
        """Integer frequencies along one axis in FFT layout, in [-n/2, n/2)."""
        return self._tables()[0]

    @property
    def k_vectors(self):
        """Tuple of d broadcastable integer-frequency arrays."""
        return self._tables()[1]

    @property
    def k_deriv(self):
        """Frequency arrays for first derivatives (Nyquist mode zeroed)."""
        return self._tables()[2]

    @property
    def k_sq(self) -> np.ndarray:
        """|k|^2 over the grid, full integer frequencies."""
        return self._tables()[3]

    @property
    def k_abs(self) -> np.ndarray:
        """|k| over the grid."""
        return self._tables()[4]

    @property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keeps |k_i| <= (n-1)//3 on every axis."""
        return self._tables()[5]

    @property
    def dealias_limit(self) -> int:
        return (self.n - 1) // 3

    def _tables(self):
        key = (self.dim, self.n)
        tabs = _GRID_TABLES.get(key)
        if tabs is None:
            k1 = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.float64)
            kvecs = []
            kd = []
            for a in range(self.dim):
                shape = [1] * self.dim
                shape[a] = self.n
                ka = k1.reshape(shape)
                kvecs.append(ka)
                kda = ka.copy()
                kda[kda == -self.n // 2] = 0.0
                kd.append(kda)
            ksq = sum(ka ** 2 for ka in kvecs) + np.zeros(self.shape)
            kabs = np.sqrt(ksq)
            lim = self.dealias_limit
            mask = np.ones(self.shape, dtype=bool)
            for ka in kvecs:
                mask &= np.abs(ka) <= lim
            tabs = (k1, tuple(kvecs), tuple(kd), ksq, kabs, mask)
            _GRID_TABLES[key] = tabs
        return tabs

    def coordinates(self):
        """Tuple of d broadcastable coordinate arrays in [0, 2*pi)."""
        x1 = np.arange(self.n) * self.h
        out = []
        for a in range(self.dim):
            shape = [1] * self.dim
            shape[a] = self.n
            out.append(x1.reshape(shape))
        return tuple(out)


_GRID_TABLES: dict = {}


# -- raw-array helpers (shared by fields and the solver inner loops) ----------

def to_spectral(grid: PeriodicGrid, phys: np.ndarray) -> np.ndarray:
    return np.fft.fftn(phys, norm="forward")


def to_physical(grid: PeriodicGrid, spec: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(spec, norm="forward").real


def hermitian_defect(spec: np.ndarray) -> float:
    """Relative deviation of spec from the spectrum of a real field."""
    scale = np.max(np.abs(spec))
    if scale == 0.0:
        return 0.0
    # rev[k] = spec[-k mod n]: flip every axis, then roll by one.
    rev = spec
    for a in range(spec.ndim):
        rev = np.roll(np.flip(rev, axis=a), 1, axis=a)
    return float(np.max(np.abs(spec - np.conj(rev))) / scale)


class ScalarField:
    """Real scalar field on a PeriodicGrid.

    Immutable by convention: operations return new fields.  Physical and
    spectral representations are cached and converted lazily.
    """

    __slots__ = ("grid", "_phys", "_spec")

    def __init__(self, grid: PeriodicGrid, phys=None, spec=None):
        if phys is None and spec is None:
            raise ValueError("need a physical or spectral array")
        self.grid = grid
        self._phys = phys
        self._spec = spec

    @classmethod
    def from_physical(cls, grid: PeriodicGrid, values) -> "ScalarField":
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != grid.shape:
            raise ValueError(f"shape {arr.shape} does not match grid {grid.shape}")
        return cls(grid, phys=arr)

    @classmethod
    def from_spectral(cls, grid: PeriodicGrid, coeffs, check: bool = True) -> "ScalarField":
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.shape != grid.shape:
            raise ValueError(f"shape {arr.shape} does not match grid {grid.shape}")
        if check and hermitian_defect(arr) > 1e-10:
            raise ValueError("spectral coefficients are not Hermitian-symmetric")
        return cls(grid, spec=arr)

    @classmethod
    def zero(cls, grid: PeriodicGrid) -> "ScalarField":
        return cls(grid, spec=np.zeros(grid.shape, dtype=np.complex128))

    @property
    def values(self) -> np.ndarray:
        if self._phys is None:
            self._phys = to_physical(self.grid, self._spec)
        return self._phys

    @property
    def spec(self) -> np.ndarray:
        if self._spec is None:
            self._spec = to_spectral(self.grid, self._phys)
        return self._spec

    @property
    def mean(self) -> float:
        return float(self.spec[(0,) * self.grid.dim].real)

    def norm_lp(self, p) -> float:
        return lp_norm(self.values, p)

    def norm_l2(self) -> float:
        # Parseval on whichever representation is already materialized.
        if self._spec is not None:
            return float(np.sqrt(np.sum(np.abs(self._spec) ** 2)))
        return float(np.sqrt(np.mean(self._phys ** 2)))

    def __add__(self, other):
        return ScalarField(self.grid, spec=self.spec + other.spec)

    def __sub__(self, other):
        return ScalarField(self.grid, spec=self.spec - other.spec)

    def __mul__(self, c: float):
        return ScalarField(self.grid, spec=self.spec * c)

    __rmul__ = __mul__


def lp_norm(values: np.ndarray, p) -> float:
    """L_p norm under the normalized measure (mean instead of integral)."""
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(values)))
    p = float(p)
    if p <= 0:
        raise ValueError("p must be positive")
    if p == 2.0:
        return float(np.sqrt(np.mean(values ** 2)))
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


def resample_spectral(field: "ScalarField", new_grid: PeriodicGrid) -> "ScalarField":
    """The same trigonometric polynomial represented on another grid.

    Requires every nonzero mode of the source to be representable on the
    target (always true when refining).
    """
    old = field.grid
    src = field.spec
    out = np.zeros(new_grid.shape, dtype=np.complex128)
    half = min(old.n, new_grid.n) // 2
    ks = list(range(-half + 1, half))  # shared unambiguous frequencies
    ix_old = np.ix_(*([[k % old.n for k in ks]] * old.dim))
    ix_new = np.ix_(*([[k % new_grid.n for k in ks]] * old.dim))
    kept = np.zeros(old.shape, dtype=bool)
    kept[ix_old] = True
    dropped = np.sum(np.abs(src[~kept]) ** 2)
    if dropped > 1e-24 * max(np.sum(np.abs(src) ** 2), 1e-300):
        raise ValueError("field carries modes unrepresentable on the "
                         "target grid")
    out[ix_new] = src[ix_old]
    return ScalarField.from_spectral(new_grid, out, check=False)


class VectorField:
    """Vector field with d scalar components; may carry a solenoidal certificate."""

    __slots__ = ("grid", "components", "is_divergence_free")

    def __init__(self, components, is_divergence_free: bool = False):
        components = tuple(components)
        self.grid = components[0].grid
        if len(components) != self.grid.dim:
            raise ValueError("component count must equal grid dimension")
        self.components = components
        self.is_divergence_free = is_divergence_free

    @classmethod
    def from_physical(cls, grid: PeriodicGrid, arrays) -> "VectorField":
        return cls([ScalarField.from_physical(grid, a) for a in arrays])

    @classmethod
    def from_spectral(cls, grid: PeriodicGrid, coeffs, check: bool = True) -> "VectorField":
        return cls([ScalarField.from_spectral(grid, c, check=check) for c in coeffs])

    @classmethod
    def zero(cls, grid: PeriodicGrid) -> "VectorField":
        return cls([ScalarField.zero(grid) for _ in range(grid.dim)],
                   is_divergence_free=True)

    @property
    def spec(self):
        return tuple(c.spec for c in self.components)

    @property
    def values(self):
        return tuple(c.values for c in self.components)

    def pointwise_magnitude(self) -> np.ndarray:
        return np.sqrt(sum(v ** 2 for v in self.values))

    def norm_lp(self, p) -> float:
        """L_p norm of the pointwise Euclidean magnitude."""
        return lp_norm(self.pointwise_magnitude(), p)

    def norm_l2(self) -> float:
        return float(np.sqrt(sum(c.norm_l2() ** 2 for c in self.components)))

    def divergence_defect(self) -> float:
        """max_k |k . u_hat(k)| / max_k |u_hat(k)| over the grid."""
        kd = self.grid.k_deriv
        acc = sum(kd[a] * self.components[a].spec for a in range(self.grid.dim))
        scale = max(np.max(np.abs(c.spec)) for c in self.components)
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(acc)) / scale)

    def __add__(self, other):
        return VectorField([a + b for a, b in zip(self.components, other.components)],
                           self.is_divergence_free and other.is_divergence_free)

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self.components, other.components)],
                           self.is_divergence_free and other.is_divergence_free)

    def __mul__(self, c: float):
        return VectorField([comp * c for comp in self.components],
                           self.is_divergence_free)

    __rmul__ = __mul__
