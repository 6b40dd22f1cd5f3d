"""Semi-Lagrangian transport for the density.

Backward characteristic feet are obtained by third-order explicit
integration of dX/dtau = -u with the advecting velocity frozen over the
step; the transported field is read off at the feet with periodic cubic
interpolation clipped to the local corner min/max, so the global range of
the density can never expand.  Spectral advection is deliberately avoided:
the density may be discontinuous and Gibbs oscillations would destroy the
L-infinity control that transport guarantees.
"""

from __future__ import annotations

import numpy as np

from .grid import PeriodicGrid


class CFLError(RuntimeError):
    """Characteristic feet moved farther than the per-step displacement budget."""

    def __init__(self, max_displacement, allowed):
        super().__init__(
            f"foot displacement {max_displacement:.3e} exceeds allowed "
            f"{allowed:.3e} (half cell x safety); reduce dt")
        self.max_displacement = max_displacement
        self.allowed = allowed


def _cubic_axis_weights(s: np.ndarray):
    """Lagrange weights at offsets (-1, 0, 1, 2) for fraction s in [0, 1)."""
    w_m1 = -s * (s - 1.0) * (s - 2.0) / 6.0
    w_0 = (s * s - 1.0) * (s - 2.0) / 2.0
    w_1 = -s * (s + 1.0) * (s - 2.0) / 2.0
    w_2 = s * (s * s - 1.0) / 6.0
    return w_m1, w_0, w_1, w_2


def interp_cubic(values: np.ndarray, coords) -> np.ndarray:
    """Periodic tensor-product cubic interpolation.

    coords: tuple of d arrays of continuous grid indices (units of h).
    """
    n = values.shape[0]
    dim = values.ndim
    base = [np.floor(c).astype(np.int64) for c in coords]
    frac = [c - b for c, b in zip(coords, base)]
    axis_w = [_cubic_axis_weights(f) for f in frac]
    out = np.zeros_like(frac[0])
    offsets = (-1, 0, 1, 2)
    if dim == 2:
        flat = values.ravel()
        for oi, wi in zip(offsets, axis_w[0]):
            ii = (base[0] + oi) % n
            for oj, wj in zip(offsets, axis_w[1]):
                jj = (base[1] + oj) % n
                out += wi * wj * flat[ii * n + jj]
    else:
        flat = values.ravel()
        n2 = n * n
        for oi, wi in zip(offsets, axis_w[0]):
            ii = (base[0] + oi) % n
            for oj, wj in zip(offsets, axis_w[1]):
                jj = (base[1] + oj) % n
                wij = wi * wj
                ij = ii * n2 + jj * n
                for ok, wk in zip(offsets, axis_w[2]):
                    kk = (base[2] + ok) % n
                    out += wij * wk * flat[ij + kk]
    return out


def _corner_bounds(values: np.ndarray, coords):
    """Min/max of the 2^d cell corners surrounding each sample point."""
    n = values.shape[0]
    dim = values.ndim
    base = [np.floor(c).astype(np.int64) for c in coords]
    lo = None
    hi = None
    flat = values.ravel()
    corner_offsets = np.stack(np.meshgrid(*([[0, 1]] * dim), indexing="ij"),
                              axis=-1).reshape(-1, dim)
    for off in corner_offsets:
        idx = (base[0] + off[0]) % n
        for a in range(1, dim):
            idx = idx * n + (base[a] + off[a]) % n
        v = flat[idx]
        lo = v if lo is None else np.minimum(lo, v)
        hi = v if hi is None else np.maximum(hi, v)
    return lo, hi


def interp_cubic_clipped(values: np.ndarray, coords) -> np.ndarray:
    """Cubic interpolation clipped to the surrounding corner range."""
    raw = interp_cubic(values, coords)
    lo, hi = _corner_bounds(values, coords)
    return np.clip(raw, lo, hi)


def characteristic_feet(grid: PeriodicGrid, u_phys, dt: float,
                        cfl_safety: float = 0.5):
    """Backward feet of the grid points under the frozen velocity.

    Integrates dX/dtau = -u over one step with Kutta's third-order rule,
    evaluating the frozen field at the stage points by (unclipped) cubic
    interpolation.  Returns continuous index coordinates and the maximum
    per-axis displacement in physical units.
    """
    n = grid.n
    h = grid.h
    dim = grid.dim
    idx = np.indices(grid.shape).astype(np.float64)
    start = [idx[a].ravel() for a in range(dim)]
    u_idx = [u / h for u in u_phys]  # velocity in index units

    def eval_u(pos):
        return [interp_cubic(u_idx[a], pos) for a in range(dim)]

    k1 = [u_idx[a].ravel() for a in range(dim)]
    p2 = [start[a] - 0.5 * dt * k1[a] for a in range(dim)]
    k2 = eval_u(p2)
    p3 = [start[a] + dt * k1[a] - 2.0 * dt * k2[a] for a in range(dim)]
    k3 = eval_u(p3)
    disp = [dt * (k1[a] + 4.0 * k2[a] + k3[a]) / 6.0 for a in range(dim)]
    feet = [start[a] - disp[a] for a in range(dim)]

    max_disp = max(float(np.max(np.abs(d))) for d in disp) * h
    allowed = 0.5 * h * cfl_safety
    if max_disp > allowed:
        raise CFLError(max_disp, allowed)
    return feet, max_disp


def advect_density(rho: np.ndarray, u_phys, dt: float, grid: PeriodicGrid,
                   cfl_safety: float = 0.5) -> np.ndarray:
    """Transport rho along -u for one step (monotone semi-Lagrangian)."""
    if dt == 0.0:
        return rho.copy()
    feet, _ = characteristic_feet(grid, u_phys, dt, cfl_safety=cfl_safety)
    out = interp_cubic_clipped(rho, feet)
    return out.reshape(grid.shape)


def level_set_fraction(rho: np.ndarray, alpha: float, beta: float) -> float:
    """Normalized measure of {alpha <= rho <= beta} by grid counting."""
    return float(np.mean((rho >= alpha) & (rho <= beta)))
