"""Spectral differential operators, Helmholtz projectors, heat semigroup.

All operators act mode by mode.  First derivatives multiply by i*k with the
Nyquist mode zeroed (the standard convention keeping derivatives of real
fields real); the Laplacian and the heat multiplier use the full |k|^2.
The inverse Laplacian is defined on mean-zero data only; the k = 0 component
of any projected gradient is set to zero.
"""

from __future__ import annotations

import numpy as np

from .grid import PeriodicGrid, ScalarField, VectorField


# -- raw spectral kernels ------------------------------------------------------

def grad_spec(grid: PeriodicGrid, spec: np.ndarray):
    kd = grid.k_deriv
    return tuple(1j * kd[a] * spec for a in range(grid.dim))


def div_spec(grid: PeriodicGrid, specs) -> np.ndarray:
    kd = grid.k_deriv
    out = 1j * kd[0] * specs[0]
    for a in range(1, grid.dim):
        out = out + 1j * kd[a] * specs[a]
    return out


def laplacian_spec(grid: PeriodicGrid, spec: np.ndarray) -> np.ndarray:
    return -grid.k_sq * spec


def leray_project_spec(grid: PeriodicGrid, specs):
    """Divergence-free part: u_hat - k (k.u_hat)/|k|^2, mean mode kept."""
    kd = grid.k_deriv
    ksq = grid.k_sq
    dot = sum(kd[a] * specs[a] for a in range(grid.dim))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(ksq > 0, dot / np.where(ksq > 0, ksq, 1.0), 0.0)
    return tuple(specs[a] - kd[a] * scale for a in range(grid.dim))


def gradient_part_spec(grid: PeriodicGrid, specs):
    """Curl-free part: k (k.u_hat)/|k|^2, zero at k = 0."""
    kd = grid.k_deriv
    ksq = grid.k_sq
    dot = sum(kd[a] * specs[a] for a in range(grid.dim))
    scale = np.where(ksq > 0, dot / np.where(ksq > 0, ksq, 1.0), 0.0)
    return tuple(kd[a] * scale for a in range(grid.dim))


def heat_multiplier(grid: PeriodicGrid, mu: float, dt: float) -> np.ndarray:
    return np.exp(-mu * dt * grid.k_sq)


def dealias_spec(grid: PeriodicGrid, spec: np.ndarray) -> np.ndarray:
    return spec * grid.dealias_mask


# -- field-level operations ----------------------------------------------------

def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    return VectorField.from_spectral(g, grad_spec(g, f.spec), check=False)


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    return ScalarField.from_spectral(g, div_spec(g, v.spec), check=False)


def laplacian(f):
    if isinstance(f, VectorField):
        return VectorField.from_spectral(
            f.grid, [laplacian_spec(f.grid, s) for s in f.spec], check=False)
    return ScalarField.from_spectral(f.grid, laplacian_spec(f.grid, f.spec), check=False)


def hessian_specs(grid: PeriodicGrid, spec: np.ndarray):
    """All second derivatives d_a d_b, returned as a dim x dim nested tuple."""
    kd = grid.k_deriv
    return tuple(tuple(-kd[a] * kd[b] * spec for b in range(grid.dim))
                 for a in range(grid.dim))


def helmholtz_decompose(v: VectorField):
    """Split v into (Pv, Qv): divergence-free plus curl-free gradient part."""
    g = v.grid
    p = leray_project_spec(g, v.spec)
    q = gradient_part_spec(g, v.spec)
    pv = VectorField.from_spectral(g, p, check=False)
    pv.is_divergence_free = True
    qv = VectorField.from_spectral(g, q, check=False)
    return pv, qv


def leray_project(v: VectorField) -> VectorField:
    g = v.grid
    out = VectorField.from_spectral(g, leray_project_spec(g, v.spec), check=False)
    out.is_divergence_free = True
    return out


def heat_semigroup_step(f, mu: float, dt: float):
    """Apply the exact diffusion multiplier e^{-mu |k|^2 dt}."""
    if mu <= 0:
        raise ValueError("viscosity must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if isinstance(f, VectorField):
        m = heat_multiplier(f.grid, mu, dt)
        out = VectorField.from_spectral(f.grid, [m * s for s in f.spec], check=False)
        out.is_divergence_free = f.is_divergence_free
        return out
    m = heat_multiplier(f.grid, mu, dt)
    return ScalarField.from_spectral(f.grid, m * f.spec, check=False)


def dealias(f):
    if isinstance(f, VectorField):
        out = VectorField.from_spectral(
            f.grid, [dealias_spec(f.grid, s) for s in f.spec], check=False)
        out.is_divergence_free = f.is_divergence_free
        return out
    return ScalarField.from_spectral(f.grid, dealias_spec(f.grid, f.spec), check=False)


def inverse_laplacian_spec(grid: PeriodicGrid, spec: np.ndarray) -> np.ndarray:
    """(-Delta)^{-1} on the mean-zero part; the k = 0 mode maps to zero."""
    ksq = grid.k_sq
    out = np.where(ksq > 0, spec / np.where(ksq > 0, ksq, 1.0), 0.0)
    return out.astype(np.complex128)


def l2_inner(u, v) -> float:
    """L_2 inner product under the normalized measure, via Parseval."""
    if isinstance(u, VectorField):
        return float(sum(np.sum(a.spec * np.conj(b.spec)).real
                         for a, b in zip(u.components, v.components)))
    return float(np.sum(u.spec * np.conj(v.spec)).real)
