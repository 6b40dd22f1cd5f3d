"""Initial data generators: analytic profiles, rough critical-regularity
velocities, and density blobs.

The rough generator shapes white noise like |k|^(-a) with seeded random
phases, removes the mean, band-limits to the dealiased range, and projects
onto divergence-free fields.  The default decay exponent makes the weighted
block norms 2^{j s} ||block_j u||_{L_p} roughly flat in j for the
scaling-critical s = -1 + d/p, so the data sits marginally in the critical
space and small-time smoothing rates are nontrivial.
"""

from __future__ import annotations

import numpy as np

from .dyadic import BesovNormSpec, besov_norm_report
from .grid import PeriodicGrid, ScalarField, VectorField, to_spectral
from .operators import leray_project_spec


def taylor_green(grid: PeriodicGrid, amplitude: float = 1.0) -> VectorField:
    """The classical cellular vortex; an exact decaying solution at constant
    density (amplitude times e^{-2 mu t} in 2D)."""
    x = grid.coordinates()
    if grid.dim == 2:
        u1 = amplitude * np.sin(x[0]) * np.cos(x[1]) + np.zeros(grid.shape)
        u2 = -amplitude * np.cos(x[0]) * np.sin(x[1]) + np.zeros(grid.shape)
        comps = (u1, u2)
    else:
        u1 = amplitude * np.sin(x[0]) * np.cos(x[1]) * np.cos(x[2]) + np.zeros(grid.shape)
        u2 = -amplitude * np.cos(x[0]) * np.sin(x[1]) * np.cos(x[2]) + np.zeros(grid.shape)
        u3 = np.zeros(grid.shape)
        comps = (u1, u2, u3)
    out = VectorField.from_physical(grid, comps)
    out.is_divergence_free = True
    return out


def taylor_green_amplitude(t: float, mu: float) -> float:
    """Exact 2D amplitude factor at time t for unit initial amplitude."""
    return float(np.exp(-2.0 * mu * t))


def marginal_decay_exponent(dim: int, p: float) -> float:
    """Spectral decay making block norms flat for s = -1 + d/p (random phases)."""
    return dim / 2.0 + dim / p - 1.0


def rough_velocity(grid: PeriodicGrid, amplitude: float, seed: int,
                   decay: float | None = None, p: float | None = None,
                   k_cap: int | None = None,
                   normalize: str = "besov") -> VectorField:
    """Seeded random divergence-free field with |k|^(-decay) spectrum.

    normalize: "besov" scales so the critical Besov norm (index p, r = 1)
    equals amplitude; "l2" scales the L_2 norm instead.
    """
    if p is None:
        p = 2.0
    if decay is None:
        decay = marginal_decay_exponent(grid.dim, p)
    rng = np.random.default_rng(seed)
    specs = []
    kabs = grid.k_abs
    cap = grid.dealias_limit if k_cap is None else k_cap
    keep = np.ones(grid.shape, dtype=bool)
    for ka in grid.k_vectors:
        keep &= np.abs(ka) <= cap
    with np.errstate(divide="ignore"):
        shape = np.where(kabs > 0, kabs ** (-decay), 0.0)
    shape *= keep
    for _ in range(grid.dim):
        white = rng.standard_normal(grid.shape)
        specs.append(to_spectral(grid, white) * shape)
    specs = leray_project_spec(grid, specs)
    u = VectorField.from_spectral(grid, specs, check=False)
    u.is_divergence_free = True
    if normalize == "besov":
        ref, _ = besov_norm_report(u, BesovNormSpec.critical(grid.dim, p))
    elif normalize == "l2":
        ref = u.norm_l2()
    elif normalize == "none":
        ref = 1.0
    else:
        raise ValueError(f"unknown normalization {normalize!r}")
    if ref == 0.0:
        return u
    out = u * (amplitude / ref)
    out.is_divergence_free = True
    return out


def density_disk(grid: PeriodicGrid, eps: float, seed: int = 0,
                 radius_fraction: float = 0.22) -> ScalarField:
    """Piecewise-constant blob: 1 + eps inside a seeded disk/ball, 1 outside."""
    if not (0 <= abs(eps) < 1):
        raise ValueError("|eps| must be below 1 so the density stays positive")
    rng = np.random.default_rng(seed)
    center = rng.uniform(0.25, 0.75, size=grid.dim) * 2.0 * np.pi
    radius = radius_fraction * 2.0 * np.pi
    r2 = _periodic_r2(grid, center)
    rho = 1.0 + eps * (r2 <= radius * radius)
    return ScalarField.from_physical(grid, rho)


def density_smooth_blob(grid: PeriodicGrid, eps: float,
                        center=None, radius_fraction: float = 0.22,
                        width_fraction: float = 0.10) -> ScalarField:
    """Smooth radial bump between 1 and 1 + eps (plateau inside)."""
    if center is None:
        center = (np.pi,) * grid.dim
    radius = radius_fraction * 2.0 * np.pi
    width = width_fraction * 2.0 * np.pi
    r = np.sqrt(_periodic_r2(grid, center))
    profile = _smooth_transition((radius + width - r) / width)
    return ScalarField.from_physical(grid, 1.0 + eps * profile)


def _smooth_transition(t: np.ndarray) -> np.ndarray:
    out = np.clip(t, 0.0, 1.0)
    mid = (out > 0) & (out < 1)
    tm = out[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def _periodic_r2(grid: PeriodicGrid, center) -> np.ndarray:
    x = grid.coordinates()
    acc = np.zeros(grid.shape)
    for a in range(grid.dim):
        d = np.abs(x[a] - center[a])
        d = np.minimum(d, 2.0 * np.pi - d)
        acc = acc + d * d
    return acc


def rotation_velocity(grid: PeriodicGrid, omega: float = 1.0,
                      center=None, r_solid: float = 1.6,
                      r_zero: float = 2.8) -> VectorField:
    """Divergence-free swirl: exact solid rotation inside r_solid, zero
    outside r_zero, smooth in between.  Useful as an advection oracle: a blob
    inside the solid core returns to its start after t = 2*pi/omega."""
    if grid.dim != 2:
        raise ValueError("rotation profile is exact only in 2D")
    if center is None:
        center = (np.pi, np.pi)
    x = grid.coordinates()
    dx = x[0] - center[0] + np.zeros(grid.shape)
    dy = x[1] - center[1] + np.zeros(grid.shape)
    r = np.sqrt(dx * dx + dy * dy)
    amp = omega * _smooth_transition((r_zero - r) / (r_zero - r_solid))
    u1 = -amp * dy
    u2 = amp * dx
    out = VectorField.from_physical(grid, (u1, u2))
    out.is_divergence_free = True
    return out
