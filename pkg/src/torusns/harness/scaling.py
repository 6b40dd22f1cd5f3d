"""Parabolic rescaling as a twin-run consistency check.

If (rho, u, P) evolves from (rho0, u0), then so does the rescaled triplet
(rho(l^2 t, l x), l u(l^2 t, l x), l^2 P(l^2 t, l x)) from the data
(rho0(l .), l u0(l .)).  With l = 2 the rescaled data lives on the same
grid via frequency doubling (the density by exact sample decimation), so
both runs are computable and comparable point by point.
"""

from __future__ import annotations

import numpy as np

from ..grid import PeriodicGrid, VectorField, to_physical
from ..solver import StepParams, run_simulation


def double_frequency_spec(grid: PeriodicGrid, spec: np.ndarray,
                          factor: float = 1.0) -> np.ndarray:
    """Spectrum of factor * f(2x) on the same grid (needs band <= n/4)."""
    n = grid.n
    half = n // 4
    out = np.zeros_like(spec)
    ks = list(range(-half + 1, half))
    ix_src = np.ix_(*([[k % n for k in ks]] * grid.dim))
    ix_dst = np.ix_(*([[(2 * k) % n for k in ks]] * grid.dim))
    kept = np.zeros(grid.shape, dtype=bool)
    kept[ix_src] = True
    dropped = np.sum(np.abs(spec[~kept]) ** 2)
    if dropped > 1e-22 * max(np.sum(np.abs(spec) ** 2), 1e-300):
        raise ValueError("data carries frequencies above n/4; the doubled "
                         "field is not representable on this grid")
    out[ix_dst] = factor * spec[ix_src]
    return out


def decimate_samples(values: np.ndarray) -> np.ndarray:
    """Samples of x -> f(2x) on the same grid: index map i -> 2i mod n."""
    n = values.shape[0]
    idx = (2 * np.arange(n)) % n
    out = values
    for axis in range(values.ndim):
        out = np.take(out, idx, axis=axis)
    return out


def _max_rel(a: np.ndarray, b: np.ndarray, scale: float) -> float:
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else 0.0


def verify_scaling_invariance(n: int, rho0: np.ndarray, u0: VectorField,
                              mu: float, t_end: float, dt: float,
                              params: StepParams = None) -> dict:
    """Run the pair of rescaled problems and report max discrepancies."""
    grid = u0.grid
    if params is None:
        params = StepParams(mu=mu)
    rec_a = run_simulation(grid, rho0, u0, mu, t_end=t_end, dt_max=dt,
                           params=params)
    u0_b = VectorField.from_spectral(
        grid, [double_frequency_spec(grid, s, factor=2.0) for s in u0.spec],
        check=False)
    u0_b.is_divergence_free = True
    rho0_b = decimate_samples(np.asarray(rho0, dtype=float))
    rec_b = run_simulation(grid, rho0_b, u0_b, mu, t_end=t_end / 4.0,
                           dt_max=dt / 4.0, params=params)
    if not (rec_a.complete and rec_b.complete):
        raise RuntimeError(f"scaling runs failed: {rec_a.failure or rec_b.failure}")
    cp_a = rec_a.checkpoints[-1]
    cp_b = rec_b.checkpoints[-1]

    u_scale = max(max(np.max(np.abs(to_physical(grid, s))) for s in cp_a.u_spec),
                  1e-300)
    out = {"t": cp_a.t, "t_rescaled": cp_b.t}
    diffs = []
    for a_spec, b_spec in zip(cp_a.u_spec, cp_b.u_spec):
        mapped = 2.0 * decimate_samples(to_physical(grid, a_spec))
        diffs.append(_max_rel(to_physical(grid, b_spec), mapped, 2.0 * u_scale))
    out["u_discrepancy"] = max(diffs)
    rho_scale = max(float(np.max(np.abs(cp_a.rho))), 1e-300)
    out["rho_discrepancy"] = _max_rel(cp_b.rho, decimate_samples(cp_a.rho),
                                      rho_scale)
    p_a = decimate_samples(to_physical(grid, cp_a.P_spec))
    p_b = to_physical(grid, cp_b.P_spec)
    p_scale = max(float(np.max(np.abs(p_a))), u_scale ** 2)
    out["p_discrepancy"] = _max_rel(p_b, 4.0 * p_a, 4.0 * p_scale)
    out["max_discrepancy"] = max(out["u_discrepancy"], out["rho_discrepancy"],
                                 out["p_discrepancy"])
    return out


def richardson_reference(n: int, rho0_builder, u0: VectorField, mu: float,
                         t_end: float, dt: float,
                         params: StepParams = None) -> float:
    """Discretization-error scale for the rescaling comparison.

    The frequency-doubled twin effectively advances the original problem at
    half the spatial resolution (its fields sample the original grid with
    stride two), so the relevant error scale pairs one dt halving with one
    n *halving*: both differences are measured on the coarse grid against
    the base run.  rho0_builder(grid) must reproduce the same initial
    density on any grid, and the velocity band must fit the coarse dealias
    range.
    """
    from ..grid import resample_spectral

    grid = u0.grid
    if params is None:
        params = StepParams(mu=mu)
    rho0 = rho0_builder(grid)
    base = run_simulation(grid, rho0, u0, mu, t_end=t_end, dt_max=dt,
                          params=params)
    half = run_simulation(grid, rho0, u0, mu, t_end=t_end, dt_max=dt / 2.0,
                          params=params)
    coarse_grid = PeriodicGrid.of(grid.dim, grid.n // 2)
    u0_coarse = VectorField(
        [resample_spectral(c, coarse_grid) for c in u0.components])
    coarse = run_simulation(coarse_grid, rho0_builder(coarse_grid), u0_coarse,
                            mu, t_end=t_end, dt_max=dt, params=params)
    if not (base.complete and half.complete and coarse.complete):
        raise RuntimeError("a Richardson reference run failed")
    cp, cph, cpc = (base.checkpoints[-1], half.checkpoints[-1],
                    coarse.checkpoints[-1])
    stride = np.arange(coarse_grid.n) * 2

    def subsample(values):
        out = values
        for axis in range(grid.dim):
            out = np.take(out, stride, axis=axis)
        return out

    u_scale = max(max(np.max(np.abs(to_physical(grid, s))) for s in cp.u_spec),
                  1e-300)
    out = {}
    for name, get, scale in (
            ("u", lambda c, g: [to_physical(g, s) for s in c.u_spec], u_scale),
            ("rho", lambda c, g: [c.rho], max(float(np.max(np.abs(cp.rho))),
                                              1e-300)),
            ("p", lambda c, g: [to_physical(g, c.P_spec)],
             max(float(np.max(np.abs(to_physical(grid, cp.P_spec)))), 1e-300))):
        base_f = get(cp, grid)
        half_f = get(cph, grid)
        coarse_f = get(cpc, coarse_grid)
        diff_dt = max(float(np.max(np.abs(a - b)))
                      for a, b in zip(base_f, half_f))
        diff_n = max(float(np.max(np.abs(c - subsample(a))))
                     for a, c in zip(base_f, coarse_f))
        out[name] = (diff_dt + diff_n) / scale
    out["max"] = max(out["u"], out["rho"], out["p"])
    return out
