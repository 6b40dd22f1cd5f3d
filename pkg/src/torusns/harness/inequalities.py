"""Fitted-constant ratio suites for the norm inequalities.

Unquantified "up to a constant" inequalities are verified empirically: the
maximum ratio of the two sides over a seeded random suite is recorded and
must stay finite and drift little under grid refinement.  The two
constant-free statements (the convexity of Besov norms in the regularity
index, and the Lorentz power rule) are asserted with explicit tolerances.
"""

from __future__ import annotations

import math

import numpy as np

from ..dyadic import (BesovNormSpec, besov_norm_report, bony_decompose,
                      log_product_h_minus_one, lp_block, partition_for)
from ..grid import PeriodicGrid, ScalarField, lp_norm, resample_spectral, to_spectral
from ..lorentz import TimeTrace, lorentz_norm
from ..operators import grad_spec, hessian_specs
from ..grid import to_physical


def random_field(grid: PeriodicGrid, rng, decay=1.5) -> ScalarField:
    white = rng.standard_normal(grid.shape)
    spec = to_spectral(grid, white)
    shape = np.where(grid.k_abs > 0, np.maximum(grid.k_abs, 1.0) ** -decay, 0.0)
    return ScalarField.from_spectral(grid, spec * shape * grid.dealias_mask,
                                     check=False)


def _verdict(name, value, threshold, passed=None):
    if passed is None:
        passed = bool(value <= threshold)
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "pass": bool(passed)}


def interpolation_max_ratio(grid, rng, count, cases=None) -> float:
    """Constant-free convexity: the norm at the interpolated regularity
    index never exceeds the geometric mean of the endpoint norms."""
    if cases is None:
        cases = [(-0.5, 1.5, 0.3, 2.0, 1.0), (0.0, 2.0, 0.5, 4.0 / 3.0, 1.0),
                 (-1.0, 1.0, 0.7, 2.0, 2.0), (0.5, 2.5, 0.25, 3.0, np.inf)]
    worst = 0.0
    for _ in range(count):
        u = random_field(grid, rng, decay=rng.uniform(0.8, 2.5))
        s1, s2, theta, p, r = cases[rng.integers(len(cases))]
        mid = theta * s1 + (1 - theta) * s2
        num, _ = besov_norm_report(u, BesovNormSpec(mid, p, r))
        a, _ = besov_norm_report(u, BesovNormSpec(s1, p, r))
        b, _ = besov_norm_report(u, BesovNormSpec(s2, p, r))
        den = a ** theta * b ** (1 - theta)
        if den > 0:
            worst = max(worst, num / den)
    return worst


def bernstein_max_ratio(grid, rng, count) -> float:
    """||grad block_j u||_p <= C 2^j ||block_j u||_p over random fields."""
    part = partition_for(grid)
    worst = 0.0
    for _ in range(count):
        u = random_field(grid, rng, decay=rng.uniform(0.5, 2.0))
        j = int(rng.integers(0, part.j_max + 1))
        p = [2.0, 4.0 / 3.0, np.inf][rng.integers(3)]
        blk = lp_block(u, j)
        base = blk.norm_lp(p)
        if base <= 1e-14:
            continue
        mag = np.sqrt(sum(to_physical(grid, s) ** 2
                          for s in grad_spec(grid, blk.spec)))
        worst = max(worst, lp_norm(mag, p) / (2.0 ** j * base))
    return worst


def embedding_max_ratio(fields, p=4.0 / 3.0, q=4.0) -> float:
    """||u||_{L_q} <= C ||u||_{B^{d/p - d/q}_{p,1}} over the given fields."""
    worst = 0.0
    for u in fields:
        d = u.grid.dim
        spec = BesovNormSpec(d / p - d / q, p, 1.0)
        den, _ = besov_norm_report(u, spec)
        if den > 0:
            worst = max(worst, u.norm_lp(q) / den)
    return worst


def gn_max_ratio(fields, p=2.0, q=4.0, r=None) -> float:
    """||grad u||_{L_r} <= C ||hess u||^theta_{L_p} ||u||^{1-theta} with the
    Besov endpoint at index 2 - 2/q and theta fixed by the index balance
    1/r + 1/d - 2 theta/(d q) = 1/p."""
    worst = 0.0
    for u in fields:
        grid = u.grid
        d = grid.dim
        if r is None:
            r = 8.0 if d == 2 else 4.0  # makes theta = 1/2 at (p, q) = (2, 4)
        theta = (1.0 / r + 1.0 / d - 1.0 / p) * d * q / 2.0
        if not 0 < theta < 1:
            raise ValueError("index combination leaves theta outside (0,1)")
        spec = BesovNormSpec(2.0 - 2.0 / q, p, np.inf)
        gmag = np.sqrt(sum(to_physical(grid, s) ** 2
                           for s in grad_spec(grid, u.spec)))
        num = lp_norm(gmag, r)
        hmag = np.zeros(grid.shape)
        for row in hessian_specs(grid, u.spec):
            for s in row:
                hmag += to_physical(grid, s) ** 2
        hess = lp_norm(np.sqrt(hmag), p)
        bes, _ = besov_norm_report(u, spec)
        den = hess ** theta * bes ** (1 - theta)
        if den > 0:
            worst = max(worst, num / den)
    return worst


def bony_max_residual(grid, rng, count) -> float:
    worst = 0.0
    for _ in range(count):
        u = random_field(grid, rng, decay=rng.uniform(0.8, 2.0))
        v = random_field(grid, rng, decay=rng.uniform(0.8, 2.0))
        tuv, tvu, rem = bony_decompose(u, v)
        prod = u.values * v.values
        total = tuv.values + tvu.values + rem.values
        scale = np.max(np.abs(prod))
        if scale > 0:
            worst = max(worst, np.max(np.abs(total - prod)) / scale)
    return worst


def log_product_max_ratio(pairs) -> float:
    """Ratio suite for the 2D logarithmic product estimate."""
    worst = 0.0
    for u, v in pairs:
        lhs, rhs = log_product_h_minus_one(u, v)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    return worst


def _band_limit(field: ScalarField, k_cap: int) -> ScalarField:
    grid = field.grid
    keep = np.ones(grid.shape, dtype=bool)
    for ka in grid.k_vectors:
        keep &= np.abs(ka) <= k_cap
    return ScalarField.from_spectral(grid, field.spec * keep, check=False)


def power_rule_max_residual(rng, count) -> float:
    worst = 0.0
    for _ in range(count):
        m = int(rng.integers(2, 9))
        lengths = rng.uniform(0.05, 2.0, size=m)
        values = rng.uniform(0.0, 4.0, size=m)
        times = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
        g = TimeTrace(times, values, end=float(np.sum(lengths)))
        for p, r, alpha in ((1.5, 2.0, 2.0), (2.0, np.inf, 0.75), (1.0, 1.0, 3.0)):
            powered = TimeTrace(g.times, g.values ** alpha, end=g.end)
            lhs = lorentz_norm(powered, p, r)
            ra = np.inf if r == np.inf else r * alpha
            rhs = lorentz_norm(g, p * alpha, ra) ** alpha
            if rhs > 0:
                worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def lorentz_holder_max_ratio(rng, count) -> float:
    worst = 0.0
    for _ in range(count):
        m = int(rng.integers(2, 9))
        lengths = rng.uniform(0.05, 2.0, size=m)
        times = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
        end = float(np.sum(lengths))
        fv = rng.uniform(0.0, 4.0, size=m)
        gv = rng.uniform(0.0, 4.0, size=m)
        f = TimeTrace(times, fv, end=end)
        g = TimeTrace(times, gv, end=end)
        fg = TimeTrace(times, fv * gv, end=end)
        for (p, r), (p1, r1), (p2, r2) in (
                ((1.0, 1.0), (2.0, 2.0), (2.0, 2.0)),
                ((1.5, 1.0), (3.0, 2.0), (3.0, 2.0)),
                ((2.0, np.inf), (4.0, np.inf), (4.0, np.inf))):
            den = lorentz_norm(f, p1, r1) * lorentz_norm(g, p2, r2)
            if den > 0:
                worst = max(worst, lorentz_norm(fg, p, r) / den)
    return worst


def inequality_suite(seed: int = 0, n: int = 64, count: int = 200,
                     dim: int = 2, refine: bool = True) -> dict:
    """All ratio suites at grid n, with refinement drift at 2n.

    Returns a verdicts table: explicit-tolerance checks assert their stated
    bounds; fitted-constant checks assert finiteness and (when refine is
    set) a <= 10% drift of the fitted constant under n -> 2n.
    """
    grid = PeriodicGrid.of(dim, n)
    rng = np.random.default_rng(seed)
    results = []

    interp = interpolation_max_ratio(grid, rng, count)
    results.append(_verdict("besov_interpolation_exact", interp, 1.0 + 1e-9))

    bony = bony_max_residual(grid, rng, max(20, count // 5))
    results.append(_verdict("bony_reconstruction_residual", bony, 1e-11))

    power = power_rule_max_residual(np.random.default_rng(seed + 1), count)
    results.append(_verdict("lorentz_power_rule_residual", power, 1e-10))

    bern = bernstein_max_ratio(grid, rng, count)
    results.append(_verdict("bernstein_block_gradient", bern, 8.0 / 3.0 + 0.35))

    holder = lorentz_holder_max_ratio(np.random.default_rng(seed + 2), count)
    results.append(_verdict("lorentz_holder_fitted", holder, 4.0))

    # fitted-constant suites, evaluated on the same band-limited fields at
    # resolution n and again after exact spectral resampling to 2n
    suite_count = max(30, count // 4)
    fields = [random_field(grid, rng, decay=rng.uniform(0.9, 2.5))
              for _ in range(suite_count)]
    pairs = []
    if dim == 2:
        k_cap = min(10, grid.dealias_limit // 2)
        for _ in range(suite_count):
            u = _band_limit(random_field(grid, rng, decay=rng.uniform(0.8, 2.0)),
                            k_cap)
            v = _band_limit(random_field(grid, rng, decay=rng.uniform(0.3, 1.5)),
                            k_cap)
            pairs.append((u, v))

    fitted = {
        "besov_embedding": embedding_max_ratio(fields),
        "gagliardo_nirenberg": gn_max_ratio(fields),
    }
    if dim == 2:
        fitted["log_product"] = log_product_max_ratio(pairs)

    drift = {}
    if refine:
        fine = PeriodicGrid.of(dim, 2 * n)
        fields_f = [resample_spectral(u, fine) for u in fields]
        fitted_fine = {
            "besov_embedding": embedding_max_ratio(fields_f),
            "gagliardo_nirenberg": gn_max_ratio(fields_f),
        }
        if dim == 2:
            pairs_f = [(resample_spectral(u, fine), resample_spectral(v, fine))
                       for u, v in pairs]
            fitted_fine["log_product"] = log_product_max_ratio(pairs_f)
        for key, coarse_val in fitted.items():
            fine_val = fitted_fine[key]
            drift[key] = abs(fine_val - coarse_val) / coarse_val
            results.append(_verdict(f"{key}_fitted_finite", coarse_val,
                                    math.inf, passed=math.isfinite(coarse_val)))
            results.append(_verdict(f"{key}_refinement_drift", drift[key], 0.10))
    else:
        for key, coarse_val in fitted.items():
            results.append(_verdict(f"{key}_fitted_finite", coarse_val,
                                    math.inf, passed=math.isfinite(coarse_val)))

    return {
        "seed": seed, "n": n, "count": count, "dim": dim,
        "verdicts": results,
        "fitted_constants": fitted,
        "refinement_drift": drift,
        "all_pass": all(v["pass"] for v in results),
    }
