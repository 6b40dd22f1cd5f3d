"""Forced evolutionary Stokes flow, solved mode-exactly, and the
time-horizon-uniform regularity ratios.

Per mode the solution is the Duhamel formula
    u_hat(t) = e^{-mu |k|^2 t} u0_hat
             + int_0^t e^{-mu |k|^2 (t - s)} (P f)_hat(s) ds,
with the forcing reconstructed linearly in time on every subinterval, so
the integral is evaluated in closed form (exact for piecewise-linear
forcing, trapezoidal otherwise).  The pressure gradient is the gradient
part of the forcing, grad P = Q f, and u_t = mu Lap u + P f, so no time
differencing enters any reported quantity.

The headline check: with
    lhs = mu^{1-1/q} sup_t ||u(t)||_{B^{2-2/q}_{p,r}}
          + ||u_t||_{L_{q,r} L_p} + mu ||hess u||_{L_{q,r} L_p}
          + ||grad P||_{L_{q,r} L_p}
    rhs = mu^{1-1/q} ||u0||_{B^{2-2/q}_{p,r}} + ||f||_{L_{q,r} L_p}
the ratio lhs/rhs must stay bounded uniformly in the horizon T; the report
tabulates it over T and mu sweeps together with the two secondary ratios
(the gradient estimate and the lower-index estimate, whose Lebesgue
indices satisfy exact rational relations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import BesovNormSpec, besov_norm_report
from .grid import PeriodicGrid, VectorField, lp_norm, to_physical
from .lorentz import TimeTrace, lorentz_norm
from .operators import (grad_spec, gradient_part_spec, hessian_specs,
                        leray_project_spec)


class IndexRelationError(ValueError):
    """A Lebesgue-index relation required by the estimate is violated."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10 ** 6)


def eq82_indices(dim: int, p, q, s_tilde=None):
    """The (s~, m~) pair of the gradient estimate:
    d/(2 m~) + 1/s~ = d/(2p) + 1/q - 1/2, with s~ > q, 1/q - 1/s~ <= 1/2,
    d/(2p) + 1/q - 1/s~ > 1/2."""
    p, q = _frac(p), _frac(q)
    s = _frac(s_tilde) if s_tilde is not None else 2 * q
    if s <= q:
        raise IndexRelationError(f"s~ = {s} must exceed q = {q}")
    if 1 / q - 1 / s > Fraction(1, 2):
        raise IndexRelationError("1/q - 1/s~ must not exceed 1/2")
    if Fraction(dim, 2) / p + 1 / q - 1 / s <= Fraction(1, 2):
        raise IndexRelationError("d/(2p) + 1/q - 1/s~ must exceed 1/2")
    inv_m = (Fraction(dim, 2) / p + 1 / q - Fraction(1, 2) - 1 / s) * 2 / dim
    if inv_m <= 0:
        raise IndexRelationError("derived m~ must be finite and positive")
    m = 1 / inv_m
    if m < p:
        raise IndexRelationError(f"derived m~ = {m} must be at least p = {p}")
    return s, m


def eq83_indices(dim: int, p, q, s=None):
    """The (s, m) pair of the lower-index estimate:
    d/(2m) + 1/s = d/(2p) + 1/q - 1, valid when 2/q + d/p > 2."""
    p, q = _frac(p), _frac(q)
    budget = Fraction(dim, 2) / p + 1 / q - 1
    if budget <= 0:
        raise IndexRelationError(
            f"2/q + d/p > 2 required (got d/(2p) + 1/q - 1 = {budget})")
    inv_s = _frac(1) / _frac(s) if s is not None else budget / 2
    if not (0 < inv_s < min(1 / q, budget)):
        raise IndexRelationError(
            "s must satisfy q < s < infinity and leave a positive share "
            "of d/(2p) + 1/q - 1 for m")
    inv_m = (budget - inv_s) * 2 / dim
    m = 1 / inv_m
    if m <= p:
        raise IndexRelationError(f"derived m = {m} must exceed p = {p}")
    return 1 / inv_s, m


@dataclass(frozen=True)
class MaxRegConfig:
    """Lebesgue/Lorentz indices and sweep parameters for the ratio report."""

    dim: int
    n: int
    p: Fraction
    q: Fraction
    r: float
    mu_values: tuple = (1.0,)
    horizons: tuple = (1.0,)
    n_samples: int = 1024
    besov_stride: int = 8
    schedule_first_frac: float = 1e-8
    schedule_geo_fraction: float = 0.75
    s_tilde: Optional[Fraction] = None
    m_tilde: Optional[Fraction] = None
    s_low: Optional[Fraction] = None
    m_low: Optional[Fraction] = None

    def __post_init__(self):
        p, q = _frac(self.p), _frac(self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if not (1 < p) or not (1 < q):
            raise IndexRelationError("need 1 < p, q < infinity")
        st, mt = eq82_indices(self.dim, p, q, self.s_tilde)
        object.__setattr__(self, "s_tilde", st)
        object.__setattr__(self, "m_tilde", mt)
        try:
            sl, ml = eq83_indices(self.dim, p, q, self.s_low)
        except IndexRelationError:
            sl, ml = None, None
        object.__setattr__(self, "s_low", sl)
        object.__setattr__(self, "m_low", ml)

    @property
    def besov_index(self) -> float:
        return float(2 - 2 / self.q)


def sample_schedule(T: float, n_samples: int, first_frac: float = 1e-8,
                    geo_fraction: float = 0.75) -> np.ndarray:
    """Node times 0 = t_0 < ... < t_N = T, geometric near zero then uniform.

    The geometric head spans [first_frac * T, T/4] with uniform relative
    spacing, so every time scale down to first_frac * T is resolved; the
    schedule is a pure scaling in T, which keeps viscosity-rescaled runs
    sample-for-sample comparable.
    """
    geometric = int(n_samples * geo_fraction)
    t_first = first_frac * T
    switch = T / 4.0
    geo = t_first * (switch / t_first) ** (np.arange(geometric) / geometric)
    uni = np.linspace(switch, T, n_samples - geometric + 1)
    nodes = np.concatenate([[0.0], geo, uni])
    return np.unique(nodes)


def _phi1(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x})/x, stable near zero."""
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs ** 2 / 6.0 - xs ** 3 / 24.0
    xl = x[~small]
    out[~small] = -np.expm1(-xl) / xl
    return out


def _phi2(x: np.ndarray) -> np.ndarray:
    """(1 - phi1(x))/x, stable near zero."""
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    out[small] = 0.5 - xs / 6.0 + xs ** 2 / 24.0 - xs ** 3 / 120.0
    xl = x[~small]
    out[~small] = (1.0 - _phi1(xl)) / xl
    return out


class Forcing:
    """Base class: spectral forcing samples; zero by default."""

    def eval_spec(self, grid: PeriodicGrid, t: float):
        return None


class SeparableForcing(Forcing):
    """f(t, x) = amplitude(t) * g(x) with a fixed spectral profile."""

    def __init__(self, g_spec, amplitude=lambda t: 1.0):
        self.g_spec = tuple(g_spec)
        self.amplitude = amplitude

    def eval_spec(self, grid, t):
        a = self.amplitude(t)
        return tuple(a * s for s in self.g_spec)


class StokesSample:
    """Lazy field views at one sample time of a Stokes run."""

    def __init__(self, grid, mu, t, u_spec, f_spec):
        self.grid = grid
        self.mu = mu
        self.t = t
        self.u_spec = u_spec
        self.f_spec = f_spec
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def mag_u(self):
        return self._get("u", lambda: np.sqrt(sum(
            to_physical(self.grid, s) ** 2 for s in self.u_spec)))

    def mag_ut(self):
        def build():
            g = self.grid
            pf = (leray_project_spec(g, self.f_spec)
                  if self.f_spec is not None else None)
            acc = np.zeros(g.shape)
            for a in range(g.dim):
                ut = -self.mu * g.k_sq * self.u_spec[a]
                if pf is not None:
                    ut = ut + pf[a]
                acc += to_physical(g, ut) ** 2
            return np.sqrt(acc)
        return self._get("ut", build)

    def mag_hess(self):
        def build():
            g = self.grid
            acc = np.zeros(g.shape)
            for b in range(g.dim):
                for row in hessian_specs(g, self.u_spec[b]):
                    for s in row:
                        acc += to_physical(g, s) ** 2
            return np.sqrt(acc)
        return self._get("hess", build)

    def mag_grad_u(self):
        def build():
            g = self.grid
            acc = np.zeros(g.shape)
            for b in range(g.dim):
                for s in grad_spec(g, self.u_spec[b]):
                    acc += to_physical(g, s) ** 2
            return np.sqrt(acc)
        return self._get("grad_u", build)

    def mag_gradP(self):
        def build():
            g = self.grid
            if self.f_spec is None:
                return np.zeros(g.shape)
            q = gradient_part_spec(g, self.f_spec)
            return np.sqrt(sum(to_physical(g, s) ** 2 for s in q))
        return self._get("gradP", build)

    def mag_f(self):
        if self.f_spec is None:
            return np.zeros(self.grid.shape)
        return np.sqrt(sum(to_physical(self.grid, s) ** 2 for s in self.f_spec))

    def velocity_field(self) -> VectorField:
        v = VectorField.from_spectral(self.grid, self.u_spec, check=False)
        v.is_divergence_free = True
        return v


def solve_stokes(grid: PeriodicGrid, u0: VectorField, forcing: Forcing,
                 mu: float, nodes: np.ndarray, sample_at: str = "mid",
                 yield_final: bool = False):
    """Generator of StokesSample at interval sample points.

    nodes: increasing times starting at 0; samples are taken at interval
    midpoints ("mid") or left endpoints ("left").  The recursion over nodes
    uses the closed-form linear-in-time Duhamel update, so each sample is
    exact for piecewise-linear forcing.  With yield_final the state at the
    last node is emitted as a closing sample.
    """
    u = tuple(leray_project_spec(grid, u0.spec))
    ksq = grid.k_sq
    f_prev = forcing.eval_spec(grid, nodes[0])
    pf_prev = (tuple(leray_project_spec(grid, f_prev))
               if f_prev is not None else None)

    def advance(u_spec, pf0, pf1, tau, delta):
        x = mu * ksq * tau
        decay = np.exp(-x)
        a = tau * _phi1(x)
        out = []
        for c in range(grid.dim):
            val = decay * u_spec[c]
            if pf0 is not None:
                slope = (pf1[c] - pf0[c]) / delta if pf1 is not None else 0.0
                b = tau * tau * _phi2(x)
                val = val + a * pf0[c] + b * slope
            out.append(val)
        return tuple(out)

    for t0, t1 in zip(nodes[:-1], nodes[1:]):
        delta = t1 - t0
        f_next = forcing.eval_spec(grid, t1)
        pf_next = (tuple(leray_project_spec(grid, f_next))
                   if f_next is not None else None)
        if sample_at == "mid":
            ts = 0.5 * (t0 + t1)
            u_s = advance(u, pf_prev, pf_next, 0.5 * delta, delta)
            f_s = forcing.eval_spec(grid, ts)
        else:
            ts, u_s, f_s = t0, u, f_prev
        yield StokesSample(grid, mu, ts, u_s, f_s)
        u = advance(u, pf_prev, pf_next, delta, delta)
        f_prev, pf_prev = f_next, pf_next
    if yield_final:
        yield StokesSample(grid, mu, float(nodes[-1]), u, f_prev)


def stokes_final_state(grid, u0, forcing, mu, nodes):
    """The spectral velocity at the final node (for trace/decay tests)."""
    last = None
    for last in solve_stokes(grid, u0, forcing, mu, nodes,
                             sample_at="left", yield_final=True):
        pass
    return last.u_spec


def _mixed_norm_from_values(nodes, values, q, r) -> float:
    trace = TimeTrace(nodes[:-1], np.asarray(values), end=float(nodes[-1]))
    return lorentz_norm(trace, float(q), r)


def maxreg_cell(cfg: MaxRegConfig, grid: PeriodicGrid, u0: VectorField,
                forcing: Forcing, mu: float, T: float) -> dict:
    """One (mu, T) evaluation of the regularity ratios."""
    nodes = sample_schedule(T, cfg.n_samples, first_frac=cfg.schedule_first_frac,
                            geo_fraction=cfg.schedule_geo_fraction)
    p = float(cfg.p)
    q = float(cfg.q)
    r = cfg.r
    bspec = BesovNormSpec(cfg.besov_index, p, r)
    b0, _ = besov_norm_report(u0, bspec)

    ut_vals, hess_vals, gradP_vals, f_vals = [], [], [], []
    u_vals_low, grad_vals = [], []
    sup_besov = b0
    m_t = float(cfg.m_tilde)
    m_l = float(cfg.m_low) if cfg.m_low is not None else None
    for i, s in enumerate(solve_stokes(grid, u0, forcing, mu, nodes)):
        ut_vals.append(lp_norm(s.mag_ut(), p))
        hess_vals.append(lp_norm(s.mag_hess(), p))
        gradP_vals.append(lp_norm(s.mag_gradP(), p))
        f_vals.append(lp_norm(s.mag_f(), p))
        grad_vals.append(lp_norm(s.mag_grad_u(), m_t))
        if m_l is not None:
            u_vals_low.append(lp_norm(s.mag_u(), m_l))
        if i % cfg.besov_stride == 0:
            val, _ = besov_norm_report(s.velocity_field(), bspec)
            sup_besov = max(sup_besov, val)

    pre = mu ** (1.0 - 1.0 / q)
    mixed = lambda vals, qq, rr: _mixed_norm_from_values(nodes, vals, qq, rr)
    lhs_core = (mixed(ut_vals, q, r) + mu * mixed(hess_vals, q, r)
                + mixed(gradP_vals, q, r))
    lhs = pre * sup_besov + lhs_core
    rhs = pre * b0 + mixed(f_vals, q, r)
    cell = {
        "mu": mu, "T": T,
        "lhs": lhs, "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else math.nan,
        "degenerate": rhs == 0.0,
        "sup_besov": sup_besov, "besov_u0": b0,
    }
    rhs_grad = pre * sup_besov + mixed(ut_vals, q, r) + mu * mixed(hess_vals, q, r)
    s_t = float(cfg.s_tilde)
    lhs82 = mu ** (1.0 + 1.0 / s_t - 1.0 / q) * mixed(grad_vals, s_t, r)
    cell["ratio_grad"] = lhs82 / rhs_grad if rhs_grad > 0 else math.nan
    if m_l is not None:
        s_l = float(cfg.s_low)
        lhs83 = mu ** (1.0 + 1.0 / s_l - 1.0 / q) * mixed(u_vals_low, s_l, r)
        cell["ratio_low"] = lhs83 / rhs_grad if rhs_grad > 0 else math.nan
    else:
        cell["ratio_low"] = None
    return cell


def maxreg_report(cfg: MaxRegConfig, u0: VectorField, forcing: Forcing = None):
    """Sweep the (T, mu) grid; returns the per-cell table plus drift summary."""
    grid = PeriodicGrid.of(cfg.dim, cfg.n)
    forcing = forcing if forcing is not None else Forcing()
    cells = []
    for mu in cfg.mu_values:
        for T in cfg.horizons:
            cells.append(maxreg_cell(cfg, grid, u0, forcing, mu, T))
    ratios = [c["ratio"] for c in cells if not c["degenerate"]]
    report = {
        "indices": {"p": str(cfg.p), "q": str(cfg.q), "r": cfg.r,
                    "besov_index": cfg.besov_index,
                    "s_tilde": str(cfg.s_tilde), "m_tilde": str(cfg.m_tilde),
                    "s_low": str(cfg.s_low), "m_low": str(cfg.m_low)},
        "cells": cells,
        "max_ratio": max(ratios) if ratios else math.nan,
        "min_ratio": min(ratios) if ratios else math.nan,
    }
    if ratios:
        report["drift"] = (report["max_ratio"] - report["min_ratio"]) \
            / report["min_ratio"]
    return report
