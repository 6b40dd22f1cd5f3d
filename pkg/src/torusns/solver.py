"""Time integration of variable-density incompressible flow near unit density.

The velocity update follows the perturbative form of the momentum equation,

    u_t - mu Lap u + grad P = -(rho - 1) u_t - rho u.grad u,   div u = 0,

solved per step by a Picard fixed point around the constant-coefficient
Stokes step: Crank-Nicolson spectral diffusion, dealiased midpoint
convection, pressure recovered from the gradient part of the right-hand
side.  The fixed point contracts at rate about ||rho - 1||_inf, so it
fails (NonContractionError) exactly when the near-constant-density
hypothesis fails.  The density is transported semi-Lagrangially (see
advection.py), never spectrally, preserving its L-infinity bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .advection import CFLError, advect_density, level_set_fraction
from .grid import PeriodicGrid, ScalarField, VectorField, to_physical, to_spectral
from .operators import (dealias_spec, div_spec, grad_spec, hessian_specs,
                        inverse_laplacian_spec, laplacian_spec,
                        leray_project_spec)


class NonContractionError(RuntimeError):
    """The density left the contraction regime or the Picard loop stalled."""


@dataclass(frozen=True)
class StepParams:
    mu: float = 1.0
    fp_tol: float = 1e-10
    fp_max_iter: int = 50
    eps_max: float = 0.2
    cfl_safety: float = 0.5


@dataclass
class SolverState:
    """Fields at one time level plus what the next step needs."""

    grid: PeriodicGrid
    t: float
    rho: np.ndarray           # physical
    u_spec: tuple             # spectral components, divergence-free
    P_spec: np.ndarray        # spectral, mean-zero (pressure of the last step)
    mu: float
    u_prev_spec: Optional[tuple] = None
    t_prev: Optional[float] = None

    @property
    def a_view(self) -> np.ndarray:
        """The reciprocal-density perturbation 1/rho - 1."""
        return 1.0 / self.rho - 1.0

    def velocity(self) -> VectorField:
        out = VectorField.from_spectral(self.grid, self.u_spec, check=False)
        out.is_divergence_free = True
        return out

    def density(self) -> ScalarField:
        return ScalarField.from_physical(self.grid, self.rho)

    def pressure(self) -> ScalarField:
        return ScalarField.from_spectral(self.grid, self.P_spec, check=False)


@dataclass
class StepStats:
    iterations: int
    fp_residual: float
    max_displacement: float
    visc_increment: float     # dt * mu * ||grad u_mid||_L2^2
    proj_power: float         # dt * <P F, u_mid>


def _l2_of_specs(specs) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(s) ** 2) for s in specs)))


def _advance_raw(grid: PeriodicGrid, rho_n, u_n, mu, dt, params: StepParams,
                 u_adv_spec=None):
    """One step; returns (rho_np1, u_np1, P_spec, stats).

    The convection is explicit: it is evaluated once per step from the
    velocity extrapolated to the step midpoint (the same field that carries
    the density), in divergence form and dealiased.  The Picard loop
    iterates only on the density perturbation term -(rho - 1) u_t around
    the Crank-Nicolson Stokes step, so its contraction rate is governed by
    ||rho - 1||_inf alone.
    """
    dim = grid.dim
    if np.max(np.abs(rho_n - 1.0)) > params.eps_max:
        raise NonContractionError(
            f"||rho - 1||_inf = {np.max(np.abs(rho_n - 1.0)):.3f} exceeds "
            f"{params.eps_max}; the perturbative velocity step does not contract")

    # density transport with the (extrapolated) advecting velocity
    adv = u_n if u_adv_spec is None else u_adv_spec
    adv_phys = [to_physical(grid, s) for s in adv]
    rho_np1 = advect_density(rho_n, adv_phys, dt, grid,
                             cfl_safety=params.cfl_safety)
    max_disp = max(float(np.max(np.abs(u))) for u in adv_phys) * dt
    rho_mid = 0.5 * (rho_n + rho_np1)

    ksq = grid.k_sq
    kd = grid.k_deriv
    z_half = 0.5 * mu * dt * ksq
    u_n_phys = [to_physical(grid, s) for s in u_n]

    # (u.grad u)_b = sum_a d_a (u_a u_b) for the divergence-free
    # extrapolated midpoint velocity, truncated by the 2/3 rule
    prod_spec = {}
    for a in range(dim):
        for b in range(a, dim):
            prod_spec[(a, b)] = to_spectral(grid, adv_phys[a] * adv_phys[b])
    conv = []
    for b in range(dim):
        acc = np.zeros(grid.shape, dtype=np.complex128)
        for a in range(dim):
            key = (a, b) if a <= b else (b, a)
            acc += 1j * kd[a] * prod_spec[key]
        conv.append(to_physical(grid, dealias_spec(grid, acc)))

    u_star = [s.copy() for s in u_n]
    last_residual = np.inf
    iterations = 0
    pf = None
    for it in range(1, params.fp_max_iter + 1):
        iterations = it
        u_star_phys = [to_physical(grid, s) for s in u_star]
        ut_phys = [(a - b) / dt for a, b in zip(u_star_phys, u_n_phys)]
        f_spec = []
        for a in range(dim):
            f_phys = -(rho_mid - 1.0) * ut_phys[a] - rho_mid * conv[a]
            f_spec.append(dealias_spec(grid, to_spectral(grid, f_phys)))
        pf = leray_project_spec(grid, f_spec)

        u_new = [((1.0 - z_half) * u_n[a] + dt * pf[a]) / (1.0 + z_half)
                 for a in range(dim)]
        last_residual = _l2_of_specs([a - b for a, b in zip(u_new, u_star)])
        u_star = u_new
        if last_residual < params.fp_tol:
            break
    else:
        raise NonContractionError(
            f"fixed point did not reach tol {params.fp_tol:.1e} in "
            f"{params.fp_max_iter} iterations (residual {last_residual:.3e})")

    # pressure: grad P is the gradient part of the right-hand side
    kd = grid.k_deriv
    dot = sum(kd[a] * (f_spec[a]) for a in range(dim))
    P_spec = -1j * inverse_laplacian_spec(grid, dot)
    P_spec[(0,) * dim] = 0.0

    u_mid_spec = [0.5 * (a + b) for a, b in zip(u_n, u_star)]
    grad_mid_sq = float(sum(np.sum(ksq * np.abs(s) ** 2) for s in u_mid_spec))
    proj_power = float(sum(np.sum(pf[a] * np.conj(u_mid_spec[a])).real
                           for a in range(dim)))
    stats = StepStats(iterations=iterations, fp_residual=last_residual,
                      max_displacement=max_disp,
                      visc_increment=dt * mu * grad_mid_sq,
                      proj_power=dt * proj_power)
    return rho_np1, tuple(u_star), P_spec, stats


def advance_step(state: SolverState, dt: float,
                 params: Optional[StepParams] = None) -> SolverState:
    """Advance one time step (functional form; see Stepper for runs)."""
    if params is None:
        params = StepParams(mu=state.mu)
    adv = _extrapolated_velocity(state, dt)
    rho, u, P, _ = _advance_raw(state.grid, state.rho, state.u_spec, state.mu,
                                dt, params, u_adv_spec=adv)
    return SolverState(grid=state.grid, t=state.t + dt, rho=rho, u_spec=u,
                       P_spec=P, mu=state.mu, u_prev_spec=state.u_spec,
                       t_prev=state.t)


def _extrapolated_velocity(state: SolverState, dt: float):
    if state.u_prev_spec is None or state.t_prev is None:
        return None
    gap = state.t - state.t_prev
    if gap <= 0:
        return None
    w = (dt / 2.0) / gap
    return tuple((1.0 + w) * a - w * b
                 for a, b in zip(state.u_spec, state.u_prev_spec))


# -- lazy per-step diagnostic samples ------------------------------------------

class MidSample:
    """Quantities centred at one step's midpoint, computed lazily."""

    def __init__(self, grid, t0, t1, rho_mid, u0_spec, u1_spec, P_spec, mu):
        self.grid = grid
        self.t = 0.5 * (t0 + t1)
        self.dt = t1 - t0
        self.mu = mu
        self.rho = rho_mid
        self._u0 = u0_spec
        self._u1 = u1_spec
        self.P_spec = P_spec
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def u_spec(self):
        return self._get("u_spec", lambda: tuple(
            0.5 * (a + b) for a, b in zip(self._u0, self._u1)))

    @property
    def u_phys(self):
        return self._get("u_phys", lambda: tuple(
            to_physical(self.grid, s) for s in self.u_spec))

    @property
    def ut_spec(self):
        return self._get("ut_spec", lambda: tuple(
            (a - b) / self.dt for a, b in zip(self._u1, self._u0)))

    @property
    def ut_phys(self):
        return self._get("ut_phys", lambda: tuple(
            to_physical(self.grid, s) for s in self.ut_spec))

    @property
    def grad_u(self):
        """grad_u[a][b] = d_a u^b, physical."""
        def build():
            g = self.grid
            return tuple(tuple(to_physical(g, 1j * g.k_deriv[a] * self.u_spec[b])
                               for b in range(g.dim)) for a in range(g.dim))
        return self._get("grad_u", build)

    @property
    def conv_phys(self):
        """(u . grad) u, physical components."""
        def build():
            g = self.grid
            gu = self.grad_u
            up = self.u_phys
            return tuple(sum(up[a] * gu[a][b] for a in range(g.dim))
                         for b in range(g.dim))
        return self._get("conv_phys", build)

    @property
    def udot_phys(self):
        return self._get("udot_phys", lambda: tuple(
            a + b for a, b in zip(self.ut_phys, self.conv_phys)))

    @property
    def udot_spec(self):
        return self._get("udot_spec", lambda: tuple(
            to_spectral(self.grid, a) for a in self.udot_phys))

    @property
    def gradP_phys(self):
        def build():
            g = self.grid
            return tuple(to_physical(g, 1j * g.k_deriv[a] * self.P_spec)
                         for a in range(g.dim))
        return self._get("gradP_phys", build)

    # pointwise magnitudes for norms
    def mag_u(self):
        return np.sqrt(sum(v ** 2 for v in self.u_phys))

    def mag_ut(self):
        return np.sqrt(sum(v ** 2 for v in self.ut_phys))

    def mag_udot(self):
        return np.sqrt(sum(v ** 2 for v in self.udot_phys))

    def mag_grad_u(self):
        gu = self.grad_u
        d = self.grid.dim
        return np.sqrt(sum(gu[a][b] ** 2 for a in range(d) for b in range(d)))

    def mag_hess_u(self):
        def build():
            g = self.grid
            acc = np.zeros(g.shape)
            for b in range(g.dim):
                hs = hessian_specs(g, self.u_spec[b])
                for row in hs:
                    for s in row:
                        acc += to_physical(g, s) ** 2
            return np.sqrt(acc)
        return self._get("mag_hess", build)

    def mag_gradP(self):
        return np.sqrt(sum(v ** 2 for v in self.gradP_phys))

    def mag_grad_udot(self):
        def build():
            g = self.grid
            acc = np.zeros(g.shape)
            for b in range(g.dim):
                for a in range(g.dim):
                    acc += to_physical(g, 1j * g.k_deriv[a] * self.udot_spec[b]) ** 2
            return np.sqrt(acc)
        return self._get("mag_grad_udot", build)

    def mag_hess_udot(self):
        def build():
            g = self.grid
            acc = np.zeros(g.shape)
            for b in range(g.dim):
                for row in hessian_specs(g, self.udot_spec[b]):
                    for s in row:
                        acc += to_physical(g, s) ** 2
            return np.sqrt(acc)
        return self._get("mag_hess_udot", build)

    # Parseval shortcuts for L2-based norms (no inverse transforms)
    def l2_ut(self) -> float:
        return _l2_of_specs(self.ut_spec)

    def l2_hess(self) -> float:
        ksq = self.grid.k_sq
        return float(np.sqrt(sum(np.sum(ksq ** 2 * np.abs(s) ** 2)
                                 for s in self.u_spec)))

    def l2_gradP(self) -> float:
        g = self.grid
        return float(np.sqrt(sum(np.sum(np.abs(kd * self.P_spec) ** 2)
                                 for kd in g.k_deriv)))

    def velocity_field(self) -> VectorField:
        out = VectorField.from_spectral(self.grid, self.u_spec, check=False)
        out.is_divergence_free = True
        return out

    def udot_field(self) -> VectorField:
        return VectorField.from_spectral(self.grid, self.udot_spec, check=False)


class NodeSample:
    """Second-level material quantities at an interior time node."""

    def __init__(self, grid, t, rho, u_spec, mid_prev: MidSample,
                 mid_next: MidSample, mu):
        self.grid = grid
        self.t = t
        self.mu = mu
        self.rho = rho
        self.u_spec = u_spec
        self._m0 = mid_prev
        self._m1 = mid_next
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def _weights(self):
        t0, t1 = self._m0.t, self._m1.t
        w = (self.t - t0) / (t1 - t0)
        return 1.0 - w, w

    @property
    def u_phys(self):
        return self._get("u_phys", lambda: tuple(
            to_physical(self.grid, s) for s in self.u_spec))

    @property
    def udot_spec(self):
        def build():
            a0, a1 = self._weights
            return tuple(a0 * x + a1 * y
                         for x, y in zip(self._m0.udot_spec, self._m1.udot_spec))
        return self._get("udot_spec", build)

    @property
    def udot_phys(self):
        return self._get("udot_phys", lambda: tuple(
            to_physical(self.grid, s) for s in self.udot_spec))

    @property
    def udot_t_spec(self):
        def build():
            gap = self._m1.t - self._m0.t
            return tuple((y - x) / gap
                         for x, y in zip(self._m0.udot_spec, self._m1.udot_spec))
        return self._get("udot_t_spec", build)

    @property
    def P_spec(self):
        def build():
            a0, a1 = self._weights
            return a0 * self._m0.P_spec + a1 * self._m1.P_spec
        return self._get("P_spec", build)

    @property
    def grad_u(self):
        def build():
            g = self.grid
            return tuple(tuple(to_physical(g, 1j * g.k_deriv[a] * self.u_spec[b])
                               for b in range(g.dim)) for a in range(g.dim))
        return self._get("grad_u", build)

    @property
    def uddot_phys(self):
        """Second material derivative: d/dt of udot along trajectories."""
        def build():
            g = self.grid
            adv = []
            for b in range(g.dim):
                gb = grad_spec(g, self.udot_spec[b])
                acc = to_physical(g, self.udot_t_spec[b])
                for a in range(g.dim):
                    acc = acc + self.u_phys[a] * to_physical(g, gb[a])
                adv.append(acc)
            return tuple(adv)
        return self._get("uddot_phys", build)

    @property
    def f_source_phys(self):
        """The doubled-source field of the udot momentum balance."""
        return self._get("f_source", lambda: doubled_source_physical(
            self.grid, self.u_spec, self.P_spec, self.grad_u))

    @property
    def trace_grad_sq_spec(self):
        """Spectrum of Tr(grad u . grad u) = sum_ij d_i u^j d_j u^i."""
        return self._get("trace_sq", lambda: to_spectral(
            self.grid, trace_grad_sq_physical(self.grad_u)))

    @property
    def div_udot_spec(self):
        return self._get("div_udot",
                         lambda: div_spec(self.grid, self.udot_spec))

    @property
    def gradPdot_spec(self):
        """grad of the material pressure derivative, from the momentum
        balance of udot: gradient part of (f - rho uddot) plus
        grad Tr(grad u . grad u)."""
        def build():
            g = self.grid
            rhs = [to_spectral(g, self.f_source_phys[a] -
                               self.rho * self.uddot_phys[a])
                   for a in range(g.dim)]
            q = [rhs[a] - s for a, s in enumerate(leray_project_spec(g, rhs))]
            gt = grad_spec(g, self.trace_grad_sq_spec)
            return tuple(q[a] + gt[a] for a in range(g.dim))
        return self._get("gradPdot", build)

    def mag(self, comps_phys):
        return np.sqrt(sum(c ** 2 for c in comps_phys))


# -- run orchestration ---------------------------------------------------------

def build_step_schedule(t_end: float, dt_max: float, t_first: float = None,
                        growth: float = 1.3) -> np.ndarray:
    """Step sizes: geometric from t_first up to dt_max, then uniform."""
    if t_end <= 0 or dt_max <= 0:
        raise ValueError("t_end and dt_max must be positive")
    steps = []
    t = 0.0
    dt = dt_max if t_first is None else min(t_first, dt_max)
    while t < t_end - 1e-12 * t_end:
        dt_k = min(dt, t_end - t)
        steps.append(dt_k)
        t += dt_k
        dt = min(dt * growth, dt_max)
    return np.array(steps)


@dataclass
class Checkpoint:
    t: float
    rho: np.ndarray
    u_spec: tuple
    P_spec: np.ndarray


@dataclass
class RunRecord:
    """Time-stamped diagnostics of one simulation."""

    grid: PeriodicGrid
    mu: float
    t_end: float
    times_mid: np.ndarray = None
    traces: dict = field(default_factory=dict)   # name -> (times, values)
    energy_residual: np.ndarray = None
    rho_min: np.ndarray = None
    rho_max: np.ndarray = None
    level_sets: dict = field(default_factory=dict)
    iterations: np.ndarray = None
    checkpoints: list = field(default_factory=list)
    complete: bool = False
    failure: str = ""

    def trace(self, name: str):
        from .lorentz import TimeTrace
        times, values = self.traces[name]
        return TimeTrace(times, values, end=self.t_end)

    def has_trace(self, name: str) -> bool:
        return name in self.traces and len(self.traces[name][0]) >= 2


class Stepper:
    """Drives the time loop and exposes per-step diagnostic samples."""

    def __init__(self, grid: PeriodicGrid, rho0, u0: VectorField, mu: float,
                 params: Optional[StepParams] = None):
        if isinstance(rho0, ScalarField):
            rho0 = rho0.values
        self.grid = grid
        self.params = params if params is not None else StepParams(mu=mu)
        self.mu = mu
        u_spec = leray_project_spec(grid, u0.spec)
        self.state = SolverState(grid=grid, t=0.0, rho=np.array(rho0, dtype=float),
                                 u_spec=tuple(dealias_spec(grid, s) for s in u_spec),
                                 P_spec=np.zeros(grid.shape, dtype=complex), mu=mu)
        self.visc_accum = 0.0
        self.energy0 = self.kinetic_energy()
        self.last_mid: Optional[MidSample] = None
        self.prev_mid: Optional[MidSample] = None
        self.last_stats: Optional[StepStats] = None
        self._node_rho = None
        self._node_u = None
        self._node_t = None

    def kinetic_energy(self) -> float:
        u_phys = [to_physical(self.grid, s) for s in self.state.u_spec]
        return 0.5 * float(np.mean(self.state.rho * sum(u * u for u in u_phys)))

    def energy_residual(self) -> float:
        return self.kinetic_energy() + self.visc_accum - self.energy0

    def step(self, dt: float) -> StepStats:
        st = self.state
        keep_rho, keep_u, keep_t = st.rho, st.u_spec, st.t
        adv = _extrapolated_velocity(st, dt)
        rho, u, P, stats = _advance_raw(self.grid, st.rho, st.u_spec, self.mu,
                                        dt, self.params, u_adv_spec=adv)
        rho_mid = 0.5 * (st.rho + rho)
        self.prev_mid = self.last_mid
        self.last_mid = MidSample(self.grid, st.t, st.t + dt, rho_mid,
                                  st.u_spec, u, P, self.mu)
        self._node_rho, self._node_u, self._node_t = keep_rho, keep_u, keep_t
        self.state = SolverState(grid=self.grid, t=st.t + dt, rho=rho, u_spec=u,
                                 P_spec=P, mu=self.mu, u_prev_spec=keep_u,
                                 t_prev=keep_t)
        self.visc_accum += stats.visc_increment
        self.last_stats = stats
        return stats

    def node_sample(self) -> Optional[NodeSample]:
        """Sample at the node between the two most recent steps."""
        if self.prev_mid is None:
            return None
        return NodeSample(self.grid, self._node_t, self._node_rho,
                          self._node_u, self.prev_mid, self.last_mid, self.mu)


def run_simulation(grid: PeriodicGrid, rho0, u0: VectorField, mu: float,
                   t_end: float, dt_max: float, t_first: float = None,
                   growth: float = 1.3, params: Optional[StepParams] = None,
                   mid_hooks=(), node_hooks=(), level_set_pairs=(),
                   checkpoint_times=(), keep_final: bool = True) -> RunRecord:
    """Run to t_end collecting traces; returns a partial record on failure.

    mid_hooks / node_hooks: iterables of (name, fn) evaluated on every
    MidSample / NodeSample; a hook may return None to skip a step, so each
    trace carries its own sample times.
    """
    stepper = Stepper(grid, rho0, u0, mu, params=params)
    schedule = build_step_schedule(t_end, dt_max, t_first=t_first, growth=growth)
    rec = RunRecord(grid=grid, mu=mu, t_end=t_end)
    mids = []
    traces = {name: ([], []) for name, _ in list(mid_hooks) + list(node_hooks)}

    def record(name, t, value):
        if value is not None:
            traces[name][0].append(t)
            traces[name][1].append(float(value))

    energy, rmin, rmax, iters = [], [], [], []
    lsets = {pair: [] for pair in level_set_pairs}
    cp_queue = sorted(checkpoint_times)
    rec.checkpoints.append(Checkpoint(0.0, stepper.state.rho.copy(),
                                      tuple(s.copy() for s in stepper.state.u_spec),
                                      stepper.state.P_spec.copy()))
    try:
        for dt in schedule:
            stepper.step(dt)
            mid = stepper.last_mid
            mids.append(mid.t)
            for name, fn in mid_hooks:
                record(name, mid.t, fn(mid))
            if node_hooks:
                node = stepper.node_sample()
                if node is not None:
                    for name, fn in node_hooks:
                        record(name, node.t, fn(node))
            st = stepper.state
            energy.append(stepper.energy_residual())
            rmin.append(float(np.min(st.rho)))
            rmax.append(float(np.max(st.rho)))
            iters.append(stepper.last_stats.iterations)
            for pair in level_set_pairs:
                lsets[pair].append(level_set_fraction(st.rho, *pair))
            while cp_queue and st.t >= cp_queue[0] - 1e-12:
                cp_queue.pop(0)
                rec.checkpoints.append(Checkpoint(st.t, st.rho.copy(),
                                                  tuple(s.copy() for s in st.u_spec),
                                                  st.P_spec.copy()))
        rec.complete = True
    except (CFLError, NonContractionError) as exc:
        rec.failure = f"{type(exc).__name__}: {exc}"
    if keep_final and rec.complete:
        st = stepper.state
        if not rec.checkpoints or rec.checkpoints[-1].t < st.t:
            rec.checkpoints.append(Checkpoint(st.t, st.rho.copy(),
                                              tuple(s.copy() for s in st.u_spec),
                                              st.P_spec.copy()))
    rec.times_mid = np.array(mids)
    rec.traces = {k: (np.array(ts), np.array(vs))
                  for k, (ts, vs) in traces.items()}
    rec.energy_residual = np.array(energy)
    rec.rho_min = np.array(rmin)
    rec.rho_max = np.array(rmax)
    rec.iterations = np.array(iters)
    rec.level_sets = {k: np.array(v) for k, v in lsets.items()}
    return rec


# -- material derivatives from stored checkpoints ------------------------------

def grad_u_physical(grid: PeriodicGrid, u_spec):
    """grad[a][b] = d_a u^b as physical arrays."""
    d = grid.dim
    return tuple(tuple(to_physical(grid, 1j * grid.k_deriv[a] * u_spec[b])
                       for b in range(d)) for a in range(d))


def trace_grad_sq_physical(grad_u):
    d = len(grad_u)
    tr = np.zeros_like(grad_u[0][0])
    for i in range(d):
        for j in range(d):
            tr += grad_u[i][j] * grad_u[j][i]
    return tr


def doubled_source_physical(grid: PeriodicGrid, u_spec, P_spec, grad_u=None):
    """-(Lap u . grad) u - 2 grad u . hess u + grad u . grad P, with
    (grad u . hess u)^i = sum_{j,k} d_k u^j d_j d_k u^i and
    (grad u . grad P)^i = sum_j d_i u^j d_j P."""
    d = grid.dim
    if grad_u is None:
        grad_u = grad_u_physical(grid, u_spec)
    lap_u = [to_physical(grid, laplacian_spec(grid, u_spec[b])) for b in range(d)]
    gradP = [to_physical(grid, 1j * grid.k_deriv[a] * P_spec) for a in range(d)]
    out = []
    for i in range(d):
        hess_i = hessian_specs(grid, u_spec[i])
        t1 = sum(lap_u[j] * grad_u[j][i] for j in range(d))
        t2 = np.zeros(grid.shape)
        for j in range(d):
            for k in range(d):
                t2 += grad_u[k][j] * to_physical(grid, hess_i[j][k])
        t3 = sum(grad_u[i][j] * gradP[j] for j in range(d))
        out.append(-t1 - 2.0 * t2 + t3)
    return tuple(out)


@dataclass
class MaterialDiagnostics:
    """Convective-derivative fields reconstructed at one stored sample."""

    t: float
    udot: VectorField
    f_source: VectorField
    div_udot: ScalarField
    trace_grad_sq: ScalarField
    uddot: Optional[VectorField] = None

    def div_identity_defect(self) -> float:
        """||div udot - Tr(grad u grad u)||_L2 on the dealiased band.

        Restricted to kept modes the two grid products are alias-free, so
        this residual is pure rounding plus time-differencing error.
        """
        grid = self.div_udot.grid
        diff = (self.div_udot.spec - self.trace_grad_sq.spec) * grid.dealias_mask
        return float(np.sqrt(np.sum(np.abs(diff) ** 2)))


def material_derivatives(record: RunRecord):
    """Material diagnostics at interior checkpoints of a run.

    u_t comes from variable-step centered differences of the stored velocity
    samples, so at least three consecutive checkpoints are required; the
    second material derivative is produced where the udot series itself has
    neighbors to difference.
    """
    cps = record.checkpoints
    if len(cps) < 3:
        raise ValueError("need at least three stored samples for centered "
                         "time differences")
    grid = record.grid
    d = grid.dim
    interior = range(1, len(cps) - 1)
    udots = {}
    grads = {}
    for i in interior:
        prev_cp, cp, next_cp = cps[i - 1], cps[i], cps[i + 1]
        dt_m = cp.t - prev_cp.t
        dt_p = next_cp.t - cp.t
        w_m = -dt_p / (dt_m * (dt_m + dt_p))
        w_0 = (dt_p - dt_m) / (dt_m * dt_p)
        w_p = dt_m / (dt_p * (dt_m + dt_p))
        ut = [w_m * a + w_0 * b + w_p * c
              for a, b, c in zip(prev_cp.u_spec, cp.u_spec, next_cp.u_spec)]
        u_phys = [to_physical(grid, s) for s in cp.u_spec]
        gu = grad_u_physical(grid, cp.u_spec)
        grads[i] = gu
        udots[i] = tuple(to_physical(grid, ut[b]) +
                         sum(u_phys[a] * gu[a][b] for a in range(d))
                         for b in range(d))
    out = []
    for i in interior:
        cp = cps[i]
        gu = grads[i]
        udot_phys = udots[i]
        udot_spec = tuple(to_spectral(grid, v) for v in udot_phys)
        uddot = None
        lo = i - 1 if i - 1 in udots else i
        hi = i + 1 if i + 1 in udots else i
        if lo < hi:
            gap = cps[hi].t - cps[lo].t
            udot_t = [(a - b) / gap for a, b in zip(udots[hi], udots[lo])]
            u_phys = [to_physical(grid, s) for s in cp.u_spec]
            comps = []
            for b in range(d):
                gb = grad_spec(grid, udot_spec[b])
                acc = udot_t[b].copy()
                for a in range(d):
                    acc += u_phys[a] * to_physical(grid, gb[a])
                comps.append(acc)
            uddot = VectorField.from_physical(grid, comps)
        out.append(MaterialDiagnostics(
            t=cp.t,
            udot=VectorField.from_spectral(grid, udot_spec, check=False),
            f_source=VectorField.from_physical(
                grid, doubled_source_physical(grid, cp.u_spec, cp.P_spec, gu)),
            div_udot=ScalarField.from_spectral(
                grid, div_spec(grid, udot_spec), check=False),
            trace_grad_sq=ScalarField.from_physical(
                grid, trace_grad_sq_physical(gu)),
            uddot=uddot,
        ))
    return out
