"""Command-line entry points.

Subcommands: simulate, verify-norms, verify-maxreg, ladder-2d,
smallness-3d, stability, scaling-check, suite.  Configuration comes from a
sectioned text file; command-line flags override only the output directory
and the worker count.  Exit codes: 0 all hard gates pass, 1 a gate failed,
2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .config import ConfigError, SimulationConfig, load_config
from .reports import ReportSet, emit_reports, record_to_reports


def _default_output_root() -> str:
    return os.environ.get("TORUSNS_OUTPUT", "torusns-out")


def _finish(reports: ReportSet, cfg_echo: dict, out_dir: str, seed, workers,
            gates: dict) -> int:
    reports.add_summary("summary", {
        "gates": gates,
        "all_pass": all(bool(v.get("pass", False)) for v in gates.values())
        if gates else True,
    })
    emit_reports(reports, out_dir, config_echo=cfg_echo, seed=seed,
                 workers=workers)
    ok = all(bool(v.get("pass", False)) for v in gates.values())
    for name, gate in gates.items():
        status = "PASS" if gate.get("pass") else "FAIL"
        print(f"[{status}] {name}: {gate.get('value')}")
    return 0 if ok else 1


def _gate(value, threshold, direction="<=") -> dict:
    if direction == "<=":
        ok = value <= threshold
    else:
        ok = value >= threshold
    return {"value": value, "threshold": threshold, "pass": bool(ok)}


def cmd_simulate(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .solver import run_simulation
    grid = cfg.build_grid()
    u0 = cfg.build_velocity(grid)
    rho0 = cfg.build_density(grid)
    dt_max = cfg.dt_max
    if dt_max is None:
        from .grid import to_physical
        umax = max(float(np.max(np.abs(to_physical(grid, s))))
                   for s in u0.spec)
        dt_max = 0.2 * grid.h / max(umax, 1e-10)
    rec = run_simulation(grid, rho0, u0, cfg.mu, t_end=cfg.t_end,
                         dt_max=dt_max, t_first=cfg.t_first,
                         growth=cfg.growth, params=cfg.step_params(),
                         level_set_pairs=cfg.level_sets,
                         checkpoint_times=cfg.checkpoint_times)
    reports = ReportSet()
    record_to_reports(rec, reports, name="run")
    gates = {
        "run_complete": {"value": rec.failure or "complete",
                         "pass": rec.complete},
    }
    if rec.complete and len(rec.energy_residual):
        scale = max(abs(rec.energy_residual[0]), 1.0)
        gates["energy_residual"] = _gate(
            float(np.max(np.abs(rec.energy_residual))), 1e-3 * scale)
        gates["density_range"] = _gate(
            float(max(rec.rho_max.max() - rec.rho_max[0],
                      rec.rho_min[0] - rec.rho_min.min())), 1e-10)
    return _finish(reports, cfg.experiment | {"source": "simulate"}, out_dir,
                   cfg.seed, workers, gates)


def cmd_verify_norms(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .harness.inequalities import inequality_suite
    exp = cfg.experiment
    count = int(exp.get("count", 200))
    suite = inequality_suite(seed=cfg.seed, n=cfg.n, count=count, dim=cfg.dim,
                             refine=bool(exp.get("refine", True)))
    reports = ReportSet()
    reports.add_summary("norms", suite)
    rows = [(0.0, v["name"], v["value"], "ratio") for v in suite["verdicts"]]
    reports.add_rows("norm_constants", rows)
    gates = {v["name"]: {"value": v["value"], "threshold": v["threshold"],
                         "pass": v["pass"]} for v in suite["verdicts"]}
    return _finish(reports, {"source": "verify-norms", "count": count},
                   out_dir, cfg.seed, workers, gates)


def cmd_verify_maxreg(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .initial_data import rough_velocity
    from .stokes import MaxRegConfig, maxreg_report
    exp = cfg.experiment
    horizons = tuple(float(h) for h in _as_list(exp.get("horizons", [1.0, 10.0, 100.0])))
    mu_values = tuple(float(m) for m in _as_list(exp.get("mu_values", [1.0])))
    r = float(exp.get("r", 1.0))
    mcfg = MaxRegConfig(dim=cfg.dim, n=cfg.n, p=cfg.p, q=cfg.q, r=r,
                        horizons=horizons, mu_values=mu_values,
                        n_samples=int(exp.get("n_samples", 1024)))
    grid = cfg.build_grid()
    u0 = rough_velocity(grid, cfg.amplitude, seed=cfg.seed, p=float(cfg.p),
                        normalize="besov")
    report = maxreg_report(mcfg, u0)
    reports = ReportSet()
    reports.add_summary("maxreg", report)
    rows = [(c["T"], f"ratio_mu_{c['mu']:g}", c["ratio"], "ratio")
            for c in report["cells"]]
    reports.add_rows("maxreg_cells", rows)
    gates = {"horizon_drift": _gate(report.get("drift", math.inf), 0.10)}
    return _finish(reports, {"source": "verify-maxreg"},
                   out_dir, cfg.seed, workers, gates)


def cmd_ladder_2d(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .harness.ladders import run_2d_ladder
    exp = cfg.experiment
    rec, ladder = run_2d_ladder(
        n=cfg.n, p=float(cfg.p), mu=cfg.mu, seed=cfg.seed,
        amplitude=cfg.amplitude, eps=cfg.eps, t_end=cfg.t_end,
        dt_max=cfg.dt_max, t_first=cfg.t_first or 1e-4, growth=cfg.growth,
        besov_stride=int(exp.get("besov_stride", 4)))
    reports = ReportSet()
    record_to_reports(rec, reports, name="ladder_run")
    reports.add_summary("ladder2d", ladder)
    gates = {
        "all_quantities_finite": {"value": ladder["all_finite"],
                                  "pass": ladder["all_finite"]},
        "energy_balance_margin": _gate(ladder["energy_balance_margin"], 1e-4),
        "small_time_slope": _gate(ladder["slope_grad_inf"], -1.0,
                                  direction=">="),
    }
    return _finish(reports, {"source": "ladder-2d"}, out_dir, cfg.seed,
                   workers, gates)


def cmd_smallness_3d(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .harness.ladders import smallness_sweep_3d
    exp = cfg.experiment
    amplitudes = [float(a) for a in _as_list(exp.get(
        "amplitude_sweep", [2.0, 4.0, 5.0, 6.25, 7.8]))]
    sweep = smallness_sweep_3d(
        n=cfg.n, p=float(cfg.p), amplitudes=amplitudes, seed=cfg.seed,
        eps=cfg.eps, mu=cfg.mu, t_end=cfg.t_end,
        besov_stride=int(exp.get("besov_stride", 8)),
        k_cap=cfg.k_cap, decay=cfg.decay)
    reports = ReportSet()
    reports.add_summary("smallness3d", sweep)
    rows = [(row["amplitude"], "phi_normalized_ratio",
             row["phi_normalized_ratio"], "ratio") for row in sweep["rows"]]
    reports.add_rows("smallness_sweep", rows)
    gates = {"boundary_found": {"value": sweep["boundary"],
                                "pass": sweep["boundary"] is not None}}
    ratios = [row["phi_normalized_ratio"] for row in sweep["rows"]
              if math.isfinite(row.get("phi_normalized_ratio", math.inf))]
    if len(ratios) >= 2:
        gates["monotone_growth"] = {
            "value": ratios, "pass": all(b >= a - 1e-9 for a, b
                                         in zip(ratios, ratios[1:]))}
    return _finish(reports, {"source": "smallness-3d"}, out_dir, cfg.seed,
                   workers, gates)


def cmd_stability(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .harness.stability import (implied_gronwall_constant, osgood_mode,
                                    stability_experiment)
    exp = cfg.experiment
    amps = [float(a) for a in _as_list(exp.get("delta_amps",
                                               [1e-3, 1e-4, 1e-5]))]
    reports = ReportSet()
    gates = {}
    y_ends = []
    for amp in amps:
        rep = stability_experiment(cfg.dim, cfg.n, cfg.eps, amp,
                                   seed=cfg.seed, mu=cfg.mu,
                                   t_end=cfg.t_end)
        if not rep.complete:
            gates[f"run_amp_{amp:g}"] = {"value": rep.failure, "pass": False}
            continue
        y_ends.append((amp, rep.y_end()))
        gates[f"gronwall_gate_amp_{amp:g}"] = _gate(rep.eq72_max, 1.05)
        reports.add_trace_csv("stability", f"X_amp_{amp:g}", rep.times, rep.X)
        reports.add_trace_csv("stability", f"Y_amp_{amp:g}", rep.times, rep.Y)
    if len(y_ends) >= 2:
        la = np.log([a for a, _ in y_ends])
        ly = np.log([y for _, y in y_ends])
        slope = float(np.polyfit(la, ly, 1)[0])
        gates["linear_response_slope"] = {
            "value": slope, "threshold": (0.9, 1.1),
            "pass": 0.9 <= slope <= 1.1}
    if cfg.dim == 2 and bool(exp.get("osgood", True)):
        cal = stability_experiment(cfg.dim, cfg.n, cfg.eps, amps[0],
                                   seed=cfg.seed + 1, mu=cfg.mu,
                                   t_end=cfg.t_end)
        c_fit = _implied_osgood(cal)
        rep = stability_experiment(cfg.dim, cfg.n, cfg.eps, amps[0],
                                   seed=cfg.seed, mu=cfg.mu, t_end=cfg.t_end)
        res = osgood_mode(rep, 1.5 * c_fit)
        gates["osgood_below_comparison"] = {"value": res["margin"],
                                            "pass": res["below"]}
    reports.add_summary("stability", {"y_ends": y_ends, "gates": gates})
    return _finish(reports, {"source": "stability"}, out_dir, cfg.seed,
                   workers, gates)


def _implied_osgood(report) -> float:
    from .harness.stability import osgood_mode
    lo, hi = 1e-6, 1e6
    if osgood_mode(report, lo)["below"]:
        return lo
    if not osgood_mode(report, hi)["below"]:
        return math.inf
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if osgood_mode(report, mid)["below"]:
            hi = mid
        else:
            lo = mid
    return hi


def cmd_scaling_check(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    from .harness.scaling import richardson_reference, verify_scaling_invariance
    grid = cfg.build_grid()
    u0 = cfg.build_velocity(grid)
    rho0 = cfg.build_density(grid)
    dt = cfg.dt_max or 2e-3
    out = verify_scaling_invariance(cfg.n, rho0, u0, cfg.mu,
                                    t_end=cfg.t_end, dt=dt,
                                    params=cfg.step_params())
    reports = ReportSet()
    gates = {}
    if cfg.velocity_profile == "taylor_green" and cfg.eps == 0.0:
        gates["exact_pair_discrepancy"] = _gate(out["max_discrepancy"], 1e-8)
    else:
        rich = richardson_reference(cfg.n, lambda g: cfg.build_density(g),
                                    u0, cfg.mu, t_end=cfg.t_end, dt=dt,
                                    params=cfg.step_params())
        out["richardson"] = rich
        for comp in ("u", "rho", "p"):
            gates[f"{comp}_within_reference"] = _gate(
                out[f"{comp}_discrepancy"], 2.0 * rich[comp] + 1e-12)
    reports.add_summary("scaling", out)
    return _finish(reports, {"source": "scaling-check"}, out_dir, cfg.seed,
                   workers, gates)


def cmd_suite(cfg: SimulationConfig, out_dir: str, workers: int) -> int:
    """Smoke-scale pass over every experiment family."""
    from .harness.inequalities import inequality_suite
    from .harness.ladders import run_2d_ladder, smallness_sweep_3d
    from .harness.scaling import verify_scaling_invariance
    from .harness.stability import stability_experiment
    from .initial_data import taylor_green

    gates = {}
    reports = ReportSet()
    suite = inequality_suite(seed=cfg.seed, n=32, count=60, dim=2, refine=True)
    gates["norms_all_pass"] = {"value": suite["all_pass"],
                               "pass": suite["all_pass"]}
    reports.add_summary("norms", suite)

    from .grid import PeriodicGrid
    import numpy as np
    g = PeriodicGrid.of(2, 32)
    out = verify_scaling_invariance(32, np.ones(g.shape), taylor_green(g),
                                    mu=1.0, t_end=0.2, dt=4e-3)
    gates["scaling_exact_pair"] = _gate(out["max_discrepancy"], 1e-8)

    rec, ladder = run_2d_ladder(n=32, p=4.0 / 3.0, mu=1.0, seed=cfg.seed,
                                amplitude=0.4, eps=0.1, t_end=0.12,
                                t_first=2e-4)
    gates["ladder_finite"] = {"value": ladder["all_finite"],
                              "pass": ladder["all_finite"]}
    gates["ladder_energy"] = _gate(ladder["energy_ratio"], 1.0 + 1e-6)
    reports.add_summary("ladder2d", ladder)

    rep = stability_experiment(2, 32, 0.1, 1e-4, seed=cfg.seed, t_end=0.12)
    gates["stability_gronwall"] = _gate(rep.eq72_max, 1.05)

    sweep = smallness_sweep_3d(n=16, p=2.0, amplitudes=[1.0, 4.0, 8.0, 16.0],
                               seed=cfg.seed, eps=0.1, mu=0.02, t_end=0.4,
                               besov_stride=8, k_cap=3, decay=1.0)
    gates["smallness_boundary"] = {"value": sweep["boundary"],
                                   "pass": sweep["boundary"] is not None}
    reports.add_summary("smallness3d", sweep)
    return _finish(reports, {"source": "suite"}, out_dir, cfg.seed, workers,
                   gates)


def _as_list(value):
    return value if isinstance(value, list) else [value]


_COMMANDS = {
    "simulate": cmd_simulate,
    "verify-norms": cmd_verify_norms,
    "verify-maxreg": cmd_verify_maxreg,
    "ladder-2d": cmd_ladder_2d,
    "smallness-3d": cmd_smallness_3d,
    "stability": cmd_stability,
    "scaling-check": cmd_scaling_check,
    "suite": cmd_suite,
}


def _default_config() -> SimulationConfig:
    return SimulationConfig(dim=2, n=32)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="torusns",
        description="Pseudo-spectral variable-density flow laboratory")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", nargs="?", help="configuration file")
    parser.add_argument("--output-dir", default=None,
                        help="override the output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="override the worker count")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = _default_config()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return 2

    out_dir = args.output_dir or cfg.output_dir or os.path.join(
        _default_output_root(), args.command)
    workers = args.workers if args.workers is not None else cfg.workers
    try:
        return _COMMANDS[args.command](cfg, out_dir, workers)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced with a stable exit code
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
