"""Experiment configuration: sectioned key-value text with exact rational
index bookkeeping.

The format is a minimal TOML-like dialect: `[section]` headers, `key =
value` lines, `#` comments.  Values parse as booleans, integers, rationals
("4/3" stays exact), floats, comma lists, or bare/quoted strings.  The
Lebesgue-index relations are enforced in exact rational arithmetic
(1/p + 1/q = 3/2 in two dimensions, 3/p + 2/q = 3 in three), deriving q
when it is omitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional


class ConfigError(ValueError):
    """Invalid configuration; message carries file/line context."""


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse sectioned key-value text into {section: {key: value}}."""
    sections: dict = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}:{lineno}: malformed section "
                                  f"header {raw.strip()!r}")
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        if current is None:
            raise ConfigError(f"{source}:{lineno}: key-value pair outside "
                              "any [section]")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} in "
                              f"[{current}]")
        value = value.strip()
        if "," in value and not (value and value[0] in "\"'"):
            sections[current][key] = [_parse_scalar(v) for v in value.split(",")]
        else:
            sections[current][key] = _parse_scalar(value)
    if not sections:
        raise ConfigError(f"{source}: empty configuration")
    return sections


def _as_fraction(value, where: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        frac = Fraction(value).limit_denominator(10 ** 6)
        if abs(float(frac) - value) > 1e-12 * max(abs(value), 1.0):
            raise ConfigError(f"{where}: {value!r} is not recognizably "
                              "rational; write it as a fraction like 4/3")
        return frac
    raise ConfigError(f"{where}: expected a number, got {value!r}")


def derive_exponents(dim: int, p, q=None, where: str = "[fluid]"):
    """Validate/derive (p, q) under the critical index relation."""
    p = _as_fraction(p, where + " p")
    if dim == 2:
        if not (1 < p < 2):
            raise ConfigError(f"{where}: p = {p} rejected; the two-dimensional "
                              "setting needs p in (1, 2)")
        q_derived = 1 / (Fraction(3, 2) - 1 / p)
        relation = "1/p + 1/q = 3/2"
    elif dim == 3:
        if not (1 < p < 3):
            raise ConfigError(f"{where}: p = {p} rejected; the "
                              "three-dimensional setting needs p in (1, 3)")
        q_derived = 2 / (3 - 3 / p)
        relation = "3/p + 2/q = 3"
        if q_derived <= 1:
            raise ConfigError(f"{where}: p = {p} leaves no admissible q "
                              f"under {relation}")
    else:
        raise ConfigError(f"{where}: dim must be 2 or 3, got {dim}")
    if q is not None:
        q = _as_fraction(q, where + " q")
        if q != q_derived:
            raise ConfigError(f"{where}: p = {p}, q = {q} violate the index "
                              f"relation {relation} (expected q = {q_derived})")
    return p, q_derived


@dataclass
class SimulationConfig:
    """Validated run parameters (grid, fluid, data, stepping, sampling)."""

    dim: int
    n: int
    mu: float = 1.0
    p: Fraction = Fraction(4, 3)
    q: Fraction = field(default=None)
    t_end: float = 0.25
    dt_max: Optional[float] = None
    t_first: Optional[float] = None
    growth: float = 1.25
    fp_tol: float = 1e-10
    fp_max_iter: int = 50
    eps_max: float = 0.2
    cfl_safety: float = 0.5
    density_profile: str = "disk"
    eps: float = 0.1
    density_seed: int = 17
    velocity_profile: str = "rough"
    amplitude: float = 0.5
    seed: int = 0
    decay: Optional[float] = None
    k_cap: Optional[int] = None
    normalize: str = "besov"
    level_sets: tuple = ()
    checkpoint_times: tuple = ()
    experiment: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.eps >= 1.0 or self.eps < 0.0:
            raise ConfigError("[initial]: eps must lie in [0, 1) so the "
                              "density stays positive")
        self.p, self.q = derive_exponents(self.dim, self.p, self.q)
        if self.dim == 3 and self.velocity_profile == "rough" \
                and "amplitude_sweep" not in self.experiment:
            # smallness experiments must record where the data sits against
            # the threshold sweep; a lone 3D run keeps its own amplitude
            self.experiment.setdefault("amplitude", self.amplitude)

    def step_params(self):
        from .solver import StepParams
        return StepParams(mu=self.mu, fp_tol=self.fp_tol,
                          fp_max_iter=self.fp_max_iter, eps_max=self.eps_max,
                          cfl_safety=self.cfl_safety)

    def build_grid(self):
        from .grid import PeriodicGrid
        return PeriodicGrid.of(self.dim, self.n)

    def build_density(self, grid=None):
        import numpy as np
        from .initial_data import density_disk, density_smooth_blob
        grid = grid if grid is not None else self.build_grid()
        if self.density_profile == "constant" or self.eps == 0.0:
            return np.ones(grid.shape)
        if self.density_profile == "disk":
            return density_disk(grid, eps=self.eps, seed=self.density_seed).values
        if self.density_profile == "smooth":
            return density_smooth_blob(grid, eps=self.eps).values
        raise ConfigError(f"[initial]: unknown density profile "
                          f"{self.density_profile!r}")

    def build_velocity(self, grid=None):
        from .initial_data import rough_velocity, taylor_green
        from .grid import VectorField
        grid = grid if grid is not None else self.build_grid()
        if self.velocity_profile == "zero":
            return VectorField.zero(grid)
        if self.velocity_profile == "taylor_green":
            return taylor_green(grid, amplitude=self.amplitude)
        if self.velocity_profile == "rough":
            return rough_velocity(grid, self.amplitude, seed=self.seed,
                                  decay=self.decay, p=float(self.p),
                                  k_cap=self.k_cap, normalize=self.normalize)
        raise ConfigError(f"[initial]: unknown velocity profile "
                          f"{self.velocity_profile!r}")


_GRID_KEYS = {"dim", "n"}
_FLUID_KEYS = {"mu", "p", "q"}
_INITIAL_KEYS = {"density", "eps", "density_seed", "velocity", "amplitude",
                 "seed", "decay", "k_cap", "normalize"}
_EXPERIMENT_KEYS = {"t_end", "dt_max", "t_first", "growth", "fp_tol",
                    "fp_max_iter", "eps_max", "cfl_safety", "level_sets",
                    "checkpoints"}
_OUTPUT_KEYS = {"dir", "workers"}


def _parse_level_sets(value, source):
    pairs = []
    items = value if isinstance(value, list) else [value]
    for item in items:
        if not isinstance(item, str) or ":" not in item:
            raise ConfigError(f"{source}: level_sets entries look like "
                              "'alpha:beta'")
        a, b = item.split(":", 1)
        pairs.append((float(_parse_scalar(a)), float(_parse_scalar(b))))
    return tuple(pairs)


def config_from_sections(sections: dict, source: str = "<config>"
                         ) -> SimulationConfig:
    grid_sec = sections.get("grid")
    if not grid_sec or "dim" not in grid_sec or "n" not in grid_sec:
        raise ConfigError(f"{source}: [grid] must define dim and n")
    fluid = sections.get("fluid", {})
    initial = sections.get("initial", {})
    experiment = dict(sections.get("experiment", {}))
    output = sections.get("output", {})

    for sec_name, sec, allowed in (("grid", grid_sec, _GRID_KEYS),
                                   ("fluid", fluid, _FLUID_KEYS),
                                   ("initial", initial, _INITIAL_KEYS),
                                   ("output", output, _OUTPUT_KEYS)):
        unknown = set(sec) - allowed
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) "
                              f"{sorted(unknown)} in [{sec_name}]")

    kwargs = dict(dim=int(grid_sec["dim"]), n=int(grid_sec["n"]))
    if "mu" in fluid:
        kwargs["mu"] = float(fluid["mu"])
    if "p" in fluid:
        kwargs["p"] = fluid["p"]
    if "q" in fluid:
        kwargs["q"] = fluid["q"]
    mapping = {"density": "density_profile", "velocity": "velocity_profile"}
    for key, value in initial.items():
        kwargs[mapping.get(key, key)] = value
    for key in ("t_end", "dt_max", "t_first", "growth", "fp_tol",
                "fp_max_iter", "eps_max", "cfl_safety"):
        if key in experiment:
            kwargs[key] = (int(experiment.pop(key)) if key == "fp_max_iter"
                           else float(experiment.pop(key)))
    if "level_sets" in experiment:
        kwargs["level_sets"] = _parse_level_sets(experiment.pop("level_sets"),
                                                 source)
    if "checkpoints" in experiment:
        cps = experiment.pop("checkpoints")
        cps = cps if isinstance(cps, list) else [cps]
        kwargs["checkpoint_times"] = tuple(float(c) for c in cps)
    kwargs["experiment"] = experiment
    if "dir" in output:
        kwargs["output_dir"] = str(output["dir"])
    if "workers" in output:
        kwargs["workers"] = int(output["workers"])
    try:
        return SimulationConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    """Parse and validate; all diagnostics carry the source and line."""
    return config_from_sections(parse_config_text(text, source), source)


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
