"""Bit-stable report emission: CSV traces, JSON summaries, manifest.

Every emitted data file is listed in the manifest with its checksum, and a
rerun from the same configuration reproduces identical bytes (wall-clock
timing lives only in the manifest, which is not itself checksummed).
Floating values in CSV carry 17 significant digits, enough for an exact
binary round trip.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and (np.isnan(obj) or np.isinf(obj)):
        return repr(obj)
    return obj


@dataclass
class ReportSet:
    """Named outputs queued for emission."""

    csv_rows: dict = field(default_factory=dict)   # name -> list of rows
    summaries: dict = field(default_factory=dict)  # name -> dict

    def add_trace_csv(self, name: str, quantity: str, times, values,
                      unit: str = "1"):
        rows = self.csv_rows.setdefault(name, [])
        for t, v in zip(times, values):
            rows.append((float(t), quantity, float(v), unit))

    def add_rows(self, name: str, rows):
        self.csv_rows.setdefault(name, []).extend(rows)

    def add_summary(self, name: str, payload: dict):
        self.summaries[name] = payload


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def emit_reports(reports: ReportSet, out_dir: str, config_echo: dict = None,
                 seed=None, workers: int = 1, meta: dict = None) -> dict:
    """Write CSV/JSON files plus a manifest; remove partial output on error."""
    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    written = []
    try:
        for name, rows in sorted(reports.csv_rows.items()):
            path = os.path.join(out_dir, f"{name}.csv")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("time,quantity,value,unit\n")
                for t, quantity, value, unit in rows:
                    fh.write(f"{_fmt(t)},{quantity},{_fmt(value)},{unit}\n")
            written.append(path)
        for name, payload in sorted(reports.summaries.items()):
            path = os.path.join(out_dir, f"{name}.json")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(_jsonable(payload), fh, indent=1, sort_keys=True)
                fh.write("\n")
            written.append(path)
    except OSError:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    manifest = {
        "artifact_version": __version__,
        "seed": _jsonable(seed),
        "workers": workers,
        "config": _jsonable(config_echo or {}),
        "meta": _jsonable(meta or {}),
        "started": started,
        "finished": time.time(),
        "files": [{"name": os.path.basename(p), "sha256": _sha256(p)}
                  for p in sorted(written)],
    }
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def record_to_reports(record, reports: ReportSet, name: str = "run"):
    """Flatten a RunRecord into the published CSV schema."""
    for quantity, (times, values) in sorted(record.traces.items()):
        reports.add_trace_csv(name, quantity, times, values)
    if record.times_mid is not None and len(record.times_mid):
        reports.add_trace_csv(name, "energy_residual", record.times_mid,
                              record.energy_residual)
        reports.add_trace_csv(name, "rho_min", record.times_mid, record.rho_min)
        reports.add_trace_csv(name, "rho_max", record.times_mid, record.rho_max)
        reports.add_trace_csv(name, "fixed_point_iterations",
                              record.times_mid, record.iterations)
        for pair, series in sorted(record.level_sets.items()):
            reports.add_trace_csv(
                name, f"level_set_{pair[0]:g}_{pair[1]:g}",
                record.times_mid, series)
