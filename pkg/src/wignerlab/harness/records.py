"""Measured rows of a sweep and their CSV serialization."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..fitting import SlopeFit


@dataclass(frozen=True)
class Sample:
    """Diagnostics of one (eps, t) pair."""

    eps: float
    t: float
    mass: float
    l2_norm: float
    energy: float
    husimi_min: float
    husimi_max: float
    error_l2: float          # ||f^eps(t) - g(t)||
    E_l2: float              # ||E1 + E2||
    support_radius: float    # of g(t)
    r1: float                # ||(T_eps - T_0) g|| with the potential of f~
    husimi_gap: float        # ||f~(t) - f(t)||
    g_mass: float
    g_l2_norm: float
    g_energy: float


@dataclass(frozen=True)
class EpsSummary:
    """Per-eps quantities: final error, seed report and conservation drifts."""

    eps: float
    final_error: float
    seed_gap: float
    seed_l2_distance: float
    seed_min: float
    seed_max: float
    seed_support: float
    f_mass_step_drift: float
    f_l2_step_drift: float
    f_energy_drift: float
    g_mass_step_drift: float
    g_l2_step_drift: float
    g_energy_drift: float
    classical_datum: str


@dataclass
class RunRecord:
    samples: list[Sample] = field(default_factory=list)
    summaries: list[EpsSummary] = field(default_factory=list)
    fit: SlopeFit | None = None

    def block(self, eps: float) -> list[Sample]:
        return [s for s in self.samples if s.eps == eps]

    def at_time(self, t: float, tol: float = 1e-9) -> list[Sample]:
        return [s for s in self.samples if abs(s.t - t) <= tol]

    @property
    def eps(self) -> list[float]:
        return [s.eps for s in self.summaries]


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write(rows, cls, path) -> None:
    names = [f.name for f in fields(cls)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            w.writerow([_fmt(getattr(r, n)) for n in names])


def emit_csv(record: RunRecord, path) -> None:
    """One row per (eps, t) sample, 17 significant digits, header always written."""
    _write(record.samples, Sample, path)


def emit_summary_csv(record: RunRecord, path) -> None:
    _write(record.summaries, EpsSummary, path)


def _read(cls, path):
    kinds = {f.name: f.type for f in fields(cls)}
    with open(path, newline="", encoding="utf-8") as fh:
        out = []
        for row in csv.DictReader(fh):
            out.append(cls(**{k: (v if kinds[k] == "str" else float(v)) for k, v in row.items()}))
    return out


def read_csv(path) -> list[Sample]:
    return _read(Sample, path)


def read_summary_csv(path) -> list[EpsSummary]:
    return _read(EpsSummary, path)


def write_metadata(path, config, extra: dict | None = None) -> None:
    """Timestamp and config in a side file, outside the determinism contract."""
    meta = {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "config": asdict(config)}
    if extra:
        meta.update(extra)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8")
