"""Epsilon sweeps, convergence fits and the invariant check suite."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import phase_space as ps
from ..fitting import fit_slope
from ..husimi import (classical_seed, error_E, husimi_transform, second_moment_shift)
from ..initial_data import admissibility_report, coherent_mixture
from ..oracle import (coherent_state, excited_state, hs_bridge, make_ensemble, oracle_compare,
                      wigner_of_ensemble)
from ..phase_space import PhaseField
from ..vlasov import make_vlasov_run, residual_r1, support_radius, vlasov_step
from ..wigner import WignerRun, energy, step
from .config import RunConfig, check_resolution
from .records import EpsSummary, RunRecord, Sample

log = logging.getLogger(__name__)

CONVERGENCE_RATE = 2.0 / 7.0


# --- trajectories ---------------------------------------------------------

@dataclass
class Trajectory:
    snapshots: list[PhaseField]
    mass_step_drift: float
    l2_step_drift: float
    energy_drift: float


def _trajectory(run, advance, n_steps: int, every: int, phi) -> Trajectory:
    """Advance ``run`` ``n_steps`` times, recording per-step conservation drifts."""
    state = run.state
    m0, l0, e0 = ps.integrate(state), ps.l2_norm(state), energy(state, phi)
    m_prev, l_prev = m0, l0
    dm = dl = de = 0.0
    snaps = [state]
    for i in range(1, n_steps + 1):
        run = advance(run)
        s = run.state
        m, l2 = ps.integrate(s), ps.l2_norm(s)
        dm = max(dm, abs(m - m_prev) / abs(m0))
        dl = max(dl, abs(l2 - l_prev) / l0)
        de = max(de, abs(energy(s, phi) - e0) / abs(e0))
        m_prev, l_prev = m, l2
        if i % every == 0:
            snaps.append(s)
    return Trajectory(snaps, dm, dl, de)


def vlasov_trajectory(config: RunConfig, g0: PhaseField) -> Trajectory:
    phi = config.phi()
    run = make_vlasov_run(g0, phi, config.dt, config.M0)
    every = config.steps(config.diag_every)
    return _trajectory(run, vlasov_step, config.steps(config.T), every, phi)


def wigner_trajectory(config: RunConfig, f0: PhaseField) -> Trajectory:
    phi = config.phi()
    every = config.steps(config.diag_every)
    return _trajectory(WignerRun(f0, phi, config.dt), step, config.steps(config.T), every, phi)


def _eps_job(args):
    config, eps, g_traj = args
    phi = config.phi()
    f0 = coherent_mixture(config.profile(), eps, config.grid())
    seed = classical_seed(f0, config.M0)
    if g_traj is None:
        g_traj = vlasov_trajectory(config, seed.g0)
    f_traj = wigner_trajectory(config, f0)
    samples = []
    for f, g in zip(f_traj.snapshots, g_traj.snapshots):
        ft = husimi_transform(f)
        samples.append(Sample(
            eps=float(eps), t=round(f.time, 12),
            mass=ps.integrate(f), l2_norm=ps.l2_norm(f), energy=energy(f, phi),
            husimi_min=float(ft.values.min()), husimi_max=float(ft.values.max()),
            error_l2=float(np.sqrt(np.sum((f.values - g.values) ** 2) * f.grid.cell)),
            E_l2=ps.l2_norm(error_E(f, phi)),
            support_radius=support_radius(g),
            r1=residual_r1(g, ft, phi),
            husimi_gap=ps.l2_norm(ft - f),
            g_mass=ps.integrate(g), g_l2_norm=ps.l2_norm(g), g_energy=energy(g, phi),
        ))
    summary = EpsSummary(
        eps=float(eps), final_error=samples[-1].error_l2,
        seed_gap=seed.gap, seed_l2_distance=seed.l2_distance,
        seed_min=float(seed.g0.values.min()), seed_max=float(seed.g0.values.max()),
        seed_support=seed.support_radius,
        f_mass_step_drift=f_traj.mass_step_drift, f_l2_step_drift=f_traj.l2_step_drift,
        f_energy_drift=f_traj.energy_drift,
        g_mass_step_drift=g_traj.mass_step_drift, g_l2_step_drift=g_traj.l2_step_drift,
        g_energy_drift=g_traj.energy_drift,
        classical_datum=config.classical_datum,
    )
    log.info("eps=%g done: final error %.6g", eps, summary.final_error)
    return samples, summary, f_traj.snapshots[-1]


def _workers(config: RunConfig) -> int:
    if config.workers > 0:
        return min(config.workers, len(config.eps))
    return max(1, min(len(config.eps), os.cpu_count() or 1))


@dataclass
class SweepResult(RunRecord):
    finals: dict = field(default_factory=dict)


def run_convergence(config: RunConfig) -> SweepResult:
    """Run the eps sweep and fit ``log(final error)`` against ``log eps``.

    Sweep entries are independent and may run in separate processes; the
    record is assembled in config order.
    """
    check_resolution(config)
    g_traj = None
    if config.classical_datum == "profile":
        g_traj = vlasov_trajectory(config, config.profile().sample(config.grid()))
    jobs = [(config, e, g_traj) for e in config.eps]
    n = _workers(config)
    if n == 1:
        results = [_eps_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_eps_job, jobs))
    rec = SweepResult()
    for samples, summary, final in results:
        rec.samples.extend(samples)
        rec.summaries.append(summary)
        rec.finals[summary.eps] = final
    rec.fit = fit_slope(rec.eps, [s.final_error for s in rec.summaries])
    return rec


def time_shape(samples: list[Sample]) -> float:
    """Excess growth of ``log(1 + log(envelope ratio))`` in the second half of the run.

    A doubly exponential majorant makes this quantity grow at most linearly
    in time; the returned value is ``second-half increment - 2 * first-half
    increment`` (non-positive when consistent).
    """
    e = np.maximum.accumulate(np.array([s.error_l2 for s in samples]))
    L = np.log1p(np.log(e / e[0]))
    mid = len(L) // 2
    return float((L[-1] - L[mid]) - 2.0 * (L[mid] - L[0]))


# --- check suite ----------------------------------------------------------

PASS, FAIL, INFO, INSUFFICIENT = "pass", "fail", "info", "insufficient points"


@dataclass(frozen=True)
class CheckRow:
    criterion: str
    name: str
    status: str
    value: float
    target: str

    def line(self) -> str:
        return f"[{self.criterion:>2}] {self.status.upper():<19} {self.name:<32} {self.value:<24.10g} {self.target}"


@dataclass
class CheckReport:
    rows: list[CheckRow]
    record: SweepResult | None = None

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.rows)

    def by_name(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def criterion(self, c: str) -> list[CheckRow]:
        return [r for r in self.rows if r.criterion == c]


def _row(crit, name, ok, value, target):
    return CheckRow(crit, name, PASS if ok else FAIL, float(value), target)


def _slope_row(crit, name, x, y, lo, hi, target):
    if len(x) < 2:
        return CheckRow(crit, name, INSUFFICIENT, float("nan"), target)
    s = fit_slope(x, y)
    if s.n_points < 2:
        return CheckRow(crit, name, INSUFFICIENT, float("nan"), target)
    return _row(crit, name, lo <= s.slope <= hi, s.slope, target)


def benchmark_ensemble(config: RunConfig):
    """Three coherent packets, two of them converging on the third."""
    g, eps = config.oracle_grid(), config.oracle_eps
    states = [coherent_state(g, eps, -1.0, 1.5), coherent_state(g, eps, 0.0, 0.0),
              coherent_state(g, eps, 1.0, -1.5)]
    return make_ensemble(g, eps, states, [0.3, 0.4, 0.3])


def bridge_ensembles(config: RunConfig, eps: float | None = None):
    """Pure coherent state, Wigner-negative excited state, and an orthogonal pair."""
    g = config.oracle_grid()
    eps = config.oracle_eps if eps is None else eps
    return {
        "coherent": make_ensemble(g, eps, [coherent_state(g, eps, 0.5, 0.25)]),
        "excited": make_ensemble(g, eps, [excited_state(g, eps)]),
        "pair": make_ensemble(g, eps, [coherent_state(g, eps), excited_state(g, eps)], [0.5, 0.5]),
    }


def oracle_check(config: RunConfig, dt: float | None = None):
    """Discrepancies at ``dt`` and ``dt/2`` on the interacting benchmark."""
    dt = config.dt if dt is None else dt
    ens = benchmark_ensemble(config)
    f0 = wigner_of_ensemble(ens)
    phi = config.phi()
    return (oracle_compare(ens, f0, phi, config.oracle_T, dt),
            oracle_compare(ens, f0, phi, config.oracle_T, dt / 2))


def run_checks(config: RunConfig, record: SweepResult | None = None) -> CheckReport:
    groups = set(config.checks)
    sweep_groups = {"convergence", "error_terms", "residual", "husimi", "conservation",
                    "positivity", "moments", "seed", "support"}
    if record is None and groups & sweep_groups:
        record = run_convergence(config)
    rows: list[CheckRow] = []
    phi = config.phi()
    grid = config.grid()
    eps = record.eps if record else list(config.eps)
    T = config.T

    if "convergence" in groups:
        finals = [s.final_error for s in record.summaries]
        rows.append(_slope_row("1", "convergence_slope", eps, finals, CONVERGENCE_RATE, np.inf,
                               ">= 2/7"))
        worst = max(time_shape(record.block(e)) for e in eps)
        rows.append(_row("1", "error_time_shape", worst <= 1e-9, worst,
                         "late log-log growth <= 2x early"))
        fields0 = {e: coherent_mixture(config.profile(), e, grid) for e in eps}
        adm = admissibility_report(fields0, config.M0) if len(eps) > 1 else {"flags": {}}
        for flag, ok in adm["flags"].items():
            rows.append(CheckRow("1", f"datum_{flag}", INFO, float(ok), "informational"))

    if "error_terms" in groups:
        at = record.at_time(config.t_error)
        rows.append(_slope_row("2", "E_slope", [s.eps for s in at], [s.E_l2 for s in at],
                               0.85, 1.15, "1 +- 0.15"))
    if "residual" in groups:
        at = record.at_time(T)
        rows.append(_slope_row("3", "r1_slope", [s.eps for s in at], [s.r1 for s in at],
                               1.8, 2.2, "2 +- 0.2"))
    if "husimi" in groups:
        at = record.at_time(T)
        rows.append(_slope_row("4", "husimi_proximity_slope", [s.eps for s in at],
                               [s.husimi_gap for s in at], 0.85, 1.15, "1 +- 0.15"))

    if "conservation" in groups:
        sm = record.summaries
        for who in ("f", "g"):
            dm = max(getattr(s, f"{who}_mass_step_drift") for s in sm)
            dl = max(getattr(s, f"{who}_l2_step_drift") for s in sm)
            de = max(getattr(s, f"{who}_energy_drift") for s in sm)
            label = "wigner" if who == "f" else "vlasov"
            rows.append(_row("5", f"{label}_mass_step_drift", dm <= 1e-12, dm, "<= 1e-12"))
            rows.append(_row("5", f"{label}_l2_step_drift", dl <= 1e-12, dl, "<= 1e-12"))
            rows.append(_row("5", f"{label}_energy_drift", de <= 1e-6, de, "<= 1e-6 relative"))

    if "positivity" in groups:
        worst = min(s.husimi_min / s.husimi_max for s in record.samples)
        rows.append(_row("6", "husimi_positivity", worst >= -1e-12, worst, ">= -1e-12 max"))

    if "hs_bridge" in groups:
        ens = bridge_ensembles(config)
        for name, e in ens.items():
            _, _, ratio = hs_bridge(e)
            rows.append(_row("7", f"hs_ratio_{name}", abs(ratio - 1) <= 1e-6, ratio, "1 +- 1e-6"))
        neg = float(wigner_of_ensemble(ens["excited"]).values.min())
        rows.append(_row("7", "excited_wigner_negative", neg < 0, neg, "< 0"))

    if "moments" in groups:
        pair = sorted({eps[0], eps[-1]}, reverse=True)
        worst = 0.0
        for e in pair:
            fields = [coherent_mixture(config.profile(), e, grid),
                      record.finals[e] if record and e in record.finals else None,
                      wigner_of_ensemble(bridge_ensembles(config, e)["excited"])]
            for f in fields:
                if f is None:
                    continue
                before, after = second_moment_shift(f)
                worst = max(worst, abs((after - before) - f.grid.d * e / 2))
        rows.append(_row("8", "second_moment_shift", worst <= 1e-10, worst, "d eps/2 +- 1e-10"))

    if "seed" in groups:
        sm = record.summaries
        rows.append(_slope_row("9", "seed_gap_slope", eps, [s.seed_gap for s in sm], 0.9, np.inf,
                               ">= 0.9"))
        rows.append(_slope_row("9", "seed_l2_slope", eps, [s.seed_l2_distance for s in sm], 0.9,
                               np.inf, ">= 0.9"))
        worst = min(s.seed_min / s.seed_max for s in sm)
        rows.append(_row("9", "seed_nonnegative", worst >= -1e-12, worst, ">= -1e-12 max"))
        sup = max(s.seed_support for s in sm)
        rows.append(_row("9", "seed_support", sup <= config.M0 + grid.hk, sup, "<= M0 + hk"))

    if "oracle" in groups:
        a, b = oracle_check(config)
        rows.append(_row("10", "oracle_discrepancy", a <= 1e-5, a, "<= 1e-5"))
        rows.append(_row("10", "oracle_dt_ratio", 3.0 <= a / b <= 5.0, a / b, "~4 (3..5)"))

    if "support" in groups:
        excess = max(s.support_radius - (config.M0 + phi.grad_sup * s.t + 3 * grid.hk)
                     for s in record.samples)
        rows.append(_row("11", "support_bound_margin", excess <= 0, excess,
                         "radius - (M0 + |grad phi| t + 3hk) <= 0"))

    return CheckReport(rows, record)
