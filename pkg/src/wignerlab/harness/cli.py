"""Command line entry point: ``wignerlab {evolve,converge,checks,seed-check}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .. import phase_space as ps
from ..fitting import fit_slope
from ..husimi import classical_seed
from ..initial_data import coherent_mixture
from ..vlasov import make_vlasov_run, vlasov_step
from ..wigner import WignerRun, evolve
from .config import ConfigError, RunConfig, check_resolution, dump_config, load_config
from .experiments import CONVERGENCE_RATE, run_checks, run_convergence
from .records import emit_csv, emit_summary_csv, write_metadata

log = logging.getLogger("wignerlab")


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.out:
        cfg = RunConfig(**{**asdict(cfg), "out": args.out})
    return cfg


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_evolve(args) -> int:
    cfg = _config(args)
    eps = args.eps if args.eps is not None else cfg.eps[0]
    cfg = RunConfig(**{**asdict(cfg), "eps": (eps,)})
    check_resolution(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    grid, phi = cfg.grid(), cfg.phi()
    f0 = coherent_mixture(cfg.profile(), eps, grid)
    g0 = classical_seed(f0, cfg.M0).g0 if cfg.classical_datum == "seed" else cfg.profile().sample(grid)
    fT = evolve(WignerRun(f0, phi, cfg.dt), cfg.T).state
    gT = evolve(make_vlasov_run(g0, phi, cfg.dt, cfg.M0), cfg.T, stepper=vlasov_step).state
    for name, f in (("f0", f0), ("g0", g0), ("fT", fT), ("gT", gT)):
        ps.dump(f, out / f"{name}.wvf")
    err = ps.l2_norm(fT - gT.with_values(gT.values, epsilon=fT.epsilon))
    write_metadata(out / "metadata.json", cfg, {"command": "evolve", "eps": eps})
    _say(args, f"eps={eps:g} T={cfg.T:g}  ||f - g||_L2 = {err:.10g}  fields written to {out}")
    return 0


def cmd_converge(args) -> int:
    cfg = _config(args)
    rec = run_convergence(cfg)
    out = Path(cfg.out)
    emit_csv(rec, out / "samples.csv")
    emit_summary_csv(rec, out / "summary.csv")
    write_metadata(out / "metadata.json", cfg, {"command": "converge", "slope": rec.fit.slope})
    for s in rec.summaries:
        _say(args, f"eps={s.eps:<8g} final error {s.final_error:.10g}")
    _say(args, f"fitted slope {rec.fit.slope:.6g} (rate {CONVERGENCE_RATE:.6g} required)")
    for e, r in zip(rec.eps, rec.fit.residuals):
        _say(args, f"  residual at eps={e:g}: {r:+.3e}")
    if rec.fit.n_points < 2:
        _say(args, "insufficient points for a fit")
        return 0
    return 0 if rec.fit.slope >= CONVERGENCE_RATE else 1


def cmd_checks(args) -> int:
    cfg = _config(args)
    report = run_checks(cfg)
    out = Path(cfg.out)
    if report.record is not None:
        emit_csv(report.record, out / "samples.csv")
        emit_summary_csv(report.record, out / "summary.csv")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "checks.csv", "w", encoding="utf-8") as fh:
        fh.write("criterion,name,status,value,target\n")
        for r in report.rows:
            fh.write(f"{r.criterion},{r.name},{r.status},{r.value:.17g},\"{r.target}\"\n")
    write_metadata(out / "metadata.json", cfg, {"command": "checks", "passed": report.passed})
    for r in report.rows:
        _say(args, r.line())
    _say(args, "ALL CHECKS PASSED" if report.passed else "SOME CHECKS FAILED")
    return 0 if report.passed else 1


def cmd_seed_check(args) -> int:
    cfg = _config(args)
    grid = cfg.grid()
    rows = []
    for e in cfg.eps:
        rep = classical_seed(coherent_mixture(cfg.profile(), e, grid), cfg.M0)
        rows.append((e, rep))
        _say(args, f"eps={e:<8g} |1-N|={rep.gap:.6e} ||f0-g0||={rep.l2_distance:.6e} "
                   f"H3={rep.h3_norm:.6g} support={rep.support_radius:g} min={rep.g0.values.min():.3e}")
    ok = all(rep.support_radius <= cfg.M0 + grid.hk for _, rep in rows)
    ok &= all(rep.g0.values.min() >= -1e-12 * rep.g0.values.max() for _, rep in rows)
    if len(rows) > 1:
        eps = [e for e, _ in rows]
        for label, vals in (("|1-N|", [r.gap for _, r in rows]),
                            ("||f0-g0||", [r.l2_distance for _, r in rows])):
            s = fit_slope(eps, vals).slope
            _say(args, f"slope of {label}: {s:.6g} (>= 0.9 required)")
            ok &= s >= 0.9
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "seed.csv", "w", encoding="utf-8") as fh:
        fh.write("eps,normalization,gap,l2_distance,h3_norm,support_radius\n")
        for e, rep in rows:
            r = rep.row()
            fh.write(",".join(format(v, ".17g") for v in (e, *r.values())) + "\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--quiet", action="store_true", help="suppress console output")
    p = argparse.ArgumentParser(prog="wignerlab", description="Wigner-Hartree to Vlasov convergence experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("evolve", parents=[common], help="single-eps run, dumps fields")
    ev.add_argument("--eps", type=float, help="eps to run (default: first of the config list)")
    ev.set_defaults(func=cmd_evolve)
    sub.add_parser("converge", parents=[common], help="eps sweep and rate fit").set_defaults(func=cmd_converge)
    sub.add_parser("checks", parents=[common], help="full invariant suite").set_defaults(func=cmd_checks)
    sub.add_parser("seed-check", parents=[common], help="classical seed report").set_defaults(func=cmd_seed_check)
    sub.add_parser("show-config", parents=[common], help="print the effective config").set_defaults(
        func=lambda a: (print(dump_config(_config(a)), end=""), 0)[1])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
