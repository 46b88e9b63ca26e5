"""Command-line front end.

Commands:
  solve         integrate the problem, emit a trajectory CSV
  certify       check certificate conditions, then solve and monitor
  scan          sweep initial values along a direction, emit a CSV table
  check-lemmas  run the seeded randomized trace/congruence suites
  compare       sandwich the solution between 0 and the linear majorant

Exit codes: solve 0=completed 2=blowup 3=other; certify 0=certified and
invariant held, 1=hypothesis failed, 4=certified but the solver-side
monitor was violated (accuracy alarm); compare and check-lemmas 0=pass
1=fail; configuration errors exit 65.

Set RICCATI_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from .certify import (MONITOR_TOL, NOT_CERTIFIED, HOLDS, CertReport,
                      certify_problem, compare_linear_majorant,
                      monitor_invariant, scan_initial_values)
from .config import RunConfig, parse_config
from .errors import ConfigError, HypothesisViolation, RiccatiError, \
    SingularMatrixError
from .integrate import COMPLETED, BLOWUP, integrate_riccati
from .lemmas import run_lemma_suites

log = logging.getLogger("riccati")

EXIT_OK = 0
EXIT_FAILED_HYPOTHESIS = 1
EXIT_BLOWUP = 2
EXIT_OTHER_TERMINATION = 3
EXIT_MONITOR_ANOMALY = 4
EXIT_CONFIG = 65
EXIT_INTERNAL = 70


def _fmt(x) -> str:
    """17 significant digits: doubles round-trip exactly."""
    if x is None:
        return ""
    return f"{float(x):.17g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(header: list[str], rows: list[list[str]],
         comments: list[str] = ()) -> str:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    lines += [f"# {c}" for c in comments]
    return "\n".join(lines) + "\n"


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config)
    prob = cfg.problem
    if getattr(args, "horizon", None) is not None:
        prob = dataclasses.replace(prob, horizon=args.horizon)
        cfg = dataclasses.replace(cfg, problem=prob)
    cert = cfg.certificate
    if cert is not None:
        updates = {}
        if getattr(args, "grid_density", None) is not None:
            updates["grid_density"] = args.grid_density
        if getattr(args, "tol", None) is not None:
            updates["tol"] = args.tol
        if updates:
            cfg = dataclasses.replace(
                cfg, certificate=dataclasses.replace(cert, **updates))
    return cfg


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    opts = cfg.opts
    if args.tol is not None:
        opts = dataclasses.replace(opts, rtol=args.tol, atol=args.tol)
    traj = integrate_riccati(cfg.problem, cfg.Z0, opts)
    n = cfg.problem.n
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_Z_{i}_{j}", f"im_Z_{i}_{j}"]
    header += ["fro_norm", "min_eig_herm", "step_size"]
    rows = []
    for d, Z in zip(traj.diagnostics, traj.Z_samples):
        row = [_fmt(d.t)]
        for i in range(n):
            for j in range(n):
                row += [_fmt(Z[i, j].real), _fmt(Z[i, j].imag)]
        row += [_fmt(d.fro_norm), _fmt(d.min_eig_herm), _fmt(d.step_size)]
        rows.append(row)
    status_line = f"status={traj.status} t_end={_fmt(traj.t_end)}"
    _write_text(args.out, _csv(header, rows, [status_line]))
    print(status_line, file=sys.stderr)
    if traj.status == COMPLETED:
        return EXIT_OK
    if traj.status == BLOWUP:
        print(f"BLOWUP T≈{traj.t_end:.3f}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OTHER_TERMINATION


def _report_dict(rep: CertReport, monitor=None, traj=None) -> dict:
    out = {
        "verdict": rep.verdict,
        "wording": (f"hypotheses verified numerically on a grid of "
                    f"{rep.grid_points} points (density {rep.grid_density} "
                    f"per unit time) with tolerance {rep.tol:.3e}; "
                    f"not an analytic proof"),
        "conditions": {
            "I": {"passed": rep.condition_I.passed,
                  "worst_hermiticity_defect": rep.condition_I.worst_defect,
                  "worst_defect_t": rep.condition_I.worst_defect_t,
                  "worst_min_eig": rep.condition_I.worst_min_eig,
                  "worst_min_eig_t": rep.condition_I.worst_min_eig_t},
            "II": {"passed": rep.condition_II.passed,
                   "mu_supplied": rep.condition_II.mu_supplied,
                   "worst_residual": rep.condition_II.worst_residual,
                   "worst_t": rep.condition_II.worst_t,
                   "mu_samples": [[t, [m.real, m.imag]]
                                  for t, m in rep.condition_II.mu_samples]},
            "III": {"passed": rep.condition_III.passed,
                    "worst_max_eig": rep.condition_III.worst_max_eig,
                    "worst_t": rep.condition_III.worst_t},
        },
        "initial": {"classification": rep.initial.classification,
                    "gap_min_eig": rep.initial.gap_min_eig,
                    "gap_max_eig": rep.initial.gap_max_eig,
                    "u0_doubled_pd": rep.initial.u0_doubled_pd},
        "grid": {"points": rep.grid_points, "density": rep.grid_density},
        "tolerances": {"condition_tol": rep.tol, "monitor_tol": MONITOR_TOL},
    }
    if monitor is not None:
        out["monitor"] = {
            "verdict": monitor.verdict,
            "branch": monitor.branch,
            "worst_g_min": monitor.worst_g_min,
            "records": [{"t": r.t, "g_min_eig": r.g_min_eig,
                         "g_alt_min_eig": r.g_alt_min_eig,
                         "l_doubled_min_eig": r.l_doubled_min_eig,
                         "violation": r.violation,
                         "singular_u": r.singular_u}
                        for r in monitor.records],
        }
    if traj is not None:
        out["trajectory"] = {"status": traj.status, "t_end": traj.t_end,
                             "accepted_steps": traj.n_accepted,
                             "rejected_steps": traj.n_rejected}
    return out


def _print_report(rep: CertReport, monitor=None, traj=None) -> None:
    c1, c2, c3 = rep.condition_I, rep.condition_II, rep.condition_III
    print(f"condition I   : {'PASS' if c1.passed else 'FAIL'}  "
          f"worst defect {c1.worst_defect:.3e} at t={c1.worst_defect_t:.6g}, "
          f"worst min eig {c1.worst_min_eig:+.3e} at t={c1.worst_min_eig_t:.6g}")
    print(f"condition II  : {'PASS' if c2.passed else 'FAIL'}  "
          f"worst residual {c2.worst_residual:.3e} at t={c2.worst_t:.6g} "
          f"(mu {'supplied' if c2.mu_supplied else 'extracted'})")
    print(f"condition III : {'PASS' if c3.passed else 'FAIL'}  "
          f"worst max eig {c3.worst_max_eig:+.3e} at t={c3.worst_t:.6g}")
    print(f"initial value : {rep.initial.classification} "
          f"(gap min eig {rep.initial.gap_min_eig:+.3e})")
    print(f"verdict       : {rep.verdict}  [grid {rep.grid_points} points, "
          f"tol {rep.tol:.1e}; numerical check, not an analytic proof]")
    if monitor is not None:
        print(f"monitor       : {monitor.verdict} "
              f"(worst gap min eig {monitor.worst_g_min:+.3e})")
    if traj is not None:
        print(f"trajectory    : {traj.status} t_end={traj.t_end:.6g}")


def cmd_certify(args) -> int:
    cfg = _load_config(args)
    if cfg.certificate is None:
        print("certify: no certificate section in config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = certify_problem(cfg.certificate, cfg.problem, cfg.Z0)
    except SingularMatrixError as exc:
        print(f"SINGULAR_{exc.what} at t={exc.t:.6g}: {exc}", file=sys.stderr)
        return EXIT_FAILED_HYPOTHESIS
    monitor = None
    traj = None
    code = EXIT_OK
    if rep.verdict == NOT_CERTIFIED:
        code = EXIT_FAILED_HYPOTHESIS
    elif not args.no_solve:
        traj = integrate_riccati(cfg.problem, cfg.Z0, cfg.opts)
        monitor = monitor_invariant(cfg.certificate, cfg.problem, traj, rep)
        if traj.status != COMPLETED or monitor.verdict != HOLDS:
            print("SOLVER-ACCURACY ANOMALY: certified run failed downstream "
                  f"(status={traj.status}, monitor={monitor.verdict})",
                  file=sys.stderr)
            code = EXIT_MONITOR_ANOMALY
    _print_report(rep, monitor, traj)
    if args.out:
        payload = json.dumps(_report_dict(rep, monitor, traj),
                             indent=2, sort_keys=True) + "\n"
        _write_text(args.out, payload)
    return code


def _scan_values(args, cfg: RunConfig) -> list[float]:
    if args.scan:
        spec = args.scan
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError("scan range must be start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ConfigError("scan count must be >= 1")
            return list(np.linspace(start, stop, count))
        return [float(v) for v in spec.split(",") if v.strip()]
    if cfg.scan_values:
        return list(cfg.scan_values)
    raise ConfigError("no scan values: pass --scan or a config scan section")


def cmd_scan(args) -> int:
    cfg = _load_config(args)
    if cfg.certificate is None:
        print("scan: no certificate section in config", file=sys.stderr)
        return EXIT_CONFIG
    values = _scan_values(args, cfg)
    base = cfg.scan_base if cfg.scan_base is not None else cfg.Z0
    direction = (cfg.scan_direction if cfg.scan_direction is not None
                 else np.eye(cfg.problem.n, dtype=complex))
    family = [(a, base + a * direction) for a in values]
    rows = scan_initial_values(cfg.certificate, cfg.problem, family, cfg.opts)
    header = ["parameter", "initial_class", "certified", "status",
              "t_escape", "gap_min_eig"]
    table = [[_fmt(r.parameter), r.initial_class, str(r.certified).lower(),
              r.status, _fmt(r.t_escape) if r.t_escape is not None else "",
              _fmt(r.gap_min_eig)] for r in rows]
    _write_text(args.out, _csv(header, table))
    return EXIT_OK


def cmd_check_lemmas(args) -> int:
    results = run_lemma_suites(args.seed, args.trials)
    ok = True
    for r in results:
        ok = ok and r.passed
        print(f"lemma {r.name:20s}: {r.trials} trials, worst residual "
              f"{r.worst_residual:.3e} (tol {r.tol:.1e}) "
              f"{'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAILED_HYPOTHESIS


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    tol = args.tol if args.tol is not None else 1e-9
    try:
        rep = compare_linear_majorant(cfg.problem, cfg.Z0, cfg.opts, tol=tol,
                                      grid_density=args.grid_density or 64.0)
    except HypothesisViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILED_HYPOTHESIS
    header = ["t", "solution_min_eig", "gap_min_eig"]
    table = [[_fmt(r.t), _fmt(r.solution_min_eig), _fmt(r.gap_min_eig)]
             for r in rep.rows]
    comment = (f"passed={str(rep.passed).lower()} "
               f"worst_solution_min={_fmt(rep.worst_solution_min)} "
               f"worst_gap_min={_fmt(rep.worst_gap_min)}")
    _write_text(args.out, _csv(header, table, [comment]))
    print(comment, file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAILED_HYPOTHESIS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="riccati",
        description="Integrate matrix Riccati ODEs, detect finite escape "
                    "times, and certify global existence numerically.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--horizon", type=float, default=None,
                        help="override the problem horizon")
        sp.add_argument("--tol", type=float, default=None,
                        help="override the relevant tolerance")
        sp.add_argument("--grid-density", dest="grid_density", type=float,
                        default=None, help="condition-check grid density "
                        "(points per unit time)")

    sp = sub.add_parser("solve", help="integrate and emit a trajectory CSV")
    common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("certify", help="verify certificate conditions, "
                                        "then solve and monitor")
    common(sp)
    sp.add_argument("--no-solve", action="store_true",
                    help="skip integration and monitoring")
    sp.set_defaults(fn=cmd_certify)

    sp = sub.add_parser("scan", help="sweep initial values Z0 + a*direction")
    common(sp)
    sp.add_argument("--scan", default=None,
                    help="parameter values: 'a,b,c' or 'start:stop:count'")
    sp.set_defaults(fn=cmd_scan)

    sp = sub.add_parser("check-lemmas", help="run the randomized property suites")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=1000)
    sp.set_defaults(fn=cmd_check_lemmas)

    sp = sub.add_parser("compare", help="check 0 <= Z <= linear majorant")
    common(sp)
    sp.set_defaults(fn=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("RICCATI_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check-lemmas" and args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except RiccatiError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
