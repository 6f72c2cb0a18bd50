"""Command-line entry point.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from rydghz.lindblad import NonUniqueSteadyState, NumericalFailure, fidelity, population, steady_state
from rydghz.scenario import (
    PRESETS,
    ScenarioError,
    build_model,
    compare,
    headline,
    load_scenario,
    named_state,
    read_csv,
    run_preset,
    run_scenario,
    write_csv,
)
from rydghz.scheme1 import ConstraintError, gamma_eff_oracle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _cmd_simulate(args) -> int:
    s = load_scenario(args.scenario)
    try:
        ts = run_scenario(s)
    except ValueError as exc:
        # step size, time range and similar run settings
        raise ScenarioError(str(exc)) from None
    out = args.output or s.output
    if out:
        write_csv(out, ts)
        print(f"wrote {out} ({len(ts.times)} samples)")
    for k in ts.labels:
        print(f"{k}(t={ts.times[-1]:g}) = {ts.final(k):.6f}")
    d = ts.diagnostics
    print(f"trace drift {d['trace_drift']:.2e}, min eigenvalue {d['min_eigenvalue']:.2e}, steps {d['steps']}")
    return EXIT_OK


def _cmd_preset(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ts, path = run_preset(args.name, out_dir)
    print(f"wrote {path}")
    for expr, val, ref, tol in headline(args.name, ts):
        ok = abs(val - ref) <= tol
        print(f"{expr} = {val:.6f}  reference {ref:.4f} +/- {tol:g}  {'within' if ok else 'outside'}")
    return EXIT_OK


def _cmd_steady(args) -> int:
    s = load_scenario(args.scenario)
    model = build_model(s)
    if not hasattr(model, "hterms"):
        raise ScenarioError("steady state needs a single time-independent model, not a switching schedule")
    try:
        rho, w = steady_state(model, return_eigenvalues=True)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    print(f"|lambda_1| = {abs(w[1]):.6e}")
    for name in s.observables or ("P_GHZ-", "P_GHZ+"):
        v = named_state(s, name.partition("_")[2])
        val = fidelity(rho, v) if name.startswith("F_") else population(rho, v)
        print(f"{name} = {val:.10f}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    try:
        fitted, closed = gamma_eff_oracle(
            args.omega0, args.gamma, t_end=args.t_end, enforce_regime=not args.no_regime_guard
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    ratio = fitted / closed if closed else float("nan")
    print(f"fitted {fitted:.6g}  closed-form {closed:.6g}  ratio {ratio:.4f}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    try:
        a, b = read_csv(args.a), read_csv(args.b)
        report = compare(a, b)
    except (OSError, ValueError) as exc:
        raise ScenarioError(str(exc)) from None
    worst = 0.0
    for dev in report.values():
        worst = max(worst, dev.max_abs)
        print(f"{dev.label}: max |diff| = {dev.max_abs:.6e} at t = {dev.at_time:g}")
    if args.tol is not None and worst > args.tol:
        print(f"exceeds tolerance {args.tol:g}")
        return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rydghz", description="Dissipative GHZ preparation in Rydberg atoms")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", help="CSV path (overrides the scenario's output key)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("preset", help="run a named figure configuration")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("steady", help="steady state of a time-independent scenario")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_steady)

    p = sub.add_parser("oracle", help="reference calculations")
    osub = p.add_subparsers(dest="oracle", required=True)
    g = osub.add_parser("gamma-eff", help="fitted vs closed-form effective decay rate")
    g.add_argument("--omega0", type=float, required=True)
    g.add_argument("--gamma", type=float, required=True)
    g.add_argument("--t-end", type=float, default=None)
    g.add_argument("--no-regime-guard", action="store_true")
    g.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("compare", help="max deviation between two CSV trajectories")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tol", type=float, default=None, help="exit 1 when any deviation exceeds this")
    p.set_defaults(func=_cmd_compare)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ScenarioError, ConstraintError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, NonUniqueSteadyState, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
