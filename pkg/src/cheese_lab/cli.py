"""Build Swiss-cheese plans, verify them and summarise the ledgers.

Subcommands: ``build``, ``verify-ideals``, ``verify-cole``, ``report``.

Exit codes: 0 everything passed, 1 a verification (or placement) failure,
2 a configuration or I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .builder import PlacementError
from .config import ConfigError, RunConfig, load_config
from .ledger import Ledger, LedgerFormatError, parse_params, read_ledger
from .plan_io import PlanFormatError, plan_for_config, read_plan, write_plan
from .render import render_convergence, render_plan
from .suites import run_cole_suite, run_geometry_suite, run_ideal_suites

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args, plan=None) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    elif plan is not None:
        cfg = RunConfig(mode=plan.mode, N=plan.N, r=plan.r, m_per_family=plan.m_per_family,
                        mesh=plan.mesh, s_min=plan.s_min, seed=plan.seed)
    else:
        raise UsageError("--config is required")
    try:
        return cfg.with_overrides(pass_tol=args.tol, seed=args.seed, out=args.out)
    except ConfigError as exc:
        raise ConfigError(f"command line: {exc}") from None


def _plan_and_config(args):
    plan = read_plan(args.plan) if args.plan else None
    cfg = _config(args, plan)
    if plan is None:
        plan = plan_for_config(cfg)
    return plan, cfg


def cmd_build(args) -> int:
    cfg = _config(args)
    plan = plan_for_config(cfg)
    out = Path(cfg.out)
    write_plan(plan, out / "plan.toml")
    render_plan(plan, out / "plan.svg")
    print(f"wrote {out / 'plan.toml'} ({len(plan.holes)} holes, radius sum {plan.radius_sum:.17g})")
    return EXIT_OK


def _finish(led: Ledger, path: Path) -> int:
    led.write(path)
    for suite, (ok, total) in led.suites().items():
        print(f"{suite:20s} {ok}/{total}")
    for r in led.failures():
        print(f"FAIL {r.test_id}: residual {r.residual:.3g} tolerance {r.tolerance:.3g} {r.params}")
    print(f"wrote {path}")
    return EXIT_OK if led.ok else EXIT_FAIL


def cmd_verify_ideals(args) -> int:
    plan, cfg = _plan_and_config(args)
    led = run_ideal_suites(plan, cfg)
    run_geometry_suite(plan, sorted(cfg.truncations)[len(cfg.truncations) // 2], 100, cfg.seed, led)
    return _finish(led, Path(cfg.out) / "ideals.csv")


def cmd_verify_cole(args) -> int:
    plan, cfg = _plan_and_config(args)
    led = run_cole_suite(plan, cfg)
    return _finish(led, Path(cfg.out) / "cole.csv")


def cmd_report(args) -> int:
    if not args.ledgers:
        raise UsageError("report needs at least one ledger")
    ledgers = [(p, read_ledger(p)) for p in args.ledgers]
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    lines = ["# Verification summary", "", "| ledger | suite | passed | total |", "|---|---|---|---|"]
    totals: dict[str, list[int]] = {}
    series: dict[str, list[tuple[int, float]]] = {}
    for path, led in ledgers:
        for suite, (ok, total) in led.suites().items():
            lines.append(f"| {Path(path).name} | {suite} | {ok} | {total} |")
            t = totals.setdefault(suite, [0, 0])
            t[0] += ok
            t[1] += total
        for r in led.rows:
            if r.suite == "separation":
                p = parse_params(r.params)
                if "n" in p and "rho1" in p:
                    series.setdefault(f"rho=({p['rho1']},{p['rho2']})", []).append((int(p["n"]), r.residual))
    lines += ["", "| suite | passed | total |", "|---|---|---|"]
    lines += [f"| {s} | {ok} | {total} |" for s, (ok, total) in totals.items()]
    all_ok = all(led.ok for _, led in ledgers)
    lines += ["", f"overall: {'PASS' if all_ok else 'FAIL'}", ""]
    (out / "summary.md").write_text("\n".join(lines), encoding="utf-8", newline="\n")
    render_convergence(series, out / "convergence.svg")
    print("\n".join(lines))
    return EXIT_OK if all_ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cheese-lab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (TOML)")
    common.add_argument("--plan", help="plan document to verify instead of building one")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, help="pass tolerance for numerical checks")
    common.add_argument("--seed", type=int, help="random seed")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build a plan and its rendering").set_defaults(func=cmd_build)
    sub.add_parser("verify-ideals", parents=[common], help="measure and budget checks").set_defaults(
        func=cmd_verify_ideals)
    sub.add_parser("verify-cole", parents=[common], help="root-extension identities").set_defaults(
        func=cmd_verify_cole)
    rp = sub.add_parser("report", parents=[common], help="summarise ledgers")
    rp.add_argument("ledgers", nargs="*")
    rp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, PlanFormatError, LedgerFormatError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PlacementError, ValueError) as exc:
        print(f"placement failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
