"""Command-line interface: ``telegate run | verify | sweep``.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 a run without any
accepted event, 4 a violated internal invariant (including failed
verification checks).
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .fock import FockError
from .noise import NoiseError
from .noise.fit import is_monotone_nonincreasing
from .report import (
    ScenarioError,
    ZeroAcceptance,
    dumps,
    parse_scenario,
    run_scenario,
    validate_report,
)
from .qubit import RegisterError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ZERO_ACCEPTANCE = 3
EXIT_INVARIANT = 4

SWEEP_COLUMNS = (
    "parameter", "value", "fidelity", "fidelity_sd", "f_a_name", "f_a", "f_a_sd",
    "f_b_name", "f_b", "f_b_sd", "lower_bound", "upper_bound", "concurrence_bound",
    "success_fraction", "acceptance", "acceptance_sd",
)


class InvariantViolation(RuntimeError):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _err(msg: str) -> None:
    sys.stderr.write(f"telegate: {msg}\n")


def _read_scenario(path: str) -> tuple[str, dict]:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return text, parse_scenario(text)


def _report(data: dict, args, timestamp: bool) -> dict:
    try:
        report = run_scenario(
            data, shots=args.shots, seed=args.seed, exact=args.exact,
            workers=getattr(args, "workers", None), timestamp=timestamp,
        )
    except (NoiseError, RegisterError, FockError) as exc:
        raise ScenarioError(str(exc)) from None
    except (ArithmeticError, AssertionError) as exc:
        raise InvariantViolation(str(exc)) from None
    try:
        validate_report(report)
    except Exception as exc:
        raise InvariantViolation(f"report does not match its schema: {exc}") from None
    return report


def cmd_run(args) -> int:
    _, data = _read_scenario(args.scenario)
    try:
        report = _report(data, args, timestamp=not args.no_timestamp)
    except ZeroAcceptance as exc:
        _err(f"zero acceptance: {exc}")
        return EXIT_ZERO_ACCEPTANCE
    _emit(dumps(report), args.out)
    if not args.quiet and args.out:
        gate = report.get("gate", {})
        fid = gate.get("run", {}).get("fidelity", {}).get("value")
        if fid is None:
            fid = report.get("resource", {}).get("fidelity")
        sys.stderr.write(f"wrote {args.out} (fidelity {fid})\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(quick=args.quick, seed=args.seed if args.seed is not None else 2024,
                       tables=args.tables)
    failed = [c for c in checks if not c.passed]
    if not args.quiet:
        for c in checks:
            sys.stdout.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}\n")
        sys.stdout.write(f"{len(checks) - len(failed)}/{len(checks)} checks passed\n")
    if args.out:
        summary = {"version": __version__, "passed": not failed,
                   "checks": [c.to_dict() for c in checks]}
        for c in summary["checks"]:
            c.pop("seconds")
        Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    return EXIT_OK if not failed else EXIT_INVARIANT


def _set_path(data: dict, path: str, value) -> dict:
    new = copy.deepcopy(data)
    node = new
    parts = path.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ScenarioError(f"sweep axis {path!r} does not name a scenario field")
    node[parts[-1]] = value
    return new


def _parse_values(text: str) -> list:
    values = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        try:
            values.append(json.loads(v))
        except json.JSONDecodeError:
            raise ScenarioError(f"sweep value {v!r} is not a number or JSON literal") from None
    if not values:
        raise ScenarioError("no sweep values given")
    return values


def sweep_row(report: dict, axis: str, value) -> dict:
    gate = report.get("gate", {})
    run = gate.get("run", {})
    comp = gate.get("metrics", {}).get("complementary", {})
    names = [k for k in comp if k not in ("process_bounds", "concurrence_bound")]
    fa = comp.get(names[0], {}) if names else {}
    fb = comp.get(names[1], {}) if len(names) > 1 else {}
    bounds = comp.get("process_bounds", {})
    acc = run.get("acceptance", {})
    fid = run.get("fidelity", {})
    if not gate:
        res = report["resource"]
        fid = {"value": res["fidelity"], "sd": 0.0}
        acc = res.get("sampled", {}).get("acceptance", {})
        run = {"success_fraction": res["probability"]}
    row = {
        "parameter": axis,
        "value": value,
        "fidelity": fid.get("value"),
        "fidelity_sd": fid.get("sd"),
        "f_a_name": names[0] if names else "",
        "f_a": fa.get("value"),
        "f_a_sd": fa.get("sd"),
        "f_b_name": names[1] if len(names) > 1 else "",
        "f_b": fb.get("value"),
        "f_b_sd": fb.get("sd"),
        "lower_bound": bounds.get("lower", {}).get("value"),
        "upper_bound": bounds.get("upper", {}).get("value"),
        "concurrence_bound": comp.get("concurrence_bound", {}).get("value"),
        "success_fraction": run.get("success_fraction"),
        "acceptance": acc.get("value"),
        "acceptance_sd": acc.get("sd"),
    }
    return row


def _sweep_point(job):
    data, axis, value, opts = job
    report = run_scenario(data, timestamp=False, **opts)
    return sweep_row(report, axis, value)


def sweep_rows(data: dict, axis: str, values, shots=None, seed=None, exact=False,
               workers: int = 1) -> list[dict]:
    """One row per value, in the order given, whatever the worker count."""
    jobs = []
    for v in values:
        point = _set_path(data, axis, v)
        parse_scenario(json.dumps(point))
        jobs.append((point, axis, v, {"shots": shots, "seed": seed, "exact": exact}))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    _, data = _read_scenario(args.scenario)
    values = _parse_values(args.values)
    try:
        rows = sweep_rows(data, args.axis, values, args.shots, args.seed, args.exact,
                          args.workers or 1)
    except ZeroAcceptance as exc:
        _err(f"zero acceptance: {exc}")
        return EXIT_ZERO_ACCEPTANCE
    except (NoiseError, RegisterError, FockError) as exc:
        raise ScenarioError(str(exc)) from None
    _emit(rows_to_csv(rows), args.out)
    if not args.quiet:
        fid = [r["fidelity"] for r in rows]
        trend = "nonincreasing" if is_monotone_nonincreasing(fid) else "not monotone"
        sys.stderr.write(f"{len(rows)} sweep points; fidelity column {trend}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telegate",
        description="Teleported C-NOT and C-Phase gates on linear optics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("scenario", help="scenario JSON file ('-' for stdin)")
        p.add_argument("--seed", type=int, help="seed for sampling (overrides the scenario)")
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--quiet", action="store_true", help="suppress progress messages")

    run = sub.add_parser("run", help="run one scenario and print its JSON report")
    common(run)
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--shots", type=int, help="sample this many trials per setting")
    mode.add_argument("--exact", action="store_true", help="enumerate outcomes exactly")
    run.add_argument("--workers", type=int, help="threads for shot sampling")
    run.add_argument("--no-timestamp", action="store_true", help="leave the timestamp empty")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run the built-in oracle and invariant checks")
    common(ver, scenario=False)
    ver.add_argument("--quick", action="store_true", help="run a reduced subset")
    ver.add_argument("--tables", help="printed correction tables to diff (JSON asset)")
    ver.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="sweep one scenario field and write CSV")
    common(sw)
    sw.add_argument("--axis", required=True, help="dotted field path, e.g. noise.overlap")
    sw.add_argument("--values", required=True, help="comma-separated values")
    mode = sw.add_mutually_exclusive_group()
    mode.add_argument("--shots", type=int, help="sample this many trials per setting")
    mode.add_argument("--exact", action="store_true", help="enumerate outcomes exactly")
    sw.add_argument("--workers", type=int, help="processes for sweep points")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "shots", None) is not None and args.shots < 1:
        _err("--shots must be at least 1")
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ScenarioError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        _err(f"invariant violated: {exc}")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
