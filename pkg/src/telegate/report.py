"""Scenario validation and report assembly behind the command line.

A scenario is a JSON document describing one experiment.  :func:`run_scenario`
turns a validated scenario into a report dictionary that round-trips through
JSON without loss (floats are written with ``repr`` precision and ``NaN``
never appears).
"""

from __future__ import annotations

import copy
import datetime as _dt
import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources as _res
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from . import metrics as M
from .fock.elements import hwp, qwp
from .noise import NATIVE_BSM, NoiseParams, gate_run, run_shots
from .noise.shots import binomial_sd
from .protocols import (
    diff_tables,
    ideal_resource,
    prepare_cluster_chi,
    prepare_hyper_chi,
    prepare_lambda,
    run_gate,
)
from .protocols.corrections import unexpected_discrepancies
from .protocols.states import INPUT_LABELS, named_state, product_input
from .qubit import PureState, fidelity, parse_pauli, pauli_expectation

SCENARIO_SCHEMA = "telegate.scenario/1"
REPORT_SCHEMA = "telegate.report/1"

DEFAULT_INPUT = {"cnot": "H+", "cphase": "++"}
DEFAULT_METRICS = {
    "cnot": ["fidelity", "truth_table", "complementary", "entangling"],
    "cphase": ["fidelity", "complementary", "parallelism", "comparison"],
    "prep-only": ["fidelity"],
}
DEFAULT_RESOURCE = {"cnot": "chi", "cphase": "chi'"}


class ScenarioError(ValueError):
    """Scenario failed validation; ``line`` points into the source text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ZeroAcceptance(RuntimeError):
    """No accepted event in a sampled run."""


# ---------------------------------------------------------------- schemas


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = _res.files("telegate").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _locate(text: str, path) -> int | None:
    """Best-effort line of the JSON value at ``path`` in ``text``."""
    pos = 0
    for part in path:
        if isinstance(part, int):
            continue
        m = re.compile(r'"' + re.escape(str(part)) + r'"\s*:').search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1 if text else None


def parse_scenario(text: str) -> dict:
    """Parse and validate scenario text; raise :class:`ScenarioError` with a
    line anchor on any problem."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    validator = jsonschema.Draft202012Validator(load_schema("scenario"))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {err.message}", _locate(text, err.absolute_path))
    try:
        _check_semantics(data)
    except ScenarioError as exc:
        if exc.line is None:
            raise ScenarioError(str(exc), _locate(text, getattr(exc, "path", ()))) from None
        raise
    return data


def _semantic_error(message: str, path=()) -> ScenarioError:
    err = ScenarioError(message)
    err.path = path
    return err


def _check_semantics(data: dict) -> None:
    gate = data["gate"]
    res = data.get("resource", {})
    kind = res.get("kind")
    if gate == "prep-only":
        if kind is None:
            raise _semantic_error("prep-only scenarios need resource.kind", ("resource",))
        return
    allowed = {"cnot": ("chi",), "cphase": ("chi'", "lambda")}[gate]
    if kind is not None and kind not in allowed:
        raise _semantic_error(f"resource {kind!r} does not drive a {gate} gate", ("resource", "kind"))
    if kind == "lambda":
        raise _semantic_error("the lambda state needs the rail split to drive the gate; use chi'",
                              ("resource", "kind"))
    level = data.get("level", "physical")
    if level == "physical":
        bsm = data.get("bsm")
        if bsm is not None and bsm != NATIVE_BSM[gate]:
            raise _semantic_error(f"the optical {gate} network has a {NATIVE_BSM[gate]} BSM", ("bsm",))
        if res.get("source") == "ideal":
            raise _semantic_error("physical runs always prepare the resource optically",
                                  ("resource", "source"))
    if gate == "cnot" and "parallelism" in data.get("metrics", []):
        raise _semantic_error("the parallelism criterion applies to the C-Phase", ("metrics",))
    try:
        build_input(data.get("input", DEFAULT_INPUT[gate]))
    except (ValueError, TypeError) as exc:
        raise _semantic_error(f"input: {exc}", ("input",)) from None


# ------------------------------------------------------------------ inputs


def _qubit_vector(spec) -> np.ndarray | str:
    if isinstance(spec, str):
        return spec
    return qwp(spec["qwp"]) @ hwp(spec["hwp"]) @ np.array([1.0, 0.0], complex)


def build_input(spec) -> PureState:
    if isinstance(spec, dict):
        return product_input(_qubit_vector(spec["target"]), _qubit_vector(spec["control"]))
    state = named_state(spec, INPUT_LABELS)
    if state.register != INPUT_LABELS:
        raise ValueError(f"{spec!r} is not a two-qubit input")
    return state


def input_label(spec) -> str:
    return spec if isinstance(spec, str) else json.dumps(spec, sort_keys=True)


# ------------------------------------------------------------ run options


@dataclass(frozen=True)
class Options:
    gate: str
    level: str
    bsm: str | None
    corrections: bool
    params: NoiseParams
    resource_source: str
    mode: str
    shots: int
    seed: int | None
    workers: int

    def runner(self, corrections: bool | None = None):
        corr = self.corrections if corrections is None else corrections
        cache: dict = {}

        def run(inp):
            key = (inp.register, inp.amplitudes.tobytes()) if isinstance(inp, PureState) else None
            if key is not None and key in cache:
                return cache[key]
            if self.level == "qubit" and self.resource_source == "ideal":
                res = run_gate(self.gate, inp, ideal_resource(DEFAULT_RESOURCE[self.gate]),
                               self.bsm or NATIVE_BSM[self.gate], corr,
                               dephasing=self.params.phase_drift)
            else:
                res = gate_run(self.gate, inp, self.params, self.level, self.bsm, corr)
            if key is not None:
                cache[key] = res
            return res

        return run


def options_from(data: dict, shots=None, seed=None, exact=False, workers=None) -> Options:
    ex = dict(data.get("execution", {}))
    if shots is not None:
        ex["mode"], ex["shots"] = "shots", shots
    if seed is not None:
        ex["seed"] = seed
    if exact:
        ex["mode"] = "exact"
    if workers is not None:
        ex["workers"] = workers
    mode = ex.get("mode", "exact")
    if mode == "shots" and ("shots" not in ex or ex.get("seed") is None):
        raise ScenarioError("shots mode needs both a shot count and a seed")
    return Options(
        gate=data["gate"],
        level=data.get("level", "physical"),
        bsm=data.get("bsm"),
        corrections=data.get("corrections", True),
        params=NoiseParams.from_dict(data.get("noise", {})),
        resource_source=data.get("resource", {}).get("source", "optical"),
        mode=mode,
        shots=int(ex.get("shots", 0)),
        seed=ex.get("seed"),
        workers=int(ex.get("workers", 1)),
    )


# ------------------------------------------------------------- sections


def _clean(x):
    """Replace non-finite floats by ``None`` and numpy scalars by builtins."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _est(e) -> dict:
    return M._est(e).to_dict()


def _outcome_rows(result, counts=None) -> list[dict]:
    rows = []
    ideal = result.ideal()
    for key, br in result.branches.items():
        row = {"outcome": list(key), "probability": br.probability}
        if br.correction is not None:
            row["correction"] = str(br.correction)
        if br.state is not None and not br.failed:
            st = br.corrected if result.corrections else br.state
            row["fidelity"] = fidelity(st, ideal)
        if counts is not None:
            row["count"] = counts.get(key, 0)
        rows.append(row)
    return rows


def _sample_fidelity(result, opts: Options, stream: int) -> tuple[dict, dict]:
    """Sample (outcome, pass/fail) events: a projective test onto the ideal
    output after each heralded branch."""
    ideal = result.ideal()
    joint = {}
    for key, br in result.branches.items():
        if br.failed or br.state is None:
            continue
        st = br.corrected if result.corrections else br.state
        f = fidelity(st, ideal)
        joint[(key, True)] = br.probability * f
        joint[(key, False)] = br.probability * (1.0 - f)
    shot = run_shots(joint, opts.shots, [opts.seed, stream], opts.workers)
    if shot.zero_acceptance:
        raise ZeroAcceptance("no accepted event in the main run")
    passed = sum(c for (k, ok), c in shot.counts.items() if ok)
    counts: dict = {}
    for (k, _), c in shot.counts.items():
        counts[k] = counts.get(k, 0) + c
    section = {
        "shots": shot.shots,
        "accepted": shot.accepted,
        "acceptance": {"value": shot.acceptance, "sd": shot.acceptance_sd},
        "fidelity": {"value": passed / shot.accepted, "sd": binomial_sd(passed, shot.accepted)},
    }
    return section, counts


def _table(gate, name, opts: Options, stream: int, runner):
    if opts.mode == "shots":
        table, _ = M.sampled_table(gate, name, runner, opts.shots, [opts.seed, stream], opts.workers)
        if any(n == 0 for n in table.accepted.values()):
            raise ZeroAcceptance(f"no accepted event for setting {name}")
        return table
    return M.exact_table(gate, name, runner)


_STREAMS = {"zz": 11, "zx": 12, "xz": 13, "xx": 14, "parallelism": 15, "entangling": 16}


def _entangling(result, opts: Options) -> dict:
    out = result.output()
    reg = out.register
    corr = {}
    for name in ("xx", "yy", "zz"):
        p = parse_pauli("".join(f"{name[0].upper()}{q}" for q in reg))
        corr[name] = M.Estimate(pauli_expectation(out, p))
    if opts.mode == "shots":
        for n, name in enumerate(("xx", "yy", "zz")):
            v = corr[name].value
            shot = run_shots({"+": result.success_fraction * (1 + v) / 2,
                              "-": result.success_fraction * (1 - v) / 2},
                             opts.shots, [opts.seed, _STREAMS["entangling"], n], opts.workers)
            if shot.zero_acceptance:
                raise ZeroAcceptance("no accepted event in a correlation run")
            f = shot.frequency("+")
            corr[name] = M.Estimate(2 * f - 1, 2 * shot.frequency_sd("+"))
    f = (1.0 + corr["xx"] - corr["yy"] + corr["zz"]) / 4.0
    return {
        "correlations": {k: v.to_dict() for k, v in corr.items()},
        "phi_plus_fidelity": f.to_dict(),
        "witness": M.entanglement_witness(f, "two-qubit-bell").to_dict(),
    }


def _bounds_section(fa, fb, names) -> dict:
    lo, up = M.process_fidelity_bounds(fa, fb)
    return {
        names[0]: _est(fa),
        names[1]: _est(fb),
        "process_bounds": {"lower": _est(lo), "upper": _est(up)},
        "concurrence_bound": _est(M.concurrence_lower_bound(fa, fb)),
    }


def _replay_estimate(gate, name, spec) -> M.Estimate:
    if "value" in spec:
        return M.Estimate(spec["value"], spec.get("sd", 0.0))
    s = M.setting(name)
    probs, sds, acc = {}, {}, {}
    for i, outs in spec["counts"].items():
        n = sum(outs.values())
        acc[i] = n
        for o in s.output_labels():
            c = outs.get(o, 0)
            probs[(i, o)] = c / n if n else math.nan
            sds[(i, o)] = binomial_sd(c, n)
    if not all(acc.get(i, 0) for i in s.input_labels()):
        raise ZeroAcceptance(f"replayed counts for {name} have an input without events")
    return M.setting_fidelity(gate, M.ConditionalTable(s, probs, sds, acc))


def replay_section(gate: str, replay: dict) -> dict:
    """Metrics from measured values or counts instead of a simulation."""
    out: dict = {}
    vals = {k: _replay_estimate(gate, k, v) for k, v in replay.items() if k != "correlations"}
    names = M.COMPLEMENTARY.get(gate, ())
    if names and all(n in vals for n in names):
        out.update(_bounds_section(vals[names[0]], vals[names[1]], names))
    for k, v in vals.items():
        out.setdefault(k, _est(v))
    par = vals.get("parallelism", vals.get("xx") if gate == "cphase" else None)
    if gate == "cphase" and par is not None and all(n in vals for n in names):
        out["parallelism_criterion"] = M.parallelism_criterion(
            vals["zx"], vals["xz"], par).to_dict()
    if "correlations" in replay:
        c = replay["correlations"]
        f = M.phi_plus_fidelity_from_correlations(c["xx"], c["yy"], c["zz"])
        out["phi_plus_fidelity"] = f
        out["witness"] = M.entanglement_witness(f, "two-qubit-bell").to_dict()
    return out


def gate_section(data: dict, opts: Options) -> dict:
    gate = opts.gate
    spec = data.get("input", DEFAULT_INPUT[gate])
    inp = build_input(spec)
    runner = opts.runner()
    result = runner(inp)
    wanted = data.get("metrics", DEFAULT_METRICS[gate])
    section: dict = {"input": input_label(spec)}
    if result.success_fraction <= 0.0:
        raise ZeroAcceptance("the gate never heralds success")
    run: dict = {
        "success_fraction": result.success_fraction,
        "fidelity": {"value": fidelity(result.output(), result.ideal()), "sd": 0.0},
    }
    counts = None
    if opts.mode == "shots":
        sampled, counts = _sample_fidelity(result, opts, 1)
        run.update(sampled)
    run["outcomes"] = _outcome_rows(result, counts)
    run["meta"] = {k: v for k, v in result.meta.items()}
    section["run"] = run

    metrics: dict = {}
    tables: dict = {}

    def table(name):
        if name not in tables:
            tables[name] = _table(gate, name, opts, _STREAMS[name], runner)
        return tables[name]

    if "truth_table" in wanted:
        t = table("zz")
        metrics["truth_table"] = {"fidelity": _est(M.setting_fidelity(gate, t)), "table": t.to_dict()}
    names = M.COMPLEMENTARY[gate]
    if "complementary" in wanted or "parallelism" in wanted:
        fa, fb = (M.setting_fidelity(gate, table(n)) for n in names)
        metrics["complementary"] = _bounds_section(fa, fb, names)
        if "parallelism" in wanted:
            fp = M.parallelism_fidelity(table("parallelism"), gate)
            metrics["parallelism"] = {
                "fidelity": _est(fp),
                "criterion": M.parallelism_criterion(fa, fb, fp).to_dict(),
            }
    if "entangling" in wanted:
        metrics["entangling"] = _entangling(result, opts)
    if "concurrence" in wanted:
        metrics["concurrence"] = M.output_concurrence(result)
    if "comparison" in wanted:
        both = opts.runner(corrections=True)(inp)
        metrics["comparison"] = M.correction_comparison(both).to_dict()
    if "process" in wanted:
        if opts.level != "qubit":
            raise ScenarioError("the process-fidelity oracle needs level 'qubit'")
        metrics["process_fidelity"] = M.process_fidelity(M.run_channel(runner, gate), gate)
    section["metrics"] = metrics
    return section


def prep_section(data: dict, opts: Options) -> dict:
    kind = data["resource"]["kind"]
    v = opts.params.overlap
    if kind == "chi":
        res = prepare_cluster_chi(opts.params.ppbs_ports, v)
    elif kind == "chi'":
        res = prepare_hyper_chi(v)
    else:
        res = prepare_lambda(v)
    f = res.fidelity()
    out = {
        "kind": kind,
        "register": list(res.register),
        "probability": res.probability,
        "fidelity": f,
        "witness": M.entanglement_witness(f, "four-qubit-cluster").to_dict(),
    }
    if opts.mode == "shots":
        shot = run_shots({"coincidence": res.probability}, opts.shots, [opts.seed, 2], opts.workers)
        if shot.zero_acceptance:
            raise ZeroAcceptance("no four-fold coincidence in any shot")
        out["sampled"] = {"shots": shot.shots, "accepted": shot.accepted,
                          "acceptance": {"value": shot.acceptance, "sd": shot.acceptance_sd}}
    return out


def oracle_section() -> dict:
    cells = diff_tables()
    return {
        "corrections": {
            "cells": len(cells),
            "matching": sum(c.status != "mismatch" for c in cells),
            "discrepancies": [c.to_dict() for c in cells if c.status == "mismatch"],
            "unexpected": [c.to_dict() for c in unexpected_discrepancies(cells)],
        },
        "outcome_sets": M.printed_outcome_diff(),
    }


def run_scenario(
    data: dict,
    *,
    shots: int | None = None,
    seed: int | None = None,
    exact: bool = False,
    workers: int | None = None,
    timestamp: bool = True,
) -> dict:
    """Execute a validated scenario and return the report dictionary."""
    opts = options_from(data, shots, seed, exact, workers)
    echo = copy.deepcopy(data)
    echo.setdefault("schema", SCENARIO_SCHEMA)
    report: dict[str, Any] = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat() if timestamp else None,
        "scenario": echo,
        "execution": {"mode": opts.mode, "shots": opts.shots if opts.mode == "shots" else None,
                      "seed": opts.seed, "level": opts.level},
        "noise": opts.params.to_dict(),
        "status": "ok",
    }
    if opts.gate == "prep-only":
        report["resource"] = prep_section(data, opts)
    else:
        report["gate"] = gate_section(data, opts)
    if "replay" in data:
        report["replay"] = replay_section(opts.gate, data["replay"])
    report["oracle_diff"] = oracle_section()
    return _clean(report)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_report(report: dict) -> None:
    jsonschema.Draft202012Validator(load_schema("report")).validate(report)

