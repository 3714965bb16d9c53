"""``maxdyn`` command line.

Every subcommand turns its result into flat records and writes them as CSV
(header row first) or JSON lines.  Exit codes: 0 success, 1 usage error,
2 violated precondition, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import analysis, cases, core, invariants
from .scalar import PrecisionExhausted, Scalar, ScalarSyntaxError, parse_scalar, to_float

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3

COMMANDS = ("iterate", "classify", "trace", "period", "predict", "density", "neighbors", "invariants", "lyness", "export")

_DEFAULTS = {
    "steps": None,
    "max_steps": 1_000_000,
    "epsilon": 1e-9,
    "format": "csv",
    "coords": "1,2,3",
    "out": None,
    "verify": False,
    "a": "1",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _fmt_float(f: float) -> str:
    return format(f, ".17g")


def _flat(value) -> object:
    if isinstance(value, Scalar):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, Fraction):
        return str(value)
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return str(value)


def _window_fields(prefix: str, w: Sequence[Scalar]) -> dict:
    return {f"{prefix}_{i}": str(v) for i, v in enumerate(w, 1)}


# -- record producers ----------------------------------------------------------


def export_projection(w: Sequence[Scalar], n_steps: int, coords: Sequence[int]) -> Iterator[dict]:
    """Rows ``n, exact literals, floats`` of three window coordinates along the orbit.

    Floats are within ``1e-12`` of the exact values.
    """
    coords = list(coords)
    if len(coords) != 3 or len(set(coords)) != 3 or not all(1 <= c <= 4 for c in coords):
        raise ValueError("coords must be three distinct indices in 1..4")
    t = tuple(w)
    names = ("x", "y", "z")
    for n in range(n_steps):
        row: dict = {"n": n}
        picked = [t[c - 1] for c in coords]
        for name, v in zip(names, picked):
            row[f"{name}_exact"] = str(v)
        for name, v in zip(names, picked):
            row[name] = to_float(v, 1e-12)
        yield row
        t = core.step_forward(t)


def _iterate_rows(w, n: int) -> Iterator[dict]:
    t = tuple(w)
    for i in range(n + 1):
        yield {"n": i, "exact": str(t[0]), "float": to_float(t[0], 1e-15)}
        t = core.step_forward(t)


def _classify_rows(w) -> list[dict]:
    case = cases.classify(w)
    return [{**_window_fields("x", w), "case": str(case), "matching": " ".join(str(c) for c in cases.matching_cases(w))}]


def _trace_rows(w, max_cases: int) -> list[dict]:
    c4, shift = core.normalize_to_C4(w)
    trace = cases.trace_routes(c4, max_cases=max_cases)
    rows = []
    for i, r in enumerate(trace.routes):
        rows.append({"route_index": i, "route": str(r.kind), "m1": r.m1, "m3": r.m3, "steps": r.steps, **_window_fields("c4", r.start)})
    if not rows:
        rows.append({"route_index": None, "route": None, "m1": None, "m3": None, "steps": None, **_window_fields("c4", c4)})
    return rows


def _predict_rows(w) -> list[dict]:
    report = analysis.predict_periodicity(w)
    if report.periodic:
        raise analysis.PeriodicInput(
            f"orbit is periodic (period {report.period}, certificate {report.certificate}); no accumulation interval"
        )
    pred = analysis.predict_accumulation(w)
    return [
        {
            "verdict": str(report.verdict),
            "certificate": str(report.certificate),
            "shift": pred.shift,
            **_window_fields("c4", pred.c4_tuple),
            "lo": str(pred.lo),
            "hi": str(pred.hi),
            "lo_float": to_float(pred.lo, 1e-15),
            "hi_float": to_float(pred.hi, 1e-15),
        }
    ]


def _density_rows(w, n: int, eps: float) -> list[dict]:
    r = analysis.density_report(w, n, eps)
    return [
        {
            "n_steps": r.n_steps,
            "violations": r.violations,
            "exact_violations": r.exact_violations,
            "max_gap": r.max_gap,
            "lo": r.interval[0],
            "hi": r.interval[1],
            "epsilon": r.epsilon,
            "distinct": r.distinct,
        }
    ]


def _period_of(window) -> int | None:
    return analysis.detect_period(window, 10 * 1_000_000)


def _neighbor_rows(w, count: int, verify: bool) -> list[dict]:
    c4, _ = core.normalize_to_C4(w)
    found = analysis.nearby_periodic(c4, count)
    periods: list = [None] * len(found)
    if verify and found:
        with ProcessPoolExecutor() as pool:
            periods = list(pool.map(_period_of, [nb.tuple for nb in found]))
    rows = []
    for nb, per in zip(found, periods):
        row = {
            "p": nb.p,
            "q": nb.q,
            "m": nb.convergent[0],
            "n": nb.convergent[1],
            "predicted_period": nb.predicted_period,
            **_window_fields("y", nb.tuple),
            "distance": to_float(nb.distance, 1e-15),
        }
        if verify:
            row["observed_period"] = per
            row["verified"] = per == nb.predicted_period
        rows.append(row)
    return rows


def _invariant_rows(w, n: int) -> list[dict]:
    return [{"v1": str(invariants.v1(w)), "v2": str(invariants.v2(w)), "steps": n, "conserved": invariants.check_invariance(w, n)}]


def _lyness_rows(values: Sequence[str], a: str, n: int) -> list[dict]:
    qs = []
    for lit in list(values) + [a]:
        s = parse_scalar(lit)
        if not s.is_rational():
            raise UsageError(f"Lyness values must be rational, got {lit!r}")
        qs.append(s.as_rational())
    state = invariants.lyness_state(*qs[:4], a=qs[4])
    h1, h2 = invariants.lyness_h(state, 1), invariants.lyness_h(state, 2)
    return [
        {
            "a": str(qs[4]),
            "steps": n,
            "H1": str(h1),
            "H2": str(h2),
            "H1_conserved": invariants.lyness_conserved(state, n, (1,)),
            "H2_conserved": invariants.lyness_conserved(state, n, (2,)),
            "H1_float": float(h1),
            "H2_float": float(h2),
        }
    ]


# -- output --------------------------------------------------------------------


def write_records(records: Iterable[dict], fmt: str, stream) -> None:
    if fmt == "json-lines":
        for rec in records:
            stream.write(json.dumps({k: v if isinstance(v, float) else _flat(v) for k, v in rec.items()}) + "\n")
        return
    writer = None
    for rec in records:
        if writer is None:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(list(rec))
        writer.writerow(["" if _flat(v) is None else _flat(v) for v in rec.values()])


# -- argument handling ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxdyn", description="Exact analysis of x[n+4] = max(x[n+3], x[n+2], x[n+1], 0) - x[n].")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--init", nargs=4, metavar=("A", "B", "C", "D"), help="initial window as four scalar literals")
    p.add_argument("-n", "--steps", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--format", choices=("csv", "json-lines"), default=None)
    p.add_argument("--coords", default=None, help="three window coordinates for export, e.g. 1,2,3")
    p.add_argument("--out", default=None, help="write to PATH instead of standard output")
    p.add_argument("--verify", action="store_true", default=None)
    p.add_argument("--a", default=None, help="Lyness parameter (rational literal)")
    p.add_argument("--config", default=None, help="JSON file with the same keys; flags win")
    return p


def _resolve(ns: argparse.Namespace) -> dict:
    cfg: dict = dict(_DEFAULTS, init=None)
    if ns.config:
        try:
            with open(ns.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in ("init", "steps", "max_steps", "epsilon", "format", "coords", "out", "verify", "a"):
        value = getattr(ns, key)
        if value is not None:
            cfg[key] = value
    if cfg["init"] is None or len(cfg["init"]) != 4:
        raise UsageError("--init needs four scalar literals")
    if cfg["steps"] is not None and cfg["steps"] < 0:
        raise UsageError("--steps must be non-negative")
    if not cfg["epsilon"] > 0:
        raise UsageError("--epsilon must be positive")
    if cfg["format"] not in ("csv", "json-lines"):
        raise UsageError("--format must be csv or json-lines")
    return cfg


def _records(command: str, cfg: dict) -> Iterable[dict]:
    if command == "lyness":
        return _lyness_rows([str(v) for v in cfg["init"]], str(cfg["a"]), cfg["steps"] if cfg["steps"] is not None else 1000)
    try:
        w = core.tuple4(*[str(v) for v in cfg["init"]])
    except ScalarSyntaxError as exc:
        raise UsageError(str(exc)) from None
    steps = cfg["steps"]
    if command == "iterate":
        return _iterate_rows(w, 10 if steps is None else steps)
    if command == "classify":
        return _classify_rows(w)
    if command == "trace":
        return _trace_rows(w, 100 if steps is None else steps)
    if command == "period":
        return [{"period": analysis.detect_period(w, cfg["max_steps"])}]
    if command == "predict":
        return _predict_rows(w)
    if command == "density":
        return _density_rows(w, 100_000 if steps is None else steps, cfg["epsilon"])
    if command == "neighbors":
        return _neighbor_rows(w, 4 if steps is None else steps, bool(cfg["verify"]))
    if command == "invariants":
        return _invariant_rows(w, 10_000 if steps is None else steps)
    if command == "export":
        try:
            coords = [int(c) for c in str(cfg["coords"]).split(",")]
        except ValueError:
            raise UsageError(f"bad --coords {cfg['coords']!r}") from None
        if len(coords) != 3 or len(set(coords)) != 3 or not all(1 <= c <= 4 for c in coords):
            raise UsageError("--coords must name three distinct indices in 1..4")
        return export_projection(w, 10_000 if steps is None else steps, coords)
    raise UsageError(f"unknown command {command}")


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        cfg = _resolve(ns)
        records = _records(ns.command, cfg)
        if cfg["out"]:
            rows = list(records)
            with open(cfg["out"], "w", newline="") as fh:
                write_records(rows, cfg["format"], fh)
        else:
            write_records(records, cfg["format"], stdout)
    except UsageError as exc:
        print(f"maxdyn: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except ScalarSyntaxError as exc:
        print(f"maxdyn: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (
        analysis.PeriodicInput,
        analysis.PreconditionViolated,
        analysis.Degenerate,
        cases.NotNormalized,
        core.NoC4Window,
        ZeroDivisionError,
    ) as exc:
        print(f"maxdyn: precondition failed: {exc}", file=stderr)
        return EXIT_PRECONDITION
    except (cases.GraphViolation, core.NormalizationError, PrecisionExhausted, AssertionError) as exc:
        print(f"maxdyn: internal invariant violated: {exc}", file=stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
