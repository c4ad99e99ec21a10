"""Command-line front end.

Exit status: 0 success, 1 unreadable or invalid input, 2 free memory below
the file count, 3 workload too large for the exhaustive oracle.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import json.decoder
import json.scanner
import sys

from .allocators import StrategyKind, allocate, round_to_integers
from .model import Allocation, BudgetTooSmallError, FileSpec, Objective, Workload, evaluate_all
from .oracle import EnumerationTooLargeError, brute_force_optimum
from .simulator import FetchPolicy, Interleaving, generate_trace, predicted_calls, simulate

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_ORACLE_SIZE = 3

CSV_COLUMNS = ["strategy", "file", "buffer_real", "buffer_int", "ratio", "f1", "f2", "f3", "f4"]


class WorkloadParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class _Record(dict):
    line = 1


def _located_decoder():
    # Pure-Python scanner so every JSON object remembers the line it opens on.
    decoder = json.JSONDecoder(object_pairs_hook=_Record)

    def parse_object(s_and_end, *args):
        s, end = s_and_end
        obj, new_end = json.decoder.JSONObject(s_and_end, *args)
        obj.line = s.count("\n", 0, end) + 1
        return obj, new_end

    decoder.parse_object = parse_object
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    return decoder


def _int_field(record, key, where, default=None):
    if key not in record:
        if default is not None:
            return default
        raise WorkloadParseError(f"missing field {where}{key}", record.line)
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise WorkloadParseError(f"field {where}{key} must be an integer, got {value!r}", record.line)
    return value


def parse_workload(text: str) -> Workload:
    """Parse a workload (or report) document.

    ``BudgetTooSmallError`` passes through untouched so callers can tell an
    infeasible workload from a malformed one.
    """
    try:
        doc = _located_decoder().decode(text)
    except json.JSONDecodeError as exc:
        raise WorkloadParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise WorkloadParseError("top level must be an object", 1)
    if "free_memory" not in doc and isinstance(doc.get("workload"), dict):
        # a report document carries its workload; accept it as input
        doc = doc["workload"]
    free_memory = _int_field(doc, "free_memory", "")
    if free_memory < 0:
        raise WorkloadParseError(f"field free_memory must be non-negative, got {free_memory}", doc.line)
    files = doc.get("files")
    if not isinstance(files, list) or not files:
        raise WorkloadParseError("field files must be a non-empty array", doc.line)
    specs = []
    for k, rec in enumerate(files):
        where = f"files[{k}]."
        if not isinstance(rec, dict):
            raise WorkloadParseError(f"field files[{k}] must be an object", doc.line)
        name = rec.get("name")
        if not isinstance(name, str) or not name:
            raise WorkloadParseError(f"field {where}name must be a non-empty string", rec.line)
        size = _int_field(rec, "size_blocks", where)
        scans = _int_field(rec, "scan_count", where, default=1)
        try:
            specs.append(FileSpec(name, size, scans))
        except ValueError as exc:
            raise WorkloadParseError(f"field {where[:-1]}: {exc}", rec.line) from None
    try:
        return Workload(tuple(specs), free_memory)
    except BudgetTooSmallError:
        raise
    except ValueError as exc:
        raise WorkloadParseError(str(exc), doc.line) from None


def load_workload(path) -> Workload:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise WorkloadParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_workload(text)


def parse_allocation(values) -> Allocation:
    if all(isinstance(v, int) for v in values):
        return Allocation.of_integers(values)
    return Allocation(tuple(float(v) for v in values))


# --- report documents -------------------------------------------------------

def _workload_doc(workload):
    return {
        "free_memory": workload.free_memory,
        "files": [
            {"name": f.name, "size_blocks": f.size_blocks, "scan_count": f.scan_count}
            for f in workload.files
        ],
    }


def _objectives_doc(report):
    return {
        "f1": report.f1,
        "f2": report.f2,
        "f3": report.f3,
        "f4": report.f4,
        "per_file_ratio": list(report.per_file_ratio),
        "per_file_utilization": list(report.per_file_utilization),
        "cached_flags": list(report.cached_flags),
    }


def _allocation_doc(workload, alloc):
    return {"buffers": list(alloc.buffers), "objectives": _objectives_doc(evaluate_all(workload, alloc))}


def strategy_entry(workload, strategy, integral=True):
    real = allocate(workload, strategy)
    entry = {"strategy": strategy.value, "real": _allocation_doc(workload, real)}
    if integral:
        entry["integral"] = _allocation_doc(workload, round_to_integers(workload, real))
    return entry


def allocate_report(workload, strategy, integral=False):
    return {
        "command": "allocate",
        "workload": _workload_doc(workload),
        "strategies": [strategy_entry(workload, strategy, integral)],
    }


def compare_report(workload):
    return {
        "command": "compare",
        "workload": _workload_doc(workload),
        "strategies": [strategy_entry(workload, s) for s in StrategyKind],
    }


def oracle_report(workload, objective):
    strategy = StrategyKind.for_objective(objective)
    real = allocate(workload, strategy)
    rounded = round_to_integers(workload, real)
    result = brute_force_optimum(workload, objective)
    closed = objective.evaluate(workload, real)
    rounded_value = objective.evaluate(workload, rounded)
    gap = rounded_value - result.optimal_value
    if result.optimal_value != 0:
        rel_gap = gap / result.optimal_value
    else:
        rel_gap = 0.0 if gap == 0 else None
    return {
        "command": "oracle-check",
        "workload": _workload_doc(workload),
        "objective": objective.value,
        "strategy": strategy.value,
        "closed_form": {"buffers": list(real.buffers), "value": closed},
        "rounded": {"buffers": list(rounded.buffers), "value": rounded_value},
        "oracle": {
            "value": result.optimal_value,
            "optima": [list(a.buffers) for a in result.optima],
            "instances_enumerated": result.instances_enumerated,
        },
        "abs_gap": gap,
        "rel_gap": rel_gap,
    }


def simulate_report(workload, strategy, policy, interleaving):
    real = allocate(workload, strategy)
    rounded = round_to_integers(workload, real)
    result = simulate(workload, rounded, generate_trace(workload, interleaving), policy)
    fully_cached = sum(1 for w, u in zip(workload.sizes, rounded.buffers) if u == w)
    return {
        "command": "simulate",
        "workload": _workload_doc(workload),
        "strategy": strategy.value,
        "policy": policy.value,
        "interleaving": interleaving.value,
        "buffers_real": list(real.buffers),
        "buffers_int": list(rounded.buffers),
        "per_file_calls": list(result.per_file_calls),
        "total_calls": result.total_calls,
        "blocks_transferred": result.blocks_transferred,
        "predicted_f1": predicted_calls(workload, rounded),
        "fully_cached_count": fully_cached,
    }


# --- rendering --------------------------------------------------------------

def _g(x):
    if x is None:
        return "n/a"
    if isinstance(x, int):
        return str(x)
    return format(x, ".6g")


def _table(header, rows):
    cells = [header] + [[_g(c) if not isinstance(c, str) else c for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines)


def _render_strategies_table(doc):
    names = [f["name"] for f in doc["workload"]["files"]]
    out = [f"free_memory: {doc['workload']['free_memory']}"]
    summary = []
    for entry in doc["strategies"]:
        real = entry["real"]
        integral = entry.get("integral")
        rows = []
        for i, name in enumerate(names):
            row = [name, real["buffers"][i]]
            row.append(integral["buffers"][i] if integral else "-")
            row.append(real["objectives"]["per_file_ratio"][i])
            rows.append(row)
        out.append("")
        out.append(f"strategy: {entry['strategy']}")
        out.append(_table(["file", "buffer_real", "buffer_int", "ratio"], rows))
        for kind in ("real", "integral"):
            if kind in entry:
                obj = entry[kind]["objectives"]
                summary.append([entry["strategy"], kind] + [obj[k] for k in ("f1", "f2", "f3", "f4")])
    out.append("")
    out.append(_table(["strategy", "allocation", "f1", "f2", "f3", "f4"], summary))
    return "\n".join(out) + "\n"


def _render_strategies_csv(doc):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    names = [f["name"] for f in doc["workload"]["files"]]
    for entry in doc["strategies"]:
        real = entry["real"]
        obj = real["objectives"]
        integral = entry.get("integral")
        for i, name in enumerate(names):
            writer.writerow([
                entry["strategy"],
                name,
                repr(real["buffers"][i]),
                integral["buffers"][i] if integral else "",
                repr(obj["per_file_ratio"][i]),
                repr(obj["f1"]),
                repr(obj["f2"]),
                repr(obj["f3"]),
                repr(obj["f4"]),
            ])
    return buf.getvalue()


def _render_oracle(doc, fmt):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["objective", "strategy", "closed_form_value", "rounded_value",
                         "oracle_value", "abs_gap", "rel_gap", "optima_count", "instances_enumerated"])
        writer.writerow([
            doc["objective"], doc["strategy"], repr(doc["closed_form"]["value"]),
            repr(doc["rounded"]["value"]), repr(doc["oracle"]["value"]), repr(doc["abs_gap"]),
            "" if doc["rel_gap"] is None else repr(doc["rel_gap"]),
            len(doc["oracle"]["optima"]), doc["oracle"]["instances_enumerated"],
        ])
        return buf.getvalue()
    fmt_buffers = lambda bs: "(" + ", ".join(_g(b) for b in bs) + ")"
    rows = [
        ["closed-form", fmt_buffers(doc["closed_form"]["buffers"]), doc["closed_form"]["value"]],
        ["rounded", fmt_buffers(doc["rounded"]["buffers"]), doc["rounded"]["value"]],
        ["oracle", fmt_buffers(doc["oracle"]["optima"][0]), doc["oracle"]["value"]],
    ]
    lines = [
        f"objective: {doc['objective']}  strategy: {doc['strategy']}",
        _table(["source", "buffers", "value"], rows),
        f"abs_gap: {_g(doc['abs_gap'])}",
        f"rel_gap: {_g(doc['rel_gap'])}",
        f"optima: {len(doc['oracle']['optima'])} of {doc['oracle']['instances_enumerated']} feasible points",
    ]
    return "\n".join(lines) + "\n"


def _render_simulation(doc, fmt):
    names = [f["name"] for f in doc["workload"]["files"]]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["strategy", "policy", "interleaving", "file", "buffer_int", "calls"])
        for name, u, c in zip(names, doc["buffers_int"], doc["per_file_calls"]):
            writer.writerow([doc["strategy"], doc["policy"], doc["interleaving"], name, u, c])
        writer.writerow([doc["strategy"], doc["policy"], doc["interleaving"], "TOTAL", "", doc["total_calls"]])
        return buf.getvalue()
    rows = [[n, u, c] for n, u, c in zip(names, doc["buffers_int"], doc["per_file_calls"])]
    lines = [
        f"strategy: {doc['strategy']}  policy: {doc['policy']}  interleaving: {doc['interleaving']}",
        _table(["file", "buffer_int", "calls"], rows),
        f"total_calls: {doc['total_calls']}",
        f"blocks_transferred: {doc['blocks_transferred']}",
        f"predicted_f1: {doc['predicted_f1']}",
        f"fully_cached: {doc['fully_cached_count']}",
    ]
    return "\n".join(lines) + "\n"


def render(doc, fmt="table") -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    command = doc["command"]
    if command == "oracle-check":
        return _render_oracle(doc, fmt)
    if command == "simulate":
        return _render_simulation(doc, fmt)
    if fmt == "csv":
        return _render_strategies_csv(doc)
    return _render_strategies_table(doc)


# --- argument handling ------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # Usage mistakes share the parse-error status; 2 is reserved for V < H.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser():
    fmt = _Parser(add_help=False)
    fmt.add_argument("--format", choices=["table", "json", "csv"], default=argparse.SUPPRESS)
    strategies = [s.value for s in StrategyKind]

    parser = _Parser(prog="cachealloc", description="Optimal per-file cache buffer sizing.")
    parser.add_argument("--format", choices=["table", "json", "csv"], default="table")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("allocate", parents=[fmt], help="allocate buffers with one strategy")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", required=True, choices=strategies)
    p.add_argument("--integral", action="store_true", help="also emit the rounded allocation")

    p = sub.add_parser("compare", parents=[fmt], help="run all four strategies")
    p.add_argument("--input", required=True)

    p = sub.add_parser("oracle-check", parents=[fmt], help="compare a strategy with brute force")
    p.add_argument("--input", required=True)
    p.add_argument("--objective", required=True, choices=[o.value for o in Objective])

    p = sub.add_parser("simulate", parents=[fmt], help="replay scans against the rounded allocation")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", required=True, choices=strategies)
    p.add_argument("--policy", choices=[f.value for f in FetchPolicy], default="chunked")
    p.add_argument("--interleaving", choices=[i.value for i in Interleaving], default="concat")
    return parser


def run(args) -> dict:
    workload = load_workload(args.input)
    if args.command == "allocate":
        return allocate_report(workload, StrategyKind(args.strategy), args.integral)
    if args.command == "compare":
        return compare_report(workload)
    if args.command == "oracle-check":
        return oracle_report(workload, Objective(args.objective))
    return simulate_report(
        workload,
        StrategyKind(args.strategy),
        FetchPolicy(args.policy),
        Interleaving(args.interleaving),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = run(args)
    except WorkloadParseError as exc:
        print(f"cachealloc: {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetTooSmallError as exc:
        print(f"cachealloc: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EnumerationTooLargeError as exc:
        print(f"cachealloc: {exc}", file=sys.stderr)
        return EXIT_ORACLE_SIZE
    sys.stdout.write(render(doc, args.format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
