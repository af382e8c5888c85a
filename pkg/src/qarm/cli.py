"""Command-line front end: ``qarm mine | estimate | export``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from pathlib import Path

from .engine import CircuitError, count_gate_lines, export_circuit_text
from .pipeline import (
    MODES,
    PipelineConfig,
    build_pae,
    build_qarm_iteration,
    decode_supports,
    measure,
    mine,
)
from .oracles import OB_LABEL, RegisterLayout
from .transactions import DatabaseError, TransactionDatabase, apriori_mine, pad_to_power_of_two, parse_database


class UsageError(Exception):
    """Bad flags or input; maps to exit status 2."""


def _fmt_itemset(labels) -> str:
    return "{" + ",".join(labels) + "}"


def load_database(path: str, fmt: str | None) -> TransactionDatabase:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    if fmt is None:
        fmt = "json-matrix" if p.suffix.lower() == ".json" else "csv-transactions"
    return parse_database(p.read_text(encoding="utf-8"), fmt)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QARM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QARM_SEED must be an integer, got {env!r}") from None


def _config(args) -> PipelineConfig:
    if args.exact and args.shots:
        raise UsageError("--exact and --shots are mutually exclusive")
    return PipelineConfig(
        t=args.t,
        shots=args.shots or 0,
        seed=_seed(args),
        s_min=args.smin,
        aa_rounds=args.aa_rounds,
        mode=args.mode,
    )


def _candidates(db: TransactionDatabase, k: int, text: str | None):
    if not text:
        return list(itertools.combinations(range(db.num_items), k))
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        itemset = db.parse_itemset(chunk.split(","))
        if len(itemset) != k:
            raise UsageError(f"candidate {chunk!r} is not a {k}-itemset")
        out.append(itemset)
    if not out:
        raise UsageError("empty candidate list")
    return sorted(set(out))


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _rows_csv(rows: list[tuple[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["itemset", "support"])
    w.writerows(rows)
    return buf.getvalue()


def cmd_mine(args) -> int:
    db = load_database(args.input, args.format)
    if args.engine == "classical":
        if not 0 < args.smin <= 1:
            raise UsageError(f"--smin must lie in (0, 1], got {args.smin}")
        result = apriori_mine(db, args.smin)
        rows = [
            (_fmt_itemset(db.labels_of(x)), f"{float(s):.3f}")
            for x, s in sorted(result.supports().items(), key=lambda kv: (len(kv[0]), kv[0]))
        ]
        payload = json.dumps(result.to_dict(db), indent=2)
    else:
        report = mine(db, _config(args))
        rows = [
            (_fmt_itemset(report.labels(x)), f"{s:.3f}")
            for x, s in sorted(report.frequent_itemsets.items(), key=lambda kv: (len(kv[0]), kv[0]))
        ]
        payload = report.to_json()
    if args.output_format == "csv":
        payload = _rows_csv(rows)
    elif args.output_format == "table":
        payload = _table(rows)
    _write(args.output, payload if payload.endswith("\n") else payload + "\n")
    print(_table(rows), end="")
    return 0


def _table(rows) -> str:
    if not rows:
        return "no frequent itemsets\n"
    width = max(len("itemset"), *(len(r[0]) for r in rows))
    lines = [f"{'itemset':<{width}}  support"]
    lines += [f"{a:<{width}}  {b}" for a, b in rows]
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    db = load_database(args.input, args.format)
    config = _config(args)
    cands = _candidates(db, args.k, args.candidates)
    circ = build_pae(db, args.k, cands, config.t)
    hist = measure(circ, config, args.k)
    layout = RegisterLayout.for_database(pad_to_power_of_two(db), args.k, config.t)
    decoded = decode_supports(hist, layout, cands, config.t, db.num_transactions)
    payload = {
        "histogram": hist.to_dict(),
        "decoded": [dict(d.to_dict(), labels=list(db.labels_of(d.itemset))) for d in decoded],
    }
    _write(args.output, json.dumps(payload, indent=2) + "\n")
    for bits, w in hist.sorted_items():
        print(f"{bits}  {w:.4f}" if hist.exact else f"{bits}  {w}")
    for d in decoded:
        est = "undefined" if d.missing else f"{d.support_estimate:.4f}"
        snap = f" (nearest {d.snapped_support})" if d.snapped else ""
        print(f"{_fmt_itemset(db.labels_of(d.itemset))}  support {est}  m={list(d.m_values)}{snap}")
    return 0


def cmd_export(args) -> int:
    db = load_database(args.input, args.format)
    config = _config(args)
    cands = _candidates(db, args.k, args.candidates)
    if args.circuit == "pae":
        circ = build_pae(db, args.k, cands, config.t)
    else:
        circ = build_qarm_iteration(db, args.k, cands, config)
    text = export_circuit_text(circ)
    layout = RegisterLayout.for_database(pad_to_power_of_two(db), args.k, config.t)
    data = layout.num_qubits - layout.num_ancillas
    summary = [
        f"qubits: {circ.num_qubits} ({data} register + {layout.num_ancillas} ancilla)",
        f"ir gates: {len(circ)}",
        f"qasm gates: {count_gate_lines(text)}",
        f"O_B instantiations: {circ.count_blocks(OB_LABEL)}",
        f"candidate preparation: {circ.metadata['prep_method']}",
    ]
    if args.output:
        _write(args.output, text)
        print("\n".join(summary))
    else:
        sys.stdout.write(text)
        print("\n".join(summary), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qarm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, smin_default=None):
        p.add_argument("input", help="database file (.csv transactions or .json matrix)")
        p.add_argument("--format", choices=["csv-transactions", "json-matrix"], default=None)
        p.add_argument("--smin", type=float, default=smin_default, required=smin_default is None)
        p.add_argument("--t", type=int, default=4, help="estimation qubits")
        p.add_argument("--shots", type=int, default=0, help="sample this many shots instead of exact")
        p.add_argument("--exact", action="store_true", help="exact probabilities (default)")
        p.add_argument("--seed", type=int, default=None, help="sampling seed (fallback: $QARM_SEED)")
        p.add_argument("--aa-rounds", type=int, default=1)
        p.add_argument("--mode", choices=MODES, default="full-qarm")
        p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("mine", help="mine frequent itemsets")
    common(p)
    p.add_argument("--engine", choices=["classical", "quantum"], default="quantum")
    p.add_argument("--output-format", choices=["json", "csv", "table"], default="json")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("estimate", help="estimate supports with parallel amplitude estimation")
    common(p, smin_default=0.5)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--candidates", default=None, help='e.g. "I0,I2;I1,I3"')
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("export", help="write a circuit as OpenQASM 2.0")
    common(p, smin_default=0.5)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--candidates", default=None)
    p.add_argument("--circuit", choices=["pae", "qarm"], default="pae")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DatabaseError, CircuitError, ValueError) as exc:
        print(f"qarm: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - exit-status contract
        print(f"qarm: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
