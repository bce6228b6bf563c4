"""Command-line front end: table ingestion, fitting, inspection, search.

Subcommands
-----------
fit         fit a model to a table of counts and report statistics
matrices    print design / kernel / inverse matrices for inspection
generators  print binomial generators, optionally homogenized
search      dual lattice search over hierarchical models

Text and JSON reports are rendered from the same structure.  Exit codes:
0 success, 2 validation error, 3 convergence failure.  The environment
variable HASFIT_MAX_ITERS overrides the inner iteration cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .fit import FitError, ObservedCounts, mle
from .lattice import cell_label, parse_cell_label, revlex_cells
from .models import (
    ModelSpec,
    binomial_generators,
    binomial_string,
    build_model,
    homogenize,
    parse_model_string,
)
from .param import FEATURE_LETTERS, build_design, invert_corner, subset_name
from .search import eh_search

MAX_COUNT = 2**63 - 1


@dataclass
class TableFile:
    """A validated table of (cell label, count) pairs."""

    k: int
    feature_names: list[str]
    rows: list[tuple[str, int]]
    space: str

    def to_counts(self, allow_missing_as_zero: bool = False) -> ObservedCounts:
        cells = revlex_cells(self.k, self.space)
        by_label = {label: count for label, count in self.rows}
        counts = []
        missing = []
        for cell in cells:
            label = cell_label(cell)
            if label in by_label:
                counts.append(by_label.pop(label))
            elif allow_missing_as_zero:
                counts.append(0)
            else:
                missing.append(label)
        if missing:
            raise ValueError(
                f"missing cells {missing[:5]}{'...' if len(missing) > 5 else ''}; "
                "pass --allow-missing-as-zero to fill them with zeros"
            )
        return ObservedCounts(counts=np.array(counts, dtype=np.int64),
                              k=self.k, space=self.space)


def parse_table(path: str, format: str = "csv", space: str = "IP") -> TableFile:
    """Read and validate a CSV or JSON table of cell counts.

    CSV tables are two columns (cell label, count) with an optional
    ``cell,count`` header.  JSON tables look like
    ``{"space": "IP", "features": ["A", "B"], "counts": {"10": 2, ...}}``.
    """
    if format == "csv":
        pairs, names = _read_csv(path)
    elif format == "json":
        pairs, names, declared = _read_json(path)
        if declared:
            space = declared
    else:
        raise ValueError(f"table format must be 'csv' or 'json', got {format!r}")

    if not pairs:
        raise ValueError(f"no data rows found in {path}")
    k = len(pairs[0][0])
    seen = set()
    for label, count in pairs:
        cell = parse_cell_label(label, space="CP")  # grammar check; zero cell below
        if len(cell) != k:
            raise ValueError(f"label {label!r} has length {len(cell)}, expected {k}")
        if label in seen:
            raise ValueError(f"duplicate cell label {label!r}")
        seen.add(label)
        if not any(cell) and space != "CP":
            raise ValueError(f"all-zeros cell {label!r} is not part of the IP (E_ZERO_CELL)")
        if count < 0 or count > MAX_COUNT:
            raise ValueError(f"count {count} for cell {label!r} out of range")
    if names is None:
        names = list(FEATURE_LETTERS[:k])
    if len(names) != k:
        raise ValueError(f"{len(names)} feature names for {k} features")
    return TableFile(k=k, feature_names=names, rows=pairs, space=space)


def _read_csv(path: str):
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            label = row[0].strip()
            if label.lower() == "cell":
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{line_no}: expected 'cell,count', got {row!r}")
            pairs.append((label, _parse_count(row[1].strip(), label)))
    return pairs, None


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "counts" not in doc:
        raise ValueError(f"JSON table {path} must be an object with a 'counts' mapping")
    declared = doc.get("space")
    if declared not in (None, "IP", "CP"):
        raise ValueError(f"space must be 'IP' or 'CP', got {declared!r}")
    names = doc.get("features")
    pairs = [(str(label), _parse_count(v, label)) for label, v in doc["counts"].items()]
    return pairs, names, declared


def _parse_count(value, label) -> int:
    try:
        count = int(value)
        if count != float(value):
            raise ValueError
    except (TypeError, ValueError, OverflowError):
        raise ValueError(f"count {value!r} for cell {label!r} is not an integer") from None
    return count


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hasfit",
        description="Multiplicative association models on incomplete binary tables",
    )
    parser.add_argument("--version", action="version", version=f"hasfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, table: bool) -> None:
        p.add_argument("--format", choices=("text", "json"), default="text")
        if table:
            p.add_argument("table", help="CSV or JSON file of cell counts")
            p.add_argument("--table-format", choices=("csv", "json"), default=None)
            p.add_argument("--space", choices=("IP", "CP"), default="IP")
            p.add_argument("--allow-missing-as-zero", action="store_true")
            p.add_argument("--zero-policy", default="error",
                           help="'error' (default) or 'epsilon[:<value>]'")
            p.add_argument("--tol-inner", type=float, default=1e-10)
            p.add_argument("--tol-outer", type=float, default=1e-10)

    p_fit = sub.add_parser("fit", help="fit one model to a table")
    p_fit.add_argument("--model", required=True, help='e.g. "[AC][BC]" or a JSON class list')
    p_fit.add_argument("--kind", choices=("has", "qll", "ll"), default="has")
    add_common(p_fit, table=True)

    p_mat = sub.add_parser("matrices", help="print design/kernel/inverse matrices")
    p_mat.add_argument("--k", type=int, required=True)
    p_mat.add_argument("--model", default=None)
    p_mat.add_argument("--kind", choices=("has", "qll", "ll"), default="has")
    add_common(p_mat, table=False)

    p_gen = sub.add_parser("generators", help="print binomial generators")
    p_gen.add_argument("--model", required=True)
    p_gen.add_argument("--kind", choices=("has", "qll", "ll"), default="has")
    p_gen.add_argument("--k", type=int, default=None)
    p_gen.add_argument("--homogenize", action="store_true")
    add_common(p_gen, table=False)

    p_search = sub.add_parser("search", help="dual lattice model search")
    p_search.add_argument("--kind", choices=("has", "qll"), default="has")
    p_search.add_argument("--alpha", type=float, default=0.05)
    p_search.add_argument("--statistic", choices=("both", "X2", "G2"), default="both")
    add_common(p_search, table=True)

    return parser


def _load_table(args) -> TableFile:
    fmt = args.table_format
    if fmt is None:
        fmt = "json" if args.table.endswith(".json") else "csv"
    return parse_table(args.table, format=fmt, space=args.space)


def _model_block(spec: ModelSpec, model) -> dict:
    return {
        "kind": spec.kind,
        "generating_class": spec.generating_string(),
        "ascending_class": [subset_name(s) for s in
                            sorted(spec.asc.members, key=lambda s: (len(s), sorted(s)))],
        "df": model.df,
        "overall_effect": model.overall_effect,
    }


def dispatch(args) -> dict:
    report: dict = {"command": args.command, "version": __version__}

    if args.command == "fit":
        table = _load_table(args)
        counts = table.to_counts(allow_missing_as_zero=args.allow_missing_as_zero)
        spec = ModelSpec(k=table.k, kind=args.kind,
                         asc=parse_model_string(args.model, k=table.k))
        model = build_model(spec)
        result = mle(counts, model, tol_inner=args.tol_inner,
                     tol_outer=args.tol_outer, zero_policy=args.zero_policy)
        report["options"] = {"model": args.model, "kind": args.kind,
                             "zero_policy": args.zero_policy, "table": args.table}
        report["features"] = table.feature_names
        report["model"] = _model_block(spec, model)
        report["fit"] = result.to_dict()

    elif args.command == "matrices":
        report["options"] = {"k": args.k, "model": args.model, "kind": args.kind}
        if args.model is None:
            S = build_design(args.k, "IP")
            T = build_design(args.k, "CP")
            st_inv, s_inv = invert_corner(args.k)
            report["matrices"] = {
                "S": _matrix_block(S.dump(), S.entries),
                "T": _matrix_block(T.dump(), T.entries),
                "S_transpose_inverse": _matrix_block(None, st_inv),
                "S_inverse": _matrix_block(None, s_inv),
            }
        else:
            spec = ModelSpec(k=args.k, kind=args.kind,
                             asc=parse_model_string(args.model, k=args.k))
            model = build_model(spec)
            report["model"] = _model_block(spec, model)
            report["matrices"] = {
                "design": _matrix_block(model.design.dump(), model.design.entries),
                "kernel": _matrix_block(None, model.kernel),
            }

    elif args.command == "generators":
        spec = ModelSpec(k=args.k, kind=args.kind,
                         asc=parse_model_string(args.model, k=args.k)) \
            if args.k else _spec_from_string(args.model, args.kind)
        model = build_model(spec)
        gens = binomial_generators(model)
        report["options"] = {"model": args.model, "kind": args.kind,
                             "homogenize": args.homogenize}
        report["model"] = _model_block(spec, model)
        report["generators"] = [binomial_string(g) for g in gens]
        if args.homogenize:
            if model.space != "IP":
                raise ValueError("--homogenize applies to IP-model generators")
            report["homogenized"] = [binomial_string(g)
                                     for g in homogenize(gens, "to_CP")]

    elif args.command == "search":
        table = _load_table(args)
        counts = table.to_counts(allow_missing_as_zero=args.allow_missing_as_zero)
        state = eh_search(counts, k=table.k, kind=args.kind, alpha=args.alpha,
                          statistic=args.statistic, tol_inner=args.tol_inner,
                          tol_outer=args.tol_outer, zero_policy=args.zero_policy)
        report["options"] = {"kind": args.kind, "alpha": args.alpha,
                             "statistic": args.statistic, "table": args.table}
        report["features"] = table.feature_names
        report["search"] = state.to_dict()

    return report


def _spec_from_string(text: str, kind: str) -> ModelSpec:
    asc = parse_model_string(text)
    return ModelSpec(k=asc.k, kind=kind, asc=asc)


def _matrix_block(dump: str | None, entries) -> dict:
    block = {"entries": np.asarray(entries).astype(int).tolist()}
    if dump is not None:
        block["dump"] = dump
    return block


def render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False)
    lines = [f"hasfit {report['version']} — {report['command']}"]
    if "model" in report:
        m = report["model"]
        lines.append(
            f"model: {m['kind']} {m['generating_class']} "
            f"(df={m['df']}, overall effect: {'yes' if m['overall_effect'] else 'no'})"
        )
        lines.append("ascending class: " + ", ".join(m["ascending_class"]))
    if "fit" in report:
        f = report["fit"]
        lines.append(f"gamma: {_fmt(f['gamma'])}")
        lines.append(f"X2: {_fmt(f['X2'])}  (p = {_fmt(f['p_values']['X2'])})")
        lines.append(f"G2: {_fmt(f['G2'])}  (p = {_fmt(f['p_values']['G2'])})")
        lines.append(f"df: {f['df']}")
        lines.append("fitted probabilities:")
        for label, value in f["p_hat"].items():
            lines.append(f"  {label}  {_fmt(value)}")
        lines.append("corner parameters (descending class):")
        for name, value in f["beta_hat"].items():
            lines.append(f"  {name:>4}  {_fmt(value)}")
        conv = f["convergence"]
        lines.append(
            f"convergence: {conv['iterations']} sweeps, "
            f"max residual {_fmt(conv['max_residual'])}"
            + (", zero counts adjusted" if conv["zero_adjusted"] else "")
        )
    if "matrices" in report:
        for name, block in report["matrices"].items():
            lines.append(f"{name}:")
            if "dump" in block:
                lines.append(block["dump"])
            else:
                for row in block["entries"]:
                    lines.append("  " + " ".join(f"{v:>3d}" for v in row))
    if "generators" in report:
        lines.append("generators:")
        for g in report["generators"]:
            lines.append(f"  {g}")
        if "homogenized" in report:
            lines.append("homogenized:")
            for g in report["homogenized"]:
                lines.append(f"  {g}")
    if "search" in report:
        s = report["search"]
        lines.append(f"alpha: {_fmt(s['alpha'])}  kind: {s['kind']}")
        lines.append("minimal accepted: " + (", ".join(s["minimal_accepted"]) or "(none)"))
        lines.append("maximal rejected: " + (", ".join(s["maximal_rejected"]) or "(none)"))
        lines.append(f"waves: {len(s['waves'])}, models fitted: {len(s['models'])}")
        for key, info in s["decisions"].items():
            result = s["models"].get(key)
            stats = ""
            if result is not None:
                stats = (f"  X2={_fmt(result['X2'])} G2={_fmt(result['G2'])} "
                         f"df={result['df']} p={_fmt(min(result['p_values'].values()))}")
            lines.append(f"  {info['status']:>8} [{info['source']}] {key}{stats}")
        if s["errors"]:
            lines.append("errors:")
            for key, msg in s["errors"].items():
                lines.append(f"  {key}: {msg}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        report = dispatch(args)
    except FitError as err:
        print(f"convergence failure: {err}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(render_report(report, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
