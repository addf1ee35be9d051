"""Command line entry point: ``contrast-subgraph <command> ...``.

Every command writes ``run.json`` next to its outputs; ``contrast-subgraph
replay run.json`` re-executes it with exactly the same configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from collections import Counter
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._io import atomic_write_text, read_json, write_json
from .contrast import (AlphaSpec, ContrastResult, difference_graph, display_edges, extract,
                       extract_symmetric, resolve_alpha)
from .errors import ContrastError
from .goqc import METHODS, SolverConfig
from .graphs import DEFAULT_LABEL_ALIASES, GraphGroup, load_group, read_atlas, write_matrix_csv
from .pipeline import (FeatureTable, decision_grid, extract_rules, features_p1, features_p2, fit_classifier,
                       run_protocol)
from .summarize import build_difference, build_summary, weighted_degrees
from .synth import PlantedSpec, planted_dataset, write_cohort

PATH_ARGS = ("group_a", "group_b", "atlas", "out", "contrast")


# --- argument parsing ----------------------------------------------------------


def _common(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)


def _ingest(p):
    p.add_argument("--group-a", required=True, help="manifest TSV of group A")
    p.add_argument("--group-b", required=True, help="manifest TSV of group B")
    p.add_argument("--timeseries", action="store_true", help="manifest paths are ROI time-series CSVs")
    p.add_argument("--threshold-percentile", type=float, default=80.0)
    p.add_argument("--label-alias", action="append", default=[], metavar="NAME=A|B",
                   help="extra manifest label alias, e.g. TD=A (repeatable)")
    p.add_argument("--atlas", default=None, help="ROI names, one per line or index,name")
    p.add_argument("--summary-mode", choices=("fraction", "weighted-mean", "binary"), default="fraction")
    p.add_argument("--summary-threshold", type=float, default=0.5, help="threshold for --summary-mode binary")


def _solver(p, alpha_required=True):
    p.add_argument("--alpha", required=alpha_required, default=None,
                   help="penalty: 0.8 (raw), 80 (percent), p90 (percentile of positive weights)")
    p.add_argument("--alpha-b", default=None, help="penalty for the B-minus-A direction (default: --alpha)")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--method", choices=METHODS, default="sdp+local-search")
    p.add_argument("--restarts", type=int, default=SolverConfig.restarts)
    p.add_argument("--rounding-samples", type=int, default=SolverConfig.rounding_samples)
    p.add_argument("--local-search-max-passes", type=int, default=SolverConfig.local_search_max_passes)
    p.add_argument("--edge-display-threshold", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contrast-subgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="summary graphs, difference matrix and degrees")
    _common(p)
    _ingest(p)

    p = sub.add_parser("extract", help="contrast subgraphs between the two groups")
    _common(p)
    _ingest(p)
    _solver(p)

    p = sub.add_parser("classify", help="two-feature classification with repeated 80/20 splits")
    _common(p)
    _ingest(p)
    _solver(p, alpha_required=False)
    p.add_argument("--scheme", choices=("p1", "p2"), default="p1")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--fixed-contrast", action="store_true",
                   help="extract once on all subjects instead of inside each training split")
    p.add_argument("--contrast", nargs="+", default=None,
                   help="precomputed contrast JSON(s): A-B and B-A for p1, symmetric for p2 (implies --fixed-contrast)")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--quadratic", action="store_true", help="quadratic feature expansion")
    p.add_argument("--permute-labels", action="store_true", help="sanity check: shuffle labels before anything else")

    p = sub.add_parser("synth", help="write a planted cohort")
    _common(p)
    defaults = PlantedSpec()
    p.add_argument("--n", type=int, default=defaults.n)
    p.add_argument("--k", type=int, default=defaults.k)
    p.add_argument("--group-size-a", type=int, default=defaults.group_size_a)
    p.add_argument("--group-size-b", type=int, default=defaults.group_size_b)
    p.add_argument("--p-in-a", type=float, default=defaults.p_in_a)
    p.add_argument("--p-in-b", type=float, default=defaults.p_in_b)
    p.add_argument("--p-bg", type=float, default=defaults.p_bg)

    p = sub.add_parser("report", help="display edges and node degrees for saved contrast results")
    _common(p)
    _ingest(p)
    p.add_argument("--contrast", nargs="+", required=True, help="contrast result JSON files")
    p.add_argument("--edge-display-threshold", type=float, default=0.1)

    p = sub.add_parser("replay", help="re-run a command from its run.json")
    p.add_argument("run_json")
    p.add_argument("--out", default=None, help="override the recorded output directory")
    return parser


# --- helpers -------------------------------------------------------------------


def _aliases(args):
    aliases = dict(DEFAULT_LABEL_ALIASES)
    for item in args.label_alias:
        name, _, target = item.partition("=")
        if target not in ("A", "B"):
            raise ContrastError(f"bad --label-alias {item!r}; expected NAME=A or NAME=B", code="E_USAGE")
        aliases[name] = target
    return aliases


def _groups(args):
    kw = dict(label_aliases=_aliases(args), timeseries=args.timeseries, percentile=args.threshold_percentile)
    a = load_group(args.group_a, **kw)
    b = load_group(args.group_b, **kw)
    if a.n != b.n:
        raise ContrastError(f"dimension mismatch: group A has n={a.n}, group B has n={b.n}", code="E_DIMENSION")
    return a, b


def _atlas(args, n):
    if not getattr(args, "atlas", None):
        return None
    names = read_atlas(args.atlas)
    if len(names) != n:
        raise ContrastError(f"atlas lists {len(names)} names for {n} vertices", code="E_FORMAT")
    return names


def _solver_config(args, seed=None) -> SolverConfig:
    return SolverConfig(
        restarts=args.restarts,
        local_search_max_passes=args.local_search_max_passes,
        rounding_samples=args.rounding_samples,
        rng_seed=args.seed if seed is None else seed,
        method=args.method,
    )


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_cell(x) for x in r) + "\n")
    return buf.getvalue()


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x) + 0.0
        return str(int(x)) if x.is_integer() else repr(x)
    s = str(x)
    return f'"{s}"' if "," in s else s


def _write_run_json(args, out: Path, resolved: dict | None = None):
    record = {"command": args.command, "version": __version__, "args": _args_dict(args)}
    if resolved:
        record["resolved"] = resolved
    write_json(record, out / "run.json")


def _args_dict(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k != "command"}
    for k in PATH_ARGS:
        v = d.get(k)
        if isinstance(v, list):
            d[k] = [str(Path(x).resolve()) for x in v]
        elif v is not None:
            d[k] = str(Path(v).resolve())
    return d


def _display_rows(result: ContrastResult, d: np.ndarray, threshold, atlas):
    rows = []
    for u, v, x in display_edges(result, d, threshold):
        if atlas is None:
            rows.append((u, v, x))
        else:
            rows.append((u, v, atlas[u], atlas[v], x))
    header = ["u", "v", "weight"] if atlas is None else ["u", "v", "name_u", "name_v", "weight"]
    return header, rows


def _write_result(result: ContrastResult, d_signed, out: Path, tag: str, threshold, atlas):
    write_json(result.to_dict(atlas), out / f"contrast_{tag}.json")
    header, rows = _display_rows(result, d_signed, threshold, atlas)
    atomic_write_text(out / f"edges_{tag}.csv", _csv_text(header, rows))


def _alpha_specs(args):
    if args.alpha is None:
        raise ContrastError("--alpha is required", code="E_USAGE")
    a = AlphaSpec.parse(args.alpha)
    b = AlphaSpec.parse(args.alpha_b) if args.alpha_b is not None else a
    return a, b


# --- commands ------------------------------------------------------------------


def cmd_summarize(args):
    out = Path(args.out)
    a, b = _groups(args)
    sa = build_summary(a, args.summary_mode, args.summary_threshold)
    sb = build_summary(b, args.summary_mode, args.summary_threshold)
    diff = build_difference(sa, sb, "signed")
    atlas = _atlas(args, a.n)
    write_matrix_csv(sa.w, out / "summary_A.csv")
    write_matrix_csv(sb.w, out / "summary_B.csv")
    write_matrix_csv(diff.d, out / "difference_A-B.csv")
    da, db = weighted_degrees(sa), weighted_degrees(sb)
    header = ["vertex"] + (["atlas_name"] if atlas else []) + ["degree_A", "degree_B"]
    rows = [[v] + ([atlas[v]] if atlas else []) + [float(da[v]), float(db[v])] for v in range(a.n)]
    atomic_write_text(out / "degrees.csv", _csv_text(header, rows))
    _write_run_json(args, out, {"n": a.n, "group_sizes": {"A": len(a), "B": len(b)}})


def cmd_extract(args):
    out = Path(args.out)
    a, b = _groups(args)
    atlas = _atlas(args, a.n)
    cfg = _solver_config(args)
    alpha_a, alpha_b = _alpha_specs(args)
    d_signed = difference_graph(a, b, "signed", args.summary_mode, args.summary_threshold).d
    resolved = {}
    if args.symmetric:
        res = extract_symmetric(a, b, alpha_a, cfg, args.summary_mode, args.summary_threshold)
        _write_result(res, d_signed, out, "symmetric", args.edge_display_threshold, atlas)
        resolved["alpha_symmetric"] = res.alpha_resolved
    else:
        ab = extract(a, b, alpha_a, cfg, args.summary_mode, args.summary_threshold)
        ba = extract(b, a, alpha_b, cfg, args.summary_mode, args.summary_threshold)
        _write_result(ab, d_signed, out, "A-B", args.edge_display_threshold, atlas)
        _write_result(ba, -d_signed, out, "B-A", args.edge_display_threshold, atlas)
        resolved["alpha_A-B"] = ab.alpha_resolved
        resolved["alpha_B-A"] = ba.alpha_resolved
    _write_run_json(args, out, resolved)


def _regroup(subjects, idx):
    a = [subjects[i] for i in idx if subjects[i].label == "A"]
    b = [subjects[i] for i in idx if subjects[i].label == "B"]
    return GraphGroup("A", tuple(a)), GraphGroup("B", tuple(b))


def _featurizer(args, subjects, cfg):
    """Return ``fit(idx) -> (FeatureTable, contrast results)`` learning only from ``idx``."""
    alpha_a, alpha_b = _alpha_specs(args)
    kw = dict(summary_mode=args.summary_mode, threshold=args.summary_threshold)

    def fit(idx):
        ga, gb = _regroup(subjects, idx)
        if args.scheme == "p1":
            ab = extract(ga, gb, alpha_a, cfg, **kw)
            ba = extract(gb, ga, alpha_b, cfg, **kw)
            return features_p1(subjects, ab.vertices, ba.vertices), [("A-B", ab), ("B-A", ba)]
        sym = extract_symmetric(ga, gb, alpha_a, cfg, **kw)
        sa = build_summary(ga, args.summary_mode, args.summary_threshold)
        sb = build_summary(gb, args.summary_mode, args.summary_threshold)
        return features_p2(subjects, sym.vertices, sa, sb), [("symmetric", sym)]

    return fit


def _precomputed(args, subjects, a, b):
    results = [ContrastResult.from_dict(read_json(p)) for p in args.contrast]
    if args.scheme == "p1":
        by_variant = {r.variant: r for r in results}
        if set(by_variant) != {"A-minus-B", "B-minus-A"}:
            raise ContrastError("p1 needs one A-minus-B and one B-minus-A contrast JSON", code="E_USAGE")
        ab, ba = by_variant["A-minus-B"], by_variant["B-minus-A"]
        table = features_p1(subjects, ab.vertices, ba.vertices)
        return table, [("A-B", ab), ("B-A", ba)]
    sym = [r for r in results if r.variant == "symmetric"]
    if len(sym) != 1:
        raise ContrastError("p2 needs exactly one symmetric contrast JSON", code="E_USAGE")
    sa = build_summary(a, args.summary_mode, args.summary_threshold)
    sb = build_summary(b, args.summary_mode, args.summary_threshold)
    return features_p2(subjects, sym[0].vertices, sa, sb), [("symmetric", sym[0])]


def cmd_classify(args):
    out = Path(args.out)
    a, b = _groups(args)
    atlas = _atlas(args, a.n)
    subjects = list(a) + list(b)
    if args.permute_labels:
        rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(7,)))
        perm = rng.permutation([g.label for g in subjects])
        subjects = [g.with_label(str(l)) for g, l in zip(subjects, perm)]
    labels = [g.label for g in subjects]
    everyone = np.arange(len(subjects))
    cfg = _solver_config(args)
    standardize, quadratic = not args.no_standardize, args.quadratic
    scheme = args.scheme.upper()

    if args.contrast:
        table, results = _precomputed(args, subjects, a, b)
        fixed = True
    else:
        fit = _featurizer(args, subjects, cfg)
        table, results = fit(everyone)
        fixed = args.fixed_contrast

    if fixed:
        report = run_protocol(labels, lambda _: table.X, args.repetitions, args.seed, standardize, quadratic,
                              scheme, "fixed-contrast")
    else:
        report = run_protocol(labels, lambda idx: fit(idx)[0].X, args.repetitions, args.seed, standardize,
                              quadratic, scheme, "leak-free")

    # display artifacts: features from the contrast subgraphs of the full cohort
    table.write_csv(out / "features.csv")
    write_json(report.to_dict(), out / "eval_report.json")
    rules = extract_rules(table)
    atomic_write_text(out / "rules.txt", "".join(f"{r}\taccuracy={r.accuracy:.4f}\t{r.sentence}\n" for r in rules))
    write_json([r.to_dict() for r in rules], out / "rules.json")
    counts = Counter(report.chosen_hyper_c)
    c = min(counts, key=lambda k: (-counts[k], k))
    model = fit_classifier(table.X, labels, c, standardize, quadratic)
    atomic_write_text(out / "decision_grid.csv", _csv_text(["x", "y", "score"], decision_grid(model, table.X)))
    d_signed = difference_graph(a, b, "signed", args.summary_mode, args.summary_threshold).d
    for tag, res in results:
        _write_result(res, -d_signed if tag == "B-A" else d_signed, out, tag, args.edge_display_threshold, atlas)
    _write_run_json(args, out, {"protocol": report.protocol, "display_model_c": c,
                                **{f"alpha_{tag}": r.alpha_resolved for tag, r in results}})


def cmd_synth(args):
    out = Path(args.out)
    spec = PlantedSpec(args.n, args.k, args.group_size_a, args.group_size_b, args.p_in_a, args.p_in_b,
                       args.p_bg, args.seed)
    a, b = planted_dataset(spec)
    write_cohort(a, b, out, spec)
    _write_run_json(args, out, {"spec": asdict(spec)})


def cmd_report(args):
    out = Path(args.out)
    a, b = _groups(args)
    atlas = _atlas(args, a.n)
    d_signed = difference_graph(a, b, "signed", args.summary_mode, args.summary_threshold).d
    for path in args.contrast:
        res = ContrastResult.from_dict(read_json(path))
        if res.n and res.n != a.n:
            raise ContrastError(f"{path}: result has n={res.n}, groups have n={a.n}", code="E_DIMENSION")
        tag = {"A-minus-B": "A-B", "B-minus-A": "B-A", "symmetric": "symmetric"}[res.variant]
        d = -d_signed if tag == "B-A" else d_signed
        header, rows = _display_rows(res, d, args.edge_display_threshold, atlas)
        atomic_write_text(out / f"edges_{tag}.csv", _csv_text(header, rows))
        dd = np.abs(d) if tag == "symmetric" else d
        vs = sorted(res.vertices)
        deg = dd[np.ix_(vs, vs)].sum(axis=1) if vs else []
        node_header = ["vertex"] + (["atlas_name"] if atlas else []) + ["degree"]
        node_rows = [[v] + ([atlas[v]] if atlas else []) + [float(x)] for v, x in zip(vs, deg)]
        atomic_write_text(out / f"nodes_{tag}.csv", _csv_text(node_header, node_rows))
    _write_run_json(args, out)


COMMANDS = {
    "summarize": cmd_summarize,
    "extract": cmd_extract,
    "classify": cmd_classify,
    "synth": cmd_synth,
    "report": cmd_report,
}


def replay(run_json, out=None):
    record = read_json(run_json)
    args = argparse.Namespace(command=record["command"], **record["args"])
    if out is not None:
        args.out = str(out)
    COMMANDS[args.command](args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            replay(args.run_json, args.out)
        else:
            COMMANDS[args.command](args)
    except ContrastError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        code = "E_IO" if isinstance(exc, OSError) else "E_VALUE"
        print(f"error[{code}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
