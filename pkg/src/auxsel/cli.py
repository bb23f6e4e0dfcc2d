"""Command-line interface.

Subcommands compose through files: graphs and specs are JSON, sample
matrices are labeled CSV. Diagnostics go to stderr, data to stdout or the
requested output files. Exit codes: 0 success, 1 domain error (cycles,
degenerate matrices, a violated rank verdict under --strict), 2 usage or
IO error. The AUXSEL_SEED environment variable supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import fileio
from .dsep import LatentPartition, d_separated, partition
from .errors import AuxselError, FormatError
from .graph import Dag, graph_from_json
from .identifiability import (
    DEFAULT_RANK_TOL,
    DIRECT,
    SUBTRACTED,
    check_rank_direct,
    check_rank_subtracted,
    rank_report_to_json,
    score_matrix_for_scm,
)
from .metrics import eval_report_to_json, evaluate
from .mixing import (
    ADDITIVE_COUPLING,
    SPECIAL_ORTHOGONAL,
    forward,
    inverse,
    mixing_from_json,
)
from .scm import sample, random_spec, spec_from_json, spec_to_json
from .selection import select


def _default_seed() -> int:
    raw = os.environ.get("AUXSEL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise FormatError(f"AUXSEL_SEED must be an integer, got {raw!r}") from None


def _load_graph(path) -> Dag:
    return graph_from_json(fileio.read_json(path))


def _labels_to_ids(dag: Dag, raw: str | None) -> frozenset[int]:
    if not raw:
        return frozenset()
    return frozenset(dag.id_of(part.strip()) for part in raw.split(",") if part.strip())


def _emit(obj, out_path) -> None:
    if out_path:
        fileio.write_json_atomic(out_path, obj)
    else:
        print(json.dumps(obj, indent=2))


def _partition_json(dag: Dag, part: LatentPartition) -> dict:
    return {
        "conditioning": [dag.labels[v] for v in sorted(part.conditioning)],
        "groups": [[dag.labels[v] for v in g] for g in part.groups],
    }


def _cmd_dsep(args) -> int:
    dag = _load_graph(args.graph)
    separated = d_separated(
        dag,
        _labels_to_ids(dag, args.a),
        _labels_to_ids(dag, args.b),
        _labels_to_ids(dag, args.given),
    )
    print(f"d-separated: {'true' if separated else 'false'}")
    return 0


def _cmd_partition(args) -> int:
    dag = _load_graph(args.graph)
    part = partition(dag, _labels_to_ids(dag, args.given))
    _emit(_partition_json(dag, part), args.out)
    return 0


def _cmd_select(args) -> int:
    dag = _load_graph(args.graph)
    report = select(dag, prune=not args.no_prune)
    payload = {
        "chosen": [dag.labels[v] for v in sorted(report.chosen)],
        "groups": [[dag.labels[v] for v in g] for g in report.partition.groups],
        "group_count": report.group_count,
    }
    if args.explain:
        payload["candidates"] = [dag.labels[v] for v in sorted(report.candidates)]
        payload["table"] = [
            {"subset": [dag.labels[v] for v in s], "group_count": k}
            for s, k in report.table
        ]
    _emit(payload, args.out)
    return 0


def _cmd_simulate(args) -> int:
    dag = _load_graph(args.graph)
    spec = random_spec(dag, args.seed)
    matrix = sample(spec, args.n)
    if args.spec_out:
        fileio.write_json_atomic(args.spec_out, spec_to_json(spec))
    fileio.write_csv_matrix(args.out, matrix)
    return 0


def _cmd_mix(args) -> int:
    spec = mixing_from_json(fileio.read_json(args.spec))
    matrix = fileio.read_csv_matrix(args.infile)
    mapped = inverse(spec, matrix) if args.inverse else forward(spec, matrix)
    fileio.write_csv_matrix(args.out, mapped)
    return 0


def _cmd_check_rank(args) -> int:
    dag = _load_graph(args.graph)
    spec = spec_from_json(dag, fileio.read_json(args.spec))
    part_doc = fileio.read_json(args.partition)
    if not isinstance(part_doc, dict) or "groups" not in part_doc:
        raise FormatError(f"{args.partition}: not a partition document")
    conditioning = frozenset(
        dag.id_of(label) for label in part_doc.get("conditioning", [])
    )
    groups = tuple(
        tuple(sorted(dag.id_of(label) for label in group))
        for group in part_doc["groups"]
    )
    part = LatentPartition(
        conditioning=conditioning,
        unconditioned_observed=frozenset(dag.observed - conditioning),
        groups=tuple(sorted(groups, key=lambda g: g[0])),
    )
    matrix = score_matrix_for_scm(spec, part, n_rows=args.samples, seed=args.seed)
    if args.variant == SUBTRACTED:
        report = check_rank_subtracted(matrix, tol=args.tol)
    else:
        report = check_rank_direct(matrix, tol=args.tol)
    _emit(rank_report_to_json(report), args.out)
    if args.strict and not report.satisfied:
        print("rank condition violated", file=sys.stderr)
        return 1
    return 0


def _cmd_evaluate(args) -> int:
    true_matrix = fileio.read_csv_matrix(getattr(args, "true"))
    est_matrix = fileio.read_csv_matrix(args.est)
    report = evaluate(true_matrix, est_matrix)
    payload = eval_report_to_json(report)
    payload["config"] = {
        "matching": "absolute-correlation",
        "entropy_base": report.correlation.values.shape[0],
    }
    if args.out:
        fileio.write_json_atomic(args.out, payload)
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _cmd_pipeline(args) -> int:
    from .pipeline import pipeline_run

    dag = _load_graph(args.graph)
    summary = pipeline_run(
        dag,
        seed=args.seed,
        n_samples=args.n,
        outdir=args.outdir,
        mixing_kind=args.mixing_kind,
        mixing_layers=args.layers,
        rank_variant=args.variant,
        rank_tol=args.tol,
    )
    print(json.dumps(summary, indent=2))
    if args.strict and summary["rank_verdict"] != "satisfied":
        print("rank condition violated", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auxsel",
        description=(
            "Conditioning-set selection, d-separation, linear SCM simulation "
            "and disentanglement scoring for latent graphs with observed sources."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="d-separation query between two node sets")
    p.add_argument("--graph", required=True)
    p.add_argument("--a", required=True, help="comma-separated node labels")
    p.add_argument("--b", required=True, help="comma-separated node labels")
    p.add_argument("--given", default="", help="comma-separated conditioning labels")
    p.set_defaults(func=_cmd_dsep)

    p = sub.add_parser("partition", help="conditionally independent latent groups")
    p.add_argument("--graph", required=True)
    p.add_argument("--given", default="", help="comma-separated conditioning labels")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("select", help="choose the best conditioning subset")
    p.add_argument("--graph", required=True)
    p.add_argument("--explain", action="store_true", help="include the per-subset table")
    p.add_argument("--no-prune", action="store_true", help="keep collider-only candidates")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("simulate", help="sample a random linear SCM over the graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--spec-out", help="also write the drawn SCM spec as JSON")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mix", help="apply a mixing spec to a sample matrix")
    p.add_argument("--spec", required=True, help="mixing spec JSON")
    p.add_argument("--in", dest="infile", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--inverse", action="store_true", help="apply the inverse map")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("check-rank", help="numerical identifiability rank check")
    p.add_argument("--graph", required=True)
    p.add_argument("--spec", required=True, help="SCM spec JSON")
    p.add_argument("--partition", required=True, help="partition JSON")
    p.add_argument("--variant", choices=[DIRECT, SUBTRACTED], default=DIRECT)
    p.add_argument("--samples", type=int, default=None, help="rows to draw (default 4d)")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--strict", action="store_true", help="exit 1 when violated")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_check_rank)

    p = sub.add_parser("evaluate", help="score recovered latents against ground truth")
    p.add_argument("--true", required=True, help="true latents CSV")
    p.add_argument("--est", required=True, help="estimated latents CSV")
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="graph -> select -> simulate -> mix -> evaluate")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--outdir", required=True, help="bundle output directory")
    p.add_argument(
        "--mixing-kind",
        choices=[ADDITIVE_COUPLING, SPECIAL_ORTHOGONAL],
        default=ADDITIVE_COUPLING,
    )
    p.add_argument("--layers", type=int, default=3, help="coupling layers")
    p.add_argument("--variant", choices=[DIRECT, SUBTRACTED], default=DIRECT)
    p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--strict", action="store_true", help="exit 1 when rank violated")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AuxselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
