"""Command line interface.

Subcommands: ``generate`` (sample blockmodel graphs to edge-list files),
``embed`` (spectral embedding and diagnostics), ``dimselect`` (automatic
dimension choice), ``test`` (two-sample tests), ``power`` (Monte Carlo
scenario grids), ``celegans`` (the paired-connectome scaling test).

Exit codes: 0 on success (a test's statistical decision is data, not an
exit status), 1 for runtime errors, 2 for usage errors.  All randomness
flows from ``--seed``; when omitted, a seed is drawn from OS entropy and
printed so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import RdpgTestError
from .graph_io import read_edge_list, write_edge_list, write_latent_csv
from .graphs import BlockModelSpec, dcsbm_latent_positions, sample_assignments, sample_rdpg, sbm_latent_positions
from .rng import derive_seed, entropy_seed, generator
from .spectral import AdjacencySpectralEmbedding, ase, check_assumption1, dimension_select
from .testing import two_sample_test
from .experiments import (
    ScenarioConfig,
    run_celegans,
    run_scenario,
    write_power_csv,
    write_samples_csv,
)

SCHEMA_VERSION = 1


def _matrix_flag(text: str) -> np.ndarray:
    """Parse "0.5,0.2;0.2,0.5" into a square matrix."""
    try:
        rows = [[float(f) for f in row.split(",")] for row in text.split(";")]
        matrix = np.asarray(rows, dtype=np.float64)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed matrix {text!r}") from None
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise argparse.ArgumentTypeError(f"matrix {text!r} is not square")
    return matrix


def _vector_flag(text: str) -> np.ndarray:
    try:
        return np.asarray([float(f) for f in text.split(",")], dtype=np.float64)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed vector {text!r}") from None


def _corrections_flag(text: str):
    """Parse "uniform:0.2,1.0" into a sampling description."""
    kind, _, rest = text.partition(":")
    if kind != "uniform":
        raise argparse.ArgumentTypeError(
            f"unknown degree-correction model {kind!r} (expected uniform:LOW,HIGH)"
        )
    try:
        low, high = (float(f) for f in rest.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed range {rest!r}") from None
    if not 0.0 < low <= high:
        raise argparse.ArgumentTypeError("need 0 < LOW <= HIGH")
    return ("uniform", low, high)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("value must be at least 1")
    return value


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = entropy_seed()
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _emit(payload: dict, as_json: bool):
    if as_json:
        print(json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _cmd_generate(args) -> int:
    seed = _resolve_seed(args)
    spec = BlockModelSpec(args.sbm_b, pi=args.pi)
    assignments = sample_assignments(spec.pi, args.n, derive_seed(seed, 0))
    if args.degree_corrections is not None:
        _, low, high = args.degree_corrections
        corrections = generator(derive_seed(seed, 1)).uniform(low, high, size=args.n)
        latents = dcsbm_latent_positions(spec, assignments, corrections)
    else:
        latents = sbm_latent_positions(spec, assignments)
    graph = sample_rdpg(latents, derive_seed(seed, 2))
    write_edge_list(graph, args.out)
    if args.latent_out:
        write_latent_csv(latents, args.latent_out)
    print(f"wrote {graph.n} vertices, {graph.edge_count} edges to {args.out}")
    return 0


def _cmd_embed(args) -> int:
    graph = read_edge_list(args.graph).graph
    if args.dim is None:
        model = AdjacencySpectralEmbedding(dim=None, max_dim=args.max_dim).fit(graph)
        positions, diag, dim = model.embedding_, model.diagnostics_, model.dim_
    else:
        embedding = ase(graph, args.dim)
        positions, diag, dim = embedding.positions, embedding.diagnostics, args.dim
    if args.out:
        write_latent_csv(positions, args.out)
    report = check_assumption1(diag)
    _emit(
        {"n": graph.n, "dim": dim, "diagnostics": diag.to_dict(),
         "assumptions": report.to_dict(),
         "out": str(args.out) if args.out else None},
        args.json,
    )
    return 0


def _cmd_dimselect(args) -> int:
    graph = read_edge_list(args.graph).graph
    model = AdjacencySpectralEmbedding(dim=None, max_dim=args.max_dim).fit(graph)
    scree = [float(s) for s in model.diagnostics_.sigma]
    _emit({"dim": model.dim_, "scree_head": scree, "max_dim": args.max_dim}, args.json)
    return 0


def _cmd_test(args) -> int:
    seed = _resolve_seed(args)
    graph_a = read_edge_list(args.graph_a).graph
    graph_b = read_edge_list(args.graph_b).graph
    result = two_sample_test(
        graph_a,
        graph_b,
        kind=args.kind,
        dim=args.dim,
        method=args.method,
        bs=args.bs,
        blocks=args.blocks,
        alpha=args.alpha,
        denominator=args.denominator,
        seed=seed,
    )
    _emit(result.to_dict(), args.json)
    return 0


def _cmd_power(args) -> int:
    seed = _resolve_seed(args)
    config = ScenarioConfig(
        scenario=args.scenario,
        replicates=args.reps,
        bs=args.bs,
        alpha=args.alpha,
        seed=seed,
        n_jobs=args.threads,
    )
    run = run_scenario(config)
    write_power_csv(run.cells, args.out)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "scenario": config.scenario,
        "replicates": config.replicates,
        "bs": config.bs,
        "alpha": config.alpha,
        "seed": config.seed,
        "methods": list(config.methods),
        "pi": list(config.pi),
        "rows": len(run.cells),
    }
    Path(f"{args.out}.config.json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )
    if args.samples_out:
        write_samples_csv(run.samples, args.samples_out)
    print(f"wrote {len(run.cells)} power rows to {args.out}")
    return 0


def _cmd_celegans(args) -> int:
    seed = _resolve_seed(args)
    outcome = run_celegans(args.chem, args.gap, dim=args.dim, bs=args.bs, seed=seed)
    payload = outcome.result.to_dict()
    payload["edges_a"] = outcome.edges_a
    payload["edges_b"] = outcome.edges_b
    _emit(payload, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdpgtest",
        description="Two-sample latent position tests for random dot product graphs.",
    )
    parser.add_argument("--version", action="version", version=f"rdpgtest {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="sample a blockmodel graph")
    generate.add_argument("--sbm-b", type=_matrix_flag, required=True,
                          metavar='"p11,p12;p21,p22"',
                          help="block probability matrix, rows ;-separated")
    generate.add_argument("--pi", type=_vector_flag, required=True,
                          help="block membership probabilities, comma-separated")
    generate.add_argument("--degree-corrections", type=_corrections_flag,
                          default=None, metavar="uniform:LOW,HIGH",
                          help="per-vertex degree corrections drawn uniformly")
    generate.add_argument("--n", type=_positive_int, required=True)
    generate.add_argument("--seed", type=int, default=None)
    generate.add_argument("--out", required=True, help="edge-list output path")
    generate.add_argument("--latent-out", default=None, help="also write the latent CSV")
    generate.set_defaults(func=_cmd_generate)

    embed = commands.add_parser("embed", help="spectral embedding of one graph")
    embed.add_argument("--graph", required=True)
    embed.add_argument("--dim", type=_positive_int, default=None,
                       help="embedding dimension (default: automatic)")
    embed.add_argument("--max-dim", type=_positive_int, default=20)
    embed.add_argument("--out", default=None, help="write the latent CSV here")
    embed.add_argument("--json", action="store_true")
    embed.set_defaults(func=_cmd_embed)

    dimselect = commands.add_parser("dimselect", help="automatic dimension choice")
    dimselect.add_argument("--graph", required=True)
    dimselect.add_argument("--max-dim", type=_positive_int, default=20)
    dimselect.add_argument("--json", action="store_true")
    dimselect.set_defaults(func=_cmd_dimselect)

    test = commands.add_parser("test", help="two-sample test on two edge lists")
    test.add_argument("--graph-a", required=True)
    test.add_argument("--graph-b", required=True)
    test.add_argument("--kind", choices=["identity", "scaling", "diagonal"],
                      default="identity")
    test.add_argument("--dim", type=_positive_int, required=True)
    test.add_argument("--method", choices=["theoretical", "bootstrap", "subgraph"],
                      default="theoretical")
    test.add_argument("--bs", type=_positive_int, default=200)
    test.add_argument("--blocks", type=_positive_int, default=None,
                      help="partition block count (subgraph method)")
    test.add_argument("--alpha", type=float, default=0.05)
    test.add_argument("--denominator", choices=["gamma", "noise"], default="gamma")
    test.add_argument("--seed", type=int, default=None)
    test.add_argument("--json", action="store_true")
    test.set_defaults(func=_cmd_test)

    power = commands.add_parser("power", help="Monte Carlo power scenario")
    power.add_argument("--scenario", choices=["table1", "table2", "community", "dcsbm"],
                       required=True)
    power.add_argument("--reps", type=_positive_int, default=200)
    power.add_argument("--bs", type=_positive_int, default=100)
    power.add_argument("--alpha", type=float, default=0.05)
    power.add_argument("--seed", type=int, default=None)
    power.add_argument("--threads", type=int, default=-1,
                       help="worker count (default: all cores); results do not depend on it")
    power.add_argument("--out", required=True, help="power CSV output path")
    power.add_argument("--samples-out", default=None, help="statistic samples CSV")
    power.set_defaults(func=_cmd_power)

    celegans = commands.add_parser(
        "celegans", help="scaling test between two aligned connectome edge lists"
    )
    celegans.add_argument("--chem", required=True)
    celegans.add_argument("--gap", required=True)
    celegans.add_argument("--dim", type=_positive_int, default=6)
    celegans.add_argument("--bs", type=_positive_int, default=1000)
    celegans.add_argument("--seed", type=int, default=None)
    celegans.add_argument("--json", action="store_true")
    celegans.set_defaults(func=_cmd_celegans)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RdpgTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
