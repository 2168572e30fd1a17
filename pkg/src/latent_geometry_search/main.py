import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from .utils.logging_setup import setup_logging, set_log_context, clear_log_context
from .utils.config import DEFAULT_CONFIG_PATH, METHODS, RunConfig, load_logging_config, load_run_config, override
from .utils.errors import LatentGeometryError, PreconditionError, ValidationError
from .utils.rng import SplitMix64
from .geometry.blanusa import compute_constants, pullback_report
from .geometry.gh_estimator import (
    GhTable, GhTableMode, analytic_es_bounds, build_gh_table, estimate_gh_eh, estimate_gh_sh, preset_table,
)
from .geometry.product_manifold import Signature
from .search.bo_engine import eig_sym, run_many
from .search.models import load_traces, save_traces, traces_to_frame
from .search.objectives import TableObjective
from .search.reporting import summarize_traces, trace_curves
from .search.search_space import (
    GraphVariant, build_graph, distinct_edge_weights, enumerate_signatures, load_graph, recursion_node_count, slice_size,
)
from .search.synthetic_bench import generate_objective

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EIG_RESIDUAL_TOL = 1e-7


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e
    return parse


def _seed_list(text: str) -> List[int]:
    """'0,1,2' or the range form '0..9'."""
    if ".." in text:
        low, high = text.split("..", 1)
        try:
            return list(range(int(low), int(high) + 1))
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"Bad seed range '{text}'") from e
    return _csv_list(int)(text)


def _add_gh_flags(parser: argparse.ArgumentParser, sweeps: bool = True):
    parser.add_argument("--quadrature-res", type=int, help="Simpson panels for A and the antiderivative table (default 20000)")
    parser.add_argument("--grid-step", type=float, help="finite-difference step for G1, G2 (default 1e-5)")
    parser.add_argument("--frequency", type=float, help="use this c instead of 2 max(G1, G2)")
    if sweeps:
        parser.add_argument("--res-r", type=int, help="radial resolution of the E and H clouds (default 200)")
        parser.add_argument("--res-t", type=int, help="angular resolution of the E and H clouds (default 200)")
        parser.add_argument("--sphere-res-r", type=int, help="polar resolution of the S cloud (default 100)")
        parser.add_argument("--sphere-res-t", type=int, help="azimuthal resolution of the S cloud (default 100)")
        parser.add_argument("--offset-steps", type=int, help="offset grid has offset-steps + 1 points (default 100)")
        parser.add_argument("--offset-range", type=float, help="offsets span [-range, range] (default 0.5)")
        parser.add_argument("--shuffle-seed", type=int, help="seed of the Hausdorff scan order (default 0)")


def _add_space_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--max-factors", type=int, help="largest product size (default 7)")
    parser.add_argument("--fixed-size", type=int, help="only signatures with exactly this many factors")
    parser.add_argument("--variant", choices=[v.value for v in GraphVariant], help="edge structure (default gh)")
    parser.add_argument("--weights", choices=["exact", "rounded"], help="exact reciprocals or two-decimal table weights (default exact)")
    tables = parser.add_mutually_exclusive_group()
    tables.add_argument("--gh-table", help="GH table JSON; the gh variant needs this or --use-preset-table")
    tables.add_argument("--use-preset-table", action="store_true", help="weight the gh variant with the published distances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main", description="Latent geometry search over product manifolds.")
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help=f"configuration file (default {DEFAULT_CONFIG_PATH})")
    parser.add_argument("--log-level", help="overrides logging.level from the configuration")
    commands = parser.add_subparsers(dest="command", required=True)

    gh = commands.add_parser("gh", help="Gromov-Hausdorff estimation").add_subparsers(dest="action", required=True)
    constants = gh.add_parser("constants", help="print the embedding constants A, G1, G2, c, eps")
    _add_gh_flags(constants, sweeps=False)
    gh.add_parser("analytic-es", help="print the closed-form E-S bounds")
    estimate = gh.add_parser("estimate", help="estimate d_GH for one pair")
    estimate.add_argument("--pair", required=True, choices=["e-h", "s-h"])
    _add_gh_flags(estimate)
    table = gh.add_parser("table", help="write a GH table")
    table.add_argument("--mode", choices=[m.value for m in GhTableMode], default=GhTableMode.PAPER_PRESET.value)
    table.add_argument("--out", required=True)
    _add_gh_flags(table)

    space = commands.add_parser("space", help="graph search space").add_subparsers(dest="action", required=True)
    build = space.add_parser("build", help="build and write a graph")
    _add_space_flags(build)
    build.add_argument("--out", required=True)
    stats = space.add_parser("stats", help="node and edge counts, distinct weights")
    _add_space_flags(stats)
    stats.add_argument("--graph", help="read the graph from this file instead of building it")

    bench = commands.add_parser("bench", help="synthetic benchmark").add_subparsers(dest="action", required=True)
    synth = bench.add_parser("synth", help="write a synthetic objective table over a fixed-size slice")
    synth.add_argument("--factors", type=int, help="slice size (default 13)")
    synth.add_argument("--truth", required=True, help="ground-truth signature, e.g. E,E,H")
    synth.add_argument("--seed", type=int, help="seed of the latent vector and the frozen network (default 0)")
    synth.add_argument("--no-pad", action="store_true", help="do not pad Euclidean factors to width 3")
    synth.add_argument("--out", required=True)

    search = commands.add_parser("search", help="search runs").add_subparsers(dest="action", required=True)
    run = search.add_parser("run", help="run every method for every seed")
    run.add_argument("--graph", required=True)
    run.add_argument("--objective", required=True, help="objective table JSON")
    run.add_argument("--methods", type=_csv_list(str), help=f"comma-separated subset of {','.join(METHODS)}")
    run.add_argument("--budget", type=int, help="queries per run (default 60)")
    run.add_argument("--seeds", type=_seed_list, help="'0,1,2' or '0..9' (default 0..9)")
    run.add_argument("--n-init", type=int, help="initial uniform queries of the BO methods (default 3)")
    run.add_argument("--beta-min", type=float, help="smallest diffusion lengthscale on the grid (default 1e-2)")
    run.add_argument("--beta-max", type=float, help="largest diffusion lengthscale on the grid (default 1e2)")
    run.add_argument("--beta-count", type=int, help="log-spaced grid size (default 25)")
    run.add_argument("--noise-variance", type=float, help="GP jitter (default 1e-6)")
    run.add_argument("--freeze-beta", action="store_true", default=None, help="fit the kernel once after the initial design")
    stopping = run.add_mutually_exclusive_group()
    stopping.add_argument("--stop-value", type=float, help="stop a run once a value <= this is observed (default 0)")
    stopping.add_argument("--no-stop", action="store_true", help="always spend the full budget")
    run.add_argument("--out", required=True, help="trace CSV")
    summary = search.add_parser("summary", help="per-method summary of a trace file")
    summary.add_argument("--trace", required=True)
    summary.add_argument("--objective", help="objective table, to report queries to its optimum")
    curves = search.add_parser("curves", help="best-so-far curves of a trace file")
    curves.add_argument("--trace", required=True)
    curves.add_argument("--budget", type=int, help="curve length (default: longest run)")
    curves.add_argument("--out", required=True)

    diag = commands.add_parser("diag", help="numerical diagnostics").add_subparsers(dest="action", required=True)
    embed = diag.add_parser("embed", help="pullback-metric check of the hyperbolic embedding")
    embed.add_argument("--samples", type=int, default=100)
    embed.add_argument("--seed", type=int, default=0)
    _add_gh_flags(embed, sweeps=False)
    eig = diag.add_parser("eig", help="eigensolver residuals on a random symmetric matrix")
    eig.add_argument("--size", type=int, default=50)
    eig.add_argument("--seed", type=int, default=0)
    return parser


def _gh_settings(config: RunConfig, args):
    names = ["quadrature_res", "grid_step", "res_r", "res_t", "sphere_res_r", "sphere_res_t", "offset_steps", "offset_range", "shuffle_seed", "frequency"]
    settings = override(config.gh, **{name: getattr(args, name, None) for name in names})
    settings.validate()
    return settings


def _space_settings(config: RunConfig, args):
    settings = override(
        config.space,
        max_factors=args.max_factors, fixed_size=args.fixed_size, variant=args.variant, weights=args.weights,
    )
    settings.validate()
    return settings


def _embedding(gh):
    try:
        return compute_constants(gh.quadrature_res, gh.grid_step, gh.frequency)
    except PreconditionError as e:
        raise ValidationError(str(e)) from e


def cmd_gh(args, config: RunConfig) -> int:
    if args.action == "analytic-es":
        lower, upper = analytic_es_bounds()
        print(f"lower: {lower:.6f}")
        print(f"upper: {upper:.6f}")
        return EXIT_OK

    gh = _gh_settings(config, args)
    if args.action == "table" and args.mode == GhTableMode.PAPER_PRESET.value:
        table = build_gh_table(GhTableMode.PAPER_PRESET)
    else:
        emb = _embedding(gh)
        if args.action == "constants":
            for name, value in emb.as_dict().items():
                print(f"{name}: {value}")
            return EXIT_OK
        if args.action == "estimate":
            estimate = estimate_gh_eh if args.pair == "e-h" else estimate_gh_sh
            print(f"{args.pair}: {estimate(emb, gh):.6f}")
            return EXIT_OK
        table = build_gh_table(GhTableMode.RECOMPUTE, emb, gh)

    table.save(args.out)
    for key, value in table.to_json()["pairs"].items():
        print(f"{key}: {value}")
    return EXIT_OK


def _graph_from_flags(config: RunConfig, args):
    space = _space_settings(config, args)
    table = GhTable.load(args.gh_table) if args.gh_table else None
    if table is None and space.variant == GraphVariant.GH_WEIGHTED.value:
        if not args.use_preset_table:
            raise ValidationError("The gh variant needs --gh-table PATH or --use-preset-table")
        logger.info("Weighting edges with the published GH distances")
        table = preset_table()
    nodes = enumerate_signatures(space.max_factors, space.fixed_size)
    return build_graph(nodes, table, GraphVariant(space.variant), space.weights == "rounded")


def cmd_space(args, config: RunConfig) -> int:
    if args.action == "stats" and args.graph:
        graph = load_graph(args.graph)
    else:
        graph = _graph_from_flags(config, args)
    if args.action == "build":
        graph.save(args.out)

    sizes = sorted({sig.size for sig in graph.nodes})
    print(f"variant: {graph.variant.value}")
    print(f"nodes: {graph.size}")
    print(f"edges: {len(graph.edges())}")
    print(f"connected: {graph.is_connected()}")
    if args.action == "stats":
        for k in sizes:
            count = sum(1 for sig in graph.nodes if sig.size == k)
            print(f"size {k}: {count} nodes (enumeration {slice_size(k)}, tree recursion {recursion_node_count(k):g})")
        weights = ", ".join(f"{w:.6f}" for w in sorted(distinct_edge_weights(graph), reverse=True))
        print(f"distinct weights: {{{weights}}}")
    return EXIT_OK


def cmd_bench(args, config: RunConfig) -> int:
    bench = override(config.bench, factors=args.factors, seed=args.seed, pad_euclidean=False if args.no_pad else None)
    bench.validate()
    try:
        truth = Signature.parse(args.truth)
    except ValueError as e:
        raise ValidationError(f"Bad truth signature '{args.truth}': {e}") from e
    if truth.size != bench.factors:
        raise ValidationError(f"Truth {truth} has {truth.size} factors, expected {bench.factors}")
    candidates = enumerate_signatures(bench.factors, fixed_size=bench.factors)
    table = generate_objective(truth, candidates, bench.seed, bench.pad_euclidean)
    table.save(args.out)
    print(f"entries: {len(table.values)}")
    print(f"truth: {table.truth} -> {table.values[table.truth]}")
    return EXIT_OK


def _print_frame(frame):
    print(frame.to_string(index=False))


def cmd_search(args, config: RunConfig) -> int:
    if args.action == "run":
        settings = override(
            config.search,
            methods=args.methods, budget=args.budget, seeds=args.seeds, n_init=args.n_init,
            beta_min=args.beta_min, beta_max=args.beta_max, beta_count=args.beta_count,
            noise_variance=args.noise_variance, freeze_beta=args.freeze_beta, stop_value=args.stop_value,
        )
        if args.no_stop:
            settings = replace(settings, stop_value=None)
        settings.validate()
        graph = load_graph(args.graph)
        objective = TableObjective.from_file(args.objective)
        missing = objective.missing(graph.nodes)
        if missing:
            raise ValidationError(f"Objective has no value for {len(missing)} graph nodes: {', '.join(missing)}")
        if settings.budget > graph.size:
            raise ValidationError(f"Budget {settings.budget} exceeds the {graph.size} graph nodes")

        traces = run_many(graph, objective, settings, stop_value=settings.stop_value)
        save_traces(traces, args.out)
        optimum = min(objective(sig) for sig in graph.nodes)
        _print_frame(summarize_traces(traces_to_frame(traces), optimum))
        return EXIT_OK

    frame = load_traces(args.trace)
    if args.action == "summary":
        optimum = TableObjective.from_file(args.objective).optimum() if args.objective else None
        _print_frame(summarize_traces(frame, optimum))
    else:
        curves = trace_curves(frame, args.budget)
        curves.to_csv(args.out, index=False, float_format="%.17g")
        logger.info(f"Curves for {curves['method'].nunique()} methods saved to {args.out}")
    return EXIT_OK


def cmd_diag(args, config: RunConfig) -> int:
    if args.action == "embed":
        gh = _gh_settings(config, args)
        report = pullback_report(_embedding(gh), args.samples, args.seed)
        for line in report.lines():
            print(line)
        if not report.positive_definite:
            logger.error("Pullback metric is not positive definite at every sample")
            return EXIT_FAILURE
        return EXIT_OK

    if args.size < 1:
        raise ValidationError(f"--size must be >= 1, got {args.size}")
    raw = SplitMix64(args.seed).normal_array(args.size * args.size).reshape(args.size, args.size)
    matrix = 0.5 * (raw + raw.T)
    U, lam = eig_sym(matrix)
    reconstruction = float(np.max(np.abs(U @ np.diag(lam) @ U.T - matrix)))
    orthogonality = float(np.max(np.abs(U.T @ U - np.eye(args.size))))
    print(f"size: {args.size}")
    print(f"reconstruction residual: {reconstruction:.3e}")
    print(f"orthogonality residual: {orthogonality:.3e}")
    if reconstruction > EIG_RESIDUAL_TOL or orthogonality > EIG_RESIDUAL_TOL:
        logger.error(f"Eigensolver residuals exceed {EIG_RESIDUAL_TOL}")
        return EXIT_FAILURE
    return EXIT_OK


COMMANDS = {"gh": cmd_gh, "space": cmd_space, "bench": cmd_bench, "search": cmd_search, "diag": cmd_diag}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging_config = dict(load_logging_config(args.config))
    if args.log_level:
        logging_config["level"] = args.log_level
    setup_logging(logging_config)

    set_log_context(args.command, args.action)
    try:
        config = load_run_config(args.config)
        config.validate()
        logger.info(f"Running '{args.command} {args.action}'")
        return COMMANDS[args.command](args, config)
    except ValidationError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except LatentGeometryError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"FATAL error in '{args.command} {args.action}': {e}")
        return EXIT_FAILURE
    finally:
        clear_log_context()


if __name__ == "__main__":
    sys.exit(main())
