"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 runtime error,
3 a bound violation found by ``verify-bounds``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bounds import (
    MomentSpec,
    ProblemShape,
    approx_factor_bound,
    corollary1_predicate,
    steiner_specific_bound,
)
from .errors import ConfigInvalid, ParameterOutOfRange, PreconditionViolated, RandFeasError
from .experiments import (
    ExperimentConfig,
    RunSummary,
    aggregates_to_csv,
    emit_aggregates,
    records_to_csv,
    run_experiment,
    with_overrides,
)
from .instances import (
    DistributionSpec,
    Seed,
    SteinerInstance,
    assign_weights,
    format_graph,
    format_instance,
    parse_instance,
    pick_terminals,
    sample_gnm,
)
from .solvers import mst, random_feasible_tree, steiner_2approx
from .verify import checks_to_csv, eligible_shapes, run_bound_verification

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VIOLATION = 0, 1, 2, 3

log = logging.getLogger("randfeas")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _dist(text: str) -> DistributionSpec:
    try:
        return DistributionSpec.parse(text)
    except ParameterOutOfRange as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {text}")
    return value


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="")


# ------------------------------------------------------------------ bounds


def cmd_bounds(args) -> int:
    mom = MomentSpec(args.mu, args.sigma)
    if args.n is not None:
        if args.alpha is None:
            raise ConfigInvalid("--n requires --alpha")
        value = steiner_specific_bound(args.n, args.alpha, mom)
        print(f"steiner_bound = {value!r}")
        return EXIT_OK
    if None in (args.k, args.m, args.ell):
        raise ConfigInvalid("give either --k --m --ell or --n --alpha")
    shape = ProblemShape(args.k, args.m, args.ell)
    report = approx_factor_bound(shape, mom)
    print(f"case = {report.case_id.value}")
    print(f"threshold = {report.threshold!r}")
    print(f"exact_value = {report.exact_value!r}")
    print(f"relaxed_value = {report.relaxed_value!r}")
    consts = ", ".join(f"{c.kind.value}({c.value!r})" for c in report.simplified_constants)
    print(f"simplified_constants = {consts}")
    print(f"headline = {report.headline!r}")
    print(f"corollary1 = {corollary1_predicate(shape, mom)}")
    for note in report.notes:
        print(f"note: {note}")
    return EXIT_OK


def cmd_verify(args) -> int:
    dists = args.dist or [DistributionSpec.normal(0, 1), DistributionSpec.uniform(-1, 1)]
    if args.shape:
        shapes = [tuple(s) for s in args.shape]
    else:
        shapes = eligible_shapes(args.k or [4, 10, 20, 40])
    results = run_bound_verification(shapes, dists, args.samples, Seed(args.seed), retry=not args.no_retry)
    _write(checks_to_csv(results), args.out)
    n_fail = sum(r.failed for r in results)
    n_pass = sum(r.passed for r in results)
    n_skip = len(results) - n_fail - n_pass
    print(f"checks: {n_pass} pass, {n_fail} fail, {n_skip} skipped", file=sys.stderr)
    return EXIT_VIOLATION if n_fail else EXIT_OK


# ------------------------------------------------------------- experiments


def _experiment_config(args, problem: str) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, problem=problem)
    else:
        cfg = ExperimentConfig(problem=problem)
    cfg = with_overrides(cfg, seed=args.seed, trials=args.trials, dist=args.dist,
                         n_min=args.n_min, n_max=args.n_max, terminal_fraction=getattr(args, "terminal_fraction", None))
    if args.full_grid:
        cfg = replace(cfg, densities=None)
    return cfg


def _run_and_write(cfg: ExperimentConfig, out: str | None, aggregate_out: str | None, workers: int) -> int:
    summary = RunSummary()
    records = list(run_experiment(cfg, summary, workers))
    _write(records_to_csv(records), out)
    if aggregate_out:
        _write(aggregates_to_csv(emit_aggregates(records)), aggregate_out)
    print(f"cells: {summary.cells}, rows: {summary.records}, failed: {summary.failed}, "
          f"dropped: {summary.dropped}", file=sys.stderr)
    return EXIT_OK


def cmd_experiment(args, problem: str) -> int:
    cfg = _experiment_config(args, problem)
    if args.save_config:
        Path(args.save_config).write_text(cfg.to_text())
    return _run_and_write(cfg, args.out, args.aggregate_out, args.workers)


def cmd_dump_instance(args) -> int:
    """Write the instance an experiment trial would use (same seed path)."""
    problem = "steiner" if args.terminals else "mst"
    seed = Seed(args.seed).spawn(args.n, args.m_edges, args.trial)
    if args.allow_disconnected:
        g, _ = sample_gnm(args.n, args.m_edges, seed.spawn(0))
    else:
        g, _ = sample_gnm(args.n, args.m_edges, seed.spawn(0), require_connected=True)
    g = assign_weights(g, args.dist, seed.spawn(1))
    if problem == "steiner":
        _write(format_instance(pick_terminals(g, args.terminals, seed.spawn(3))), args.out)
    else:
        _write(format_graph(g), args.out)
    return EXIT_OK


def cmd_replay(args) -> int:
    if bool(args.config) == bool(args.instance):
        raise ConfigInvalid("replay needs exactly one of --config or --instance")
    if args.instance:
        try:
            text = Path(args.instance).read_text()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read instance {args.instance}: {exc}") from None
        inst = parse_instance(text)
        if isinstance(inst, SteinerInstance):
            forest = steiner_2approx(inst)
        elif args.solver == "random":
            forest = random_feasible_tree(inst, Seed(args.seed or 0))
        else:
            forest = mst(inst)
        _write(forest.to_text(), args.out)
        return EXIT_OK

    cfg = ExperimentConfig.from_file(args.config)
    summary = RunSummary()
    text = records_to_csv(run_experiment(cfg, summary, args.workers))
    _write(text, args.out)
    if args.expect:
        expected = Path(args.expect).read_bytes()
        if expected != text.encode():
            print(f"replay differs from {args.expect}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"replay matches {args.expect} byte for byte", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_experiment_flags(p: argparse.ArgumentParser, steiner: bool) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--trials", type=int)
    p.add_argument("--dist", type=_dist, help="e.g. uniform:0:1, exponential:1, halfnormal:1")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--full-grid", action="store_true", help="sweep every m_edges from n-1 to C(n,2)")
    if steiner:
        p.add_argument("--terminal-fraction", type=float)
    p.add_argument("--out", help="record CSV (default stdout)")
    p.add_argument("--aggregate-out", help="aggregate CSV")
    p.add_argument("--save-config", help="write the resolved config for replay")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randfeas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--n", type=int, help="Steiner formula: vertex count")
    p.add_argument("--alpha", type=int, help="Steiner formula: terminal count")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify-bounds", help="Monte-Carlo checks of the bounds")
    p.add_argument("--k", type=int, nargs="+", help="object counts; all eligible m, ell are checked")
    p.add_argument("--shape", type=int, nargs=3, action="append", metavar=("K", "M", "ELL"))
    p.add_argument("--dist", type=_dist, action="append", help="symmetric law; repeatable")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--no-retry", action="store_true")
    p.add_argument("--out", help="check CSV (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mst-experiment", help="random spanning tree vs exact MST")
    _add_experiment_flags(p, steiner=False)
    p.set_defaults(func=lambda a: cmd_experiment(a, "mst"))

    p = sub.add_parser("steiner-experiment", help="random spanning tree vs Steiner 2-approximation")
    _add_experiment_flags(p, steiner=True)
    p.set_defaults(func=lambda a: cmd_experiment(a, "steiner"))

    p = sub.add_parser("dump-instance", help="write one seeded instance as an edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-edges", type=int, required=True)
    p.add_argument("--dist", type=_dist, default=DistributionSpec.uniform(0, 1))
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--terminals", type=int, help="also pick this many terminals")
    p.add_argument("--allow-disconnected", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_instance)

    p = sub.add_parser("replay", help="re-run a saved config, or solve a dumped instance")
    p.add_argument("--config")
    p.add_argument("--instance")
    p.add_argument("--solver", choices=["mst", "random"], default="mst")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--expect", help="compare output bytes against this CSV")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, PreconditionViolated, ParameterOutOfRange) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RandFeasError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
