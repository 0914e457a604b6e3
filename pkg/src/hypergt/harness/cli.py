"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 invalid instance or
parameters, 3 a construction, verification or protocol guarantee failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from hypergt.construction import (
    DEFAULT_BUDGET,
    DEFAULT_SAMPLE_POOL,
    BuilderConfig,
    build_selector,
    eval_selector_bound,
)
from hypergt.errors import (
    CapacityError,
    ConfigError,
    ConstructionError,
    HypergraphFormatError,
    ParameterError,
    WidthError,
    WorkBudgetExceeded,
)
from hypergt.harness.generate import random_hypergraph
from hypergt.harness.sweep import parse_sweep_config, run_sweep, with_builder
from hypergt.hypergraph import (
    augment,
    compute_chi,
    compute_p,
    format_hypergraph,
    pool_for,
    read_hypergraph,
)
from hypergt.protocols import (
    NON_ADAPTIVE,
    THREE_STAGE,
    TWO_STAGE,
    TestOracle,
    guarantee_violations,
    run_protocol,
)
from hypergt.selectors import format_matrix, is_selector, is_separable, read_matrix

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_FAILED = 0, 1, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _builder(args) -> BuilderConfig:
    return BuilderConfig(method=args.builder, budget=args.budget, sample_pool=args.sample_pool,
                         seed=args.seed, exact_only=args.exact_only)


def _selector_params(h, args) -> tuple[int, int, int]:
    if h.size < 2:
        raise ParameterError("at least 2 edges required")
    q = args.q
    chi = args.chi if args.chi is not None else compute_chi(h, q)
    if chi < 1:
        raise ParameterError(f"chi is {chi}; pass --chi >= 1")
    m = args.m if args.m is not None else h.d + 1
    return q, m, chi


def cmd_params(args) -> int:
    h = read_hypergraph(args.hypergraph)
    print(f"n={h.n}")
    print(f"d={h.d}")
    print(f"E={h.size}")
    if h.size < 2:
        print("p=undefined (fewer than 2 edges)")
        print(f"chi=undefined (q={args.q} needs at least {args.q + 1} edges)")
        return EXIT_OK
    print(f"p={compute_p(h)}")
    if args.q <= h.size - 1:
        print(f"chi={compute_chi(h, args.q)} (q={args.q})")
    else:
        print(f"chi=undefined (q={args.q} needs at least {args.q + 1} edges)")
    return EXIT_OK


def cmd_build(args) -> int:
    h = read_hypergraph(args.hypergraph)
    q, m, chi = _selector_params(h, args)
    ah = augment(h, pool_for(h, chi))
    matrix = build_selector(ah, q, m, chi, _builder(args))
    verdict = is_selector(matrix, ah, q, m, chi)
    if not verdict.holds:
        print(f"error: built matrix failed verification at {verdict.witness}", file=sys.stderr)
        return EXIT_FAILED
    _emit(format_matrix(matrix), args.out)
    bound = eval_selector_bound(matrix.width, h.d, q, m, chi, h.size)
    print(f"t={matrix.t} bound_ceil={bound.ceiling}", file=sys.stderr if not args.out else sys.stdout)
    print(bound.to_text(), end="", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    h = read_hypergraph(args.hypergraph)
    matrix = read_matrix(args.matrix)
    if args.separable:
        verdict = is_separable(matrix, h)
        label = "separable"
    else:
        q, m, chi = _selector_params(h, args)
        verdict = is_selector(matrix, augment(h, pool_for(h, chi)), q, m, chi)
        label = f"selector q={q} m={m} chi={chi}"
    if verdict.holds:
        print(f"{label}: holds (t={matrix.t})")
        return EXIT_OK
    w = verdict.witness
    detail = f"edges={','.join(map(str, w.edges))}"
    if w.found is not None:
        detail += f" found={w.found} required={w.required}"
    print(f"{label}: fails {detail}")
    return EXIT_FAILED


def cmd_simulate(args) -> int:
    h = read_hypergraph(args.hypergraph)
    if args.defective == "all":
        targets = list(h.edges)
    else:
        targets = [tuple(int(v) for v in args.defective.replace(",", " ").split())]
    config = _builder(args)
    texts = []
    failed = False
    for target in targets:
        oracle = TestOracle(target, h, strict=not args.permissive)
        transcript = run_protocol(args.protocol, h, oracle, args.param, config)
        problems = [] if args.permissive else guarantee_violations(h, transcript)
        if problems:
            failed = True
            for p in problems:
                print(f"violation (defective {' '.join(map(str, target))}): {p}", file=sys.stderr)
        texts.append(transcript.to_text())
    _emit("\n".join(texts), args.out)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_sweep(args) -> int:
    path = Path(args.config)
    configs, workers = parse_sweep_config(path.read_text(), path.parent)
    if args.workers is not None:
        workers = args.workers
    if args.budget is not None:
        configs = with_builder(configs, budget=args.budget)
    report = run_sweep(configs, workers)
    _emit(report.to_table(delimiter=args.delimiter, timing=args.timing), args.out)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_gen(args) -> int:
    h = random_hypergraph(args.n, args.d, args.edges, uniform=not args.non_uniform,
                          min_diff=args.min_diff, seed=args.seed)
    _emit(format_hypergraph(h), args.out)
    return EXIT_OK


def _add_builder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builder", choices=("greedy", "randomized"), default="greedy")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="largest candidate-row count the exact greedy will enumerate")
    p.add_argument("--sample-pool", type=int, default=DEFAULT_SAMPLE_POOL,
                   help="candidate rows scored per step above the budget")
    p.add_argument("--exact-only", action="store_true", help="fail instead of sampling above the budget")
    p.add_argument("--seed", type=int, default=0)


def _add_selector_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--m", type=int, default=None, help="identity rows required (default d + 1)")
    p.add_argument("--chi", type=int, default=None, help="default: the hypergraph's chi for q")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypergt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print n, d, |E|, p and chi")
    p.add_argument("hypergraph")
    p.add_argument("--q", type=int, default=1)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("build", help="construct and verify a selector")
    p.add_argument("hypergraph")
    _add_selector_flags(p)
    _add_builder_flags(p)
    p.add_argument("--out", help="matrix file (default stdout; bound block then goes to stderr)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="check a matrix file against a hypergraph")
    p.add_argument("hypergraph")
    p.add_argument("matrix")
    _add_selector_flags(p)
    p.add_argument("--separable", action="store_true", help="check separability instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run a protocol against one or every defective edge")
    p.add_argument("hypergraph")
    p.add_argument("--protocol", choices=(NON_ADAPTIVE, TWO_STAGE, THREE_STAGE), required=True)
    p.add_argument("--param", type=int, required=True, help="p, q or b for the chosen protocol")
    p.add_argument("--defective", default="all", help="'all' or the vertices of one edge, e.g. '1 2'")
    p.add_argument("--permissive", action="store_true", help="allow a defective set outside E")
    _add_builder_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a key=value sweep config")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--timing", action="store_true", help="add a wall-time column (not reproducible)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="generate a seeded random hypergraph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--min-diff", type=int, default=1)
    p.add_argument("--non-uniform", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (HypergraphFormatError, ParameterError, WidthError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        detail = f" (last witness {exc.witness})" if exc.witness is not None else ""
        print(f"error: {exc}{detail}", file=sys.stderr)
        return EXIT_FAILED
    except WorkBudgetExceeded as exc:
        print(f"error: {exc}; raise --budget or drop --exact-only", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
