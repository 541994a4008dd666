"""Command-line front end: analyze, generate, spectrum, experiment, verify."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments as ex
from . import generators as gen
from . import io as nio
from . import partition_search as ps
from . import spectral as sp
from .errors import CapacityError, DomainError, InputError, NetResistError, ParseError

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DISCONNECTED, EXIT_CAPACITY = 0, 1, 2, 3, 4


def _read(path: str) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_analyze(args) -> int:
    g = nio.parse_edge_list(_read(args.graph))
    rep = ps.resistance(g, mode=args.mode, limit=args.limit)
    out = rep.to_dict()
    _write(args.out, json.dumps(out) + "\n")
    if args.partition_out:
        Path(args.partition_out).write_text(nio.format_partition(rep.partition, g))
    return EXIT_OK


def build_family(args):
    fam = args.family
    trace = None
    if fam == "tree":
        g = gen.complete_binary_tree(args.depth)
    elif fam == "grid":
        g = gen.grid(args.side)
    elif fam == "complete":
        g = gen.complete_graph(args.n)
    elif fam == "cycle":
        g = gen.cycle(args.n)
    elif fam == "path":
        g = gen.path(args.n)
    elif fam == "regular":
        g = gen.random_regular(args.n, args.d, args.seed)
    elif fam == "security":
        params = gen.SecurityModelParams(n=args.n, a=args.a, d=args.d, n0=args.n0, rng_seed=args.seed)
        g, trace = gen.security_model(params)
    else:
        raise InputError(f"unknown family {fam!r}")
    return g, trace


def cmd_generate(args) -> int:
    g, trace = build_family(args)
    _write(args.out, nio.format_edge_list(g))
    if args.trace:
        if trace is None:
            raise InputError("--trace is only available for --family security")
        data = trace.to_dict()
        data["statistics"] = gen.trace_statistics(trace, g, b=args.b)
        Path(args.trace).write_text(json.dumps(data))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = nio.parse_edge_list(_read(args.graph))
    spec = sp.graph_spectrum(g)
    out = {"eigenvalues": spec.eigenvalues.tolist(), "residual": spec.residual}
    census = {}
    cheeger = None
    if args.partition:
        p = nio.parse_partition(_read(args.partition), g)
        k, max_phi = sp.k_way_conductance_upper(g, p)
        cheeger = {"k": k, "max_phi": max_phi, "half_lambda_k": float(spec.eigenvalues[k - 1]) / 2,
                   "passed": sp.cheeger_lower_check(spec, k, max_phi)}
        census["threshold_2_max_phi"] = 2 * max_phi
        census["count_at_2_max_phi"] = sp.small_eigenvalue_census(spec, 2 * max_phi)
    if args.threshold is not None:
        census["threshold"] = args.threshold
        census["count"] = sp.small_eigenvalue_census(spec, args.threshold)
    out["census"] = census
    out["cheeger_check"] = cheeger
    _write(args.out, json.dumps(out) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    params = {}
    if args.a is not None:
        params["a"] = args.a
    if args.d is not None:
        params["d"] = args.d
    spec = ex.ExperimentSpec(name=args.name, sizes=args.sizes, trials=args.trials, rng_seed=args.seed, params=params)
    rows = ex.run_experiment(spec)
    _write(args.out, ex.rows_to_csv(rows))
    meta_path = args.meta or (args.out + ".meta.json" if args.out and args.out != "-" else None)
    if meta_path:
        Path(meta_path).write_text(json.dumps(ex.experiment_meta(spec), indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(ex.SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        ok, total = ex.SUITES[name]()
        status = "PASS" if ok == total else "FAIL"
        failed |= ok != total
        print(f"{name}: {status} {ok}/{total}")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netresist", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="entropy report for an edge-list file")
    a.add_argument("graph")
    a.add_argument("--mode", choices=["exact", "greedy", "construction"], default="exact")
    a.add_argument("--limit", type=int, default=ps.EXACT_LIMIT, help="max n for exact mode")
    a.add_argument("--out", help="JSON output path (default stdout)")
    a.add_argument("--partition-out", help="write the witness partition as 'v module_id' lines")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="write a generated graph as an edge list")
    g.add_argument("--family", required=True,
                   choices=["tree", "grid", "complete", "cycle", "path", "regular", "security"])
    g.add_argument("--depth", type=int, default=4)
    g.add_argument("--side", type=int, default=4)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--a", type=float, default=1.5)
    g.add_argument("--n0", type=int, default=None)
    g.add_argument("--b", type=float, default=1.0, help="T2 = n / ln^b n for trace statistics")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.add_argument("--trace", help="JSON path for the security-model color trace")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", help="normalized Laplacian spectrum and Cheeger check")
    s.add_argument("--graph", required=True)
    s.add_argument("--partition")
    s.add_argument("--threshold", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    e = sub.add_parser("experiment", help="CSV rows for one graph family")
    e.add_argument("name", choices=sorted(ex.BOUNDS))
    e.add_argument("--sizes", type=int, nargs="+", required=True)
    e.add_argument("--trials", type=int, default=1)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--a", type=float)
    e.add_argument("--d", type=int)
    e.add_argument("--out")
    e.add_argument("--meta", help="JSON sidecar describing the bound (default <out>.meta.json)")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("suite", nargs="?", default="all", choices=["all", *ex.SUITES])
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except NetResistError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
