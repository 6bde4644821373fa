"""Command-line front end.

Subcommands:
    test      run the independence test on two CSV samples
    simulate  Monte Carlo power / size for a named setting
    diagnose  dump moment diagnostics and Gram spectra for two CSV samples
    graph     dump a neighbor graph as a tab-separated edge list

Exit codes: 0 success, 2 data error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import simulate as sim
from .errors import GitestError
from .graphs import (
    FARTHEST,
    NEAREST,
    UndirectedGraph,
    dump_edges,
    kmst,
    knn_graph,
    pairwise_distances,
    robust_graph,
)
from .inference import quadruple_from_samples, run_test
from .moments import QuadrupleInputs, diagnostics, null_moments
from .scores import FAMILIES, SCHEMES, ScoreConfig
from .simulate import SETTING_IDS, SettingSpec, default_dimensions

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class DataError(Exception):
    """Bad input files or untestable data; maps to exit code 2."""


class UsageError(Exception):
    """Inconsistent flags detected after parsing; maps to exit code 64."""


def read_matrix_csv(path: str, header: bool = False, delimiter: str = ",") -> np.ndarray:
    """Parse a numeric CSV: rows are observations, columns features."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if header:
        lines = lines[1:]
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=2 if header else 1):
        if not line.strip():
            continue
        cells = line.split(delimiter)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(f"{path}: row {lineno} has {len(cells)} cells, expected {width}")
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: row {lineno}, column {col}: not numeric: {cell.strip()!r}"
                ) from None
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _add_score_flags(p: argparse.ArgumentParser):
    p.add_argument("--scheme", choices=SCHEMES, default="robust_rank")
    p.add_argument("--graph", choices=FAMILIES, default="robust_knn",
                   help="graph family (either member of a similarity/dissimilarity pair)")
    p.add_argument("--k", default="auto", help="neighbor count, or 'auto' for floor(sqrt(n))")
    p.add_argument("--lambda", dest="lam", type=float, default=0.3,
                   help="hub penalty of the robust graphs")
    p.add_argument("--symmetrize", action=argparse.BooleanOptionalAction, default=True)


def _add_io_flags(p: argparse.ArgumentParser):
    p.add_argument("--header", action="store_true", help="skip one header line")
    p.add_argument("--delimiter", default=",")


def _score_config(args) -> ScoreConfig:
    k = args.k
    if k != "auto":
        try:
            k = int(k)
        except ValueError:
            raise DataError(f"--k must be an integer or 'auto', got {k!r}") from None
    return ScoreConfig(scheme=args.scheme, graph_family=args.graph, k=k,
                       lam=args.lam, symmetrize=args.symmetrize)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("GITEST_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise DataError(f"GITEST_THREADS is not an integer: {env!r}") from None
    return max(1, os.cpu_count() or 1)


def _result_table(d: dict) -> str:
    rows = [
        ("statistic", f"{d['statistic']:.6g}"),
        ("df", str(d["df"])),
        ("p_analytic", "-" if d["p_analytic"] is None else f"{d['p_analytic']:.6g}"),
        ("p_permutation", "-" if d["p_permutation"] is None else f"{d['p_permutation']:.6g}"),
        ("max_stat", f"{d['max_stat']:.6g}"),
        ("n", str(d["n"])),
        ("k", str(d["k"])),
        ("lambda", str(d["lambda"])),
        ("scheme", str(d["scheme"])),
    ]
    for comp, t in zip(d["components"], d["t_obs"]):
        rows.append((comp["name"], f"T={t:.6g} z={comp['z']:.4g} p={comp['p']:.6g}"))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {val}" for name, val in rows) + "\n"


def _result_csv(d: dict) -> str:
    head = ["statistic", "df", "p_analytic", "p_permutation", "max_stat", "n", "k",
            "lambda", "scheme"]
    vals = [d[h] for h in head]
    for comp in d["components"]:
        head += [f"{comp['name']}_z", f"{comp['name']}_p"]
        vals += [comp["z"], comp["p"]]
    fmt = ["" if v is None else (f"{v:.10g}" if isinstance(v, float) else str(v)) for v in vals]
    return ",".join(head) + "\n" + ",".join(fmt) + "\n"


def _load_pair(args) -> tuple[np.ndarray, np.ndarray]:
    x = read_matrix_csv(args.x, header=args.header, delimiter=args.delimiter)
    y = read_matrix_csv(args.y, header=args.header, delimiter=args.delimiter)
    if x.shape[0] != y.shape[0]:
        raise DataError(
            f"paired samples must align: {args.x} has {x.shape[0]} rows, "
            f"{args.y} has {y.shape[0]} rows"
        )
    return x, y


def cmd_test(args) -> int:
    x, y = _load_pair(args)
    if args.n_perm is not None and args.method == "analytic":
        raise UsageError("--n-perm requires --method permutation or both")
    n_perm = 500 if args.n_perm is None else args.n_perm
    if n_perm < 1:
        raise UsageError("--n-perm must be positive")
    result = run_test(x, y, _score_config(args), method=args.method,
                      n_perm=n_perm, seed=args.seed, threads=_threads(args))
    d = result.to_json_dict()
    if args.format == "json":
        print(json.dumps(d, indent=2))
    elif args.format == "table":
        sys.stdout.write(_result_table(d))
    else:
        sys.stdout.write(_result_csv(d))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be positive")
    n, p = default_dimensions(args.setting)
    spec = SettingSpec(
        id=args.setting,
        n=args.n if args.n is not None else n,
        p=args.p if args.p is not None else p,
        seed=args.seed,
    )
    if args.sweep_alphas:
        alphas = [float(a) for a in args.sweep_alphas.split(",")]
        rows = sim.k_sweep(spec, alphas, reps=args.reps, level=args.level, method=args.method)
        tidy = sim.tidy_from_sweep(spec, rows, args.reps, args.level, args.method)
        if args.format == "json":
            print(json.dumps(tidy, indent=2))
        else:
            sys.stdout.write(sim.tidy_csv(tidy))
        return EXIT_OK
    if args.components:
        comp = sim.component_power(spec, reps=args.reps, level=args.level)
        tidy = sim.tidy_from_components(spec, comp, args.reps, args.level)
        if args.format == "json":
            print(json.dumps(tidy, indent=2))
        else:
            sys.stdout.write(sim.tidy_csv(tidy))
        return EXIT_OK
    est = sim.estimate_power(spec, method=args.method, reps=args.reps,
                             level=args.level, threads=_threads(args))
    if args.plot_data:
        sys.stdout.write(sim.tidy_csv(sim.tidy_from_estimate(est)))
    elif args.format == "json":
        print(json.dumps(sim.power_json([est], timing=args.timing), indent=2))
    else:
        sys.stdout.write(sim.power_csv([est], timing=args.timing))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    x, y = _load_pair(args)
    cfg = _score_config(args)
    q = quadruple_from_samples(x, y, cfg)
    if args.debug_identical_scores:
        q = QuadrupleInputs(sx=q.sx, dx=q.sx, sy=q.sy, dy=q.sy)
    report = diagnostics(q).to_json_dict()
    moments = null_moments(q)
    report["sigma_rank"] = moments.rank
    report["sigma_condition"] = moments.condition_estimate
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_graph(args) -> int:
    z = read_matrix_csv(args.x, header=args.header, delimiter=args.delimiter)
    D = pairwise_distances(z)
    n = z.shape[0]
    k = int(np.floor(np.sqrt(n))) if args.k == "auto" else int(args.k)
    family = args.graph
    if family in ("knn", "kfp"):
        G = knn_graph(D, k, NEAREST if family == "knn" else FARTHEST)
    elif family in ("kmst", "kmaxst"):
        layers = kmst(D, k, "min" if family == "kmst" else "max")
        edges = [e for layer in layers for e in layer.edges]
        G = UndirectedGraph(n, tuple(edges))
    else:
        G = robust_graph(D, k, args.lam, NEAREST if family == "robust_knn" else FARTHEST)
    sys.stdout.write(dump_edges(G, D))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="gitest", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_test = sub.add_parser("test", help="test independence of two CSV samples")
    p_test.add_argument("--x", required=True, help="CSV of X observations (rows)")
    p_test.add_argument("--y", required=True, help="CSV of Y observations (rows)")
    _add_score_flags(p_test)
    _add_io_flags(p_test)
    p_test.add_argument("--method", choices=("analytic", "permutation", "both"),
                        default="analytic")
    p_test.add_argument("--n-perm", type=int, default=None)
    p_test.add_argument("--level", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--format", choices=("json", "table", "csv"), default="json")
    p_test.add_argument("--threads", type=int, default=None)
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="Monte Carlo power / size")
    p_sim.add_argument("--setting", required=True, choices=SETTING_IDS,
                       metavar="SETTING", help=f"one of: {', '.join(SETTING_IDS)}")
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--p", type=int, default=None)
    p_sim.add_argument("--reps", type=int, default=200)
    p_sim.add_argument("--level", type=float, default=0.05)
    p_sim.add_argument("--method", choices=("analytic", "permutation"), default="analytic")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--format", choices=("json", "table", "csv"), default="csv")
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--sweep-alphas", default="",
                       help="comma-separated exponents; power at k=floor(n^alpha)")
    p_sim.add_argument("--components", action="store_true",
                       help="power of RG1-RG4 and the combined test")
    p_sim.add_argument("--plot-data", action="store_true",
                       help="emit tidy long-format CSV")
    p_sim.add_argument("--timing", action="store_true",
                       help="include wall-clock runtime (breaks byte determinism)")
    p_sim.set_defaults(func=cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="moment diagnostics for two CSV samples")
    p_diag.add_argument("--x", required=True)
    p_diag.add_argument("--y", required=True)
    _add_score_flags(p_diag)
    _add_io_flags(p_diag)
    p_diag.add_argument("--debug-identical-scores", action="store_true",
                        help=argparse.SUPPRESS)
    p_diag.set_defaults(func=cmd_diagnose)

    p_graph = sub.add_parser("graph", help="dump a neighbor graph as an edge list")
    p_graph.add_argument("--x", required=True, help="CSV of observations")
    p_graph.add_argument("--graph", choices=FAMILIES, default="robust_knn")
    p_graph.add_argument("--k", default="auto")
    p_graph.add_argument("--lambda", dest="lam", type=float, default=0.3)
    _add_io_flags(p_graph)
    p_graph.set_defaults(func=cmd_graph)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gitest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, GitestError) as exc:
        print(f"gitest: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
