"""Command-line front end.

Every command writes its results (CSV with 9 decimals, ``report.json``), a
``manifest.json`` that records everything needed to rerun it, and where
useful a gnuplot script ``plot.gp`` reading the CSV.

Exit codes: 0 success, 2 input error, 3 budget exceeded, 4 property violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dimension import dimension_report
from .experiments import (
    box_count_series,
    box_dim_fit,
    entropy_curve,
    exact_word_measure,
    sample_measure,
    slice_entropy_experiment,
)
from .ifs_core import DEFAULT_WORD_BUDGET, BudgetExceeded, WeightedIFS, lyapunov_exponents
from .io import InputError, ifs_to_dict, load_ifs, measure_header, measure_to_csv, parse_vector
from .measures import DiscreteMeasure, PartitionSpec, kv_gap
from .separation import exact_overlap_search, pm10_root_check, pm_one_template, separation_profile

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_PROPERTY = 0, 2, 3, 4
DEFAULT_SEED = 20240101
KV_TOL = 1e-9


class PropertyViolation(RuntimeError):
    pass


def _window(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must look like a:b, got {text!r}") from exc
    if a > b:
        raise argparse.ArgumentTypeError("window start exceeds end")
    return a, b


def _system(args) -> WeightedIFS:
    if not args.ifs:
        raise InputError("--ifs is required")
    w = load_ifs(args.ifs, exact=args.exact)
    if args.p:
        try:
            w = WeightedIFS(w.ifs, [float(v) for v in parse_vector(args.p)])
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    return w


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonify(data), indent=2, sort_keys=True) + "\n")


def _manifest(args, out: Path, w: WeightedIFS | None, **extra) -> None:
    argv = [a for a in getattr(args, "_argv", [])]
    data = {
        "command": args.command,
        "argv": argv,
        "version": __version__,
        "system": ifs_to_dict(w) if w is not None else None,
        "seed": getattr(args, "seed", None),
        "budget": getattr(args, "budget", None),
        "backend": {True: "exact", False: "float", None: "auto"}[args.exact],
        **extra,
    }
    _write_json(out / "manifest.json", data)


def _plot(out: Path, csv_name: str, xcol: int, ycol: int, title: str, xlabel: str, ylabel: str) -> None:
    (out / "plot.gp").write_text(
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set key off\n"
        f"plot '{csv_name}' every ::1 using {xcol}:{ycol} with linespoints\n"
    )


# ----------------------------------------------------------------------------
# commands


def cmd_dims(args) -> int:
    w = _system(args)
    if w.d > 8:
        raise InputError("dimension above 8 is not supported")
    rep = dimension_report(w)
    out = _out(args)
    _write_json(out / "report.json", rep.to_dict())
    _manifest(args, out, w)
    print(json.dumps(_jsonify(rep.to_dict()), sort_keys=True))
    return EXIT_OK


def cmd_overlaps(args) -> int:
    w = _system(args)
    out = _out(args)
    report, rows = [], []
    for j in range(w.d):
        sub = w.ifs.coordinate(j)
        hit = exact_overlap_search(sub, args.max_len, budget=args.budget)
        entry = {
            "coordinate": j,
            "max_len": args.max_len,
            "overlap": None if hit is None else {"u1": list(hit[0]), "u2": list(hit[1]), "length": hit[2]},
        }
        prof = separation_profile(sub, range(1, args.n + 1), budget=args.budget)
        for n, m, c in prof.rows():
            rows.append((j, n, m, c))
        r = pm_one_template(w.ifs, j)
        if r is not None:
            wit = pm10_root_check(r, args.max_degree)
            entry["pm10_root"] = None if wit is None else list(wit)
        report.append(entry)
    lines = ["coordinate,n,min_rho,c_n"]
    lines += [f"{j},{n},{_fmt(m)},{_fmt(c)}" for j, n, m, c in rows]
    (out / "separation.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "report.json", report)
    _manifest(args, out, w, max_len=args.max_len, max_degree=args.max_degree, levels=args.n)
    _plot(out, "separation.csv", 2, 4, "finite-level separation", "n", "c_n")
    print(json.dumps(_jsonify(report), sort_keys=True))
    return EXIT_OK


def _fmt(v: float) -> str:
    v = float(v)
    return f"{v:.9f}" if math.isfinite(v) else "inf"


def cmd_entropy_curve(args) -> int:
    w = _system(args)
    out = _out(args)
    curve = entropy_curve(
        w,
        args.n,
        args.mode,
        depth=args.depth,
        count=args.count,
        seed=args.seed,
        miller_madow=args.miller_madow,
        budget=args.budget,
    )
    (out / "entropy_curve.csv").write_text(curve.to_csv())
    _write_json(out / "report.json", {"kappa": curve.target, "chi": curve.chi, "mode": curve.mode, "rows": curve.rows})
    _manifest(args, out, w, n=args.n, mode=args.mode, depth=args.depth, count=args.count, miller_madow=args.miller_madow)
    _plot(out, "entropy_curve.csv", 1, 3, f"H/n against kappa = {curve.target:.6f}", "n", "H/n")
    print(curve.to_csv(), end="")
    return EXIT_OK


def cmd_boxdim(args) -> int:
    w = _system(args)
    out = _out(args)
    a, b = args.window
    series = box_count_series(w.ifs, range(a, b + 1), method=args.method, budget=args.budget)
    fit = box_dim_fit(series, (a, b))
    (out / "boxcount.csv").write_text(series.to_csv())
    (out / "slope.txt").write_text(f"{fit.slope:.9f}\n")
    _write_json(out / "report.json", {"slope": fit.slope, "intercept": fit.intercept, "residuals": fit.residuals, "window": [a, b]})
    _manifest(args, out, w, window=[a, b], method=args.method)
    _plot(out, "boxcount.csv", 1, 3, f"box counts, slope {fit.slope:.4f}", "n", "log2 N_n")
    print(f"{fit.slope:.9f}")
    return EXIT_OK


def cmd_slice(args) -> int:
    w = _system(args)
    out = _out(args)
    theta = exact_word_measure(w, args.depth, budget=args.budget).as_float()
    spec = PartitionSpec(tuple(lyapunov_exponents(w)), args.n + args.mstep)
    # by default quantize to the lattice of the finest partition examined
    lattice = spec.levels if args.lattice_level is None else args.lattice_level
    rep = slice_entropy_experiment(
        theta, spec.chi, args.k, args.mstep, args.n, args.eps, lattice_level=lattice, budget=args.budget
    )
    (out / "slice.csv").write_text(rep.to_csv())
    _write_json(out / "report.json", {"fractions": rep.fractions, "chi": rep.chi, "eps": rep.eps})
    _manifest(args, out, w, depth=args.depth, k=args.k, mstep=args.mstep, n=args.n, eps=args.eps, lattice_level=lattice)
    _plot(out, "slice.csv", 2, 3, "slice entropies", "q", "h_q")
    print(json.dumps({"fractions": rep.fractions}))
    return EXIT_OK


def random_lattice_measure(rng: np.random.Generator, d: int, level: int, atoms: int, spread: int) -> DiscreteMeasure:
    """Random atoms on ``2^-level Z^d`` with integer coordinates in ``[-spread, spread]``."""
    ints = rng.integers(-spread, spread + 1, size=(atoms, d))
    masses = rng.random(atoms) + 0.05
    return DiscreteMeasure(np.ldexp(ints.astype(float), -level), masses / masses.sum())


def cmd_kvtest(args) -> int:
    out = _out(args)
    rng = np.random.default_rng(args.seed)
    spec = PartitionSpec((1.0,) * args.dim, args.n)
    rows = []
    for t in range(args.count):
        k = (2, 3, 5)[t % 3]
        theta = random_lattice_measure(rng, args.dim, args.n, int(rng.integers(2, 6)), 4)
        sigma = random_lattice_measure(rng, args.dim, args.n, int(rng.integers(1, 8)), 8)
        rows.append((t, k, kv_gap(theta, sigma, k, spec, budget=args.budget)))
    lines = ["trial,k,gap"] + [f"{t},{k},{g:.9f}" for t, k, g in rows]
    (out / "kv.csv").write_text("\n".join(lines) + "\n")
    worst = min(g for _, _, g in rows)
    _write_json(out / "report.json", {"trials": len(rows), "min_gap": worst})
    _manifest(args, out, None, count=args.count, n=args.n, dim=args.dim)
    _plot(out, "kv.csv", 1, 3, "Kaimanovich-Vershik gaps", "trial", "gap")
    print(f"min gap {worst:.9f} over {len(rows)} trials")
    if worst < -KV_TOL:
        raise PropertyViolation(f"negative gap {worst}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.count < 1:
        raise InputError("--count must be positive")
    w = _system(args)
    out = _out(args)
    m = sample_measure(w, args.depth, args.count, args.seed)
    (out / "sample.csv").write_text(measure_to_csv(m))
    _write_json(out / "report.json", measure_header(m, depth=args.depth, count=args.count, seed=args.seed))
    _manifest(args, out, w, depth=args.depth, count=args.count)
    if w.d >= 2:
        _plot(out, "sample.csv", 1, 2, "sampled measure", "x0", "x1")
    print(f"{len(m)} atoms written to {out / 'sample.csv'}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ifs", help="system JSON file")
    common.add_argument("--p", help="comma-separated weights overriding the file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--budget", type=int, default=DEFAULT_WORD_BUDGET, help="enumeration budget")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    backend = common.add_mutually_exclusive_group()
    backend.add_argument("--exact", dest="exact", action="store_const", const=True, default=None)
    backend.add_argument("--float", dest="exact", action="store_const", const=False)

    parser = argparse.ArgumentParser(prog="diagaffine", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", parents=[common], help="dimension report")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("overlaps", parents=[common], help="overlap and separation report per coordinate")
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--max-degree", type=int, default=12)
    p.add_argument("--n", type=int, default=8, help="largest level of the c_n table")
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("entropy-curve", parents=[common], help="H(mu, E_n)/n against kappa")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--mode", choices=["exact", "montecarlo"], default="exact")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--count", type=int, default=10**5)
    p.add_argument("--miller-madow", action="store_true")
    p.set_defaults(func=cmd_entropy_curve)

    p = sub.add_parser("boxdim", parents=[common], help="box-counting dimension estimate")
    p.add_argument("--window", type=_window, default=(4, 10))
    p.add_argument("--method", choices=["auto", "words", "raster"], default="auto")
    p.set_defaults(func=cmd_boxdim)

    p = sub.add_parser("slice", parents=[common], help="slice entropies of a self-convolved word measure")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--mstep", type=int, default=3)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--lattice-level", type=int, default=None, help="default: levels of E_{n+mstep}")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("kvtest", parents=[common], help="Kaimanovich-Vershik gaps on random lattice measures")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=3, help="lattice level")
    p.add_argument("--dim", type=int, default=1)
    p.set_defaults(func=cmd_kvtest)

    p = sub.add_parser("sample", parents=[common], help="Monte-Carlo sample of the self-affine measure")
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--count", type=int, default=10**4)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._argv = argv
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PropertyViolation as exc:
        print(f"error: property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
