"""Command-line front end.

Subcommands: ``bound``, ``asymptotic``, ``estimate``, ``verify``, ``compare``,
``figure`` and ``replay``. Tables are written as CSV (or JSON with
``--json``) with 12 significant digits. Exit codes: 0 success, 1 failed
verification, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from dataclasses import replace
from typing import Any, Sequence

from . import __version__
from .bounds import asymptotic_bound, comparison_bounds, finite_bound, optimal_k
from .ensembles import ModelSpec, SeedSpec, parse_model_flags, sample, sample_model_b
from .montecarlo import (
    VerificationCase,
    expectation_sweep,
    run_verification,
    verification_grid,
)
from .optimize import EstimatorConfig, multi_restart
from .svg import Series, line_plot
from .tensor import DenseTensor, frobenius_norm, load_text, save_text

MODELS = ("a-real", "a-complex", "sym", "sym-tilde", "bounded-rank")
DISTS = ("gauss", "rademacher", "uniform", "steinhaus")
_FAMILY_OF = {"a-real": "A", "a-complex": "A", "sym": "S", "sym-tilde": "S_tilde", "bounded-rank": "B"}
_FIELD_OF = {"a-real": "real", "a-complex": "complex"}

FIGURES = {
    "steinhaus": {"grid": (2, 4, 8, 16, 24, 32), "full": tuple(range(2, 42, 2)), "method": "pga", "realizations": 64, "restarts": 35},
    "bounded-rank-small": {"grid": (4, 8, 16, 32, 64), "full": (4, 8, 16, 32, 64, 96, 128), "method": "pga", "realizations": 40, "restarts": 35, "rank": 3},
    "bounded-rank-r25": {"grid": (4, 8, 16, 32, 64), "full": (4, 8, 16, 32, 64, 96, 128), "method": "both", "realizations": 40, "restarts": 35, "rank": 25},
}


class UsageError(Exception):
    """Invalid flag combination; reported with exit code 2."""


def fmt(x: Any) -> str:
    """Cell formatting: 12 significant digits for floats."""
    if x is None:
        return "---"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return str(x)


def _round(x: Any) -> Any:
    if isinstance(x, float) and math.isfinite(x):
        return float(format(x, ".12g"))
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    if len(set(header)) != len(header):
        raise ValueError("duplicate CSV header")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        if len(r) != len(header):
            raise ValueError("ragged CSV row")
        w.writerow([fmt(c) for c in r])
    return buf.getvalue()


def render_json(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def render_table(header, rows, as_json: bool) -> str:
    if as_json:
        return render_json([dict(zip(header, r)) for r in rows])
    return render_csv(header, rows)


# ----------------------------------------------------------------------------
# flag helpers


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _p_range(text: str) -> list[int]:
    try:
        a, b = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if a > b or a < 2:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return list(range(a, b + 1))


def _regime(text: str) -> int | None:
    if text == "dinf":
        return None
    if text.startswith("d="):
        try:
            d = int(text[2:])
        except ValueError:
            d = 0
        if d >= 2:
            return d
    raise argparse.ArgumentTypeError(f"regime must be 'dinf' or 'd=N' with N >= 2, got {text!r}")


def _resolve_dims(dims: list[int] | None, p: int | None) -> tuple[int, ...]:
    if dims is None:
        raise UsageError("--dims is required")
    if p is not None:
        if len(dims) == 1:
            dims = dims * p
        elif len(dims) != p:
            raise UsageError(f"--dims has {len(dims)} entries but --p is {p}")
    return tuple(dims)


def _spec(args, dims: tuple[int, ...]) -> ModelSpec:
    try:
        return parse_model_flags(args.model, dims, args.dist, args.rank)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dims_label(dims: Sequence[int]) -> str:
    return "x".join(map(str, dims))


def _threads(args) -> int:
    return max(1, args.threads or os.cpu_count() or 1)


# ----------------------------------------------------------------------------
# subcommands


def cmd_bound(args) -> tuple[str, int]:
    spec = _spec(args, _resolve_dims(args.dims, args.p))
    header = ["model", "dims", "k", "log_value", "value", "evaluations"]
    rows = []
    try:
        results = [optimal_k(spec)] if args.optimize_k else [finite_bound(spec, k) for k in args.k]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for r in results:
        rows.append([args.model, _dims_label(spec.dims), r.k_used, r.log_value, r.value, r.evaluations])
    return render_table(header, rows, args.json), 0


def _normalizer(model: str, p: int | None) -> float:
    if model == "bounded-rank":
        return 1.0
    if model in ("sym", "sym-tilde"):
        return math.sqrt(math.log(p))
    return math.sqrt(p * math.log(p))


def cmd_asymptotic(args) -> tuple[str, int]:
    family = _FAMILY_OF[args.model]
    field = _FIELD_OF.get(args.model, "complex")
    ps = args.p if args.p is not None else [None]
    if family != "B" and args.p is None:
        raise UsageError("--p is required for this model")
    header = ["model", "p", "eta", "alpha", "log_value", "value"]
    if args.normalizers:
        header += ["normalizer", "normalized"]
    rows = []
    for p in ps:
        if args.eta is not None and family != "A":
            raise UsageError("--eta applies to a-real and a-complex only")
        try:
            r = asymptotic_bound(family, field, p, args.eta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        eta = "" if args.eta is None else ":".join(fmt(e) for e in args.eta)
        row = [args.model, "" if p is None else p, eta, r.alpha if r.alpha is not None else "", r.log_value, r.value]
        if args.normalizers:
            n = _normalizer(args.model, p)
            row += [n, r.value / n]
        rows.append(row)
    return render_table(header, rows, args.json), 0


def _estimator(args, method: str | None = None) -> EstimatorConfig:
    return EstimatorConfig(
        method=method or args.method,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        restarts=args.restarts,
    )


def _hs_bound_scale(spec: ModelSpec) -> float:
    """Frobenius norm of a Steinhaus Model A sample, which is deterministic."""
    return math.exp((1 - 1 / spec.p) / 2 * sum(math.log(d) for d in spec.dims))


def cmd_estimate(args) -> tuple[str, int]:
    threads = _threads(args)
    seed = SeedSpec(args.seed)
    header = ["model", "dims", "method", "realizations", "restarts", "mean", "stderr", "dispersion"]
    if args.with_bound:
        header += ["bound", "bound_k"]
    rows = []
    if args.load:
        try:
            T = load_text(args.load)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load tensor: {exc}") from None
        if args.normalize == "hs" and frobenius_norm(T) > 0:
            T = DenseTensor(T.data / frobenius_norm(T), T.field)
        res = multi_restart(T, replace(_estimator(args), seed=seed.spawn(0).spawn(1)), threads=threads)
        row = ["loaded", _dims_label(T.shape), args.method, 1, args.restarts, res.value, 0.0, res.dispersion]
        if args.with_bound:
            row += [None, None]
        return render_table(header, [row], args.json), 0
    if args.model is None:
        raise UsageError("--model is required unless --load is given")
    if args.d_grid is not None:
        if args.p is None:
            raise UsageError("--d-grid needs --p")
        grid = [(d,) * args.p for d in args.d_grid]
    else:
        grid = [_resolve_dims(args.dims, args.p)]
    if args.dump and len(grid) != 1:
        raise UsageError("--dump needs a single shape")
    for dims in grid:
        spec = _spec(args, dims)
        if args.dump:
            save_text(sample(spec, seed.spawn(0).spawn(0)), args.dump)
        summ = expectation_sweep(spec, _estimator(args), args.realizations, seed, threads=threads, normalize=args.normalize)
        row = [args.model, _dims_label(dims), args.method, args.realizations, args.restarts, summ.mean, summ.stderr, summ.dispersion]
        if args.with_bound:
            b = optimal_k(spec)
            value = b.value
            if args.normalize == "hs":
                value = value / _hs_bound_scale(spec) if spec.dist.kind == "steinhaus" else None
            row += [value, b.k_used]
        rows.append(row)
    return render_table(header, rows, args.json), 0


def cmd_verify(args) -> tuple[str, int]:
    threads = _threads(args)
    seed = SeedSpec(args.seed)
    if args.dims is not None or args.model is not None:
        model = args.model or "a-complex"
        dims = _resolve_dims(args.dims, args.p)
        try:
            spec = parse_model_flags(model, dims, args.dist, args.rank)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if spec.family == "B":
            raise UsageError("verify supports a-real, a-complex, sym and sym-tilde")
        cases = [VerificationCase(spec, args.k, spec.family in ("S", "S_tilde"))]
    else:
        cases = verification_grid(args.instances, SeedSpec(args.seed, 1))
    scale = 0.5 if args.corrupt_prefactor else 1.0
    try:
        reports = run_verification(cases, args.n_samples, args.slack, seed, threads, scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    items = []
    for case, rep in zip(cases, reports):
        item = {"case": case.label(), "symmetric": case.symmetric}
        item.update(rep.as_dict())
        item["gap_sigmas"] = _gap_sigmas(rep)
        items.append(item)
    n_pass = sum(r.passed for r in reports)
    doc = {
        "instances": len(reports),
        "passed": n_pass,
        "all_pass": n_pass == len(reports),
        "corrupt_prefactor": bool(args.corrupt_prefactor),
        "n_samples": args.n_samples,
        "slack_sigmas": args.slack,
        "reports": items,
    }
    return render_json(doc), 0 if n_pass == len(reports) else 1


def _gap_sigmas(rep) -> float | None:
    """Distance of the estimate's moment from the bound, in standard errors."""
    m = rep.moment
    if m.stderr == 0:
        return None
    target = math.exp(rep.lhs_log - (rep.rhs_log - math.log(m.mean + rep.slack_sigmas * m.stderr)))
    return (m.mean - target) / m.stderr


def cmd_compare(args) -> tuple[str, int]:
    ps = args.p_range
    gaussian = args.dist == "gauss"
    names = ["kac-rice-ref", "moment", "sudakov-fernique", "aden-ali", "boedihardjo", "friedland-kemp"]
    table = {p: comparison_bounds(p, args.regime, gaussian, args.eps, args.C) for p in ps}
    header = ["bound"] + [f"p={p}" for p in ps] + ["note"]
    rows = []
    for name in names:
        note = table[ps[0]][name].note
        rows.append([name] + [table[p][name].value for p in ps] + [note])
    return render_table(header, rows, args.json), 0


def cmd_figure(args) -> tuple[str, int]:
    cfg = FIGURES[args.name]
    threads = _threads(args)
    seed = SeedSpec(args.seed)
    if args.full:
        warnings.warn("full grids can take hours", RuntimeWarning, stacklevel=1)
    grid = args.d_grid or (cfg["full"] if args.full else cfg["grid"])
    realizations = args.realizations or cfg["realizations"]
    restarts = args.restarts or cfg["restarts"]
    conf = EstimatorConfig(max_iters=args.max_iters, rel_tol=args.rel_tol, restarts=restarts)
    rows = []
    if args.name == "steinhaus":
        header = ["d", "mean", "stderr", "bound", "bound_k"]
        for d in grid:
            spec = parse_model_flags("a-complex", (d,) * args.p, "steinhaus")
            s = expectation_sweep(spec, replace(conf, method="pga"), realizations, seed, threads, args.normalize)
            b = optimal_k(spec)
            bound = b.value / _hs_bound_scale(spec) if args.normalize == "hs" else b.value
            rows.append([d, s.mean, s.stderr, bound, b.k_used])
        series = [
            Series("gradient ascent", grid, [r[1] for r in rows], [r[2] for r in rows]),
            Series("finite bound", grid, [r[3] for r in rows], dashed=True),
        ]
    else:
        rank = args.rank or cfg["rank"]
        header = ["d"]
        methods = ("als", "pga") if cfg["method"] == "both" else (cfg["method"],)
        for m in methods:
            header += [f"{m}_mean", f"{m}_stderr", f"{m}_sd"] if len(methods) > 1 else ["mean", "stderr", "sd"]
        header += ["bound", "bound_k", "limit"]
        for d in grid:
            spec = parse_model_flags("bounded-rank", (d,) * args.p, args.dist, rank)
            row: list[Any] = [d]
            for m in methods:
                s = expectation_sweep(spec, replace(conf, method=m), realizations, seed, threads, args.normalize)
                row += [s.mean, s.stderr, s.stderr * math.sqrt(len(s.values))]
            b = optimal_k(spec)
            row += [b.value, b.k_used, asymptotic_bound("B").value]
            rows.append(row)
        series = []
        for j, m in enumerate(methods):
            label = {"als": "alternating maximization", "pga": "gradient ascent"}[m]
            series.append(Series(label, grid, [r[1 + 3 * j] for r in rows], [r[2 + 3 * j] for r in rows]))
        nb = 1 + 3 * len(methods)
        series.append(Series("finite bound", grid, [r[nb] for r in rows], dashed=True))
        series.append(Series("limit", grid, [r[nb + 2] for r in rows], dashed=True))
    if args.svg:
        with open(args.svg, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(line_plot(series, f"{args.name}, p={args.p}", "d", "injective norm"))
    return render_table(header, rows, args.json), 0


# ----------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads; never changes results")
    p.add_argument("--out", help="write the table to PATH plus PATH.manifest.json")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")


def _model_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--model", choices=MODELS, required=required)
    p.add_argument("--dims", type=_int_list, help="comma-separated dimensions, or one value with --p")
    p.add_argument("--p", type=int, help="tensor order")
    p.add_argument("--dist", choices=DISTS, default="gauss")
    p.add_argument("--rank", type=int, default=1, help="rank R of bounded-rank tensors")


def _estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--normalize", choices=("none", "hs"), default="none")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="injnorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="finite moment bound at fixed or optimal k")
    _common(p)
    _model_flags(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=_int_list, help="moment order(s)")
    g.add_argument("--optimize-k", action="store_true")

    p = sub.add_parser("asymptotic", help="large-dimension limit of the bound")
    _common(p)
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--p", type=_int_list, help="tensor order(s)")
    p.add_argument("--eta", type=_float_list, help="aspect ratios d_i/d_1 for i >= 2")
    p.add_argument("--normalizers", action="store_true", help="add sqrt(p log p) or sqrt(log p) columns")

    p = sub.add_parser("estimate", help="numerical lower bounds averaged over samples")
    _common(p)
    _model_flags(p, required=False)
    _estimator_flags(p)
    p.add_argument("--d-grid", type=_int_list, help="cubic dimensions to sweep (needs --p)")
    p.add_argument("--method", choices=("als", "pga"), default="als")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--with-bound", action="store_true", help="add the optimal finite bound")
    p.add_argument("--load", help="estimate a tensor read from a text file")
    p.add_argument("--dump", help="write the first sampled tensor to a text file")

    p = sub.add_parser("verify", help="Monte Carlo check of the deterministic inequality")
    _common(p)
    _model_flags(p, required=False)
    p.add_argument("--k", type=int, default=2, help="moment order for a single case")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--n-samples", type=int, default=200_000)
    p.add_argument("--slack", type=float, default=6.0, help="standard errors of slack")
    p.add_argument("--corrupt-prefactor", action="store_true", help="halve the prefactor (negative control)")

    p = sub.add_parser("compare", help="comparison table of bounds for real Model A")
    _common(p)
    p.add_argument("--p-range", type=_p_range, default=_p_range("3:8"))
    p.add_argument("--regime", type=_regime, default=None, help="'dinf' or 'd=N'")
    p.add_argument("--dist", choices=("gauss", "rigid"), default="gauss")
    p.add_argument("--eps", type=float, default=0.01, help="epsilon of the Friedland-Kemp bound")
    p.add_argument("--C", type=float, default=1.0, help="constant of the Boedihardjo bound")

    p = sub.add_parser("figure", help="data for the numerical figures")
    _common(p)
    _estimator_flags(p)
    p.add_argument("name", choices=tuple(FIGURES))
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d-grid", type=_int_list)
    p.add_argument("--full", action="store_true")
    p.add_argument("--realizations", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--dist", choices=("gauss", "steinhaus"), default="gauss")
    p.add_argument("--svg", help="also write an SVG plot")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="override the output path")
    p.add_argument("--threads", type=int, default=None)
    return parser


COMMANDS = {
    "bound": cmd_bound,
    "asymptotic": cmd_asymptotic,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "figure": cmd_figure,
}


def _validate(args) -> None:
    for name in ("restarts", "realizations", "instances", "n_samples", "threads"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be at least 1")
    if getattr(args, "p", None) is not None and isinstance(args.p, int) and args.p < 1:
        raise UsageError("--p must be at least 1")
    if getattr(args, "rank", None) is not None and args.rank < 1:
        raise UsageError("--rank must be at least 1")


def _manifest(argv: list[str], args, wall: float) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    return {
        "subcommand": args.command,
        "argv": argv,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time_s": round(wall, 3),
    }


def _replay_argv(args) -> list[str]:
    with open(args.manifest, encoding="utf-8") as fh:
        man = json.load(fh)
    argv = list(man["argv"])
    for flag in ("--out", "--threads"):
        value = getattr(args, flag[2:])
        if value is not None:
            while flag in argv:
                i = argv.index(flag)
                del argv[i : i + 2]
            argv += [flag, str(value)]
    return argv


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags and 0 for --help/--version
        return exc.code if isinstance(exc.code, int) else 2
    if args.command == "replay":
        try:
            return main(_replay_argv(args))
        except (OSError, KeyError, ValueError) as exc:
            print(f"injnorm: error: cannot replay manifest: {exc}", file=sys.stderr)
            return 2
    t0 = time.perf_counter()
    try:
        _validate(args)
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"injnorm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_manifest(argv, args, time.perf_counter() - t0), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
