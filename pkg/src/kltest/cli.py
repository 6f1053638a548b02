"""Command-line front end: ``kltest <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on domain or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import divergence as dv
from .errors import EnumerationLimitError, InfiniteExponentError, ValidationError
from .experiment import (converse_demo, converse_to_csv, estimates_to_csv, exponent_fit,
                         load_experiment_config, mc_error_rates, read_estimates_csv, ExperimentSpec,
                         ErrorEstimate)
from .exponent import stein_exponent, two_sample_exponent
from .oracle import exact_one_sample_errors, exact_two_sample_errors
from .simplex import empirical_from_samples, parse_distribution_text, parse_samples_text
from .testing import (TestVariant, hoeffding_threshold, one_sample_decide, two_sample_decide,
                      two_sample_threshold)

DOMAIN_ERRORS = (ValidationError, InfiniteExponentError, EnumerationLimitError, OSError)


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _fmt(x: float, digits: int = 6) -> str:
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.{digits}f}"


def _read_law(path):
    return parse_distribution_text(Path(path).read_text(), str(path))


def _read_samples(path):
    return parse_samples_text(Path(path).read_text(), str(path))


def _write(path, text):
    if path:
        Path(path).write_text(text)


def _write_json(path, obj):
    _write(path, json.dumps(_jsonable(obj), indent=2) + "\n" if path else None)


def _positive_int_list(text):
    try:
        vals = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"need positive integers, got {text!r}")
    return vals


def _level(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return v


def _workers(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


# --- subcommands ---------------------------------------------------------------

def cmd_divergence(args):
    P, Q = _read_law(args.p), _read_law(args.q)
    if args.kind == "kl":
        value = dv.kl(P, Q)
        label = "D(P||Q)"
    elif args.kind == "tv":
        value = dv.total_variation(P, Q)
        label = "TV(P,Q)"
    else:
        value = dv.renyi(args.alpha, P, Q)
        label = f"D_{args.alpha:g}(P||Q)"
    print(f"{label} = {_fmt(value)}" + (" bits" if args.kind != "tv" else ""))
    result = {"kind": args.kind, "value": value}
    if args.kind == "renyi":
        result["alpha"] = args.alpha
    _write_json(args.out, result)


def cmd_test_one(args):
    P = _read_law(args.p)
    sample = empirical_from_samples(_read_samples(args.samples), P.d)
    c = hoeffding_threshold(sample.n, P.d, args.eps)
    dec = one_sample_decide(P, sample, c)
    print(f"verdict: {dec.verdict}")
    print(f"statistic D(Q_hat||P) = {_fmt(dec.statistic)} bits")
    print(f"threshold c_n = {_fmt(dec.threshold)} bits (n={sample.n}, eps={args.eps:g})")
    _write_json(args.out, {"verdict": dec.verdict, "statistic": dec.statistic, "threshold": dec.threshold,
                           "n": sample.n, "eps": args.eps, "variant": dec.variant})


def cmd_test_two(args):
    x, y = _read_samples(args.x), _read_samples(args.y)
    d = args.d if args.d else int(max(x.max(), y.max())) + 1
    px, qy = empirical_from_samples(x, d), empirical_from_samples(y, d)
    if px.n != qy.n:
        raise ValidationError(f"samples have different lengths ({px.n} vs {qy.n}); equal lengths required")
    delta, c = two_sample_threshold(px.n, d, args.eps)
    dec = two_sample_decide(px, qy, c, args.variant)
    print(f"verdict: {dec.verdict}")
    print(f"statistic ({dec.variant}) = {_fmt(dec.statistic)} bits")
    print(f"threshold c_n = {_fmt(c)} bits (delta_n = {_fmt(delta)}, n={px.n}, d={d}, eps={args.eps:g})")
    _write_json(args.out, {"verdict": dec.verdict, "statistic": dec.statistic, "threshold": c,
                           "delta_n": delta, "n": px.n, "d": d, "eps": args.eps, "variant": dec.variant})


def cmd_exponent(args):
    P, Q = _read_law(args.p), _read_law(args.q)
    rep = two_sample_exponent(P, Q, resolution=args.resolution)
    fs = None if rep.f_star is None else [float(v) for v in rep.f_star.probs]
    arg = None if rep.numeric_argmin is None else [float(v) for v in rep.numeric_argmin.probs]
    stein = stein_exponent(P, Q)
    print(f"two-sample exponent D(F*||P) + D(F*||Q) = {_fmt(rep.value_closed_form)} bits")
    print(f"Renyi D_1/2(P||Q)                       = {_fmt(rep.value_renyi_half)} bits")
    print(f"grid minimum (resolution {args.resolution:g})       = {_fmt(rep.value_numeric)} bits")
    print("F* = " + ("undefined (disjoint supports)" if fs is None else "(" + ", ".join(f"{v:.6g}" for v in fs) + ")"))
    print(f"one-sample exponent D(P||Q)             = {_fmt(stein)} bits")
    _write_json(args.out, {"value_closed_form": rep.value_closed_form, "value_renyi_half": rep.value_renyi_half,
                           "value_numeric": rep.value_numeric, "f_star": fs, "numeric_argmin": arg,
                           "resolution": args.resolution, "stein_exponent": stein})


def cmd_exact(args):
    P = _read_law(args.p)
    Q = _read_law(args.q) if args.q else None
    rows = []
    for n in args.n:
        if args.mode == "one":
            rep = exact_one_sample_errors(P, Q, n, args.eps)
        else:
            rep = exact_two_sample_errors(P, Q, n, args.eps, args.variant, workers=args.workers)
        rows.append(ErrorEstimate(n, rep.variant, "exact", rep.type_1, rep.type_1, rep.type_1,
                                  rep.type_2, rep.type_2, rep.type_2, 0, 0))
        print(f"n={n:<6d} c_n={_fmt(rep.c_n)}  type_1={rep.type_1:.6g}  type_2={rep.type_2:.6g}  "
              f"-log2(type_2)/n={_fmt(rep.exponent)}")
    _write(args.out, estimates_to_csv(rows))


def cmd_simulate(args):
    spec = load_experiment_config(args.config)
    est = mc_error_rates(spec, workers=args.workers)
    for e in est:
        print(f"n={e.n:<6d} {e.method:<12s} alpha={e.alpha_hat:.6g} [{e.alpha_lo:.4g}, {e.alpha_hi:.4g}]  "
              f"beta={e.beta_hat:.6g} [{e.beta_lo:.4g}, {e.beta_hi:.4g}]")
    _write(args.out, estimates_to_csv(est))


def cmd_exponent_fit(args):
    est = read_estimates_csv(Path(args.csv).read_text(), args.csv)
    fit = exponent_fit([(e.n, e.beta_hat) for e in est], target=args.target)
    print(f"slope = {fit.slope:.6f} bits/sample, intercept = {fit.intercept:.6f}, "
          f"points used = {len(fit.points)}, excluded (beta = 0) = {fit.excluded}")
    if fit.gap is not None:
        print(f"target = {fit.target:.6f}, gap = {fit.gap:.6f}")
    _write_json(args.out, {"slope": fit.slope, "intercept": fit.intercept, "target": fit.target,
                           "gap": fit.gap, "excluded": fit.excluded,
                           "points": [list(pt) for pt in fit.points]})


def cmd_converse(args):
    P, Q = _read_law(args.p), _read_law(args.q)
    rep = converse_demo(P, Q, args.c, args.n_grid, eps=args.eps, mode=args.mode, master_seed=args.seed,
                        trials=args.trials, variant=args.variant, workers=args.workers)
    print("F* = (" + ", ".join(f"{v:.6g}" for v in rep.f_star.probs) + f"), optimal exponent = "
          f"{_fmt(rep.optimal_exponent)} bits, ball radius c = {rep.c:g} bits")
    for r in rep.rows:
        print(f"n={r.n:<6d} adversarial exponent={_fmt(r.exponent_adversarial)}  "
              f"reference exponent={_fmt(r.exponent_reference)}  "
              f"P_F*(both in ball)={r.inball_fstar:.6g}  type I under F*={r.type1_fstar:.6g}")
    _write(args.out, converse_to_csv(rep, args.seed if args.mode != "exact" else 0))


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kltest", description="Relative-entropy one- and two-sample tests.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("divergence", help="divergence between two distribution files")
    s.add_argument("--kind", choices=("kl", "tv", "renyi"), required=True)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_divergence)

    s = sub.add_parser("test-one", help="one-sample test of a sample file against P")
    s.add_argument("--p", required=True)
    s.add_argument("--samples", required=True)
    s.add_argument("--eps", type=_level, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_test_one)

    s = sub.add_parser("test-two", help="two-sample test of two equal-length sample files")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--eps", type=_level, required=True)
    s.add_argument("--variant", choices=[v.value for v in TestVariant], default="forward")
    s.add_argument("--d", type=_workers, help="alphabet size (default: largest symbol + 1)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_test_two)

    s = sub.add_parser("exponent", help="optimal two-sample exponent and F*")
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--resolution", type=_positive_float, default=1e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_exponent)

    s = sub.add_parser("exact", help="exact error probabilities by type enumeration")
    s.add_argument("--p", required=True)
    s.add_argument("--q")
    s.add_argument("--n", type=_positive_int_list, required=True, help="sample size or comma list")
    s.add_argument("--eps", type=_level, required=True)
    s.add_argument("--variant", choices=[v.value for v in TestVariant], default="forward")
    s.add_argument("--mode", choices=("one", "two"), required=True)
    s.add_argument("--workers", type=_workers, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("simulate", help="Monte Carlo error rates from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=_workers, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("exponent-fit", help="fit the type II exponent from a simulate/exact CSV")
    s.add_argument("--csv", required=True)
    s.add_argument("--target", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_exponent_fit)

    s = sub.add_parser("converse", help="strong-converse demonstration")
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--c", type=_positive_float, required=True)
    s.add_argument("--n-grid", type=_positive_int_list, required=True)
    s.add_argument("--mode", choices=("exact", "mc"), default="exact")
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--trials", type=_workers, default=10_000)
    s.add_argument("--eps", type=_level, default=0.05)
    s.add_argument("--variant", choices=[v.value for v in TestVariant], default="forward")
    s.add_argument("--workers", type=_workers, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_converse)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
