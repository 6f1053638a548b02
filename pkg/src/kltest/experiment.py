"""Seeded Monte Carlo estimation, exponent fits and the strong-converse demonstration."""
from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from . import _kernels
from .errors import InfiniteExponentError, ValidationError
from .exponent import f_star
from .oracle import (PAIR_LIMIT, TYPE_LIMIT, enumerate_types, exact_one_sample_errors,
                     exact_two_sample_errors, law_statistics, log_factorials,
                     log_type_probabilities, num_types, pair_region_scan)
from .simplex import (ZERO_TOL, Distribution, as_probs, make_distribution, parse_distribution_text,
                      supports_overlap)
from .testing import ONE_SAMPLE, TestVariant, hoeffding_threshold, two_sample_threshold

MODES = ("monte-carlo", "exact-when-feasible")
TRIAL_CHUNK = 1024
# sampling roles, mixed into every per-trial seed
H0_X, H0_Y, H1_X, H1_Y = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentSpec:
    p: Distribution
    q: Distribution | None
    n_grid: tuple[int, ...]
    trials: int
    eps: float
    test: str = "two"
    variant: TestVariant = TestVariant.FORWARD
    master_seed: int = 0
    mode: str = "monte-carlo"
    gamma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", TestVariant.parse(self.variant))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid:
            raise ValidationError("n_grid is empty")
        if any(n < 1 for n in self.n_grid) or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValidationError(f"n_grid must be strictly increasing positive integers, got {self.n_grid}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if not 0.0 < self.eps < 1.0:
            raise ValidationError(f"eps must lie in (0, 1), got {self.eps!r}")
        if self.test not in ("one", "two"):
            raise ValidationError(f"test must be 'one' or 'two', got {self.test!r}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValidationError("master_seed must be a 64-bit unsigned integer")
        if self.q is not None and self.q.d != self.p.d:
            raise ValidationError(f"alphabet sizes differ: {self.p.d} vs {self.q.d}")

    @property
    def variant_label(self) -> str:
        return ONE_SAMPLE if self.test == "one" else self.variant.value


@dataclass(frozen=True)
class ErrorEstimate:
    n: int
    variant: str
    method: str
    alpha_hat: float
    alpha_lo: float
    alpha_hi: float
    beta_hat: float
    beta_lo: float
    beta_hi: float
    trials: int
    seed: int


@dataclass(frozen=True)
class ExponentFit:
    points: list
    slope: float
    intercept: float
    target: float | None = None
    gap: float | None = None
    excluded: int = 0


@dataclass(frozen=True)
class ConverseRow:
    n: int
    c_n: float
    type2_adversarial: float
    exponent_adversarial: float
    type2_reference: float
    exponent_reference: float
    inball_fstar: float
    type1_fstar: float
    method: str
    trials: int


@dataclass(frozen=True)
class ConverseReport:
    f_star: Distribution
    optimal_exponent: float
    c: float
    rows: list = field(default_factory=list)


# --- sampling ----------------------------------------------------------------

def trial_seed(master_seed: int, n: int, trial: int, role: int) -> int:
    """64-bit seed for one trial, independent of execution order."""
    ss = np.random.SeedSequence([int(master_seed), int(n), int(trial), int(role)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p)
    last = int(np.nonzero(p > ZERO_TOL)[0][-1])
    cdf[last:] = 1.0
    return cdf


def sample_iid(P, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. symbols from ``P`` by inverse CDF on a PCG64 stream seeded with ``seed``."""
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    p = as_probs(P)
    u = np.random.Generator(np.random.PCG64(int(seed))).random(int(n))
    return np.searchsorted(_cdf(p), u, side="right").astype(np.int64)


def _count_block(p, n, master_seed, role, start, stop):
    cdf = _cdf(p)
    d = p.size
    out = np.empty((stop - start, d), dtype=np.int64)
    for k, trial in enumerate(range(start, stop)):
        u = np.random.Generator(np.random.PCG64(trial_seed(master_seed, n, trial, role))).random(n)
        out[k] = np.bincount(np.searchsorted(cdf, u, side="right"), minlength=d)
    return out


def sample_counts(P, n: int, trials: int, master_seed: int, role: int, workers: int = 1) -> np.ndarray:
    """Count vectors of ``trials`` independent n-samples; row k uses trial index k."""
    p = as_probs(P)
    bounds = [(s, min(s + TRIAL_CHUNK, trials)) for s in range(0, trials, TRIAL_CHUNK)]

    def run(b):
        return _count_block(p, int(n), master_seed, role, b[0], b[1])

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, bounds))
    else:
        blocks = [run(b) for b in bounds]
    return np.concatenate(blocks)


# --- Monte Carlo error rates ----------------------------------------------------

def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _log2_law(p):
    pos = p > ZERO_TOL
    return np.where(pos, np.log2(np.where(pos, p, 1.0)), -np.inf)


def _statistics(spec: ExperimentSpec, n, cx, cy) -> np.ndarray:
    tab = _kernels.log2_table(n)
    if spec.test == "one":
        return _kernels.law_stats(cx, tab, n, _log2_law(as_probs(spec.p)))
    return _kernels.pair_stats(cx, cy, tab, float(n), spec.variant.code)


def _exact_feasible(spec: ExperimentSpec, n: int) -> bool:
    T = num_types(n, spec.p.d)
    return T <= TYPE_LIMIT if spec.test == "one" else T * T <= PAIR_LIMIT


def _estimate_exact(spec: ExperimentSpec, n: int, workers: int) -> ErrorEstimate:
    if spec.test == "one":
        rep = exact_one_sample_errors(spec.p, spec.q, n, spec.eps)
    else:
        rep = exact_two_sample_errors(spec.p, spec.q, n, spec.eps, spec.variant, gamma=spec.gamma,
                                      workers=workers)
    a, b = rep.type_1, rep.type_2
    return ErrorEstimate(n, spec.variant_label, "exact", a, a, a, b, b, b, 0, int(spec.master_seed))


def _estimate_mc(spec: ExperimentSpec, n: int, workers: int) -> ErrorEstimate:
    p = as_probs(spec.p)
    d = p.size
    if spec.test == "one":
        c = hoeffding_threshold(n, d, spec.eps)
        cx0, cy0 = sample_counts(p, n, spec.trials, spec.master_seed, H0_X, workers), None
    else:
        c = two_sample_threshold(n, d, spec.eps, gamma=spec.gamma)[1]
        cx0 = sample_counts(p, n, spec.trials, spec.master_seed, H0_X, workers)
        cy0 = sample_counts(p, n, spec.trials, spec.master_seed, H0_Y, workers)
    rejections = int(np.count_nonzero(_statistics(spec, n, cx0, cy0) > c))
    alpha = rejections / spec.trials
    alo, ahi = wilson_interval(rejections, spec.trials)
    if spec.q is None:
        beta = blo = bhi = math.nan
    else:
        q = as_probs(spec.q)
        if spec.test == "one":
            cx1, cy1 = sample_counts(q, n, spec.trials, spec.master_seed, H1_X, workers), None
        else:
            cx1 = sample_counts(p, n, spec.trials, spec.master_seed, H1_X, workers)
            cy1 = sample_counts(q, n, spec.trials, spec.master_seed, H1_Y, workers)
        accepts = int(np.count_nonzero(_statistics(spec, n, cx1, cy1) <= c))
        beta = accepts / spec.trials
        if spec.test == "two" and not supports_overlap(p, q):
            # disjoint supports: every cross pair has infinite statistic, so beta is exactly 0
            blo = bhi = 0.0
        else:
            blo, bhi = wilson_interval(accepts, spec.trials)
    return ErrorEstimate(n, spec.variant_label, "monte-carlo", alpha, alo, ahi, beta, blo, bhi,
                         int(spec.trials), int(spec.master_seed))


def mc_error_rates(spec: ExperimentSpec, workers: int = 1) -> list[ErrorEstimate]:
    """Error-rate estimates for every n in ``spec.n_grid``.

    In ``exact-when-feasible`` mode an n is computed exactly when enumeration
    fits the oracle guards and by Monte Carlo otherwise; the ``method`` field
    of each estimate says which.
    """
    out = []
    for n in spec.n_grid:
        if spec.mode == "exact-when-feasible" and _exact_feasible(spec, n):
            out.append(_estimate_exact(spec, n, workers))
        else:
            out.append(_estimate_mc(spec, n, workers))
    return out


# --- exponent fitting ----------------------------------------------------------

def exponent_fit(points, target: float | None = None) -> ExponentFit:
    """Least-squares slope of -log2(beta) against n, in bits per sample.

    Points with beta == 0 carry no finite exponent; they are dropped and counted
    in ``excluded``.
    """
    pts = [(int(n), float(b)) for n, b in points]
    usable = [(n, b) for n, b in pts if b > 0.0 and math.isfinite(b)]
    excluded = len(pts) - len(usable)
    if not usable and pts:
        raise InfiniteExponentError("every beta is zero; the type II exponent is infinite")
    if len(usable) < 2:
        raise ValidationError("exponent fit needs at least two points with beta > 0")
    ns = np.array([n for n, _ in usable], dtype=np.float64)
    y = -np.log2(np.array([b for _, b in usable]))
    slope, intercept = np.polyfit(ns, y, 1)
    gap = None if target is None else abs(float(slope) - target)
    return ExponentFit([(int(n), float(v / n)) for n, v in zip(ns, y)], float(slope), float(intercept),
                       target, gap, excluded)


# --- strong converse ---------------------------------------------------------

def converse_demo(P, Q, c: float, n_grid, eps: float = 0.05, mode: str = "exact",
                  master_seed: int = 0, trials: int = 10_000,
                  variant: TestVariant | str = TestVariant.FORWARD, workers: int = 1) -> ConverseReport:
    """Evaluate a test that beats the optimal two-sample exponent and watch its level collapse.

    The adversarial test accepts H0 when the two-sample statistic is at most
    c_n *and* at least one empirical law lies outside B(F*, c). Removing that
    neighbourhood raises the type II exponent to roughly the optimum plus
    2c; the price is the probability, under F*, that both empirical laws
    land in B(F*, c), which tends to one.
    """
    p, q = as_probs(P), as_probs(Q)
    if p.shape != q.shape:
        raise ValidationError(f"alphabet sizes differ: {p.size} vs {q.size}")
    if not supports_overlap(p, q):
        raise ValidationError("supports of P and Q are disjoint")
    if np.array_equal(p, q):
        raise ValidationError("P and Q must differ")
    if not c > 0:
        raise ValidationError(f"ball radius c must be positive, got {c!r}")
    if mode not in ("exact", "mc", "monte-carlo"):
        raise ValidationError(f"mode must be 'exact' or 'mc', got {mode!r}")
    variant = TestVariant.parse(variant)
    fs = f_star(p, q)
    fp = as_probs(fs)
    optimal = float(-2.0 * math.log2(np.sum(np.sqrt(p * q))))
    rows = []
    for n in n_grid:
        n = int(n)
        c_n = two_sample_threshold(n, p.size, eps)[1]
        if mode == "exact":
            rows.append(_converse_exact(p, q, fp, c, n, c_n, variant, workers))
        else:
            rows.append(_converse_mc(p, q, fp, c, n, c_n, variant, master_seed, trials, workers))
    return ConverseReport(fs, optimal, float(c), rows)


def _exp_of(log2_beta, n):
    return math.inf if log2_beta == -math.inf else -log2_beta / n


def _converse_exact(p, q, fp, c, n, c_n, variant, workers) -> ConverseRow:
    types = enumerate_types(n, p.size, limit=int(math.isqrt(PAIR_LIMIT)))
    lfact = log_factorials(n)
    lp = log_type_probabilities(types, p, lfact)
    lq = log_type_probabilities(types, q, lfact)
    lf = log_type_probabilities(types, fp, lfact)
    ball = law_statistics(types, n, fp) <= c
    ball_mass = float(np.exp(lf[ball]).sum()) if ball.any() else 0.0
    l1_adv, l2_adv = pair_region_scan(types, n, lf, lf, lp, lq, c_n, variant, ball, ball, workers)
    _, l2_ref = pair_region_scan(types, n, lf, lf, lp, lq, c_n, variant, workers=workers)
    t1 = 0.0 if l1_adv == -math.inf else min(2.0 ** l1_adv, 1.0)
    return ConverseRow(n, c_n, 2.0 ** l2_adv if l2_adv > -math.inf else 0.0, _exp_of(l2_adv, n),
                       2.0 ** l2_ref if l2_ref > -math.inf else 0.0, _exp_of(l2_ref, n),
                       min(ball_mass, 1.0) ** 2, t1, "exact", 0)


def _converse_mc(p, q, fp, c, n, c_n, variant, master_seed, trials, workers) -> ConverseRow:
    tab = _kernels.log2_table(n)
    lf2 = _log2_law(fp)
    fx = sample_counts(fp, n, trials, master_seed, H0_X, workers)
    fy = sample_counts(fp, n, trials, master_seed, H0_Y, workers)
    px = sample_counts(p, n, trials, master_seed, H1_X, workers)
    qy = sample_counts(q, n, trials, master_seed, H1_Y, workers)

    def accepts(cx, cy, adversarial):
        ok = _kernels.pair_stats(cx, cy, tab, float(n), variant.code) <= c_n
        if adversarial:
            both_in = (_kernels.law_stats(cx, tab, n, lf2) <= c) & (_kernels.law_stats(cy, tab, n, lf2) <= c)
            ok &= ~both_in
        return ok

    inball = (_kernels.law_stats(fx, tab, n, lf2) <= c) & (_kernels.law_stats(fy, tab, n, lf2) <= c)
    t1 = 1.0 - float(np.mean(accepts(fx, fy, True)))
    b_adv = float(np.mean(accepts(px, qy, True)))
    b_ref = float(np.mean(accepts(px, qy, False)))
    to_exp = lambda b: math.inf if b == 0 else -math.log2(b) / n
    return ConverseRow(n, c_n, b_adv, to_exp(b_adv), b_ref, to_exp(b_ref), float(np.mean(inball)), t1,
                       "monte-carlo", int(trials))


# --- config files ------------------------------------------------------------

def _parse_law(value: str, base: Path, key: str) -> Distribution:
    try:
        return make_distribution(float(t) for t in value.replace(",", " ").split())
    except ValueError:
        path = (base / value.strip()).resolve()
        if not path.exists():
            raise ValidationError(f"{key}: {value!r} is neither a probability list nor a file") from None
        return parse_distribution_text(path.read_text(), str(path))


def load_experiment_config(path) -> ExperimentSpec:
    """Read a flat ``key = value`` file describing an :class:`ExperimentSpec`.

    Keys: p, q (optional), test, n_grid, trials, eps, variant, master_seed
    (or seed), mode, gamma (optional). ``p``/``q`` are inline probability lists
    or paths to distribution files relative to the config.
    """
    path = Path(path)
    text = path.read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[experiment]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    sec = dict(cp["experiment"])
    known = {"p", "q", "test", "n_grid", "trials", "eps", "variant", "master_seed", "seed", "mode", "gamma"}
    unknown = sorted(set(sec) - known)
    if unknown:
        raise ValidationError(f"{path}: unknown keys {unknown}")
    try:
        p = _parse_law(sec["p"], path.parent, "p")
        q = _parse_law(sec["q"], path.parent, "q") if sec.get("q") else None
        return ExperimentSpec(
            p=p, q=q,
            n_grid=tuple(int(t) for t in sec["n_grid"].replace(",", " ").split()),
            trials=int(sec.get("trials", "1000")),
            eps=float(sec.get("eps", "0.05")),
            test=sec.get("test", "two").strip(),
            variant=sec.get("variant", "forward").strip(),
            master_seed=int(sec.get("master_seed", sec.get("seed", "0"))),
            mode=sec.get("mode", "monte-carlo").strip(),
            gamma=float(sec["gamma"]) if sec.get("gamma") else None,
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None


# --- CSV ---------------------------------------------------------------------

ESTIMATE_COLUMNS = ("n", "variant", "method", "alpha_hat", "alpha_lo", "alpha_hi",
                    "beta_hat", "beta_lo", "beta_hi", "trials", "seed")
CONVERSE_COLUMNS = ("n", "c_n", "type2_adversarial", "exponent_adversarial", "type2_reference",
                    "exponent_reference", "inball_fstar", "type1_fstar", "method", "trials", "seed")


def format_float(x: float) -> str:
    """12 significant digits; infinities as ``inf``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def estimates_to_csv(estimates) -> str:
    return _csv_text(ESTIMATE_COLUMNS, ([getattr(e, k) for k in ESTIMATE_COLUMNS] for e in estimates))


def converse_to_csv(report: ConverseReport, seed: int) -> str:
    rows = ([getattr(r, k) for k in CONVERSE_COLUMNS[:-1]] + [int(seed)] for r in report.rows)
    return _csv_text(CONVERSE_COLUMNS, rows)


def read_estimates_csv(text: str, source: str = "<csv>") -> list[ErrorEstimate]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != ESTIMATE_COLUMNS:
        raise ValidationError(f"{source}:1: expected header {','.join(ESTIMATE_COLUMNS)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(ESTIMATE_COLUMNS):
            raise ValidationError(f"{source}:{lineno}: expected {len(ESTIMATE_COLUMNS)} fields, got {len(row)}")
        try:
            rec = dict(zip(ESTIMATE_COLUMNS, row))
            out.append(ErrorEstimate(
                int(rec["n"]), rec["variant"], rec["method"],
                *(float(rec[k]) for k in ESTIMATE_COLUMNS[3:9]),
                int(rec["trials"]), int(rec["seed"])))
        except ValueError as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
    return out
