"""Hot loops of the exact oracle, the grid minimizer and the Monte Carlo harness.

Each kernel has a loop implementation compiled with numba and a vectorized
numpy implementation. :mod:`kltest._backend` picks one at import time; both
stay importable (``nb_*`` / ``np_*``) for equivalence tests and benchmarks.

Log-sums are carried as ``(m, s)`` pairs meaning ``m + log(s)`` (natural log),
so partial sums from chunks can be merged in a fixed order.
"""
import math

import numpy as np

from ._backend import USE_NUMBA, jit

FORWARD, REVERSE, MIN = 0, 1, 2
NEG_INF = -np.inf


def log2_table(n: int) -> np.ndarray:
    """``log2(k)`` for k = 0..n with entry 0 set to 0 (it is always multiplied by 0)."""
    tab = np.zeros(n + 1)
    if n >= 1:
        tab[1:] = np.log2(np.arange(1, n + 1, dtype=np.float64))
    return tab


def lse_merge(a, b):
    """Merge two ``(m, s)`` log-sum accumulators."""
    m1, s1 = a
    m2, s2 = b
    if m2 == NEG_INF:
        return (m1, s1)
    if m1 == NEG_INF:
        return (m2, s2)
    m = max(m1, m2)
    return (m, s1 * math.exp(m1 - m) + s2 * math.exp(m2 - m))


def lse_value(acc) -> float:
    m, s = acc
    if m == NEG_INF or s == 0.0:
        return NEG_INF
    return m + math.log(s)


# --- loop implementations (compiled by numba) -------------------------------

@jit
def _pair_stat_loop(s, t, tab, variant):
    # s and t are count rows of equal total n; returns sum s_i log2(s_i/t_i)
    # without the 1/n factor so callers divide once
    fwd = 0.0
    rev = 0.0
    fwd_inf = False
    rev_inf = False
    for i in range(s.shape[0]):
        a = s[i]
        b = t[i]
        if a > 0:
            if b == 0:
                fwd_inf = True
            else:
                fwd += a * (tab[a] - tab[b])
        if b > 0:
            if a == 0:
                rev_inf = True
            else:
                rev += b * (tab[b] - tab[a])
    if fwd_inf:
        fwd = np.inf
    if rev_inf:
        rev = np.inf
    if variant == 0:
        return fwd
    if variant == 1:
        return rev
    return min(fwd, rev)


@jit
def _lse_add(m, s, x):
    if x == -np.inf:
        return m, s
    if x <= m:
        return m, s + math.exp(x - m)
    return x, s * math.exp(m - x) + 1.0


def _pair_scan_loop(counts, tab, n, lp_x0, lp_y0, lp_x1, lp_y1, c, variant,
                    excl_x, excl_y, r0, r1):
    T = counts.shape[0]
    m0, s0 = -np.inf, 0.0
    m1, s1 = -np.inf, 0.0
    for a in range(r0, r1):
        ax0 = lp_x0[a]
        ax1 = lp_x1[a]
        if ax0 == -np.inf and ax1 == -np.inf:
            continue
        row = counts[a]
        for b in range(T):
            by0 = lp_y0[b]
            by1 = lp_y1[b]
            if (ax0 == -np.inf or by0 == -np.inf) and (ax1 == -np.inf or by1 == -np.inf):
                continue
            stat = _pair_stat_loop(row, counts[b], tab, variant) / n
            accept = stat <= c and not (excl_x[a] and excl_y[b])
            if accept:
                m1, s1 = _lse_add(m1, s1, ax1 + by1)
            else:
                m0, s0 = _lse_add(m0, s0, ax0 + by0)
    return m0, s0, m1, s1


def _pair_stats_loop(cx, cy, tab, n, variant):
    R = cx.shape[0]
    out = np.empty(R)
    for r in range(R):
        out[r] = _pair_stat_loop(cx[r], cy[r], tab, variant) / n
    return out


def _law_stats_loop(counts, tab, n, log2q):
    # D(t/n || q) per row; log2q holds -inf on zero entries of q
    R, d = counts.shape
    out = np.empty(R)
    log2n = math.log2(n)
    for r in range(R):
        acc = 0.0
        for i in range(d):
            k = counts[r, i]
            if k > 0:
                if log2q[i] == -np.inf:
                    acc = np.inf
                    break
                acc += k * (tab[k] - log2n - log2q[i])
        out[r] = acc / n
    return out


def _grid_sum_kl_loop(F, log2p, log2q):
    # argmin over rows of D(F||P) + D(F||Q); ties go to the lowest row index
    best_i = -1
    best_v = np.inf
    M, k = F.shape
    for r in range(M):
        v = 0.0
        for i in range(k):
            f = F[r, i]
            if f > 0.0:
                v += f * (2.0 * math.log2(f) - log2p[i] - log2q[i])
        if v < best_v:
            best_v = v
            best_i = r
    return best_i, best_v


nb_pair_scan = jit(_pair_scan_loop)
nb_pair_stats = jit(_pair_stats_loop)
nb_law_stats = jit(_law_stats_loop)
nb_grid_sum_kl = jit(_grid_sum_kl_loop)


# --- vectorized numpy implementations ---------------------------------------

def _pair_stats_matrix(row, counts, tab, variant):
    # statistic (times n) of one count row against every row of counts
    T, d = counts.shape
    fwd = np.zeros(T)
    rev = np.zeros(T)
    fwd_inf = np.zeros(T, dtype=bool)
    rev_inf = np.zeros(T, dtype=bool)
    for i in range(d):
        a = row[i]
        b = counts[:, i]
        if a > 0:
            fwd_inf |= b == 0
            fwd += a * (tab[a] - tab[b])
        pos = b > 0
        if a == 0:
            rev_inf |= pos
        else:
            rev += np.where(pos, b * (tab[b] - tab[a]), 0.0)
    fwd[fwd_inf] = np.inf
    rev[rev_inf] = np.inf
    if variant == FORWARD:
        return fwd
    if variant == REVERSE:
        return rev
    return np.minimum(fwd, rev)


def _lse_vec(x):
    x = x[x != NEG_INF]
    if x.size == 0:
        return (NEG_INF, 0.0)
    m = float(x.max())
    return (m, float(np.exp(x - m).sum()))


def np_pair_scan(counts, tab, n, lp_x0, lp_y0, lp_x1, lp_y1, c, variant,
                 excl_x, excl_y, r0, r1):
    acc0 = (NEG_INF, 0.0)
    acc1 = (NEG_INF, 0.0)
    with np.errstate(invalid="ignore"):
        for a in range(r0, r1):
            if lp_x0[a] == NEG_INF and lp_x1[a] == NEG_INF:
                continue
            stat = _pair_stats_matrix(counts[a], counts, tab, variant) / n
            accept = stat <= c
            if excl_x[a]:
                accept &= ~excl_y
            acc1 = lse_merge(acc1, _lse_vec(lp_x1[a] + lp_y1[accept]))
            acc0 = lse_merge(acc0, _lse_vec(lp_x0[a] + lp_y0[~accept]))
    return acc0[0], acc0[1], acc1[0], acc1[1]


def np_pair_stats(cx, cy, tab, n, variant):
    R, d = cx.shape
    fwd = np.zeros(R)
    rev = np.zeros(R)
    fwd_inf = np.zeros(R, dtype=bool)
    rev_inf = np.zeros(R, dtype=bool)
    for i in range(d):
        a = cx[:, i]
        b = cy[:, i]
        both = (a > 0) & (b > 0)
        fwd_inf |= (a > 0) & (b == 0)
        rev_inf |= (b > 0) & (a == 0)
        fwd += np.where(both, a * (tab[a] - tab[b]), 0.0)
        rev += np.where(both, b * (tab[b] - tab[a]), 0.0)
    fwd[fwd_inf] = np.inf
    rev[rev_inf] = np.inf
    if variant == FORWARD:
        out = fwd
    elif variant == REVERSE:
        out = rev
    else:
        out = np.minimum(fwd, rev)
    return out / n


def np_law_stats(counts, tab, n, log2q):
    R, d = counts.shape
    acc = np.zeros(R)
    bad = np.zeros(R, dtype=bool)
    log2n = math.log2(n)
    for i in range(d):
        k = counts[:, i]
        pos = k > 0
        if log2q[i] == NEG_INF:
            bad |= pos
            continue
        acc += np.where(pos, k * (tab[k] - log2n - log2q[i]), 0.0)
    acc[bad] = np.inf
    return acc / n


def np_grid_sum_kl(F, log2p, log2q, chunk=1 << 18):
    best_i, best_v = -1, np.inf
    for start in range(0, F.shape[0], chunk):
        block = F[start:start + chunk]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(block > 0.0, block * (2.0 * np.log2(block) - log2p - log2q), 0.0)
        v = terms.sum(axis=1)
        j = int(np.argmin(v))
        if v[j] < best_v:
            best_v, best_i = float(v[j]), start + j
    return best_i, best_v


if USE_NUMBA:
    pair_scan, pair_stats, law_stats, grid_sum_kl = nb_pair_scan, nb_pair_stats, nb_law_stats, nb_grid_sum_kl
else:
    pair_scan, pair_stats, law_stats, grid_sum_kl = np_pair_scan, np_pair_stats, np_law_stats, np_grid_sum_kl
