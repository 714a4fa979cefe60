"""Dependency measures on 2x2 and stratified 2x2x2 count tables.

All mutual-information values are count-scaled natural-log MI, ``n * I``,
so that differences line up with log-likelihood ratio statistics.
Leverages are returned as plain probabilities.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

__all__ = [
    "PairCounts",
    "ConditionalStats",
    "MeasureKind",
    "MI_MEASURE",
    "leverage",
    "conditional_leverages",
    "conditional_signs",
    "rule_mi",
    "mi_cells",
    "conditional_mi",
    "signed_conditional_mi",
    "conditional_stats",
    "birch_p",
    "birch_p_nested_super",
    "birch_p_nested_sub",
    "log_hypergeom_point",
    "log_hypergeom_pmf",
    "log_birch_point",
    "log_factorials",
    "mi_upper_bound",
    "composed_null_triplet",
]


@dataclass(frozen=True)
class PairCounts:
    """Aligned joint frequencies of a mediator set X, a judged set Q and C=c.

    Every count involving C is taken at C = ``polarity_q`` (the judged rule's
    consequent value).  ``polarity_x`` is the mediator's consequent value and
    only matters for orientation decisions.
    """

    n: int
    n_x: int
    n_q: int
    n_c: int
    n_xq: int
    n_xc: int
    n_qc: int
    n_xqc: int
    polarity_q: int = 1
    polarity_x: int = 1

    def __post_init__(self):
        cells = self.cells()
        if min(cells) < 0 or sum(cells) != self.n:
            raise ValueError(f"inconsistent pair counts: {self}")

    def cells(self) -> tuple[int, ...]:
        """The eight (X, Q, C) cells ordered xqc, xq~c, x~qc, x~q~c, ~xqc, ..."""
        n_xqnc = self.n_xq - self.n_xqc
        n_xnqc = self.n_xc - self.n_xqc
        n_xnqnc = self.n_x - self.n_xq - n_xnqc
        n_nxqc = self.n_qc - self.n_xqc
        n_nxqnc = self.n_q - self.n_xq - n_nxqc
        n_nxnqc = self.n_c - self.n_xc - n_nxqc
        n_nxnqnc = (self.n - self.n_x) - (self.n_q - self.n_xq) - n_nxnqc
        return (self.n_xqc, n_xqnc, n_xnqc, n_xnqnc,
                n_nxqc, n_nxqnc, n_nxnqc, n_nxnqnc)

    @property
    def n_nx(self) -> int:
        return self.n - self.n_x

    @property
    def n_nxq(self) -> int:
        return self.n_q - self.n_xq

    @property
    def n_nxc(self) -> int:
        return self.n_c - self.n_xc

    @property
    def n_nxqc(self) -> int:
        return self.n_qc - self.n_xqc

    def p(self, name: str) -> float:
        """Relative frequency of a named count, e.g. ``pc.p("xqc")``."""
        return getattr(self, "n_" + name) / self.n

    def swapped(self) -> "PairCounts":
        """Same table with the roles of X and Q exchanged."""
        return PairCounts(self.n, self.n_q, self.n_x, self.n_c, self.n_xq,
                          self.n_qc, self.n_xc, self.n_xqc,
                          polarity_q=self.polarity_x, polarity_x=self.polarity_q)


@dataclass(frozen=True)
class ConditionalStats:
    delta1: float
    delta2: float
    mi_s: float
    p_b: Optional[float] = None


# -- leverage ---------------------------------------------------------------

def _check_2x2(n, n_q, n_c, n_qc):
    if n <= 0:
        raise ValueError("n must be positive")
    if not (0 <= n_qc <= min(n_q, n_c) and n_q <= n and n_c <= n
            and n_q + n_c - n_qc <= n):
        raise ValueError(f"inconsistent counts n={n} n_q={n_q} n_c={n_c} n_qc={n_qc}")


def leverage(n: int, n_q: int, n_c: int, n_qc: int) -> float:
    _check_2x2(n, n_q, n_c, n_qc)
    return (n * n_qc - n_q * n_c) / (n * n)


def conditional_signs(pc: PairCounts) -> tuple[int, int]:
    """Exact signs (-1, 0, 1) of the two conditional leverages."""
    s1 = 0
    if pc.n_x > 0:
        s1 = _sign(pc.n_xqc * pc.n_x - pc.n_xq * pc.n_xc)
    s2 = 0
    if pc.n_nx > 0:
        s2 = _sign(pc.n_nxqc * pc.n_nx - pc.n_nxq * pc.n_nxc)
    return s1, s2


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def conditional_leverages(pc: PairCounts) -> tuple[float, float]:
    """Conditional leverage of Q -> C given X and given not-X.

    A stratum with no rows gets leverage 0.
    """
    d1 = 0.0
    if pc.n_x > 0:
        d1 = (pc.n_xqc * pc.n_x - pc.n_xq * pc.n_xc) / (pc.n * pc.n_x)
    d2 = 0.0
    if pc.n_nx > 0:
        d2 = (pc.n_nxqc * pc.n_nx - pc.n_nxq * pc.n_nxc) / (pc.n * pc.n_nx)
    return d1, d2


# -- mutual information -----------------------------------------------------

def mi_cells(n, n_q, n_c, n_qc):
    """Vectorised count-scaled MI of 2x2 tables.

    The four cell terms are combined as ``(qc + ~q~c) + (q~c + ~qc)`` so the
    result is bit-identical under swapping Q and C or flipping either
    polarity.
    """
    n, n_q, n_c, n_qc = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (n, n_q, n_c, n_qc)))
    n_nq = n - n_q
    n_nc = n - n_c
    c = n_c - n_qc
    cells = np.stack([n_qc, n_nq - c, n_q - n_qc, c])
    margins = np.stack([n_q * n_c, n_nq * n_nc, n_q * n_nc, n_nq * n_c])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cells * np.log(n * cells / margins)
    t[cells <= 0] = 0.0  # 0 * log 0 := 0
    out = (t[0] + t[1]) + (t[2] + t[3])
    return np.maximum(out, 0.0)


def rule_mi(n: int, n_q: int, n_c: int, n_qc: int) -> float:
    """Count-scaled MI of the rule Q -> C; 0 iff Q and C are independent."""
    _check_2x2(n, n_q, n_c, n_qc)
    if n_q in (0, n) or n_c in (0, n):
        raise ValueError("degenerate marginal: dependency undefined")
    return float(mi_cells([n], [n_q], [n_c], [n_qc])[0])


def _stratum_mi(n_s, n_sq, n_sc, n_sqc):
    if n_s == 0:
        return 0.0
    return float(mi_cells([n_s], [n_sq], [n_sc], [n_sqc])[0])


def conditional_mi(pc: PairCounts) -> tuple[float, float]:
    """The two stratum terms MI(Q->C|X) and MI(Q->C|~X), count-scaled."""
    return (_stratum_mi(pc.n_x, pc.n_xq, pc.n_xc, pc.n_xqc),
            _stratum_mi(pc.n_nx, pc.n_nxq, pc.n_nxc, pc.n_nxqc))


def signed_conditional_mi(pc: PairCounts) -> float:
    """Conditional MI with each stratum term negated when its leverage is < 0."""
    m1, m2 = conditional_mi(pc)
    s1, s2 = conditional_signs(pc)
    if s1 < 0:
        m1 = -m1
    if s2 < 0:
        m2 = -m2
    return m1 + m2


def conditional_stats(pc: PairCounts, with_birch: bool = False) -> ConditionalStats:
    d1, d2 = conditional_leverages(pc)
    p_b = birch_p(pc) if with_birch else None
    return ConditionalStats(d1, d2, signed_conditional_mi(pc), p_b)


def mi_upper_bound(n_q: int, n_c: int, n: int) -> float:
    """Largest MI reachable by an antecedent of support at most ``n_q``.

    MI of a rule whose antecedent lies entirely inside C grows with the
    antecedent's support, so the maximum sits at s = min(n_q, n_c).
    """
    s = min(n_q, n_c)
    if s <= 0 or n_c >= n:
        return 0.0
    return float(mi_cells([n], [s], [n_c], [s])[0])


@dataclass(frozen=True)
class MeasureKind:
    """A marginal/conditional goodness pair, increasing by goodness."""

    tag: str
    marginal: Callable[[int, int, int, int], float]
    conditional: Callable[[PairCounts], float]
    direction: str = "increasing"


MI_MEASURE = MeasureKind("signed_mutual_information", rule_mi, signed_conditional_mi)


# -- exact hypergeometric tests --------------------------------------------

_LF_LOCK = threading.Lock()
_LF = gammaln(np.arange(1025, dtype=np.float64) + 1.0)


def log_factorials(n: int) -> np.ndarray:
    """Read-only table of ln(k!) for k = 0..n (at least)."""
    global _LF
    table = _LF
    if table.shape[0] <= n:
        with _LF_LOCK:
            if _LF.shape[0] <= n:
                size = max(n + 1, 2 * _LF.shape[0])
                new = gammaln(np.arange(size, dtype=np.float64) + 1.0)
                new.setflags(write=False)
                _LF = new
            table = _LF
    return table


_LF.setflags(write=False)


def _lcomb(lf, a, b):
    return lf[a] - lf[b] - lf[a - b]


def _stratum_logpmf(pop, succ, draws):
    """Support and log-pmf of successes among ``draws`` from a stratum."""
    lo = max(0, draws - (pop - succ))
    hi = min(succ, draws)
    if lo > hi:
        raise ValueError("infeasible margins")
    lf = log_factorials(pop)
    k = np.arange(lo, hi + 1)
    logp = (_lcomb(lf, succ, k) + _lcomb(lf, pop - succ, draws - k)
            - _lcomb(lf, pop, draws))
    return lo, logp


def log_hypergeom_pmf(k: int, pop: int, succ: int, draws: int) -> float:
    """ln P(K = k) for K ~ Hypergeometric(pop, succ, draws); -inf off support."""
    lo = max(0, draws - (pop - succ))
    hi = min(succ, draws)
    if not (0 <= succ <= pop and 0 <= draws <= pop):
        raise ValueError("infeasible margins")
    if k < lo or k > hi:
        return -math.inf
    lf = log_factorials(pop)
    return float(_lcomb(lf, succ, k) + _lcomb(lf, pop - succ, draws - k)
                 - _lcomb(lf, pop, draws))


def _log_survival(logp):
    # logsf[t] = ln sum_{s >= t} p[s]
    return np.logaddexp.accumulate(logp[::-1])[::-1]


def _logsumexp(v):
    if v.size == 0:
        return -math.inf
    m = np.max(v)
    if not np.isfinite(m):
        return -math.inf
    return float(m + np.log(np.sum(np.exp(v - m))))


def log_hypergeom_point(pc: PairCounts, i: int, j: int) -> float:
    """ln of one summand of Birch's test divided by its denominator.

    ``i`` counts X,Q,C rows and ``j`` counts ~X,Q,C rows.
    """
    return (log_hypergeom_pmf(i, pc.n_x, pc.n_xq, pc.n_xc)
            + log_hypergeom_pmf(j, pc.n_nx, pc.n_nxq, pc.n_nxc))


def log_birch_point(pc: PairCounts, t: Optional[int] = None) -> float:
    """ln P(N_qc = t | margins) under conditional independence given X."""
    if t is None:
        t = pc.n_qc
    lo1, lp1 = _stratum_logpmf(pc.n_x, pc.n_xq, pc.n_xc)
    lo2, lp2 = _stratum_logpmf(pc.n_nx, pc.n_nxq, pc.n_nxc)
    i = np.arange(lo1, lo1 + lp1.size)
    j = t - i
    ok = (j >= lo2) & (j < lo2 + lp2.size)
    if not ok.any():
        return -math.inf
    return _logsumexp(lp1[ok] + lp2[j[ok] - lo2])


def birch_p(pc: PairCounts) -> float:
    """Birch's exact p-value P(N_qc >= n_qc) given X-stratified margins."""
    lo1, lp1 = _stratum_logpmf(pc.n_x, pc.n_xq, pc.n_xc)
    lo2, lp2 = _stratum_logpmf(pc.n_nx, pc.n_nxq, pc.n_nxc)
    if pc.n_qc <= lo1 + lo2:
        return 1.0
    if pc.n_qc > lo1 + lp1.size - 1 + lo2 + lp2.size - 1:
        return 0.0
    lsf2 = _log_survival(lp2)
    i = np.arange(lo1, lo1 + lp1.size)
    t = pc.n_qc - i - lo2
    # t < 0: the whole stratum-2 support qualifies; t beyond support: none
    tail = np.where(t <= 0, 0.0,
                    np.where(t < lp2.size, lsf2[np.clip(t, 0, lp2.size - 1)], -np.inf))
    return min(1.0, math.exp(_logsumexp(lp1 + tail)))


def _hypergeom_sf(k, pop, succ, draws):
    lo, lp = _stratum_logpmf(pop, succ, draws)
    if k <= lo:
        return 1.0
    if k > lo + lp.size - 1:
        return 0.0
    return min(1.0, math.exp(_logsumexp(lp[k - lo:])))


def birch_p_nested_super(n_x: int, n_xc: int, n_xz: int, n_xzc: int) -> float:
    """Birch's test of XZ -> C given its generalisation X -> C.

    Only the X stratum varies; this is a one-sided Fisher-type test inside X.
    """
    if not (0 <= n_xzc <= min(n_xz, n_xc) and n_xz <= n_x and n_xc <= n_x):
        raise ValueError("infeasible margins")
    return _hypergeom_sf(n_xzc, n_x, n_xz, n_xc)


def birch_p_nested_sub(n: int, n_c: int, n_qz: int, n_qzc: int,
                       n_q_notz: int, n_q_notzc: int) -> float:
    """Birch's test of Q -> C given its specialisation QZ -> C.

    Only the ~QZ stratum varies; it holds Q~Z rows and all ~Q rows.
    """
    n_rest = n - n_qz
    c_rest = n_c - n_qzc
    if not (0 <= n_q_notz <= n_rest and 0 <= c_rest <= n_rest
            and 0 <= n_q_notzc <= min(n_q_notz, c_rest)):
        raise ValueError("infeasible margins")
    return _hypergeom_sf(n_q_notzc, n_rest, n_q_notz, c_rest)


def composed_null_triplet(n: int, n_x: int, n_q: int, n_c: int, n_xq: int,
                          given: str = "x") -> tuple[float, float, float]:
    """Expected (p_xc, p_qc, p_xqc) under one of the two composed nulls.

    ``given="x"``: X indep. of C, and Q indep. of C within both X strata.
    ``given="q"``: Q indep. of C, and X indep. of C within both Q strata.
    """
    p_x, p_q, p_c, p_xq = n_x / n, n_q / n, n_c / n, n_xq / n
    if given == "x":
        p_xc = p_x * p_c
        p_xqc = p_xq * p_xc / p_x
        p_nxqc = (p_q - p_xq) * (p_c - p_xc) / (1.0 - p_x)
        return p_xc, p_xqc + p_nxqc, p_xqc
    if given == "q":
        p_qc = p_q * p_c
        p_xqc = p_xq * p_qc / p_q
        p_xnqc = (p_x - p_xq) * (p_c - p_qc) / (1.0 - p_q)
        return p_xqc + p_xnqc, p_qc, p_xqc
    raise ValueError("given must be 'x' or 'q'")
