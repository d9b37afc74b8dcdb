"""Exact occupancy probabilities and the inclusion/exclusion terms.

Two models share this module:

* subset model: a uniform K-subset of {1..N}; the first floor(N/S) blocks of
  S consecutive integers must each receive at least R points, the leftover
  elements (if S does not divide N) may be chosen but carry no requirement;
* bins model: m balls thrown independently and uniformly into n bins; every
  bin must receive at least R balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .combinatorics import (
    LogReal,
    conv_exact,
    log_binomial,
    log_factorial,
    poly_pow_exact,
    poly_pow_log,
    power_by_squaring,
    restricted_composition_counts,
)

DEFAULT_BUDGET = 1e9
# above this cost the exact solvers switch from rationals to log space
EXACT_RATIONAL_LIMIT = 5e7
_EPS = np.finfo(float).eps


class InvalidParams(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SubsetModelParams:
    N: int
    S: int
    K: int
    R: int

    def __post_init__(self):
        for name in ("N", "S", "K", "R"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(getattr(self, name), bool):
                raise InvalidParams(f"{name} must be an integer")
        if self.N < 1 or not 1 <= self.S <= self.N:
            raise InvalidParams(f"need 1 <= S <= N, got N={self.N}, S={self.S}")
        if not 0 <= self.K <= self.N:
            raise InvalidParams(f"need 0 <= K <= N, got K={self.K}")
        if self.R < 1:
            raise InvalidParams(f"need R >= 1, got R={self.R}")

    @property
    def n_blocks(self) -> int:
        return self.N // self.S

    @property
    def remainder(self) -> int:
        return self.N - self.n_blocks * self.S


@dataclass(frozen=True)
class BinsModelParams:
    m: int
    n: int
    R: int

    def __post_init__(self):
        for name in ("m", "n", "R"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(getattr(self, name), bool):
                raise InvalidParams(f"{name} must be an integer")
        if self.m < 0:
            raise InvalidParams(f"need m >= 0, got m={self.m}")
        if self.n < 1:
            raise InvalidParams(f"need n >= 1, got n={self.n}")
        if self.R < 1:
            raise InvalidParams(f"need R >= 1, got R={self.R}")

    @property
    def r(self) -> int:
        return self.R - 1


Model = Union[SubsetModelParams, BinsModelParams]


@dataclass
class ProbEstimate:
    value: float
    lower: float | None = None
    upper: float | None = None
    method: str = "exact"
    meta: dict = field(default_factory=dict)
    exact: Fraction | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"probability out of range: {self.value}")
        if self.lower is not None and self.upper is not None and not self.lower <= self.value <= self.upper:
            raise ValueError(f"value {self.value} outside [{self.lower}, {self.upper}]")


@dataclass
class BonferroniBounds:
    """Truncations of the inclusion/exclusion series.

    ``partial_sums[T-1]`` is sum_{i<=T} (-1)^(i+1) beta_i; the probability of
    full occupation is one minus the complete series.  Odd truncations give
    lower bounds on the probability, even ones upper bounds.
    """

    partial_sums: list
    lower: float  # Fraction in exact mode
    upper: float
    terms_used: int
    betas: list
    complete: bool
    exact_value: Fraction | None = None

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


# ---------------------------------------------------------------- full solvers


def subset_cost(p: SubsetModelParams) -> float:
    return float(p.n_blocks) * p.K * min(p.S, p.K)


def bins_cost(p: BinsModelParams) -> float:
    return float(p.n) * p.m * min(p.m, p.n * p.R)


def subset_prob_exact(
    p: SubsetModelParams, budget: float = DEFAULT_BUDGET, rational_limit: float = EXACT_RATIONAL_LIMIT
) -> ProbEstimate:
    """P(every block gets >= R points) by generating-function coefficient extraction.

    The count of good K-subsets is [x^K] (sum_{j>=R} C(S,j) x^j)^nb (1+x)^rem.
    """
    cost = subset_cost(p)
    if cost > budget:
        raise BudgetExceeded(f"subset exact cost {cost:.3g} exceeds budget {budget:.3g}")
    nb, rem = p.n_blocks, p.remainder
    slack = p.K - p.R * nb  # points left after the mandatory R per block
    if slack < 0 or p.R > p.S:
        return ProbEstimate(0.0, 0.0, 0.0, "exact", {"mode": "rational", "reason": "pigeonhole"}, Fraction(0))
    # factor x^R out of every block polynomial; cap at the slack
    cap = min(slack, nb * (p.S - p.R))
    if cost <= rational_limit:
        block = [math.comb(p.S, p.R + i) for i in range(cap + 1) if p.R + i <= p.S]
        P = poly_pow_exact(block, nb, cap)
        count = sum(P[t] * math.comb(rem, slack - t) for t in range(len(P)) if 0 <= slack - t <= rem)
        prob = Fraction(count, math.comb(p.N, p.K))
        return ProbEstimate(float(prob), float(prob), float(prob), "exact", {"mode": "rational"}, prob)
    block = np.array([log_binomial(p.S, p.R + i).log for i in range(cap + 1) if p.R + i <= p.S])
    P = poly_pow_log(block, nb, cap)
    terms = [P[t] + log_binomial(rem, slack - t).log for t in range(len(P)) if 0 <= slack - t <= rem]
    log_count = float(np.logaddexp.reduce(terms)) if terms else -math.inf
    log_prob = float(log_count - log_binomial(p.N, p.K).log)
    err = _log_error(log_count, nb)
    value = _clip01(math.exp(log_prob)) if log_prob > -math.inf else 0.0
    meta = {"mode": "log", "log_prob": log_prob, "log_abs_error_bound": err}
    return ProbEstimate(value, _clip01(value * math.exp(-err)), _clip01(value * math.exp(err)), "exact", meta)


def _log_error(log_mag: float, power: int) -> float:
    # roundoff model: a few ulps of each log per squaring level
    levels = max(1, int(power).bit_length()) * 2 + 2
    return float(8 * _EPS * levels * max(1.0, abs(log_mag)))


def bins_prob_exact(
    p: BinsModelParams, budget: float = DEFAULT_BUDGET, rational_limit: float = EXACT_RATIONAL_LIMIT
) -> ProbEstimate:
    """P(min load >= R) = m! [x^m] (e^x minus its terms below degree R)^n / n^m."""
    cost = bins_cost(p)
    if cost > budget:
        raise BudgetExceeded(f"bins exact cost {cost:.3g} exceeds budget {budget:.3g}")
    m, n, R = p.m, p.n, p.R
    slack = m - n * R
    if slack < 0:
        return ProbEstimate(0.0, 0.0, 0.0, "exact", {"mode": "rational", "reason": "pigeonhole"}, Fraction(0))
    if cost <= rational_limit:
        # EGF coefficients scaled by m!: X_j = m!/j!; products stay integral after dividing by m!
        fm = math.factorial(m)
        base = (R, [fm // math.factorial(R + i) for i in range(slack + 1)])

        def mul(a, b):
            off = a[0] + b[0]
            prod = conv_exact(a[1], b[1], m - off)
            return off, [c // fm for c in prod]

        off, coeffs = power_by_squaring(base, n, mul, (0, [fm]))
        count = coeffs[m - off] if 0 <= m - off < len(coeffs) else 0
        prob = Fraction(count, n**m)
        return ProbEstimate(float(prob), float(prob), float(prob), "exact", {"mode": "rational"}, prob)
    base = np.array([-log_factorial(R + i) for i in range(slack + 1)])
    P = poly_pow_log(base, n, slack)
    log_prob = float(log_factorial(m) + P[slack] - m * math.log(n))
    err = _log_error(log_factorial(m), n)
    value = _clip01(math.exp(log_prob)) if log_prob > -math.inf else 0.0
    meta = {"mode": "log", "log_prob": log_prob, "log_abs_error_bound": err}
    return ProbEstimate(value, _clip01(value * math.exp(-err)), _clip01(value * math.exp(err)), "exact", meta)


# ---------------------------------------------------------------- inclusion/exclusion terms


def _check_subset_index(p: SubsetModelParams, m: int):
    if not 1 <= m <= p.n_blocks:
        raise InvalidParams(f"block-set size m={m} must lie in [1, {p.n_blocks}]")


def g_sequence_exact(p: SubsetModelParams, m: int) -> list[int]:
    """g(s) = C(N - mS, K - s) * W(s) for s = 0..m(R-1), as exact integers."""
    _check_subset_index(p, m)
    top = m * (p.R - 1)
    W = restricted_composition_counts(p.S, p.R, m, top)
    rest = p.N - m * p.S
    return [math.comb(rest, p.K - s) * W[s] if 0 <= p.K - s <= rest else 0 for s in range(top + 1)]


def g_sequence(p: SubsetModelParams, m: int, exact: bool | None = None) -> list[LogReal]:
    """g(0..m(R-1)) as LogReals; exact integers are used when they are cheap."""
    _check_subset_index(p, m)
    top = m * (p.R - 1)
    if exact is None:
        exact = p.N <= 200_000 and top <= 2_000
    if exact:
        return [LogReal.from_value(v) for v in g_sequence_exact(p, m)]
    row = np.array([log_binomial(p.S, i).log for i in range(p.R)])
    W = poly_pow_log(row, m, top)
    rest = p.N - m * p.S
    return [LogReal.from_log(W[s] + log_binomial(rest, p.K - s).log) if 0 <= p.K - s <= rest else LogReal(True)
            for s in range(top + 1)]


def beta_m_subset(p: SubsetModelParams, m: int, exact: bool = True) -> Fraction | float:
    """m-th inclusion/exclusion term: weighted count of m-sets of blocks each hit < R times.

    Returns a Fraction when ``exact`` and a float otherwise.  Values above 1
    are legitimate.
    """
    _check_subset_index(p, m)
    if exact:
        total = sum(g_sequence_exact(p, m))
        return Fraction(math.comb(p.n_blocks, m) * total, math.comb(p.N, p.K))
    g = g_sequence(p, m, exact=False)
    logs = [x.log for x in g]
    log_total = float(np.logaddexp.reduce(logs)) if logs else -math.inf
    log_beta = log_binomial(p.n_blocks, m).log + log_total - log_binomial(p.N, p.K).log
    return _safe_exp(log_beta)


def _safe_exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    return math.exp(x) if x < 709 else math.inf


def _check_bins_index(p: BinsModelParams, l: int):
    if not 1 <= l <= p.n:
        raise InvalidParams(f"bin-set size l={l} must lie in [1, {p.n}]")


def q_sequence_exact(p: BinsModelParams, l: int) -> list[Fraction]:
    """q(s): probability that l fixed bins hold s balls in total, each at most R-1."""
    _check_bins_index(p, l)
    m, n = p.m, p.n
    top = min(p.r * l, m)
    E = poly_pow_exact([Fraction(1, math.factorial(t)) for t in range(p.R)], l, top)
    denom = n**m
    out = []
    for s in range(top + 1):
        e = E[s] if s < len(E) else 0
        # 0**0 == 1: with l == n only s == m survives
        out.append(Fraction(math.factorial(m) * (n - l) ** (m - s), math.factorial(m - s) * denom) * e)
    return out


def q_sequence(p: BinsModelParams, l: int, exact: bool | None = None) -> list[LogReal]:
    _check_bins_index(p, l)
    top = min(p.r * l, p.m)
    if exact is None:
        exact = p.m <= 5_000 and top <= 1_000
    if exact:
        return [LogReal.from_value(v) for v in q_sequence_exact(p, l)]
    m, n = p.m, p.n
    E = poly_pow_log(np.array([-log_factorial(t) for t in range(p.R)]), l, top)
    out = []
    for s in range(top + 1):
        if n == l and s != m:
            out.append(LogReal(True))
            continue
        tail = 0.0 if n == l else (m - s) * math.log(n - l)
        out.append(LogReal.from_log(log_factorial(m) - log_factorial(m - s) + tail - m * math.log(n) + E[s]))
    return out


def beta_l_bins(p: BinsModelParams, l: int, exact: bool = True) -> Fraction | float:
    """C(n, l) * sum_s q(s): the l-th inclusion/exclusion term of the bins model."""
    _check_bins_index(p, l)
    if exact:
        return math.comb(p.n, l) * sum(q_sequence_exact(p, l), Fraction(0))
    logs = [x.log for x in q_sequence(p, l, exact=False)]
    log_total = float(np.logaddexp.reduce(logs)) if logs else -math.inf
    return _safe_exp(log_binomial(p.n, l).log + log_total)


# ---------------------------------------------------------------- Bonferroni


def _default_exact(model: Model) -> bool:
    if isinstance(model, SubsetModelParams):
        return model.N <= 20_000
    return model.m <= 5_000 and model.n <= 2_000


def inclusion_exclusion_prob(
    model: Model, max_terms: int | None = None, *, exact: bool | None = None, tol: float = 1e-15
) -> BonferroniBounds:
    """Truncated inclusion/exclusion with a Bonferroni sandwich on the probability.

    Terms are added until ``max_terms``, until the index exceeds the number
    of blocks (bins), or until a term is exactly zero (later terms are then
    zero too).  In floating mode a term below ``tol`` also stops the sum.
    """
    if isinstance(model, SubsetModelParams):
        n_max, beta = model.n_blocks, beta_m_subset
    else:
        n_max, beta = model.n, beta_l_bins
    if exact is None:
        exact = _default_exact(model)
    limit = n_max if max_terms is None else min(max_terms, n_max)

    betas, partial = [], []
    running = Fraction(0) if exact else 0.0
    complete = limit == n_max
    for i in range(1, limit + 1):
        b = beta(model, i, exact=exact)
        betas.append(b)
        running = running + b if i % 2 else running - b
        partial.append(running)
        if b == 0:
            complete = True
            break
        if not exact and max_terms is None and b < tol:
            break

    # P_T = 1 - partial_T; P_0 = 1 is an upper bound
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)

    def clip(x):
        return min(one, max(zero, x))

    lows = [1 - s for T, s in enumerate(partial, 1) if T % 2 == 1]
    highs = [1 - s for T, s in enumerate(partial, 1) if T % 2 == 0] + [one]
    exact_value = None
    if complete:
        final = 1 - partial[-1] if partial else one
        lo = hi = clip(final)
        if exact:
            exact_value = final
    else:
        lo = clip(max(lows)) if lows else zero
        hi = clip(min(highs))
        if lo > hi:  # only reachable through float roundoff
            lo = hi = 0.5 * (lo + hi)
    return BonferroniBounds(partial, lo, hi, len(betas), betas, complete, exact_value)


def bonferroni_estimate(model: Model, max_terms: int | None = None, **kwargs) -> ProbEstimate:
    b = inclusion_exclusion_prob(model, max_terms, **kwargs)
    meta = {"terms_used": b.terms_used, "complete": b.complete}
    return ProbEstimate(float(b.value), float(b.lower), float(b.upper), "bonferroni", meta, b.exact_value)
