"""Limit formulas: G_j, its inverse branch T_j, the c parameter, thresholds.

The limiting probability of full occupation is exp(-c) with

    c = (N/S) G_{R-1}(SK/N) / (R-1)!      (subset model)
    c = n G_{R-1}(m/n) / (R-1)!           (bins model)

where G_j(t) = t^j e^{-t}.  Everything here evaluates these expressions at
finite parameters; convergence is observed by the caller over a sequence
of parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .exact import BinsModelParams, Model, ProbEstimate, SubsetModelParams


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------- G and T


def log_G(j: float, t: float) -> float:
    if t < 0:
        raise DomainError(f"G_j needs t >= 0, got {t}")
    if t == 0:
        return 0.0 if j == 0 else -math.inf
    return j * math.log(t) - t


def G(j: float, t: float) -> float:
    """t^j e^{-t}, formed in log space so large t does not overflow t^j."""
    lg = log_G(j, t)
    return 0.0 if lg == -math.inf else math.exp(lg)


def T_inverse_log(j: int, log_s: float) -> float:
    """Inverse of G_j on t > j, taking log(s) so that tiny s are representable."""
    if j < 0:
        raise DomainError("j must be nonnegative")
    if j == 0:
        if not log_s < 0:
            raise DomainError(f"T_0 is defined on (0, 1), got s = exp({log_s})")
        return -log_s
    log_top = j * (math.log(j) - 1.0)
    if not log_s < log_top:
        raise DomainError(f"T_{j} is defined on (0, (j/e)^j); got log s = {log_s} >= {log_top}")

    # solve for u = t - j; log1p keeps the flat region near the mode accurate
    gap = log_s - log_top

    def f(u: float) -> float:
        return j * math.log1p(u / j) - u - gap

    guess = -log_s + j * math.log(abs(log_s)) if log_s < -1 else j + 1.0
    hi = max(max(50.0, 4 * abs(log_s)), guess)
    while f(hi) > 0:
        hi *= 2
    if f(0.0) <= 0:  # log_s within roundoff of the top of the range
        return float(j)
    return j + brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def T_inverse(j: int, s: float) -> float:
    """The unique t > j with t^j e^{-t} = s; T_0(s) = -ln s."""
    if not s > 0:
        raise DomainError(f"T_{j} needs s > 0, got {s}")
    return T_inverse_log(j, math.log(s))


def T_inverse_asymptotic(j: int, s: float) -> float:
    """Leading terms only: -ln s + j ln|ln s|.  Meant for s near zero."""
    if not 0 < s < 1:
        raise DomainError(f"expansion needs 0 < s < 1, got {s}")
    ls = math.log(s)
    return -ls + (j * math.log(abs(ls)) if j else 0.0)


# ---------------------------------------------------------------- c parameter


@dataclass(frozen=True)
class CParameter:
    c: float  # math.inf when the finite evaluation overflows
    log_c: float | None  # None when c == 0
    prob: float
    warnings: tuple[str, ...] = ()

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.c)


def _c_from_log(log_c: float, warnings=()) -> CParameter:
    if log_c == -math.inf:
        return CParameter(0.0, None, 1.0, tuple(warnings))
    c = math.exp(log_c) if log_c < 709.7 else math.inf
    return CParameter(c, log_c, math.exp(-c), tuple(warnings))


def _log_c(scale: float, x: float, r: int) -> float:
    lg = log_G(r, x)
    if lg == -math.inf:
        return -math.inf
    return math.log(scale) + lg - math.lgamma(r + 1)


def _branch_warning(x: float, r: int) -> list[str]:
    if r > x:
        return [f"mean load {x:.6g} is below R-1 = {r}: G_{r} evaluated left of its mode"]
    return []


def c_subset(p: SubsetModelParams) -> CParameter:
    """(N/S) G_{R-1}(SK/N) / (R-1)!, evaluated at the given finite N."""
    blocks = p.N / p.S
    x = p.K / blocks
    r = p.R - 1
    return _c_from_log(_log_c(blocks, x, r), _branch_warning(x, r))


def c_bins(p: BinsModelParams) -> CParameter:
    """n G_{R-1}(m/n) / (R-1)!, evaluated at the given finite (m, n)."""
    x = p.m / p.n
    r = p.R - 1
    return _c_from_log(_log_c(p.n, x, r), _branch_warning(x, r))


def asymptotic_estimate(model: Model) -> ProbEstimate:
    cp = c_subset(model) if isinstance(model, SubsetModelParams) else c_bins(model)
    rep = validity(model)
    meta = {"c": cp.c, "log_c": cp.log_c, "warnings": list(cp.warnings), "trusted": rep.trusted}
    return ProbEstimate(cp.prob, None, None, "asymptotic", meta)


# ---------------------------------------------------------------- validity


OK_BELOW = 0.1
VIOLATED_FROM = 0.5


def classify_ratio(x: float | None) -> str | None:
    if x is None:
        return None
    if x < OK_BELOW:
        return "ok"
    if x < VIOLATED_FROM:
        return "marginal"
    return "violated"


def _div(a: float, b: float) -> float:
    return a / b if b else math.inf


@dataclass(frozen=True)
class ValidityReport:
    """Finite-size ratios whose vanishing the limit theorems require.

    Labels are heuristic: ok below 0.1, marginal below 0.5, violated from 0.5.
    Ratios that do not apply to the model are None.
    """

    ratio_a: float | None
    ratio_b: float
    ratio_c1: float | None
    ratio_c2: float | None
    alpha: float
    classifications: dict = field(default_factory=dict)
    bins_ratios: dict = field(default_factory=dict)

    @property
    def trusted(self) -> bool:
        labels = list(self.classifications.values()) + [
            classify_ratio(v) for v in self.bins_ratios.values()
        ]
        return "violated" not in labels


def _bins_ratios(m: float, n: float, R: int) -> dict:
    return {
        "r_over_sqrt_max_nm": (R - 1) / math.sqrt(max(n, m)),
        "m_over_n2": m / n**2,
        "nR_over_m": _div(n * R, m),
    }


def validity(p: Model) -> ValidityReport:
    if isinstance(p, SubsetModelParams):
        N, S, K, R = p.N, p.S, p.K, p.R
        ratios = {
            "ratio_a": R * R / S,
            "ratio_b": _div(N * R, S * K),
            "ratio_c1": R * S / N,
            "ratio_c2": R * K / N,
        }
        alpha = S * K / (R * N)
        bins_r = _bins_ratios(K, N / S, R)
    else:
        ratios = {"ratio_a": None, "ratio_b": _div(p.n * p.R, p.m), "ratio_c1": None, "ratio_c2": None}
        alpha = p.m / (p.n * p.R)
        bins_r = _bins_ratios(p.m, p.n, p.R)
    labels = {k: classify_ratio(v) for k, v in ratios.items() if v is not None}
    return ValidityReport(alpha=alpha, classifications=labels, bins_ratios=bins_r, **ratios)


# ---------------------------------------------------------------- thresholds


def _log_c_of_K(N: int, S: int, R: int, K: float) -> float:
    blocks = N / S
    return _log_c(blocks, K / blocks, R - 1)


def threshold_K(N: int, S: int, R: int, target_c: float) -> int:
    """Smallest integer K on the decreasing branch (SK/N >= R-1) with c(K) <= target_c.

    The search starts from the closed-form seed (N/S) T_{R-1}(target_c (R-1)! S/N)
    and then settles the integer exactly by bisection on the finite-N c.
    """
    if not target_c > 0:
        raise DomainError(f"target_c must be positive, got {target_c}")
    if not 1 <= S <= N or R < 1:
        raise DomainError(f"invalid N={N}, S={S}, R={R}")
    r = R - 1
    blocks = N / S
    log_arg = math.log(target_c) + math.lgamma(r + 1) - math.log(blocks)
    seed = blocks * T_inverse_log(r, log_arg)
    log_target = math.log(target_c)

    def ok(K: int) -> bool:
        return _log_c_of_K(N, S, R, K) <= log_target

    lo = math.ceil(r * blocks)  # first K on the decreasing branch
    if ok(lo):
        K = lo
    else:
        hi = max(math.ceil(seed), lo + 1)
        step = max(1, hi - lo)
        while not ok(hi):
            hi += step
            step *= 2
        while hi - lo > 1:  # invariant: not ok(lo), ok(hi)
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        K = hi
    if K > N:
        raise DomainError(f"threshold K={K} exceeds N={N}")
    return K


def solve_K0(N: int, S: int, R: int) -> float:
    """Real K with c(K) = 1 on the decreasing branch."""
    blocks = N / S
    r = R - 1
    return blocks * T_inverse_log(r, math.lgamma(r + 1) - math.log(blocks))


def perturbation_c(N: int, S: int, R: int, a: float) -> float:
    """c after shifting the c = 1 solution K0 by a N/S; tends to e^{-a} as N grows."""
    blocks = N / S
    r = R - 1
    x = solve_K0(N, S, R) / blocks + a
    if r and x <= 0:
        raise DomainError(f"shift a={a} moves SK/N to {x} <= 0")
    lg = -x if r == 0 else r * math.log(x) - x
    return math.exp(math.log(blocks) + lg - math.lgamma(r + 1))


# ---------------------------------------------------------------- sqrt(N) regime


@dataclass(frozen=True)
class RegimeResult:
    classification: str  # prob_zero | prob_positive | indeterminate
    log_f: float
    rg: float
    half_log_N: float


def sqrtN_regime(r: float, g: float, N: float, eta: float = 0.1) -> RegimeResult:
    """Classify the S = sqrt(N), K = g r sqrt(N) regime by r*g against (1/2) ln N.

    rg < (1/2) ln N drives c to infinity (probability 0); rg >= (1/2 + eta) ln N
    drives log f to -infinity.  The exact boundary and the gap between the
    two thresholds are indeterminate.  ``log_f`` is the Stirling form
    (1/2) ln N + r(ln g - g) + r - (1/2) ln(2 pi r).
    """
    half = 0.5 * math.log(N)
    rg = r * g
    log_f = half + r * (math.log(g) - g) + r - 0.5 * math.log(2 * math.pi * r)
    if rg < half and not math.isclose(rg, half, rel_tol=1e-12):
        label = "prob_zero"
    elif rg >= (0.5 + eta) * math.log(N):
        label = "prob_positive"
    else:
        label = "indeterminate"
    return RegimeResult(label, log_f, rg, half)
