"""Exact and log-space combinatorial primitives.

Two arithmetic backends live side by side here.  Python integers (and
``fractions.Fraction``) carry exact counts of any size; :class:`LogReal`
carries nonnegative reals far outside the double range as natural logs.
The exact routines are the oracles for the log-space ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

import numpy as np

Exact = Union[int, Fraction]

# below this many multiply-adds a power is done in exact integers
EXACT_WORK_LIMIT = 4_000_000


@dataclass(frozen=True)
class LogReal:
    """A nonnegative real stored as ``exp(log_value)``, or exactly zero."""

    is_zero: bool = False
    log_value: float = 0.0

    @classmethod
    def from_value(cls, x: float | Exact) -> "LogReal":
        if x < 0:
            raise ValueError(f"LogReal cannot hold a negative value: {x}")
        if x == 0:
            return ZERO
        if isinstance(x, Fraction):
            return cls(False, _log_exact(x.numerator) - _log_exact(x.denominator))
        if isinstance(x, int):
            return cls(False, _log_exact(x))
        return cls(False, math.log(x))

    @classmethod
    def from_log(cls, log_value: float) -> "LogReal":
        if log_value == -math.inf:
            return ZERO
        return cls(False, float(log_value))

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.is_zero or other.is_zero:
            return ZERO
        return LogReal(False, self.log_value + other.log_value)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.is_zero:
            return ZERO
        return LogReal(False, self.log_value - other.log_value)

    def __add__(self, other: "LogReal") -> "LogReal":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = sorted((self.log_value, other.log_value), reverse=True)
        return LogReal(False, hi + math.log1p(math.exp(lo - hi)))

    def __pow__(self, k: int) -> "LogReal":
        if k == 0:
            return ONE
        if self.is_zero:
            return ZERO
        return LogReal(False, self.log_value * k)

    @property
    def log(self) -> float:
        return -math.inf if self.is_zero else self.log_value

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    def __repr__(self) -> str:
        return "LogReal(0)" if self.is_zero else f"LogReal(exp({self.log_value!r}))"


ZERO = LogReal(True, 0.0)
ONE = LogReal(False, 0.0)


def _log_exact(n: int) -> float:
    # math.log accepts arbitrarily large ints
    return math.log(n)


def log_sum(terms: Iterable[LogReal]) -> LogReal:
    """Sum of LogReals, accumulated from the largest addend down."""
    logs = sorted((t.log_value for t in terms if not t.is_zero), reverse=True)
    if not logs:
        return ZERO
    top = logs[0]
    return LogReal(False, top + math.log(math.fsum(math.exp(x - top) for x in logs)))


def binomial_exact(A: int, B: int) -> int:
    """C(A, B) as an exact integer; zero outside 0 <= B <= A."""
    if A < 0:
        raise ValueError(f"binomial_exact needs A >= 0, got {A}")
    if B < 0 or B > A:
        return 0
    return math.comb(A, B)


def _stirlerr(n: int) -> float:
    """log(n!) - [(n + 1/2) log n - n + log(2 pi)/2]."""
    if n <= 30:
        return math.log(math.factorial(n)) - ((n + 0.5) * math.log(n) - n + 0.5 * math.log(2 * math.pi))
    nn = float(n) * n
    return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680) / nn) / nn) / nn) / n


def log_binomial(A: int, B: int) -> LogReal:
    """log C(A, B) without forming the integer.

    Small cases go through the exact integer.  Otherwise the Stirling
    expansion is arranged so that the large terms cancel analytically and
    the remainder is formed with ``log1p``.
    """
    if A < 0:
        raise ValueError(f"log_binomial needs A >= 0, got {A}")
    if B < 0 or B > A:
        return ZERO
    k = min(B, A - B)
    if k == 0:
        return ONE
    if k <= 200 or A <= 20_000:
        return LogReal(False, _log_exact(math.comb(A, k)))
    j = A - k
    val = (
        k * math.log(A / k)
        - j * math.log1p(-k / A)
        + 0.5 * math.log(A / (k * j))
        - 0.5 * math.log(2 * math.pi)
        + _stirlerr(A)
        - _stirlerr(k)
        - _stirlerr(j)
    )
    return LogReal(False, val)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1) if n > 170 else math.log(math.factorial(n))


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class TruncatedPoly:
    """Polynomial coefficients ``coeffs[s]`` = coefficient of x^s, degree <= cap."""

    coeffs: tuple
    cap: int

    def __post_init__(self):
        if len(self.coeffs) > self.cap + 1:
            raise ValueError("more coefficients than cap + 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def log_coeffs(self) -> np.ndarray:
        return np.array([c.log for c in self.as_logreal()], dtype=float)

    def as_logreal(self) -> list[LogReal]:
        return [c if isinstance(c, LogReal) else LogReal.from_value(c) for c in self.coeffs]


def truncated_binomial_poly(S: int, R: int) -> TruncatedPoly:
    """Initial segment of degree R-1 of (1 + x)^S."""
    if S < 1 or not 1 <= R <= S + 1:
        raise ValueError(f"need S >= 1 and 1 <= R <= S+1, got S={S}, R={R}")
    return TruncatedPoly(tuple(math.comb(S, i) for i in range(R)), R - 1)


def conv_exact(a: Sequence[Exact], b: Sequence[Exact], cap: int) -> list:
    """Product of two coefficient lists, dropping degrees above cap."""
    if not a or not b:
        return []
    if len(a) > len(b):
        a, b = b, a
    out = [0] * min(len(a) + len(b) - 1, cap + 1)
    nb = len(b)
    for i, x in enumerate(a):
        if i > cap:
            break
        if not x:
            continue
        for j in range(min(nb, cap + 1 - i)):
            y = b[j]
            if y:
                out[i + j] += x * y
    return out


def conv_log(a: np.ndarray, b: np.ndarray, cap: int) -> np.ndarray:
    """Capped product of two coefficient arrays given as natural logs (-inf = 0)."""
    if len(a) > len(b):
        a, b = b, a
    out = np.full(min(len(a) + len(b) - 1, cap + 1), -np.inf)
    for i, x in enumerate(a):
        if i > cap:
            break
        if x == -np.inf:
            continue
        lim = min(len(b), cap + 1 - i)
        np.logaddexp(out[i:i + lim], x + b[:lim], out=out[i:i + lim])
    return out


def power_by_squaring(base, m: int, mul: Callable, one):
    """``base ** m`` for any associative ``mul``; ``one`` is the identity."""
    if m < 0:
        raise ValueError("negative power")
    result = one
    while m:
        if m & 1:
            result = mul(result, base)
        m >>= 1
        if m:
            base = mul(base, base)
    return result


def poly_pow_exact(coeffs: Sequence[Exact], m: int, cap: int) -> list:
    return power_by_squaring(list(coeffs)[: cap + 1], m, lambda x, y: conv_exact(x, y, cap), [1])


def poly_pow_log(log_coeffs: np.ndarray, m: int, cap: int) -> np.ndarray:
    base = np.asarray(log_coeffs, dtype=float)[: cap + 1]
    return power_by_squaring(base, m, lambda x, y: conv_log(x, y, cap), np.zeros(1))


def poly_pow_coeff(p: TruncatedPoly, m: int, s: int, *, exact: bool | None = None) -> LogReal:
    """Coefficient of x^s in p^m.

    Exact integer arithmetic is used when p is exact and the work is small
    (or when ``exact=True``); otherwise the convolutions run in log space.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if s < 0 or s > m * p.degree:
        if s < 0:
            raise ValueError("s must be nonnegative")
        return ZERO
    if exact is None:
        exact = p.is_exact and (s + 1) * (p.degree + 1) * max(1, m.bit_length()) <= EXACT_WORK_LIMIT
    if exact:
        coeffs = poly_pow_exact(p.coeffs, m, s)
        return LogReal.from_value(coeffs[s]) if s < len(coeffs) else ZERO
    logs = poly_pow_log(p.log_coeffs(), m, s)
    return LogReal.from_log(logs[s]) if s < len(logs) else ZERO


def restricted_composition_counts(S: int, R: int, m: int, s_max: int) -> list[int]:
    """W(s) = sum over m-tuples in [0, R-1]^m summing to s of prod C(S, i_j), s <= s_max.

    Built one coordinate at a time (m sequential steps), independent of the
    squaring path used by :func:`poly_pow_coeff`.
    """
    row = [math.comb(S, i) for i in range(R)]
    w = [1]
    for _ in range(m):
        nxt = [0] * min(len(w) + R - 1, s_max + 1)
        for t, acc in enumerate(w):
            if acc:
                for i in range(min(R, s_max + 1 - t)):
                    nxt[t + i] += acc * row[i]
        w = nxt
    return w


def restricted_composition_weight(S: int, R: int, m: int, s: int) -> LogReal:
    if not 0 <= s <= m * (R - 1):
        raise ValueError(f"s={s} outside [0, m(R-1)] = [0, {m * (R - 1)}]")
    return LogReal.from_value(restricted_composition_counts(S, R, m, s)[s])


def falling_factorial_approx(A: int, B: int) -> tuple[LogReal, float]:
    """A!/(A-B)! ~ A^B exp(-(B^2 - B) / 2A), with relative error envelope B^3/A^2."""
    if not 0 <= B < A / 2:
        raise ValueError(f"falling_factorial_approx requires 0 <= B < A/2, got A={A}, B={B}")
    approx = LogReal(False, B * math.log(A) - (B * B - B) / (2 * A))
    return approx, B**3 / A**2


# ---------------------------------------------------------------- log-concavity


@dataclass(frozen=True)
class UnimodalCheckResult:
    is_log_concave: bool
    first_violation_index: int | None
    max_violation_ratio: float  # max of a(s-1)a(s+1)/a(s)^2 over interior s


def check_log_concave(seq: Sequence, rel_tol: float = 1e-10) -> UnimodalCheckResult:
    """Check a(s)^2 >= a(s-1) a(s+1) at every interior index.

    Exact inputs (int/Fraction) are compared exactly.  LogReal or float
    inputs are compared in log space with slack ``rel_tol`` (relative to
    the size of the logs involved).  Positive entries must form a
    contiguous run: an interior zero between positives is a violation.
    """
    items = list(seq)
    exact = all(isinstance(x, (int, Fraction)) for x in items)
    if exact:
        vals = items
        positive = [x > 0 for x in vals]
    else:
        logs = [x.log if isinstance(x, LogReal) else (math.log(x) if x > 0 else -math.inf) for x in items]
        positive = [v > -math.inf for v in logs]

    first = None
    worst = 0.0
    pos_idx = [i for i, flag in enumerate(positive) if flag]
    if pos_idx:
        gap = next((i for i in range(pos_idx[0], pos_idx[-1] + 1) if not positive[i]), None)
        if gap is not None:
            first, worst = gap, math.inf

    for s in range(1, len(items) - 1):
        if not (positive[s - 1] and positive[s] and positive[s + 1]):
            continue
        if exact:
            lhs, rhs = vals[s] * vals[s], vals[s - 1] * vals[s + 1]
            ratio = float(Fraction(rhs) / Fraction(lhs))
            bad = rhs > lhs
        else:
            diff = logs[s - 1] + logs[s + 1] - 2 * logs[s]
            ratio = math.exp(diff) if diff < 700 else math.inf
            scale = max(1.0, abs(logs[s - 1]), abs(logs[s]), abs(logs[s + 1]))
            bad = diff > rel_tol * scale
        worst = max(worst, ratio)
        if bad and (first is None or s < first):
            first = s
    return UnimodalCheckResult(first is None, first, worst)
