"""Brute-force oracles shared by the test modules.

Everything here enumerates the sample space directly and never calls into
the package's generating-function code.
"""

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import pytest


@lru_cache(maxsize=None)
def subset_success_counts(N, S):
    """{(K, R): number of K-subsets of range(N) hitting every full block >= R times}."""
    nb = N // S
    counts = {}
    for mask in range(1 << N):
        K = bin(mask).count("1")
        hits = [bin((mask >> (b * S)) & ((1 << S) - 1)).count("1") for b in range(nb)]
        low = min(hits)
        for R in range(1, low + 1):
            counts[(K, R)] = counts.get((K, R), 0) + 1
    return counts


def subset_prob_brute(N, S, K, R):
    return Fraction(subset_success_counts(N, S).get((K, R), 0), math.comb(N, K))


@lru_cache(maxsize=None)
def bins_loads(m, n):
    return [tuple(seq.count(b) for b in range(n)) for seq in itertools.product(range(n), repeat=m)]


def bins_prob_brute(m, n, R):
    loads = bins_loads(m, n)
    return Fraction(sum(min(ld) >= R for ld in loads), len(loads))


def beta_subset_brute(N, S, K, R, i):
    """Sum over i-sets of blocks of P(every block in the set is hit < R times)."""
    nb = N // S
    total = 0
    for sub in itertools.combinations(range(N), K):
        hits = [0] * nb
        for x in sub:
            if x // S < nb:
                hits[x // S] += 1
        low = sum(h < R for h in hits)
        total += math.comb(low, i)
    return Fraction(total, math.comb(N, K))


def beta_bins_brute(m, n, R, l):
    loads = bins_loads(m, n)
    total = sum(math.comb(sum(x < R for x in ld), l) for ld in loads)
    return Fraction(total, len(loads))


@pytest.fixture
def brute():
    class Oracles:
        subset = staticmethod(subset_prob_brute)
        bins = staticmethod(bins_prob_brute)
        beta_subset = staticmethod(beta_subset_brute)
        beta_bins = staticmethod(beta_bins_brute)

    return Oracles


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
