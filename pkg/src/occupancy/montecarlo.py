"""Seeded simulation of both occupancy models with Wilson intervals.

Trial ``i`` draws all of its randomness from a Philox stream keyed on the
master seed with counter ``i << 128``, so a run is a pure function of
(params, master_seed, trials) whatever the chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .exact import BinsModelParams, Model, ProbEstimate, SubsetModelParams

DEFAULT_SEED = 20_240_531
_CHUNK = 2_000


@dataclass(frozen=True)
class TrialConfig:
    trials: int
    master_seed: int = DEFAULT_SEED
    confidence: float = 0.95
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class McResult:
    successes: int
    trials: int
    estimate: float
    ci_lower: float
    ci_upper: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_upper - self.ci_lower)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=master_seed, counter=trial << 128))


def sample_subset(rng: np.random.Generator, N: int, K: int) -> np.ndarray:
    """Uniform K-subset of range(N), sorted, in O(K) memory.

    Draws with replacement, topping up only the shortfall of distinct
    values each round, so the set stops growing exactly at K.  The stopping
    set is invariant under relabelling of range(N), hence uniform.  Needs
    K <= N/2 for the rounds to shrink geometrically.
    """
    picked = np.unique(rng.integers(0, N, size=K))
    while len(picked) < K:
        picked = np.union1d(picked, rng.integers(0, N, size=K - len(picked)))
    return picked


def _subset_success(p: SubsetModelParams, rng: np.random.Generator) -> bool:
    nb = p.n_blocks
    if 2 * p.K <= p.N:
        picked = sample_subset(rng, p.N, p.K)
        hits = np.bincount(picked // p.S, minlength=nb + 1)[:nb]
    else:
        # sample the complement; a full block holds S minus its missed points
        missed = sample_subset(rng, p.N, p.N - p.K)
        hits = p.S - np.bincount(missed // p.S, minlength=nb + 1)[:nb]
    return bool(hits.min() >= p.R)


def _bins_success(p: BinsModelParams, rng: np.random.Generator) -> bool:
    loads = np.bincount(rng.integers(0, p.n, size=p.m), minlength=p.n)
    return bool(loads.min() >= p.R)


def _impossible(model: Model) -> bool:
    if isinstance(model, SubsetModelParams):
        return model.K < model.R * model.n_blocks or model.R > model.S
    return model.m < model.R * model.n


def _count_chunk(args) -> int:
    model, seed, start, stop = args
    if _impossible(model):
        return 0
    check = _subset_success if isinstance(model, SubsetModelParams) else _bins_success
    return sum(check(model, trial_rng(seed, i)) for i in range(start, stop))


def simulate(model: Model, cfg: TrialConfig) -> McResult:
    chunks = [(model, cfg.master_seed, s, min(s + _CHUNK, cfg.trials)) for s in range(0, cfg.trials, _CHUNK)]
    if cfg.workers == 1 or len(chunks) == 1:
        successes = sum(map(_count_chunk, chunks))
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            successes = sum(pool.map(_count_chunk, chunks))
    lo, hi = wilson_interval(successes, cfg.trials, cfg.confidence)
    return McResult(successes, cfg.trials, successes / cfg.trials, lo, hi)


def simulate_subset(p: SubsetModelParams, cfg: TrialConfig) -> McResult:
    return simulate(p, cfg)


def simulate_bins(p: BinsModelParams, cfg: TrialConfig) -> McResult:
    return simulate(p, cfg)


def mc_estimate(model: Model, cfg: TrialConfig) -> ProbEstimate:
    res = simulate(model, cfg)
    meta = {"successes": res.successes, "trials": res.trials, "seed": cfg.master_seed,
            "confidence": cfg.confidence}
    return ProbEstimate(res.estimate, res.ci_lower, res.ci_upper, "monte_carlo", meta)
