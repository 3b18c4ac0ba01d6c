"""Hedge over a finite mechanism class, seeded sampling, and an exhaustive
verifier for the per-round privacy of history-to-weights maps."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from nicomlab.core import MechanismClass, ObjectiveFunction, expected_objective
from nicomlab.errors import NotNeighborsError

WeightBuilder = Callable[[Sequence], np.ndarray]


@dataclass(frozen=True)
class HedgeState:
    """Cumulative per-mechanism scores after ``t`` rounds."""

    eta: float
    scores: tuple
    t: int = 0

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise ValueError(f"learning rate {self.eta} outside [0, 1]")

    @classmethod
    def initial(cls, eta: float, size: int) -> "HedgeState":
        return cls(float(eta), (0.0,) * size, 0)


def hedge_weights(state: HedgeState) -> np.ndarray:
    """Exponential weights, max-shifted before exponentiation."""
    z = state.eta * np.asarray(state.scores, dtype=float)
    z -= z.max()
    w = np.exp(z)
    w /= w.sum()
    return w


def hedge_log_weights(state: HedgeState) -> np.ndarray:
    z = state.eta * np.asarray(state.scores, dtype=float)
    zmax = z.max()
    return z - (zmax + math.log(np.exp(z - zmax).sum()))


def round_scores(b_t: Sequence, G_t: ObjectiveFunction, Pi: MechanismClass) -> list:
    """Exact expected objective of every member of ``Pi`` at the reports ``b_t``."""
    return [expected_objective(pi, b_t, G_t) for pi in Pi]


def hedge_update(state: HedgeState, b_t: Sequence, G_t: ObjectiveFunction,
                 Pi: MechanismClass) -> HedgeState:
    increments = round_scores(b_t, G_t, Pi)
    scores = tuple(s + float(f) for s, f in zip(state.scores, increments))
    return HedgeState(state.eta, scores, state.t + 1)


def hedge_sample(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over the class order; consumes exactly one uniform."""
    cdf = np.cumsum(weights)
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right"))
    if k >= len(weights):
        k = int(np.flatnonzero(weights)[-1])
    return k


def hedge_builder(eta: float, Pi: MechanismClass) -> WeightBuilder:
    """History of (reports, objective) entries to Hedge weights."""
    cache: dict = {}

    def scores_of(b, G):
        key = (b, G)
        if key not in cache:
            cache[key] = [float(f) for f in round_scores(b, G, Pi)]
        return cache[key]

    def build(history: Sequence) -> np.ndarray:
        scores = np.zeros(len(Pi))
        for b, G in history:
            scores += scores_of(tuple(b), G)
        return hedge_weights(HedgeState(float(eta), tuple(scores), len(history)))

    return build


def _count_differences(h1: Sequence, h2: Sequence) -> int:
    if len(h1) != len(h2):
        raise NotNeighborsError(f"histories have lengths {len(h1)} and {len(h2)}")
    return sum(1 for x, y in zip(h1, h2) if tuple(x[0]) != tuple(y[0]) or x[1] != y[1])


def dp_ratio_check(builder: WeightBuilder, histories: tuple, index: int) -> float:
    """log q(h)(index) - log q(h')(index) for two neighbouring histories."""
    h1, h2 = histories
    if _count_differences(h1, h2) > 1:
        raise NotNeighborsError("histories differ in more than one entry")
    return float(np.log(builder(h1)[index]) - np.log(builder(h2)[index]))


@dataclass(frozen=True)
class DPCheckResult:
    max_log_ratio: float
    pairs_checked: int
    worst_pair: tuple | None
    worst_index: int | None


def dp_exhaustive(builder: WeightBuilder, reports: Sequence, objectives: Sequence,
                  max_t: int) -> DPCheckResult:
    """Largest absolute log-ratio over every round t <= max_t, every history of
    report profiles drawn from ``reports``, every neighbour differing in one
    round's profile, and every mechanism index.

    ``objectives[tau]`` is the fixed objective of round tau; neighbours never
    differ in it.
    """
    reports = [tuple(b) for b in reports]
    logw: dict = {}

    def log_weights(hist):
        if hist not in logw:
            logw[hist] = np.log(builder([(b, objectives[tau]) for tau, b in enumerate(hist)]))
        return logw[hist]

    worst = 0.0
    worst_pair = worst_index = None
    pairs = 0
    for t in range(1, max_t + 1):
        for hist in itertools.product(reports, repeat=t - 1):
            base = log_weights(hist)
            for pos in range(t - 1):
                for alt in reports:
                    if alt == hist[pos]:
                        continue
                    other = hist[:pos] + (alt,) + hist[pos + 1:]
                    diff = np.abs(base - log_weights(other))
                    pairs += 1
                    k = int(np.argmax(diff))
                    if diff[k] > worst:
                        worst, worst_pair, worst_index = float(diff[k]), (hist, other), k
    return DPCheckResult(worst, pairs, worst_pair, worst_index)
