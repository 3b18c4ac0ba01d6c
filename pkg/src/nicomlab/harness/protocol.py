"""Running the online protocol: single traces, replications, horizon sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from nicomlab.core import ABSENT, AgentPopulation, OutcomeDistribution, RoundRecord, Trace
from nicomlab.learning import hedge_sample, hedge_weights
from nicomlab.nicom import OnlineMechanism, opt_value
from nicomlab.strategic import Step, Strategy, collect_reports


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Independent stream for replication ``rep`` of master seed ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def sample_outcome(dist: OutcomeDistribution, rng: np.random.Generator):
    u = rng.random()
    acc = Fraction(0)
    for s, p in dist:
        acc += p
        if u < acc:
            return s
    return dist.support[-1][0]


def run_protocol(M: OnlineMechanism, A: AgentPopulation, sigma: Sequence[Strategy],
                 rng: np.random.Generator) -> Trace:
    """Play the T rounds: draw from Hedge, show agents the lottery, collect
    reports, draw an outcome, score it, and feed the reports back to Hedge.

    Every round consumes exactly two uniforms from ``rng``.
    """
    state = M.initial_state()
    history: list = []
    records = []
    for t in range(A.T):
        k = hedge_sample(hedge_weights(state), rng)
        mixture = M.mixture(k)
        b = collect_reports(M, A, sigma, t, tuple(history), k if M.lam < 1 else None)
        s = sample_outcome(mixture(b), rng)
        theta = A.types[t]
        utilities = tuple(Fraction(0) if th is ABSENT else M.utility(i, th, s)
                          for i, th in enumerate(theta))
        g = M.objectives[t](theta, s)
        records.append(RoundRecord(t, k, M.lam, b, theta, s, g, utilities))
        history.append(Step(k if M.lam < 1 else None, b, s))
        state = M.advance(state, t, b)
    return Trace(tuple(records))


def _mean_se(xs: Sequence[float]) -> tuple:
    xs = np.asarray(xs, dtype=float)
    mean = float(xs.mean())
    if len(xs) < 2:
        return mean, None
    return mean, float(xs.std(ddof=1) / math.sqrt(len(xs)))


@dataclass
class ReplicationSummary:
    reps: int
    seed: int
    opt: Fraction
    best_index: int
    regrets: list
    utilities: list
    mean_regret: float = field(init=False)
    se_regret: float | None = field(init=False)
    mean_utilities: list = field(init=False)
    se_utilities: list = field(init=False)

    def __post_init__(self):
        self.mean_regret, self.se_regret = _mean_se([float(r) for r in self.regrets])
        cols = list(zip(*self.utilities))
        stats = [_mean_se([float(x) for x in col]) for col in cols]
        self.mean_utilities = [m for m, _ in stats]
        self.se_utilities = [se for _, se in stats]


def run_replications(M: OnlineMechanism, A: AgentPopulation, sigma: Sequence[Strategy],
                     seed: int, reps: int,
                     on_trace: Callable[[int, Trace], None] | None = None) -> ReplicationSummary:
    """R independent runs; regret is Opt minus each run's realized objective."""
    if reps < 1:
        raise ValueError("need at least one replication")
    opt, best = opt_value(M.mechanism_class, A, M.objectives)
    regrets, utilities = [], []
    for rep in range(reps):
        trace = run_protocol(M, A, sigma, replication_rng(seed, rep))
        if on_trace is not None:
            on_trace(rep, trace)
        regrets.append(opt - trace.realized_objective())
        utilities.append(trace.discounted_utilities(A))
    return ReplicationSummary(reps, seed, opt, best, regrets, utilities)


def regret_bound(M: OnlineMechanism, T: int) -> float:
    """4 eta T + ln|Pi| / eta + lambda T."""
    eta, lam = M.eta, float(M.lam)
    size = len(M.mechanism_class)
    hedge_term = math.log(size) / eta if eta > 0 else (0.0 if size == 1 else math.inf)
    return 4 * eta * T + hedge_term + lam * T


@dataclass
class SweepResult:
    rows: list
    slope: float | None
    intercept: float | None
    flag: str | None

    @property
    def fitted(self) -> list:
        return [r for r in self.rows if r.get("fitted")]


def fit_loglog(rows: list) -> SweepResult:
    """Least-squares slope of log mean regret against log T over feasible rows."""
    feasible = [r for r in rows if r["status"] == "ok"]
    if feasible and all(abs(r["mean_regret"]) <= 1e-12 for r in feasible):
        for r in rows:
            r["fitted"] = False
        return SweepResult(rows, None, None, "degenerate: zero regret")
    usable = [r for r in feasible if r["mean_regret"] > 0]
    for r in rows:
        r["fitted"] = r in usable
    if len(usable) < 3:
        return SweepResult(rows, None, None,
                           f"insufficient points: {len(usable)} feasible horizons with positive regret")
    x = np.log([r["T"] for r in usable])
    y = np.log([r["mean_regret"] for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    return SweepResult(rows, float(slope), float(intercept), None)
