"""The commitment lottery: parameter selection, penalty gaps, per-round
mixtures, and regret accounting against the best fixed mechanism."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from nicomlab.core import (
    ABSENT,
    AgentPopulation,
    MechanismClass,
    OutcomeDistribution,
    SingleRoundMechanism,
    Trace,
    Utility,
    as_fraction,
    expected_objective,
)
from nicomlab.errors import BudgetExceededError, InfeasibleParamsError
from nicomlab.learning import HedgeState, hedge_sample, hedge_update, hedge_weights

# Hedge alone is 4*eta-private and the certification divides by 4 again.
CERTIFICATION_CONSTANT = 16
ENUMERATION_BUDGET = 10_000_000


@dataclass(frozen=True)
class NicomParams:
    eta: float
    lam: Fraction
    beta: Fraction
    alpha_T: Fraction
    certified: bool

    def __post_init__(self):
        if not 0 <= self.lam <= 1:
            raise ValueError(f"commitment probability {self.lam} outside [0, 1]")
        if not 0 <= self.eta <= 1:
            raise ValueError(f"learning rate {self.eta} outside [0, 1]")

    @classmethod
    def manual(cls, eta, lam, beta, alpha_T) -> "NicomParams":
        """Arbitrary (eta, lambda); ``certified`` records whether they pass."""
        eta = float(as_fraction(eta))
        lam, beta, alpha_T = as_fraction(lam), as_fraction(beta), as_fraction(alpha_T)
        return cls(eta, lam, beta, alpha_T, certifies(eta, lam, beta, alpha_T))


def certifies(eta: float, lam, beta, alpha_T) -> bool:
    if beta <= 0:
        return False
    lhs = float(lam * beta)
    rhs = CERTIFICATION_CONSTANT * eta * float(alpha_T)
    return lhs >= rhs - 1e-12


def _exact_sqrt(x: Fraction) -> Fraction | None:
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


def nicom_params(alpha_T, T: int, beta, eta=None) -> NicomParams:
    """Learning rate 1/sqrt(alpha_T T) and the smallest certifying commitment
    probability lambda = 16 eta alpha_T / beta.

    Passing ``eta`` overrides the default learning rate; lambda is still put on
    the certification boundary.
    """
    alpha_T, beta = as_fraction(alpha_T), as_fraction(beta)
    if alpha_T < 1 or T < 1 or beta <= 0 or alpha_T * T < 1:
        raise ValueError(f"need alpha_T >= 1, T >= 1, beta > 0 (got {alpha_T}, {T}, {beta})")
    if eta is None:
        root = _exact_sqrt(alpha_T * T)
        eta_exact = 1 / root if root is not None else Fraction(1 / math.sqrt(alpha_T * T))
    else:
        eta_exact = Fraction(eta) if isinstance(eta, float) else as_fraction(eta)
        if not 0 <= eta_exact <= 1:
            raise ValueError(f"learning rate {eta} outside [0, 1]")
    lam = CERTIFICATION_CONSTANT * eta_exact * alpha_T / beta
    if lam > 1:
        if eta is None:
            # 16 sqrt(alpha_T / T) / beta <= 1  <=>  T >= 256 alpha_T / beta^2
            bound = CERTIFICATION_CONSTANT ** 2 * alpha_T / beta ** 2
            min_T = math.ceil(bound)
        else:
            min_T = None
        raise InfeasibleParamsError(lam, min_T)
    return NicomParams(float(eta_exact), lam, beta, alpha_T, True)


# -- penalty gap --------------------------------------------------------------


@dataclass(frozen=True)
class PenaltyGap:
    """Minimum gap and a minimising (agent, true type, misreport, others) tuple.

    ``value`` is None when no agent has a possible misreport (singleton type
    spaces), in which case the gap is vacuous.
    """

    value: Fraction | None
    agent: int
    true_type: object
    report: object
    others: tuple
    profiles: int


def penalty_gap_report(pi: SingleRoundMechanism, type_spaces: Sequence[Sequence],
                       utility: Utility, include_absent: bool = True,
                       budget: int = ENUMERATION_BUDGET) -> PenaltyGap:
    """Exact minimum, over agents, true types, misreports and every report
    profile of the others, of the truthful-minus-misreport expected utility."""
    n = len(type_spaces)
    others_space = [list(ts) + ([ABSENT] if include_absent else []) for ts in type_spaces]
    required = 0
    for i in range(n):
        count = len(type_spaces[i]) ** 2
        for j in range(n):
            if j != i:
                count *= len(others_space[j])
        required += count
    if required > budget:
        raise BudgetExceededError("penalty gap", required, budget)

    best = None
    for i in range(n):
        Theta = list(type_spaces[i])
        for rest in itertools.product(*(others_space[j] for j in range(n) if j != i)):
            def profile(r):
                return rest[:i] + (r,) + rest[i:]
            U = {r: {th: pi(profile(r)).expect(lambda s: utility(i, th, s)) for th in Theta}
                 for r in Theta}
            for th in Theta:
                for r in Theta:
                    if r == th:
                        continue
                    gap = U[th][th] - U[r][th]
                    if best is None or gap < best.value:
                        best = PenaltyGap(gap, i, th, r, rest, required)
    if best is None:
        return PenaltyGap(None, -1, None, None, (), required)
    return best


def penalty_gap(pi: SingleRoundMechanism, type_spaces: Sequence[Sequence], utility: Utility,
                include_absent: bool = True, budget: int = ENUMERATION_BUDGET) -> Fraction | None:
    return penalty_gap_report(pi, type_spaces, utility, include_absent, budget).value


# -- the per-round lottery ------------------------------------------------------


class MixtureMechanism:
    """``(1 - lam) * hedge_component + lam * commitment``, mixed exactly."""

    def __init__(self, lam, hedge_component: SingleRoundMechanism | None,
                 commitment: SingleRoundMechanism | None):
        self.lam = Fraction(lam)
        if self.lam < 1 and hedge_component is None:
            raise ValueError("a hedge component is required when lam < 1")
        if self.lam > 0 and commitment is None:
            raise ValueError("a commitment mechanism is required when lam > 0")
        self.hedge_component = hedge_component
        self.commitment = commitment

    @property
    def sampled_index(self) -> int | None:
        return None if self.hedge_component is None else self.hedge_component.index

    def __call__(self, b) -> OutcomeDistribution:
        if self.lam == 0:
            return self.hedge_component(b)
        if self.lam == 1:
            return self.commitment(b)
        return self.hedge_component(b).mix(self.commitment(b), self.lam)


def nicom_round(b_history: Sequence, G_history: Sequence, params: NicomParams,
                Pi: MechanismClass, commitment: SingleRoundMechanism | None,
                rng: np.random.Generator) -> MixtureMechanism:
    """Rebuild Hedge from the reported history, sample a member, mix it in."""
    if len(b_history) != len(G_history):
        raise ValueError("report and objective histories are misaligned")
    state = HedgeState.initial(params.eta, len(Pi))
    for b, G in zip(b_history, G_history):
        state = hedge_update(state, b, G, Pi)
    k = hedge_sample(hedge_weights(state), rng)
    return MixtureMechanism(params.lam, Pi[k], commitment)


# -- regret -------------------------------------------------------------------------


def cumulative_scores(Pi: MechanismClass, A: AgentPopulation, objectives: Sequence) -> list:
    """Exact sum over rounds of each member's expected objective under true types."""
    totals = [Fraction(0)] * len(Pi)
    for t in range(A.T):
        for k, pi in enumerate(Pi):
            totals[k] += expected_objective(pi, A.types[t], objectives[t])
    return totals


def opt_value(Pi: MechanismClass, A: AgentPopulation, objectives: Sequence) -> tuple:
    """Best cumulative objective of a fixed member; ties go to the lowest index."""
    totals = cumulative_scores(Pi, A, objectives)
    best = max(range(len(Pi)), key=lambda k: (totals[k], -k))
    return totals[best], best


def regret(trace: Trace, Pi: MechanismClass, A: AgentPopulation, objectives: Sequence) -> Fraction:
    """Opt minus the trace's realized cumulative objective (one-sample estimate)."""
    opt, _ = opt_value(Pi, A, objectives)
    return opt - trace.realized_objective()


@dataclass(frozen=True)
class OnlineMechanism:
    """The Hedge-plus-commitment online mechanism for a fixed objective script."""

    mechanism_class: MechanismClass
    commitment: SingleRoundMechanism | None
    utility: Utility
    type_space: tuple
    eta: float
    lam: Fraction
    objectives: tuple
    _scores: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_domain(cls, domain, params: NicomParams, objectives: Sequence) -> "OnlineMechanism":
        return cls(domain.mechanism_class, domain.commitment, domain.utility,
                   tuple(domain.type_space), params.eta, Fraction(params.lam), tuple(objectives))

    def mixture(self, k: int | None) -> MixtureMechanism:
        return MixtureMechanism(self.lam, None if k is None else self.mechanism_class[k],
                                self.commitment)

    def initial_state(self) -> HedgeState:
        return HedgeState.initial(self.eta, len(self.mechanism_class))

    def scores(self, t: int, b: tuple) -> tuple:
        """Memoised float increments of every member's objective at reports b."""
        key = (self.objectives[t], b)
        out = self._scores.get(key)
        if out is None:
            out = tuple(float(expected_objective(pi, b, self.objectives[t]))
                        for pi in self.mechanism_class)
            self._scores[key] = out
        return out

    def advance(self, state: HedgeState, t: int, b: tuple) -> HedgeState:
        inc = self.scores(t, b)
        return HedgeState(state.eta, tuple(s + f for s, f in zip(state.scores, inc)), state.t + 1)
