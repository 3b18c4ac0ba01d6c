"""Strategic agents and exact incentive audits.

The online game is small enough, at desk scale, to be solved exactly: the
trajectory tree branches on the Hedge draw, then on the agents' reports, then
on the realised outcome. Expected utilities are sums over that tree, and a
single deviator's best response is a backward induction over it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from nicomlab.core import ABSENT, AgentPopulation, SingleRoundMechanism, Utility, fmt_type
from nicomlab.errors import BudgetExceededError
from nicomlab.learning import HedgeState, hedge_weights
from nicomlab.nicom import OnlineMechanism

NODE_BUDGET = 10_000_000
TIE_SLACK = 1e-12


class Step(NamedTuple):
    """One realised round as seen by the agents afterwards."""

    sampled_index: int | None
    reports: tuple
    outcome: object


# -- strategies -------------------------------------------------------------


class Strategy:
    """Maps (history, observed Hedge draw) to a report for one agent.

    ``oblivious`` strategies ignore both history and draw, which lets the
    engines skip branching on them.
    """

    oblivious = True

    def report(self, i: int, t: int, theta, history: Sequence, sampled_index):
        raise NotImplementedError


class Truthful(Strategy):
    def report(self, i, t, theta, history, sampled_index):
        return theta

    def __repr__(self):
        return "Truthful()"


class Scripted(Strategy):
    """A fixed report per round, whatever happens."""

    def __init__(self, reports: Sequence):
        self.reports = tuple(reports)

    def report(self, i, t, theta, history, sampled_index):
        return self.reports[t]

    def __repr__(self):
        return f"Scripted({[fmt_type(r) for r in self.reports]})"


class Policy(Strategy):
    """A decision table keyed by (round, own past reports, Hedge draw).

    Entries missing from the table fall back to the truth.
    """

    oblivious = False

    def __init__(self, decisions: dict):
        self.decisions = dict(decisions)

    def report(self, i, t, theta, history, sampled_index):
        own = tuple(step.reports[i] for step in history)
        return self.decisions.get((t, own, sampled_index), theta)


def truthful_profile(n: int) -> list:
    return [Truthful() for _ in range(n)]


def _with(profile: tuple, i: int, r) -> tuple:
    return profile[:i] + (r,) + profile[i + 1:]


def collect_reports(M: OnlineMechanism, A: AgentPopulation, sigma: Sequence[Strategy], t: int,
                    history: Sequence, sampled_index) -> tuple:
    reports = []
    for i in range(A.n):
        theta = A.types[t][i]
        if theta is ABSENT:
            reports.append(ABSENT)
            continue
        r = sigma[i].report(i, t, theta, history, sampled_index)
        if r not in M.type_space:
            raise ValueError(f"agent {i} round {t}: report {r!r} outside the type space")
        reports.append(r)
    return tuple(reports)


def _hedge_branches(M: OnlineMechanism, state: HedgeState) -> list:
    """(draw, probability) pairs for a round; exact when the draw is trivial."""
    if M.lam == 1:
        return [(None, Fraction(1))]
    if len(M.mechanism_class) == 1:
        return [(0, Fraction(1))]
    w = hedge_weights(state)
    return [(k, float(wk)) for k, wk in enumerate(w) if wk > 0]


def _advance(M: OnlineMechanism, state: HedgeState, b: tuple, t: int) -> HedgeState:
    if M.lam == 1:
        return state
    return M.advance(state, t, b)


def _mixture_utility(M: OnlineMechanism, k, b: tuple, i: int, theta):
    """Expected utility under (1 - lam) * Pi[k] + lam * commitment, by linearity."""
    if theta is ABSENT:
        return Fraction(0)
    total = Fraction(0)
    if M.lam < 1:
        total += (1 - M.lam) * M.mechanism_class[k](b).expect(lambda s: M.utility(i, theta, s))
    if M.lam > 0:
        total += M.lam * M.commitment(b).expect(lambda s: M.utility(i, theta, s))
    return total


# -- exact expected utilities ---------------------------------------------------


def exact_expected_utilities(M: OnlineMechanism, A: AgentPopulation, sigma: Sequence[Strategy],
                             budget: int = NODE_BUDGET) -> list:
    """Expected discounted utility of every agent, summed exactly over the
    trajectory tree. Values are Fractions whenever no Hedge probability is
    involved, floats otherwise."""
    if all(s.oblivious for s in sigma):
        return _oblivious_utilities(M, A, sigma, budget)
    return _tree_utilities(M, A, sigma, budget)


def _oblivious_utilities(M, A, sigma, budget):
    required = A.T * (1 if M.lam == 1 else len(M.mechanism_class))
    if required > budget:
        raise BudgetExceededError("expected utilities", required, budget)
    values = [Fraction(0)] * A.n
    state = M.initial_state()
    for t in range(A.T):
        b = collect_reports(M, A, sigma, t, (), None)
        for k, wk in _hedge_branches(M, state):
            for i in range(A.n):
                theta = A.types[t][i]
                if theta is not ABSENT:
                    values[i] += A.discount[i][t] * wk * _mixture_utility(M, k, b, i, theta)
        state = _advance(M, state, b, t)
    return values


def _tree_size(M: OnlineMechanism, A: AgentPopulation) -> int:
    """Node count of the trajectory tree, using truthful reports to size supports."""
    total, width = 0, 1
    draws = 1 if M.lam == 1 else len(M.mechanism_class)
    for t in range(A.T):
        b = A.types[t]
        support = 0
        for k in (range(draws) if M.lam < 1 else [None]):
            support = max(support, len(M.mixture(k)(b)))
        width *= draws * support
        total += width
    return total


def _tree_utilities(M, A, sigma, budget):
    required = _tree_size(M, A)
    if required > budget:
        raise BudgetExceededError("expected utilities", required, budget)
    zero = [Fraction(0)] * A.n

    def rec(t, state, history):
        if t == A.T:
            return zero
        total = list(zero)
        for k, wk in _hedge_branches(M, state):
            b = collect_reports(M, A, sigma, t, history, k)
            nxt = _advance(M, state, b, t)
            for s, p in M.mixture(k)(b):
                cont = rec(t + 1, nxt, history + (Step(k, b, s),))
                for i in range(A.n):
                    theta = A.types[t][i]
                    u = Fraction(0) if theta is ABSENT else A.discount[i][t] * M.utility(i, theta, s)
                    total[i] += wk * p * (u + cont[i])
        return total

    return rec(0, M.initial_state(), ())


# -- best responses ----------------------------------------------------------------


@dataclass
class AuditReport:
    agent: int
    truthful_value: float
    best_value: float
    gap: float
    certified: bool
    tolerance: float
    nodes: int
    decisions: dict = field(repr=False, default_factory=dict)

    def deviations(self) -> list:
        """Decision-list entries where the best response departs from the truth."""
        out = []
        for (t, own, k), (report, truth) in sorted(self.decisions.items(), key=lambda kv: kv[0][0]):
            if report != truth:
                out.append({
                    "round": t,
                    "own_past_reports": [fmt_type(r) for r in own],
                    "sampled_index": k,
                    "report": fmt_type(report),
                    "truth": fmt_type(truth),
                })
        return out

    def policy(self) -> Policy:
        return Policy({key: report for key, (report, _) in self.decisions.items()})

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "truthful_value": float(self.truthful_value),
            "best_value": float(self.best_value),
            "gap": float(self.gap),
            "certified": self.certified,
            "tolerance": self.tolerance,
            "nodes": self.nodes,
            "deviations": self.deviations(),
        }


def _dp_size(M: OnlineMechanism, A: AgentPopulation, i: int) -> int:
    draws = 1 if M.lam == 1 else len(M.mechanism_class)
    total, states = 0, 1
    for t in range(A.T):
        opts = 1 if A.types[t][i] is ABSENT else len(M.type_space)
        total += states * opts * draws
        states *= opts
    return total


def _backward_induction(i: int, M: OnlineMechanism, A: AgentPopulation, truthful_only: bool,
                        decisions: dict | None):
    """Value of agent i's best history-dependent report policy (or of the truth)
    against truthful opponents, with the round's Hedge draw observed before
    reporting."""
    Pi = M.mechanism_class
    nodes = 0
    util_cache: dict = {}

    def scores_for(t, b):
        return np.array(M.scores(t, b))

    def utility(k, b, theta):
        key = (k, b, theta)
        if key not in util_cache:
            util_cache[key] = _mixture_utility(M, k, b, i, theta)
        return util_cache[key]

    def rec(t, own, scores):
        nonlocal nodes
        if t == A.T:
            return Fraction(0)
        theta = A.types[t][i]
        if theta is ABSENT:
            opts = (ABSENT,)
        elif truthful_only:
            opts = (theta,)
        else:
            opts = (theta,) + tuple(r for r in M.type_space if r != theta)
        g = A.discount[i][t]
        profiles = {r: _with(A.types[t], i, r) for r in opts}
        cont = {}
        for r in opts:
            nxt = scores if M.lam == 1 else scores + scores_for(t, profiles[r])
            cont[r] = rec(t + 1, own + (r,), nxt)
        state = HedgeState(M.eta, tuple(scores), t)
        total = Fraction(0)
        for k, wk in _hedge_branches(M, state):
            values = {}
            for r in opts:
                nodes += 1
                values[r] = g * utility(k, profiles[r], theta) + cont[r]
            best = max(values.values())
            slack = TIE_SLACK if isinstance(best, float) else 0
            choice = opts[0] if values[opts[0]] >= best - slack else max(opts, key=values.get)
            if decisions is not None and theta is not ABSENT:
                decisions[(t, own, k)] = (choice, theta)
            total += wk * best
        return total

    value = rec(0, (), np.zeros(len(Pi)))
    return value, nodes


def best_response_value(i: int, M: OnlineMechanism, A: AgentPopulation, tol: float = 1e-7,
                        budget: int = NODE_BUDGET) -> AuditReport:
    """Exact best-response gain of agent i over truth-telling when the others
    are truthful."""
    required = _dp_size(M, A, i)
    if required > budget:
        raise BudgetExceededError("best response", required, budget)
    decisions: dict = {}
    best, nodes = _backward_induction(i, M, A, False, decisions)
    truthful, more = _backward_induction(i, M, A, True, None)
    gap = best - truthful
    return AuditReport(i, truthful, best, gap, bool(gap <= tol), tol, nodes + more, decisions)


# -- single-round audits -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    agent: int
    true_type: object
    report: object
    others: tuple
    deficit: Fraction


def audit_single_round(pi: SingleRoundMechanism, kind: str, type_spaces: Sequence[Sequence],
                       utility: Utility, include_absent: bool = True,
                       budget: int = NODE_BUDGET) -> list:
    """Every (agent, true type, misreport, others) tuple where misreporting pays.

    ``kind="DSIC"`` ranges the others over arbitrary reports; ``kind="NIC"``
    over truthful others, i.e. their true types. With private values both
    range over the same profile set, so the two audits coincide here; they are
    kept apart to mirror the two definitions.
    """
    if kind not in ("DSIC", "NIC"):
        raise ValueError(f"unknown audit kind {kind!r}")
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
        raise BudgetExceededError(f"{kind} audit", required, budget)

    violations = []
    for i in range(n):
        Theta = list(type_spaces[i])
        for rest in itertools.product(*(others_space[j] for j in range(n) if j != i)):
            def profile(r):
                return rest[:i] + (r,) + rest[i:]
            for theta in Theta:
                truthful = pi(profile(theta)).expect(lambda s: utility(i, theta, s))
                for r in Theta:
                    if r == theta:
                        continue
                    lie = pi(profile(r)).expect(lambda s: utility(i, theta, s))
                    if lie > truthful:
                        violations.append(Violation(i, theta, r, rest, lie - truthful))
    return violations
