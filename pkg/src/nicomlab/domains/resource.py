"""Sharing k CPUs among n users with integer demands in {1..k}."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from nicomlab.core import (
    ABSENT,
    AllocationOutcome,
    Domain,
    MechanismClass,
    ObjectiveFunction,
    OutcomeDistribution,
    SingleRoundMechanism,
    as_fraction,
)
from nicomlab.errors import BudgetExceededError, DomainMismatchError

CLASS_BUDGET = 100_000
SELECTORS = ("posted-allocation", "max-min-fair")


@dataclass(frozen=True)
class ResourceConfig:
    n: int
    k: int
    selector: str = "posted-allocation"

    def __post_init__(self):
        if self.k < 1 or self.n < 2:
            raise ValueError(f"resource allocation needs k >= 1 and n >= 2, got {self}")
        if self.selector not in SELECTORS:
            raise ValueError(f"unknown resource class {self.selector!r}")

    @property
    def type_space(self) -> tuple:
        return tuple(Fraction(d) for d in range(1, self.k + 1))


def compositions(k: int, n: int):
    """All non-negative integer n-vectors summing to k, in lexicographic order."""
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in compositions(k - first, n - 1):
            yield (first,) + rest


def _n_compositions(k: int, n: int) -> int:
    from math import comb
    return comb(k + n - 1, n - 1)


def mmf_allocate(w, b, k: int) -> tuple:
    """Integer max-min fair allocation with endowment ``w`` and demands ``b``.

    Each user first receives min(demand, endowment). The surplus goes one unit
    at a time to the least-served user still short of its demand (lowest index
    on ties); anything left once all demands are met goes to user 0.
    """
    demand = [0 if bi is ABSENT else int(bi) for bi in b]
    alloc = [min(d, wi) for d, wi in zip(demand, w)]
    surplus = k - sum(alloc)
    while surplus > 0:
        short = [i for i in range(len(alloc)) if alloc[i] < demand[i]]
        if not short:
            alloc[0] += surplus
            break
        i = min(short, key=lambda j: (alloc[j], j))
        alloc[i] += 1
        surplus -= 1
    return tuple(alloc)


def build_resource_classes(cfg: ResourceConfig, budget: int = CLASS_BUDGET) -> MechanismClass:
    size = _n_compositions(cfg.k, cfg.n)
    if size > budget:
        raise BudgetExceededError(f"{cfg.selector} class", size, budget)
    members = []
    for w in compositions(cfg.k, cfg.n):
        desc = "w=(" + ",".join(map(str, w)) + ")"
        if cfg.selector == "posted-allocation":
            dist = OutcomeDistribution.point(AllocationOutcome(w))
            members.append(SingleRoundMechanism(lambda b, d=dist: d, descriptor=desc,
                                                name="posted-allocation"))
        else:
            members.append(SingleRoundMechanism(
                lambda b, w=w: OutcomeDistribution.point(AllocationOutcome(mmf_allocate(w, b, cfg.k))),
                descriptor=desc, name="max-min-fair"))
    return MechanismClass.of(cfg.selector, members)


def resource_utility(i: int, theta, s) -> Fraction:
    if not isinstance(s, AllocationOutcome):
        raise DomainMismatchError(f"resource utility given {type(s).__name__}")
    return Fraction(int(s.alloc[i] >= theta))


def resource_commitment(cfg: ResourceConfig) -> SingleRoundMechanism:
    """Scrutinise a uniform user i and threshold j in {1..2k}.

    If j exceeds i's demand, i gets exactly its demand and every other
    reporting user floor((k - b_i) / (n - 1)); otherwise i gets nothing and the
    others floor(k / (n - 1)). A non-reporting scrutinised user gets nothing;
    non-reporting users always get nothing.
    """
    n, k = cfg.n, cfg.k
    mass = Fraction(1, 2 * n * k)

    def evaluate(b):
        pairs = []
        for i in range(n):
            for j in range(1, 2 * k + 1):
                alloc = [0] * n
                if b[i] is not ABSENT and j > b[i]:
                    alloc[i] = int(b[i])
                    share = (k - int(b[i])) // (n - 1)
                else:
                    share = k // (n - 1)
                for other in range(n):
                    if other != i and b[other] is not ABSENT:
                        alloc[other] = share
                pairs.append((AllocationOutcome(tuple(alloc)), mass))
        return OutcomeDistribution.from_weights(pairs)

    return SingleRoundMechanism(evaluate, descriptor=f"n={n},k={k}", name="resource-commitment")


def resource_objective(cfg: ResourceConfig, r_t) -> ObjectiveFunction:
    """Importance-weighted fraction of users whose demand is met."""
    r_t = tuple(as_fraction(r) for r in r_t)
    if len(r_t) != cfg.n or any(not 0 <= r <= 1 for r in r_t):
        raise ValueError(f"importance weights {r_t} invalid for n={cfg.n}")
    n = cfg.n

    def G(theta, s):
        total = Fraction(0)
        for i, th in enumerate(theta):
            if th is not ABSENT and r_t[i]:
                total += r_t[i] * resource_utility(i, th, s)
        return total / n

    return ObjectiveFunction(G, ("resource", r_t))


def resource_domain(cfg: ResourceConfig, members=None) -> Domain:
    Pi = build_resource_classes(cfg)
    if members is not None:
        Pi = Pi.subset(members)
    return Domain(
        name="resource",
        n=cfg.n,
        type_space=cfg.type_space,
        utility=resource_utility,
        mechanism_class=Pi,
        commitment=resource_commitment(cfg),
        objective=lambda r_t: resource_objective(cfg, r_t),
    )
