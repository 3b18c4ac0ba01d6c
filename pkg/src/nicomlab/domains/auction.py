"""Permit sale to n firms: VCG with bidder-specific reserves, a random
uniform-price commitment mechanism, and the externality-adjusted welfare."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from nicomlab.core import (
    ABSENT,
    AuctionOutcome,
    Domain,
    MechanismClass,
    ObjectiveFunction,
    OutcomeDistribution,
    SingleRoundMechanism,
    TypeGrid,
    as_fraction,
    fmt_fraction,
)
from nicomlab.errors import BudgetExceededError, DomainMismatchError

CLASS_BUDGET = 100_000


@dataclass(frozen=True)
class VcgConfig:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"invalid auction config {self}")

    @property
    def grid(self) -> TypeGrid:
        return TypeGrid(self.m)


def eligible(w, b) -> list:
    """Bidders who report and meet their own reserve."""
    return [i for i, (wi, bi) in enumerate(zip(w, b)) if bi is not ABSENT and bi >= wi]


def vcg_outcome(w, b) -> AuctionOutcome:
    """Winners and prices of the reserve-VCG mechanism.

    Welfare is additive with unlimited supply, so the welfare-maximising set is
    every eligible bidder (zero bids included). The pivot charge of a winner is
    the best welfare of the others over subsets of the eligible set minus their
    welfare at the chosen set; the charged price never drops below the reserve.
    """
    P = eligible(w, b)
    winners = frozenset(P)
    prices = [Fraction(0)] * len(b)
    for i in P:
        others = [b[j] for j in P if j != i]
        best_without = sum((x for x in others if x > 0), Fraction(0))
        at_chosen = sum(others, Fraction(0))
        pivot = best_without - at_chosen
        prices[i] = max(pivot, w[i])
    return AuctionOutcome(winners, tuple(prices))


def vcg_mechanism(w) -> SingleRoundMechanism:
    w = tuple(w)
    return SingleRoundMechanism(lambda b: OutcomeDistribution.point(vcg_outcome(w, b)),
                                descriptor="w=(" + ",".join(map(fmt_fraction, w)) + ")",
                                name="vcg-reserve")


def build_vcg_class(cfg: VcgConfig, budget: int = CLASS_BUDGET) -> MechanismClass:
    size = (cfg.m + 1) ** cfg.n
    if size > budget:
        raise BudgetExceededError("vcg-reserve class", size, budget)
    return MechanismClass.of(
        "vcg-reserve", (vcg_mechanism(w) for w in itertools.product(cfg.grid.values, repeat=cfg.n))
    )


def vcg_utility(i: int, theta, s) -> Fraction:
    """Quasi-linear: value minus price if i holds a permit, else zero."""
    if not isinstance(s, AuctionOutcome):
        raise DomainMismatchError(f"auction utility given {type(s).__name__}")
    if i not in s.winners:
        return Fraction(0)
    return theta - s.prices[i]


def vcg_commitment(cfg: VcgConfig) -> SingleRoundMechanism:
    """Uniform price z on I_{2m}; every reporting bidder with b_i >= z buys at z."""
    zs = TypeGrid(2 * cfg.m).values
    mass = Fraction(1, len(zs))

    def evaluate(b):
        pairs = []
        for z in zs:
            winners = frozenset(i for i, bi in enumerate(b) if bi is not ABSENT and bi >= z)
            prices = tuple(z if i in winners else Fraction(0) for i in range(len(b)))
            pairs.append((AuctionOutcome(winners, prices), mass))
        return OutcomeDistribution.from_weights(pairs)

    return SingleRoundMechanism(evaluate, descriptor=f"z~I_{2 * cfg.m}", name="vcg-commitment")


def welfare_objective(cfg: VcgConfig, externality) -> ObjectiveFunction:
    """(sum of winners' values - c_t(winners)) / n.

    ``externality`` is either a unit cost kappa in [0, 1] (c(o) = kappa |o|) or
    a mapping from sorted winner tuples to costs in [0, n].
    """
    n = cfg.n
    if isinstance(externality, Mapping):
        table = {tuple(sorted(o)): as_fraction(c) for o, c in externality.items()}
        if any(not 0 <= c <= n for c in table.values()):
            raise ValueError("externality table values must lie in [0, n]")

        def cost(o):
            return table.get(tuple(sorted(o)), Fraction(0))

        key = ("vcg-table", tuple(sorted(table.items())))
    else:
        kappa = as_fraction(externality)
        if not 0 <= kappa <= 1:
            raise ValueError(f"unit externality {kappa} outside [0, 1]")

        def cost(o):
            return kappa * len(o)

        key = ("vcg", kappa)

    def G(theta, s):
        if not isinstance(s, AuctionOutcome):
            raise DomainMismatchError(f"welfare objective given {type(s).__name__}")
        value = sum((theta[i] for i in s.winners if theta[i] is not ABSENT), Fraction(0))
        return (value - cost(s.winners)) / n

    return ObjectiveFunction(G, key)


def vcg_domain(cfg: VcgConfig, members=None) -> Domain:
    Pi = build_vcg_class(cfg)
    if members is not None:
        Pi = Pi.subset(members)
    return Domain(
        name="vcg",
        n=cfg.n,
        type_space=cfg.grid.values,
        utility=vcg_utility,
        mechanism_class=Pi,
        commitment=vcg_commitment(cfg),
        objective=lambda ext: welfare_objective(cfg, ext),
    )
