"""k-facility location on the grid I_m: posted-location mechanisms and the
report-dependent access-restriction commitment mechanism."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from nicomlab.core import (
    ABSENT,
    Domain,
    FacilityOutcome,
    MechanismClass,
    ObjectiveFunction,
    OutcomeDistribution,
    SingleRoundMechanism,
    TypeGrid,
    as_fraction,
    fmt_fraction,
)
from nicomlab.errors import BudgetExceededError, CommitmentPreconditionError, DomainMismatchError

CLASS_BUDGET = 100_000


@dataclass(frozen=True)
class FacilityConfig:
    n: int
    m: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 1:
            raise ValueError(f"invalid facility config {self}")

    @property
    def grid(self) -> TypeGrid:
        return TypeGrid(self.m)


def _posted(n: int, w: tuple) -> SingleRoundMechanism:
    everyone = frozenset(range(n))
    dist = OutcomeDistribution.point(FacilityOutcome(tuple((x, everyone) for x in w)))
    return SingleRoundMechanism(lambda b: dist,
                                descriptor="w=(" + ",".join(map(fmt_fraction, w)) + ")",
                                name="posted-location")


def build_posted_location_class(cfg: FacilityConfig, budget: int = CLASS_BUDGET) -> MechanismClass:
    """One report-independent mechanism per facility placement in I_m^k."""
    size = (cfg.m + 1) ** cfg.k
    if size > budget:
        raise BudgetExceededError("posted-location class", size, budget)
    placements = itertools.product(cfg.grid.values, repeat=cfg.k)
    return MechanismClass.of("posted-location", (_posted(cfg.n, w) for w in placements))


def facility_utility(i: int, theta, s) -> Fraction:
    """One minus the distance to the nearest facility agent i may use; zero if none."""
    if not isinstance(s, FacilityOutcome):
        raise DomainMismatchError(f"facility utility given {type(s).__name__}")
    dists = [abs(x - theta) for x, users in s.facilities if i in users]
    if not dists:
        return Fraction(0)
    return 1 - min(dists)


def facility_commitment(cfg: FacilityConfig) -> SingleRoundMechanism:
    """Uniform l in {1..m}: one facility at (l-1)/m, the other k-1 at l/m.

    Each reporting agent may use only the facilities nearest to its report.
    """
    if cfg.k < 2:
        raise CommitmentPreconditionError("commitment requires k >= 2")
    m, k, n = cfg.m, cfg.k, cfg.n
    placements = [(Fraction(l - 1, m),) + (Fraction(l, m),) * (k - 1) for l in range(1, m + 1)]

    def evaluate(b):
        pairs = []
        for xs in placements:
            access = [set() for _ in xs]
            for i, bi in enumerate(b):
                if bi is ABSENT:
                    continue
                nearest = min(abs(x - bi) for x in xs)
                for f, x in enumerate(xs):
                    if abs(x - bi) == nearest:
                        access[f].add(i)
            outcome = FacilityOutcome(tuple((x, frozenset(a)) for x, a in zip(xs, access)))
            pairs.append((outcome, Fraction(1, m)))
        return OutcomeDistribution.from_weights(pairs)

    return SingleRoundMechanism(evaluate, descriptor=f"m={m},k={k}", name="facility-commitment")


def facility_objective(cfg: FacilityConfig, r_t) -> ObjectiveFunction:
    """Utilization-weighted utility, averaged over the n residents."""
    r_t = tuple(as_fraction(r) for r in r_t)
    if len(r_t) != cfg.n or any(not 0 <= r <= 1 for r in r_t):
        raise ValueError(f"utilization weights {r_t} invalid for n={cfg.n}")
    n = cfg.n

    def G(theta, s):
        total = Fraction(0)
        for i, th in enumerate(theta):
            if th is not ABSENT and r_t[i]:
                total += r_t[i] * facility_utility(i, th, s)
        return total / n

    return ObjectiveFunction(G, ("facility", r_t))


def facility_domain(cfg: FacilityConfig, members=None) -> Domain:
    Pi = build_posted_location_class(cfg)
    if members is not None:
        Pi = Pi.subset(members)
    commitment = facility_commitment(cfg) if cfg.k >= 2 else None
    return Domain(
        name="facility",
        n=cfg.n,
        type_space=cfg.grid.values,
        utility=facility_utility,
        mechanism_class=Pi,
        commitment=commitment,
        objective=lambda r_t: facility_objective(cfg, r_t),
    )
