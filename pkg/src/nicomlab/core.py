"""Shared domain types: type grids, outcomes, exact outcome distributions,
single-round mechanisms, agent populations and objectives.

All probabilities, utilities and objective values here are exact
:class:`fractions.Fraction` values. A non-participating agent is encoded as
``ABSENT`` (``None``) wherever a type or report is expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

from nicomlab.errors import DegenerateDiscountError

ABSENT = None

Profile = tuple
Utility = Callable[[int, Any, Any], Fraction]


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings; floats go through str."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def fmt_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fmt_type(x) -> str:
    return "_" if x is ABSENT else fmt_fraction(x)


@dataclass(frozen=True)
class TypeGrid:
    """The grid {0, 1/m, ..., 1} of exact rationals."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"grid resolution must be positive, got {self.m}")

    @property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(l, self.m) for l in range(self.m + 1))

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def __len__(self) -> int:
        return self.m + 1

    def __contains__(self, x) -> bool:
        if x is ABSENT:
            return False
        x = Fraction(x)
        return 0 <= x <= 1 and (x * self.m).denominator == 1


# -- outcomes ---------------------------------------------------------------


@dataclass(frozen=True)
class FacilityOutcome:
    """Facility positions, each with the set of agents allowed to use it."""

    facilities: tuple[tuple[Fraction, frozenset], ...]

    def canonical(self) -> str:
        parts = []
        for x, users in self.facilities:
            parts.append(f"{fmt_fraction(x)}:{{{','.join(map(str, sorted(users)))}}}")
        return "|".join(parts)


@dataclass(frozen=True)
class AuctionOutcome:
    winners: frozenset
    prices: tuple[Fraction, ...]

    def __post_init__(self):
        for i, p in enumerate(self.prices):
            if not 0 <= p <= 1:
                raise ValueError(f"price {p} of agent {i} outside [0, 1]")
            if i not in self.winners and p != 0:
                raise ValueError(f"non-winner {i} charged {p}")

    def canonical(self) -> str:
        winners = ",".join(map(str, sorted(self.winners)))
        return f"o={{{winners}}};p={','.join(fmt_fraction(p) for p in self.prices)}"


@dataclass(frozen=True)
class AllocationOutcome:
    alloc: tuple[int, ...]

    def __post_init__(self):
        if any(a < 0 for a in self.alloc):
            raise ValueError(f"negative allocation {self.alloc}")

    def canonical(self) -> str:
        return "s=" + ",".join(map(str, self.alloc))


def canonical(outcome) -> str:
    return outcome.canonical() if hasattr(outcome, "canonical") else repr(outcome)


class OutcomeDistribution:
    """A finite distribution over outcomes with exact rational masses.

    Support order is meaningful: it is the order in which samplers walk the
    cumulative distribution, so it must be deterministic.
    """

    __slots__ = ("support",)

    def __init__(self, support: Iterable[tuple[Any, Fraction]]):
        support = tuple((s, Fraction(p)) for s, p in support)
        seen = set()
        total = Fraction(0)
        for s, p in support:
            if not 0 < p <= 1:
                raise ValueError(f"probability {p} outside (0, 1]")
            if s in seen:
                raise ValueError(f"duplicate outcome in support: {s!r}")
            seen.add(s)
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.support = support

    @classmethod
    def point(cls, outcome) -> "OutcomeDistribution":
        return cls(((outcome, Fraction(1)),))

    @classmethod
    def from_weights(cls, pairs: Iterable[tuple[Any, Fraction]]) -> "OutcomeDistribution":
        """Merge duplicate outcomes and drop zero masses, keeping first-seen order."""
        merged: dict = {}
        for s, p in pairs:
            merged[s] = merged.get(s, Fraction(0)) + Fraction(p)
        return cls((s, p) for s, p in merged.items() if p != 0)

    def mix(self, other: "OutcomeDistribution", lam) -> "OutcomeDistribution":
        """Return ``(1 - lam) * self + lam * other``."""
        lam = Fraction(lam)
        return OutcomeDistribution.from_weights(
            [(s, (1 - lam) * p) for s, p in self.support]
            + [(s, lam * p) for s, p in other.support]
        )

    def expect(self, f: Callable[[Any], Fraction]) -> Fraction:
        return sum((p * f(s) for s, p in self.support), Fraction(0))

    def probability(self, outcome) -> Fraction:
        for s, p in self.support:
            if s == outcome:
                return p
        return Fraction(0)

    def as_dict(self) -> dict:
        return dict(self.support)

    def __iter__(self):
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OutcomeDistribution):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self) -> str:
        inner = ", ".join(f"{canonical(s)}: {p}" for s, p in self.support)
        return f"OutcomeDistribution({{{inner}}})"


# -- mechanisms -------------------------------------------------------------


class SingleRoundMechanism:
    """A map from a full report profile to an :class:`OutcomeDistribution`.

    Evaluations are memoised per profile; evaluators must therefore be pure.
    """

    def __init__(self, evaluator: Callable[[Profile], OutcomeDistribution],
                 index: int = 0, descriptor: str = "", name: str = ""):
        self._evaluator = evaluator
        self.index = index
        self.descriptor = descriptor
        self.name = name
        self._cache: dict = {}

    def __call__(self, b: Sequence) -> OutcomeDistribution:
        b = tuple(b)
        dist = self._cache.get(b)
        if dist is None:
            dist = self._evaluator(b)
            if not isinstance(dist, OutcomeDistribution):
                dist = OutcomeDistribution.point(dist)
            self._cache[b] = dist
        return dist

    def reindexed(self, index: int) -> "SingleRoundMechanism":
        return SingleRoundMechanism(self._evaluator, index, self.descriptor, self.name)

    def __repr__(self) -> str:
        return f"SingleRoundMechanism({self.name}#{self.index} {self.descriptor})"


@dataclass(frozen=True)
class MechanismClass:
    name: str
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ValueError("a mechanism class needs at least one member")
        for pos, pi in enumerate(self.members):
            if pi.index != pos:
                raise ValueError(f"member at position {pos} carries index {pi.index}")

    @classmethod
    def of(cls, name: str, mechanisms: Iterable[SingleRoundMechanism]) -> "MechanismClass":
        return cls(name, tuple(pi.reindexed(k) for k, pi in enumerate(mechanisms)))

    def subset(self, indices: Iterable[int]) -> "MechanismClass":
        return MechanismClass.of(self.name, (self.members[k] for k in indices))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k) -> SingleRoundMechanism:
        return self.members[k]


@dataclass(frozen=True)
class ObjectiveFunction:
    """A per-round planner objective G_t(theta, s) with values in [-1, 1].

    Equality and hashing use ``key`` only; two objectives with the same key
    must evaluate identically.
    """

    evaluate: Callable[[Profile, Any], Fraction] = field(compare=False, repr=False)
    key: Hashable = None

    def __call__(self, theta: Profile, s) -> Fraction:
        return self.evaluate(theta, s)


@dataclass(frozen=True)
class Domain:
    """Everything the learner and the auditor need to know about an application."""

    name: str
    n: int
    type_space: tuple
    utility: Utility = field(repr=False)
    mechanism_class: MechanismClass = field(repr=False)
    commitment: SingleRoundMechanism | None = field(repr=False)
    objective: Callable[[Any], ObjectiveFunction] = field(repr=False)

    @property
    def type_spaces(self) -> tuple:
        return (self.type_space,) * self.n


# -- agents -----------------------------------------------------------------


@dataclass(frozen=True)
class AgentPopulation:
    """Agents (n, T, theta, participation, discount), rounds indexed from 0.

    ``types[t][i]`` is agent i's true type in round t, ``ABSENT`` exactly when
    t is not in ``participation[i]``. ``discount[i][t]`` is non-increasing in t.
    """

    n: int
    T: int
    types: tuple
    participation: tuple
    discount: tuple

    def __post_init__(self):
        if len(self.types) != self.T:
            raise ValueError(f"expected {self.T} type profiles, got {len(self.types)}")
        for t, profile in enumerate(self.types):
            if len(profile) != self.n:
                raise ValueError(f"round {t}: profile has {len(profile)} entries, n={self.n}")
            for i, th in enumerate(profile):
                if (th is ABSENT) == (t in self.participation[i]):
                    raise ValueError(f"agent {i} round {t}: type/participation mismatch")
        for i, g in enumerate(self.discount):
            if len(g) != self.T:
                raise ValueError(f"agent {i}: discount has {len(g)} entries, T={self.T}")
            for t, x in enumerate(g):
                if not 0 <= x <= 1:
                    raise ValueError(f"agent {i}: discount {x} outside [0, 1]")
                if t and x > g[t - 1]:
                    raise ValueError(f"agent {i}: discount increases at round {t}")

    @classmethod
    def build(cls, types, discount=None) -> "AgentPopulation":
        """Population from round-major type profiles; participation is read off
        the non-ABSENT entries and the discount defaults to 1 everywhere."""
        types = tuple(tuple(ABSENT if x is ABSENT else as_fraction(x) for x in p)
                      for p in types)
        T = len(types)
        n = len(types[0]) if T else 0
        participation = tuple(
            frozenset(t for t in range(T) if types[t][i] is not ABSENT) for i in range(n)
        )
        if discount is None:
            discount = [[1] * T for _ in range(n)]
        discount = tuple(tuple(as_fraction(x) for x in g) for g in discount)
        return cls(n, T, types, participation, discount)

    def agent_types(self, i: int) -> tuple:
        return tuple(p[i] for p in self.types)


# -- elementary expectations -------------------------------------------------


def expected_utility_single(pi: SingleRoundMechanism, b: Sequence, i: int, theta_i,
                            utility: Utility) -> Fraction:
    """Exact expected utility of agent i with type theta_i when ``b`` is reported."""
    if theta_i is ABSENT:
        return Fraction(0)
    return pi(b).expect(lambda s: utility(i, theta_i, s))


def expected_objective(pi: SingleRoundMechanism, theta: Sequence,
                       G: ObjectiveFunction) -> Fraction:
    theta = tuple(theta)
    return pi(theta).expect(lambda s: G(theta, s))


def long_sightedness(A: AgentPopulation) -> Fraction:
    """max over agents and rounds of min(future discount mass / current
    discount, number of participating rounds). Rounds whose discount is zero
    are skipped."""
    best = None
    for i in range(A.n):
        g = A.discount[i]
        count = len(A.participation[i])
        tail = Fraction(0)
        for t in reversed(range(A.T)):
            tail += g[t]
            if g[t] == 0:
                continue
            value = min(tail / g[t], Fraction(count))
            if best is None or value > best:
                best = value
    if best is None:
        raise DegenerateDiscountError("every discount factor is zero")
    return best


# -- traces -----------------------------------------------------------------


@dataclass(frozen=True)
class RoundRecord:
    round: int
    sampled_index: int | None
    lam: Fraction
    reports: tuple
    types: tuple
    outcome: Any
    objective_value: Fraction
    utilities: tuple


@dataclass(frozen=True)
class Trace:
    records: tuple

    def __len__(self) -> int:
        return len(self.records)

    def realized_objective(self) -> Fraction:
        return sum((r.objective_value for r in self.records), Fraction(0))

    def discounted_utilities(self, A: AgentPopulation) -> tuple:
        return tuple(
            sum((A.discount[i][r.round] * r.utilities[i] for r in self.records), Fraction(0))
            for i in range(A.n)
        )
