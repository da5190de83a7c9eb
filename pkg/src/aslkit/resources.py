"""Resource vectors: demand, supply, the fit relation and the demand algebra.

Three resource kinds are modeled:

* additive  -- consumed units that accumulate over execution (e.g. Energy)
* maximal   -- peak capacity that must be available at once (e.g. Memory)
* presence  -- a capability that must simply exist (e.g. WiFiAdapter)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

# Quantities are kept in signed 64-bit range; exceeding it is an error,
# never a silent saturation.
INT_LIMIT = 2**63 - 1


class Kind(enum.Enum):
    ADDITIVE = "Additive"
    MAXIMAL = "Maximal"
    PRESENCE = "Presence"


@dataclass(frozen=True)
class ResourceKind:
    """One named resource in a profile; the kind is fixed per name."""

    name: str
    kind: Kind
    unit: str = ""


class DemandRangeError(ValueError):
    """A combined demand left the representable integer range."""


def _clean(entries: Mapping[str, int] | None) -> dict[str, int]:
    out: dict[str, int] = {}
    for name, value in (entries or {}).items():
        if value < 0:
            raise ValueError(f"negative quantity for {name!r}: {value}")
        if value > INT_LIMIT:
            raise DemandRangeError(f"quantity for {name!r} exceeds range: {value}")
        if value > 0:
            out[name] = int(value)
    return out


@dataclass(frozen=True)
class ResourceDemand:
    """What a program (fragment) requires. Absent key means zero / not needed."""

    additive: Mapping[str, int] = field(default_factory=dict)
    maximal: Mapping[str, int] = field(default_factory=dict)
    presence: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "additive", _clean(self.additive))
        object.__setattr__(self, "maximal", _clean(self.maximal))
        object.__setattr__(self, "presence", frozenset(self.presence))

    @property
    def is_empty(self) -> bool:
        return not (self.additive or self.maximal or self.presence)

    def leq(self, other: "ResourceDemand") -> bool:
        """Componentwise demand comparison (used by dominance pruning)."""
        return (
            all(v <= other.additive.get(k, 0) for k, v in self.additive.items())
            and all(v <= other.maximal.get(k, 0) for k, v in self.maximal.items())
            and self.presence <= other.presence
        )


EMPTY_DEMAND = ResourceDemand()


@dataclass(frozen=True)
class ResourceSupply:
    """What an execution environment provides.

    ``quantities`` serves both additive budgets and maximal capacities;
    ``capabilities`` answers presence requirements.
    """

    quantities: Mapping[str, int] = field(default_factory=dict)
    capabilities: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "quantities", _clean(self.quantities))
        object.__setattr__(self, "capabilities", frozenset(self.capabilities))


@dataclass(frozen=True)
class FitFailure:
    resource: str
    kind: Kind
    demanded: int | None  # None for presence
    supplied: int | None

    def describe(self) -> str:
        if self.kind is Kind.PRESENCE:
            return f"missing capability {self.resource}"
        return (
            f"{self.resource}: demanded {self.demanded}, "
            f"supplied {self.supplied} ({self.kind.value.lower()})"
        )


@dataclass(frozen=True)
class FitResult:
    ok: bool
    failures: tuple[FitFailure, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def fits(demand: ResourceDemand, supply: ResourceSupply) -> FitResult:
    """Check whether ``supply`` can host ``demand``; total, never raises.

    Unknown names in the demand compare against zero / absent and fail.
    """
    failures: list[FitFailure] = []
    for name in sorted(demand.presence):
        if name not in supply.capabilities:
            failures.append(FitFailure(name, Kind.PRESENCE, None, None))
    for kind, entries in ((Kind.ADDITIVE, demand.additive), (Kind.MAXIMAL, demand.maximal)):
        for name in sorted(entries):
            needed = entries[name]
            have = supply.quantities.get(name, 0)
            if needed > have:
                failures.append(FitFailure(name, kind, needed, have))
    return FitResult(not failures, tuple(failures))


def _checked(value: int, context: str) -> int:
    if value > INT_LIMIT:
        raise DemandRangeError(f"demand out of range while combining ({context})")
    return value


def seq(a: ResourceDemand, b: ResourceDemand) -> ResourceDemand:
    """Sequential composition: additive sums, maximal takes max, presence unions."""
    additive = dict(a.additive)
    for name, value in b.additive.items():
        additive[name] = _checked(additive.get(name, 0) + value, f"additive {name}")
    maximal = dict(a.maximal)
    for name, value in b.maximal.items():
        maximal[name] = max(maximal.get(name, 0), value)
    return ResourceDemand(additive, maximal, a.presence | b.presence)


def branch(a: ResourceDemand, b: ResourceDemand) -> ResourceDemand:
    """Worst-case join of two execution branches."""
    additive = dict(a.additive)
    for name, value in b.additive.items():
        additive[name] = max(additive.get(name, 0), value)
    maximal = dict(a.maximal)
    for name, value in b.maximal.items():
        maximal[name] = max(maximal.get(name, 0), value)
    return ResourceDemand(additive, maximal, a.presence | b.presence)


def scale(k: int, a: ResourceDemand) -> ResourceDemand:
    """Demand of a body repeated ``k`` times: additive scales, the rest is unchanged."""
    if k < 1:
        raise ValueError(f"scale factor must be >= 1, got {k}")
    additive = {name: _checked(value * k, f"additive {name}") for name, value in a.additive.items()}
    return ResourceDemand(additive, a.maximal, a.presence)


def seq_all(demands: Iterable[ResourceDemand]) -> ResourceDemand:
    out = EMPTY_DEMAND
    for d in demands:
        out = seq(out, d)
    return out


def branch_all(demands: Iterable[ResourceDemand]) -> ResourceDemand:
    it = iter(demands)
    try:
        out = next(it)
    except StopIteration:
        return EMPTY_DEMAND
    for d in it:
        out = branch(out, d)
    return out
