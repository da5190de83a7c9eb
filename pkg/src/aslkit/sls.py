"""Service level specifications: ordered quality levels, satisfaction, scoring."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping


class SchemaError(ValueError):
    """An SLS referenced a dimension unknown to the schema."""


class Level(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @classmethod
    def parse(cls, text: str) -> "Level":
        try:
            return cls[text.upper()]
        except KeyError:
            raise SchemaError(f"unknown level {text!r}") from None

    def label(self) -> str:
        return self.name.capitalize()


class Polarity(enum.Enum):
    HIGHER_BETTER = "HigherBetter"
    LOWER_BETTER = "LowerBetter"

    @classmethod
    def parse(cls, text: str) -> "Polarity":
        for p in cls:
            if p.value == text:
                return p
        raise SchemaError(f"unknown polarity {text!r}")


# Gap charged when a requested dimension is absent from the offer entirely:
# one more than the widest possible level distance.
MISSING_DIMENSION_GAP = 3

# An SLS is a plain mapping dimension-name -> Level.
SLS = Mapping[str, Level]


@dataclass(frozen=True)
class Dimension:
    name: str
    polarity: Polarity


@dataclass(frozen=True)
class SlsSchema:
    """The shared vocabulary of quality dimensions and their polarities."""

    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(names) != len(set(names)):
            raise SchemaError("duplicate dimension names in schema")

    def __contains__(self, name: str) -> bool:
        return any(d.name == name for d in self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def polarity(self, name: str) -> Polarity:
        for d in self.dimensions:
            if d.name == name:
                return d.polarity
        raise SchemaError(f"unknown dimension {name!r}")

    def check(self, sls: SLS) -> None:
        for name in sls:
            if name not in self:
                raise SchemaError(f"unknown dimension {name!r}")


def level_satisfies(offered: Level, requested: Level, polarity: Polarity) -> bool:
    if polarity is Polarity.HIGHER_BETTER:
        return offered >= requested
    return offered <= requested


def satisfies(offered: SLS, requested: SLS, schema: SlsSchema) -> bool:
    """True iff every requested dimension is met by the offer.

    Dimensions absent from the request are unconstrained; dimensions absent
    from the offer fail any constraint on them.
    """
    schema.check(offered)
    schema.check(requested)
    for name, wanted in requested.items():
        if name not in offered:
            return False
        if not level_satisfies(offered[name], wanted, schema.polarity(name)):
            return False
    return True


@dataclass(frozen=True)
class MatchScore:
    satisfied: int
    gap: int

    def sort_key(self) -> tuple[int, int]:
        # Higher satisfied first, then lower gap.
        return (-self.satisfied, self.gap)


def match_score(offered: SLS, requested: SLS, schema: SlsSchema) -> MatchScore:
    """Score an offer against a request: satisfied count and total level gap."""
    schema.check(offered)
    schema.check(requested)
    satisfied = 0
    gap = 0
    for name, wanted in requested.items():
        if name not in offered:
            gap += MISSING_DIMENSION_GAP
        elif level_satisfies(offered[name], wanted, schema.polarity(name)):
            satisfied += 1
        else:
            gap += abs(int(offered[name]) - int(wanted))
    return MatchScore(satisfied, gap)


def worst_level(polarity: Polarity) -> Level:
    return Level.LOW if polarity is Polarity.HIGHER_BETTER else Level.HIGH


def weaken(level: Level, polarity: Polarity) -> Level:
    """One step toward the worst level for this polarity; clamps at the worst."""
    if polarity is Polarity.HIGHER_BETTER:
        return Level(max(int(level) - 1, int(Level.LOW)))
    return Level(min(int(level) + 1, int(Level.HIGH)))
