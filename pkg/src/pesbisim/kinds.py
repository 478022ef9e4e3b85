"""The eight bisimilarity kinds: four flavors in two modes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError


class Flavor(Enum):
    POMSET = "pomset"
    STEP = "step"
    HP = "hp"
    HHP = "hhp"


class Mode(Enum):
    STRONG = "strong"
    BRANCHING = "branching"


@dataclass(frozen=True)
class BisimulationKind:
    """A flavor (pomset, step, hp, hhp) paired with a mode (strong,
    branching).  hp and hhp relate configurations through matchings;
    pomset and step relate bare configuration pairs."""

    flavor: Flavor
    mode: Mode

    @classmethod
    def parse(cls, flavor: str, mode: str) -> BisimulationKind:
        try:
            return cls(Flavor(flavor), Mode(mode))
        except ValueError:
            raise ValidationError(f"unknown bisimulation kind {flavor!r}/{mode!r}") from None

    @property
    def posetal(self) -> bool:
        return self.flavor in (Flavor.HP, Flavor.HHP)

    @property
    def step_moves(self) -> bool:
        return self.flavor is Flavor.STEP

    @property
    def branching(self) -> bool:
        return self.mode is Mode.BRANCHING

    def __str__(self) -> str:
        return f"{self.mode.value} {self.flavor.value}"


ALL_KINDS: tuple[BisimulationKind, ...] = tuple(
    BisimulationKind(f, m) for f in Flavor for m in Mode
)
