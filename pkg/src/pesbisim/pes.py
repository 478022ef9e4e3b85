"""Finite labelled prime event structures with silent events.

An event structure couples a finite set of labelled events with a causality
partial order and a hereditary, irreflexive conflict relation.  Its states
are configurations: finite event sets that are conflict-free and downward
closed under causality.  The label name ``tau`` is reserved for silent
events.

Construction validates the declarations and precomputes the closed
relation tables.  Everything is immutable after construction and every
operation is a pure function of its inputs, so instances are safe to share
across threads.  Events are indexed by declaration order internally;
configurations are bitmasks over those indices, and the canonical order of
configurations is ascending mask order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CapExceededError, ValidationError

SILENT_LABEL = "tau"


@dataclass(frozen=True)
class Label:
    """An event label; the name ``tau`` is reserved for silent events."""

    name: str

    @property
    def silent(self) -> bool:
        return self.name == SILENT_LABEL

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Caps:
    """Instance-size limits that turn combinatorial blow-ups into clean errors.

    max_positions bounds both game arena sizes and oracle candidate sets.
    """

    max_events: int = 12
    max_configurations: int = 4096
    max_positions: int = 200_000


@dataclass(frozen=True)
class TerminationPolicy:
    """Which configurations count as successfully terminated.

    kind is one of 'maximal' (configurations with no outgoing transition),
    'none', or 'explicit' (exactly the listed configuration masks).
    """

    kind: str
    masks: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.kind not in ("maximal", "none", "explicit"):
            raise ValidationError(f"unknown termination policy {self.kind!r}")
        if self.kind != "explicit" and self.masks:
            raise ValidationError("termination masks only allowed for the explicit policy")


@dataclass(frozen=True)
class RelationTables:
    """Closed binary relations of an event structure, as name pairs.

    causality is reflexive-transitive, conflict is symmetric and
    hereditary, consistency is the complement of conflict, concurrency
    holds for causally unrelated, conflict-free pairs of distinct events.
    """

    causality: frozenset[tuple[str, str]]
    conflict: frozenset[tuple[str, str]]
    consistency: frozenset[tuple[str, str]]
    concurrency: frozenset[tuple[str, str]]


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class EventStructure:
    """A validated prime event structure.

    events are (event id, label name) pairs in declaration order; causes
    and conflicts are pairs of event ids declaring immediate causality and
    conflict.  Causality is closed reflexively and transitively, conflict
    symmetrically and hereditarily.  termination is 'maximal', 'none', or
    an iterable of event-id sets naming the terminating configurations.
    """

    def __init__(
        self,
        name: str,
        events: Sequence[tuple[str, str]] = (),
        causes: Iterable[tuple[str, str]] = (),
        conflicts: Iterable[tuple[str, str]] = (),
        termination: str | Iterable[Iterable[str]] = "maximal",
        caps: Caps | None = None,
    ):
        caps = caps or Caps()
        if len(events) > caps.max_events:
            raise CapExceededError("events", caps.max_events, len(events))
        ids = [e for e, _ in events]
        seen: set[str] = set()
        for e in ids:
            if e in seen:
                raise ValidationError(f"duplicate event {e!r}")
            seen.add(e)
        self.name = name
        self.caps = caps
        self._events: tuple[str, ...] = tuple(ids)
        self._labels: tuple[Label, ...] = tuple(Label(lbl) for _, lbl in events)
        self._index: dict[str, int] = {e: i for i, e in enumerate(ids)}
        n = len(ids)
        self._n = n
        self.full_mask = (1 << n) - 1
        self.silent_mask = 0
        for i, lbl in enumerate(self._labels):
            if lbl.silent:
                self.silent_mask |= 1 << i

        pred = [0] * n  # declared immediate causes
        for c, e in causes:
            ic, ie = self._resolve(c), self._resolve(e)
            if ic == ie:
                raise ValidationError(f"causality cycle: {c!r} declared as its own cause")
            pred[ie] |= 1 << ic
        below = [0] * n  # below[i] = mask of j with e_j <= e_i, including i
        for i in range(n):
            reach = 1 << i
            stack = [i]
            while stack:
                k = stack.pop()
                new = pred[k] & ~reach
                reach |= new
                stack.extend(_bits(new))
            below[i] = reach
        for i in range(n):
            for j in _bits(below[i]):
                if j != i and below[j] >> i & 1:
                    raise ValidationError(
                        f"causality cycle involving {ids[i]!r} and {ids[j]!r}"
                    )
        above = [0] * n
        for i in range(n):
            for j in _bits(below[i]):
                above[j] |= 1 << i

        conflict = [0] * n
        declared_conflicts = list(conflicts)
        for a, b in declared_conflicts:
            ia, ib = self._resolve(a), self._resolve(b)
            if ia == ib:
                raise ValidationError(f"self-conflict declared on {a!r}")
            if below[ia] >> ib & 1 or below[ib] >> ia & 1:
                raise ValidationError(
                    f"conflict between causally related events {a!r} and {b!r}"
                )
        # Hereditary closure in one pass: a declared pair propagates to all
        # pairs of causal successors of its two sides.
        for a, b in declared_conflicts:
            ia, ib = self._resolve(a), self._resolve(b)
            for u in _bits(above[ia]):
                conflict[u] |= above[ib]
            for v in _bits(above[ib]):
                conflict[v] |= above[ia]
        for i in range(n):
            if conflict[i] >> i & 1:
                culprit = next(
                    (a, b)
                    for a, b in declared_conflicts
                    if above[self._resolve(a)] >> i & 1 and above[self._resolve(b)] >> i & 1
                )
                raise ValidationError(
                    f"self-conflict after closure: {culprit[0]!r} and {culprit[1]!r} "
                    f"are in conflict but share the causal successor {ids[i]!r}"
                )

        self._below = tuple(below)
        self._above = tuple(above)
        self._conflict = tuple(conflict)
        self._concurrent = tuple(
            self.full_mask & ~(below[i] | above[i] | conflict[i]) for i in range(n)
        )

        if termination == "maximal":
            self._termination = TerminationPolicy("maximal")
        elif termination == "none":
            self._termination = TerminationPolicy("none")
        elif isinstance(termination, str):
            raise ValidationError(f"unknown termination policy {termination!r}")
        else:
            masks = set()
            for group in termination:
                m = self.mask_of(group)
                if not self.is_configuration_mask(m):
                    raise ValidationError(
                        f"terminating set {{{', '.join(sorted(group))}}} is not a configuration"
                    )
                masks.add(m)
            self._termination = TerminationPolicy("explicit", frozenset(masks))

        self._configs: tuple[Configuration, ...] | None = None
        self._config_masks: frozenset[int] | None = None
        self._enabled_cache: dict[int, tuple[int, ...]] = {}
        self._trans_cache: dict[tuple[int, bool], tuple[tuple[int, int], ...]] = {}
        self._tau_cache: dict[int, tuple[int, ...]] = {}

    def _resolve(self, event: str) -> int:
        try:
            return self._index[event]
        except KeyError:
            raise ValidationError(f"unknown event {event!r}") from None

    # ------------------------------------------------------------------
    # basic views

    @property
    def events(self) -> tuple[str, ...]:
        return self._events

    @property
    def termination(self) -> TerminationPolicy:
        return self._termination

    def label(self, event: str) -> Label:
        return self._labels[self._resolve(event)]

    def label_of_index(self, i: int) -> Label:
        return self._labels[i]

    def event_index(self, event: str) -> int:
        return self._resolve(event)

    def mask_of(self, events: Iterable[str]) -> int:
        m = 0
        for e in events:
            m |= 1 << self._resolve(e)
        return m

    def events_of_mask(self, mask: int) -> tuple[str, ...]:
        return tuple(self._events[i] for i in _bits(mask))

    def format_mask(self, mask: int) -> str:
        return "{" + ",".join(self.events_of_mask(mask)) + "}"

    # ------------------------------------------------------------------
    # derived relations

    def leq(self, e1: str, e2: str) -> bool:
        return bool(self._below[self._resolve(e2)] >> self._resolve(e1) & 1)

    def leq_idx(self, i: int, j: int) -> bool:
        return bool(self._below[j] >> i & 1)

    def in_conflict(self, e1: str, e2: str) -> bool:
        return bool(self._conflict[self._resolve(e1)] >> self._resolve(e2) & 1)

    def consistent(self, e1: str, e2: str) -> bool:
        return not self.in_conflict(e1, e2)

    def concurrent(self, e1: str, e2: str) -> bool:
        return bool(self._concurrent[self._resolve(e1)] >> self._resolve(e2) & 1)

    def relation_tables(self) -> RelationTables:
        names = self._events
        causality = set()
        conflict = set()
        consistency = set()
        concurrency = set()
        for i in range(self._n):
            for j in range(self._n):
                if self._below[j] >> i & 1:
                    causality.add((names[i], names[j]))
                if self._conflict[i] >> j & 1:
                    conflict.add((names[i], names[j]))
                else:
                    consistency.add((names[i], names[j]))
                if self._concurrent[i] >> j & 1:
                    concurrency.add((names[i], names[j]))
        return RelationTables(
            frozenset(causality), frozenset(conflict), frozenset(consistency), frozenset(concurrency)
        )

    # ------------------------------------------------------------------
    # configurations

    def is_configuration_mask(self, mask: int) -> bool:
        if mask & ~self.full_mask:
            return False
        for i in _bits(mask):
            if self._below[i] & ~mask:
                return False
            if self._conflict[i] & mask:
                return False
        return True

    def _enabled(self, mask: int) -> tuple[int, ...]:
        """Event indices whose addition to the configuration mask yields
        another configuration."""
        cached = self._enabled_cache.get(mask)
        if cached is None:
            out = []
            for e in range(self._n):
                if mask >> e & 1:
                    continue
                if self._below[e] & ~(mask | 1 << e):
                    continue
                if self._conflict[e] & mask:
                    continue
                out.append(e)
            cached = tuple(out)
            self._enabled_cache[mask] = cached
        return cached

    def configurations(self) -> tuple[Configuration, ...]:
        """All configurations, in ascending mask order."""
        if self._configs is None:
            masks = {0}
            stack = [0]
            limit = self.caps.max_configurations
            while stack:
                m = stack.pop()
                for e in self._enabled(m):
                    m2 = m | 1 << e
                    if m2 not in masks:
                        if len(masks) >= limit:
                            raise CapExceededError("configurations", limit, len(masks) + 1)
                        masks.add(m2)
                        stack.append(m2)
            self._config_masks = frozenset(masks)
            self._configs = tuple(Configuration(self, m) for m in sorted(masks))
        return self._configs

    def configuration_masks(self) -> frozenset[int]:
        self.configurations()
        assert self._config_masks is not None
        return self._config_masks

    def empty_configuration(self) -> Configuration:
        return Configuration(self, 0)

    def configuration(self, events: Iterable[str]) -> Configuration:
        mask = self.mask_of(events)
        if not self.is_configuration_mask(mask):
            raise ValidationError(f"{self.format_mask(mask)} is not a configuration of {self.name}")
        return Configuration(self, mask)

    # ------------------------------------------------------------------
    # transitions

    def transition_masks(self, mask: int, step: bool) -> tuple[tuple[int, int], ...]:
        """(pomset mask, target mask) pairs of the outgoing transitions,
        ordered by target mask."""
        key = (mask, step)
        cached = self._trans_cache.get(key)
        if cached is None:
            out = []
            for target in sorted(self.configuration_masks()):
                if target != mask and target & mask == mask:
                    x = target & ~mask
                    if step and not self.pairwise_concurrent(x):
                        continue
                    out.append((x, target))
            cached = tuple(out)
            self._trans_cache[key] = cached
        return cached

    def pairwise_concurrent(self, mask: int) -> bool:
        for i in _bits(mask):
            if mask & ~(self._concurrent[i] | 1 << i):
                return False
        return True

    def pomset_transitions(self, config: Configuration) -> tuple[Transition, ...]:
        """Transitions adding any nonempty event set that extends the
        configuration to a larger one."""
        self._own(config)
        return tuple(
            Transition(config, x, Configuration(self, t), "pomset")
            for x, t in self.transition_masks(config.mask, step=False)
        )

    def step_transitions(self, config: Configuration) -> tuple[Transition, ...]:
        """Pomset transitions whose added events are pairwise concurrent."""
        self._own(config)
        return tuple(
            Transition(config, x, Configuration(self, t), "step")
            for x, t in self.transition_masks(config.mask, step=True)
        )

    def tau_reachable_masks(self, mask: int) -> tuple[int, ...]:
        cached = self._tau_cache.get(mask)
        if cached is None:
            seen = {mask}
            stack = [mask]
            while stack:
                m = stack.pop()
                for e in self._enabled(m):
                    if self.silent_mask >> e & 1:
                        m2 = m | 1 << e
                        if m2 not in seen:
                            seen.add(m2)
                            stack.append(m2)
            cached = tuple(sorted(seen))
            self._tau_cache[mask] = cached
        return cached

    def tau_closure(self, config: Configuration) -> tuple[Configuration, ...]:
        """Configurations reachable by adding silent events only, the
        given configuration included, in ascending mask order."""
        self._own(config)
        return tuple(Configuration(self, m) for m in self.tau_reachable_masks(config.mask))

    def all_silent(self, events: Iterable[str]) -> bool:
        """True iff every event of the nonempty set is silent."""
        mask = self.mask_of(events)
        if not mask:
            raise ValidationError("empty pomset has no silence status")
        return not (mask & ~self.silent_mask)

    def terminates_mask(self, mask: int) -> bool:
        pol = self._termination
        if pol.kind == "maximal":
            return not self._enabled(mask)
        if pol.kind == "none":
            return False
        return mask in pol.masks

    def terminates(self, config: Configuration) -> bool:
        """True iff the configuration counts as successfully terminated
        under this structure's termination policy."""
        self._own(config)
        return self.terminates_mask(config.mask)

    def _own(self, config: Configuration) -> None:
        if config.owner is not self:
            raise ValidationError(
                f"configuration {config} belongs to {config.owner.name}, not {self.name}"
            )

    def __repr__(self) -> str:
        return f"EventStructure({self.name!r}, {self._n} events)"


@dataclass(frozen=True)
class Configuration:
    """A conflict-free, downward-closed event set of one structure."""

    owner: EventStructure = field(repr=False)
    mask: int

    @property
    def events(self) -> tuple[str, ...]:
        return self.owner.events_of_mask(self.mask)

    @property
    def visible_mask(self) -> int:
        return self.mask & ~self.owner.silent_mask

    @property
    def visible_events(self) -> tuple[str, ...]:
        """The events left after erasing silent ones."""
        return self.owner.events_of_mask(self.visible_mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __str__(self) -> str:
        return self.owner.format_mask(self.mask)


@dataclass(frozen=True)
class Transition:
    """One transition: source plus a disjoint event set reaching target.

    kind is 'pomset', 'step' (pairwise concurrent events) or 'tau-star'
    (silent events only); the stricter kinds imply the corresponding
    structural property of the added events.
    """

    source: Configuration
    added_mask: int
    target: Configuration
    kind: str = "pomset"

    def __post_init__(self) -> None:
        es = self.source.owner
        if self.target.owner is not es:
            raise ValidationError("transition endpoints belong to different structures")
        if not self.added_mask or self.added_mask & self.source.mask:
            raise ValidationError("added events must be nonempty and disjoint from the source")
        if self.target.mask != self.source.mask | self.added_mask:
            raise ValidationError("transition target must be source plus added events")
        if not es.is_configuration_mask(self.target.mask):
            raise ValidationError("transition target is not a configuration")
        if self.kind == "step" and not es.pairwise_concurrent(self.added_mask):
            raise ValidationError("step transition events must be pairwise concurrent")
        if self.kind == "tau-star" and self.added_mask & ~es.silent_mask:
            raise ValidationError("tau-star transition events must all be silent")
        if self.kind not in ("pomset", "step", "tau-star"):
            raise ValidationError(f"unknown transition kind {self.kind!r}")

    @property
    def added_events(self) -> tuple[str, ...]:
        return self.source.owner.events_of_mask(self.added_mask)

    def __str__(self) -> str:
        es = self.source.owner
        return f"{self.source} --{es.format_mask(self.added_mask)}--> {self.target}"
