"""Shared structures and generators for the test suite.

The small named structures double as documentation: P0 is empty, PA a
single visible event, PAR two concurrent events, SEQ a chain, CH the
interleaving choice, TAU a silent step before a visible one.  CHOICE3
and CHAIN are history-preserving bisimilar but not hereditarily so.
"""

from __future__ import annotations

import random
from pathlib import Path

from pesbisim import EventStructure

FIXTURE_DIR = Path(__file__).parent / "fixtures"
GOLDEN_DIR = Path(__file__).parent / "golden"


def p0() -> EventStructure:
    return EventStructure("P0", [])


def pa() -> EventStructure:
    return EventStructure("PA", [("a", "a")])


def par() -> EventStructure:
    return EventStructure("PAR", [("a", "a"), ("b", "b")])


def seq() -> EventStructure:
    return EventStructure("SEQ", [("a", "a"), ("b", "b")], [("a", "b")])


def ch() -> EventStructure:
    return EventStructure(
        "CH",
        [("a1", "a"), ("b1", "b"), ("b2", "b"), ("a2", "a")],
        [("a1", "b1"), ("b2", "a2")],
        [("a1", "b2")],
    )


def tau() -> EventStructure:
    return EventStructure("TAU", [("t", "tau"), ("a", "a")], [("t", "a")])


def pa_noterm() -> EventStructure:
    return EventStructure("PA_NOTERM", [("a", "a")], termination="none")


def halt_early() -> EventStructure:
    return EventStructure(
        "HALT_EARLY", [("a", "a"), ("b", "b")], termination=[["a"], ["a", "b"]]
    )


def choice3() -> EventStructure:
    return EventStructure(
        "CHOICE3",
        [("a1", "a"), ("a2", "a"), ("af", "a"), ("b", "b")],
        [],
        [("a1", "a2"), ("a1", "b"), ("a2", "b")],
    )


def chain() -> EventStructure:
    return EventStructure(
        "CHAIN",
        [("a1", "a"), ("a2", "a"), ("a3", "a"), ("b", "b")],
        [],
        [("a1", "a3"), ("a1", "b"), ("a2", "b")],
    )


def tau_par() -> EventStructure:
    return EventStructure("TAU_PAR", [("t", "tau"), ("a", "a")])


STANDARD = (p0, pa, par, seq, ch, tau, pa_noterm, halt_early, choice3, chain, tau_par)


def fixture_pairs() -> list[tuple[EventStructure, EventStructure]]:
    """The hand-written comparison pairs used across the suite."""
    out = [
        (p0(), p0()),
        (p0(), pa()),
        (pa(), pa()),
        (par(), ch()),
        (par(), seq()),
        (seq(), ch()),
        (tau(), pa()),
        (tau(), seq()),
        (tau(), tau_par()),
        (pa(), pa_noterm()),
        (halt_early(), par()),
        (choice3(), chain()),
        (ch(), ch()),
        (par(), par()),
    ]
    return out


def random_es(
    rng: random.Random,
    name: str,
    max_events: int = 5,
    alphabet: str = "abc",
    tau_prob: float = 0.2,
) -> EventStructure:
    """A valid random structure: sparse causes among earlier events,
    conflicts only between events with no common causal successor (a
    declared conflict below a join would contradict hereditary closure)."""
    n = rng.randint(0, max_events)
    events = [
        (f"e{i}", "tau" if rng.random() < tau_prob else rng.choice(alphabet))
        for i in range(n)
    ]
    causes = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.25:
                causes.append((f"e{i}", f"e{j}"))
    below: list[set[int]] = []
    for j in range(n):
        seen = {j}
        stack = [j]
        while stack:
            k = stack.pop()
            for x, y in causes:
                if int(y[1:]) == k and int(x[1:]) not in seen:
                    seen.add(int(x[1:]))
                    stack.append(int(x[1:]))
        below.append(seen)
    above = [set(j for j in range(n) if i in below[j]) for i in range(n)]
    conflicts = []
    for i in range(n):
        for j in range(i + 1, n):
            if above[i] & above[j]:
                continue
            if rng.random() < 0.2:
                conflicts.append((f"e{i}", f"e{j}"))
    return EventStructure(name, events, causes, conflicts)


def random_pairs(seed: int, count: int, **kwargs):
    """Deterministic stream of random structure pairs."""
    rng = random.Random(seed)
    return [
        (random_es(rng, f"L{i}", **kwargs), random_es(rng, f"R{i}", **kwargs))
        for i in range(count)
    ]


def renamed_copy(es: EventStructure, prefix: str = "r") -> EventStructure:
    """The same structure under fresh event identifiers."""
    names = {e: f"{prefix}{i}" for i, e in enumerate(es.events)}
    events = [(names[e], es.label(e).name) for e in es.events]
    causes = [
        (names[x], names[y]) for x in es.events for y in es.events if x != y and es.leq(x, y)
    ]
    conflicts = [
        (names[x], names[y])
        for i, x in enumerate(es.events)
        for y in es.events[i + 1 :]
        if es.in_conflict(x, y)
    ]
    policy = es.termination
    if policy.kind == "explicit":
        termination = [
            [names[e] for e in es.events_of_mask(m)] for m in sorted(policy.masks)
        ]
    else:
        termination = policy.kind
    return EventStructure(f"{es.name}-renamed", events, causes, conflicts, termination)
