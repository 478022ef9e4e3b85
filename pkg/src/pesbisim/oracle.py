"""Greatest-fixpoint computation of the eight bisimilarities.

The oracle starts from the full candidate universe (all configuration
pairs, or all matchings for the history-preserving flavors) and removes
elements whose transfer conditions fail against the current set, until
nothing changes.  The hereditary flavors additionally prune any matching
that has a pointwise-smaller valid matching outside the current set,
re-running transfer pruning after each closure pass until a joint
fixpoint.  Two structures are equivalent exactly when the empty pair
(or empty matching) survives.

Transfer conditions, per challenge C1 --X--> C1' (and symmetrically):

* strong: some C2 --Y--> C2' with Y isomorphic to X and the successor
  pair in the relation.  Silent labels compare as ordinary labels unless
  the strong_tau_erasure switch is set.
* branching: either X is all silent and (C1',C2) is in the relation, or
  some silent-reachable C2_0 with (C1,C2_0) in the relation makes a single
  move C2_0 --Y--> C2' with the visible parts of X and Y isomorphic and
  (C1',C2') in the relation.  Additionally, a terminating side must be
  answered by a silent-reachable, related, terminating configuration.

The hp flavors use single-event challenges and extend the matching with
the answering event; branching hp absorbs silent challenges by growing
one side of the matching without touching the visible bijection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import CapExceededError, MalformedWitnessError
from .kinds import BisimulationKind, Flavor, Mode
from .pes import Caps, Configuration, EventStructure, _bits
from .pomsets import Matching, enumerate_matchings, iso_masks

PairKey = tuple[int, int]
TripleKey = tuple[int, tuple[tuple[int, int], ...], int]


@dataclass(frozen=True)
class Relation:
    """A set of related states: configuration pairs or matchings."""

    es1: EventStructure = field(repr=False)
    es2: EventStructure = field(repr=False)
    kind: BisimulationKind
    pairs: frozenset[tuple[Configuration, Configuration]] | None = None
    matchings: frozenset[Matching] | None = None

    def __len__(self) -> int:
        members = self.pairs if self.pairs is not None else self.matchings
        return len(members) if members is not None else 0

    def sorted_members(self) -> list:
        if self.pairs is not None:
            return sorted(self.pairs, key=lambda p: (p[0].mask, p[1].mask))
        assert self.matchings is not None
        return sorted(self.matchings, key=lambda m: (m.mask1, m.mask2, m.pairs))


@dataclass(frozen=True)
class Verdict:
    """Oracle answer; witness is the greatest relation when equivalent,
    absent otherwise (distinguishing evidence comes from the games)."""

    kind: BisimulationKind
    equivalent: bool
    witness: Relation | None


class _Engine:
    """Shared tables for one structure pair and one kind."""

    def __init__(
        self,
        es1: EventStructure,
        es2: EventStructure,
        kind: BisimulationKind,
        strong_tau_erasure: bool,
        caps: Caps | None,
    ):
        self.es1 = es1
        self.es2 = es2
        self.kind = kind
        self.caps = caps or es1.caps
        self.step = kind.step_moves
        self.branching = kind.branching
        self.erase = True if self.branching else strong_tau_erasure
        self._iso_cache: dict = {}
        self._weak_ok_cache: dict = {}

    def trans(self, side: int, mask: int) -> tuple[tuple[int, int], ...]:
        es = self.es1 if side == 1 else self.es2
        return es.transition_masks(mask, self.step)

    def singles(self, side: int, mask: int) -> tuple[int, ...]:
        es = self.es1 if side == 1 else self.es2
        return es._enabled(mask)

    def iso(self, x1: int, x2: int) -> bool:
        if self.erase:
            x1 &= ~self.es1.silent_mask
            x2 &= ~self.es2.silent_mask
        key = (x1, x2)
        hit = self._iso_cache.get(key)
        if hit is None:
            hit = iso_masks(self.es1, x1, self.es2, x2, False)
            self._iso_cache[key] = hit
        return hit

    def silent(self, side: int, e: int) -> bool:
        es = self.es1 if side == 1 else self.es2
        return bool(es.silent_mask >> e & 1)

    def tau_reach(self, side: int, mask: int) -> tuple[int, ...]:
        es = self.es1 if side == 1 else self.es2
        return es.tau_reachable_masks(mask)

    def terminates(self, side: int, mask: int) -> bool:
        es = self.es1 if side == 1 else self.es2
        return es.terminates_mask(mask)

    def ext_ok(self, pairs: tuple[tuple[int, int], ...], e1: int, e2: int) -> bool:
        """Can the pair set absorb (e1 in es1, e2 in es2)?  Labels must
        agree; order against every existing pair must agree both ways."""
        if self.es1.label_of_index(e1) != self.es2.label_of_index(e2):
            return False
        for a, b in pairs:
            if self.es1.leq_idx(a, e1) != self.es2.leq_idx(b, e2):
                return False
            if self.es1.leq_idx(e1, a) != self.es2.leq_idx(e2, b):
                return False
        return True


# ----------------------------------------------------------------------
# candidate universes


def _pair_universe(eng: _Engine) -> list[PairKey]:
    masks1 = sorted(eng.es1.configuration_masks())
    masks2 = sorted(eng.es2.configuration_masks())
    total = len(masks1) * len(masks2)
    if total > eng.caps.max_positions:
        raise CapExceededError("positions", eng.caps.max_positions, total)
    return [(m1, m2) for m1 in masks1 for m2 in masks2]


def _triple_universe(eng: _Engine) -> list[TripleKey]:
    weak = eng.branching
    out: list[TripleKey] = []
    limit = eng.caps.max_positions
    for c1 in eng.es1.configurations():
        for c2 in eng.es2.configurations():
            for m in enumerate_matchings(c1, c2, weak=weak):
                out.append((m.mask1, m.pairs, m.mask2))
                if len(out) > limit:
                    raise CapExceededError("positions", limit, len(out))
    out.sort()
    return out


# ----------------------------------------------------------------------
# transfer conditions


def _pair_supported(eng: _Engine, key: PairKey, alive: set[PairKey]) -> bool:
    m1, m2 = key
    if eng.branching:
        silent1 = eng.es1.silent_mask
        silent2 = eng.es2.silent_mask
        for x, m1p in eng.trans(1, m1):
            if not x & ~silent1 and (m1p, m2) in alive:
                continue
            if not any(
                (m1, m20) in alive
                and any(
                    eng.iso(x, y) and (m1p, m2p) in alive for y, m2p in eng.trans(2, m20)
                )
                for m20 in eng.tau_reach(2, m2)
            ):
                return False
        for y, m2p in eng.trans(2, m2):
            if not y & ~silent2 and (m1, m2p) in alive:
                continue
            if not any(
                (m10, m2) in alive
                and any(
                    eng.iso(x, y) and (m1p, m2p) in alive for x, m1p in eng.trans(1, m10)
                )
                for m10 in eng.tau_reach(1, m1)
            ):
                return False
        if eng.terminates(1, m1) and not any(
            (m1, m20) in alive and eng.terminates(2, m20) for m20 in eng.tau_reach(2, m2)
        ):
            return False
        if eng.terminates(2, m2) and not any(
            (m10, m2) in alive and eng.terminates(1, m10) for m10 in eng.tau_reach(1, m1)
        ):
            return False
        return True
    for x, m1p in eng.trans(1, m1):
        if not any(eng.iso(x, y) and (m1p, m2p) in alive for y, m2p in eng.trans(2, m2)):
            return False
    for y, m2p in eng.trans(2, m2):
        if not any(eng.iso(x, y) and (m1p, m2p) in alive for x, m1p in eng.trans(1, m1)):
            return False
    return True


def _triple_supported(eng: _Engine, key: TripleKey, alive: set[TripleKey]) -> bool:
    m1, pairs, m2 = key
    if eng.branching:
        return _triple_supported_branching(eng, key, alive)
    for e1 in eng.singles(1, m1):
        m1p = m1 | 1 << e1
        if not any(
            eng.ext_ok(pairs, e1, e2)
            and (m1p, tuple(sorted(pairs + ((e1, e2),))), m2 | 1 << e2) in alive
            for e2 in eng.singles(2, m2)
        ):
            return False
    for e2 in eng.singles(2, m2):
        m2p = m2 | 1 << e2
        if not any(
            eng.ext_ok(pairs, e1, e2)
            and (m1 | 1 << e1, tuple(sorted(pairs + ((e1, e2),))), m2p) in alive
            for e1 in eng.singles(1, m1)
        ):
            return False
    return True


def _triple_supported_branching(eng: _Engine, key: TripleKey, alive: set[TripleKey]) -> bool:
    m1, pairs, m2 = key
    for e1 in eng.singles(1, m1):
        m1p = m1 | 1 << e1
        if eng.silent(1, e1) and (m1p, pairs, m2) in alive:
            continue
        ok = False
        for m20 in eng.tau_reach(2, m2):
            if (m1, pairs, m20) not in alive:
                continue
            for e2 in eng.singles(2, m20):
                if eng.silent(1, e1):
                    if not eng.silent(2, e2):
                        continue
                    new_pairs = pairs
                elif not eng.ext_ok(pairs, e1, e2):
                    continue
                else:
                    new_pairs = tuple(sorted(pairs + ((e1, e2),)))
                if (m1p, new_pairs, m20 | 1 << e2) in alive:
                    ok = True
                    break
            if ok:
                break
        if not ok:
            return False
    for e2 in eng.singles(2, m2):
        m2p = m2 | 1 << e2
        if eng.silent(2, e2) and (m1, pairs, m2p) in alive:
            continue
        ok = False
        for m10 in eng.tau_reach(1, m1):
            if (m10, pairs, m2) not in alive:
                continue
            for e1 in eng.singles(1, m10):
                if eng.silent(2, e2):
                    if not eng.silent(1, e1):
                        continue
                    new_pairs = pairs
                elif not eng.ext_ok(pairs, e1, e2):
                    continue
                else:
                    new_pairs = tuple(sorted(pairs + ((e1, e2),)))
                if (m10 | 1 << e1, new_pairs, m2p) in alive:
                    ok = True
                    break
            if ok:
                break
        if not ok:
            return False
    if eng.terminates(1, m1) and not any(
        (m1, pairs, m20) in alive and eng.terminates(2, m20) for m20 in eng.tau_reach(2, m2)
    ):
        return False
    if eng.terminates(2, m2) and not any(
        (m10, pairs, m2) in alive and eng.terminates(1, m10) for m10 in eng.tau_reach(1, m1)
    ):
        return False
    return True


# ----------------------------------------------------------------------
# hereditary closure


def _hereditary_ok(eng: _Engine, key: TripleKey, alive: set[TripleKey]) -> bool:
    """Whether every synchronized shrinking of the matching stays in the set.

    Shrinking restricts one side to a smaller configuration and keeps only
    the pairs whose events survive.  In strong mode the other side is forced
    to the image of the restriction, which is again a configuration because
    the matching preserves order both ways.  In weak mode the pairs pin down
    only the visible image, so the obligation is discharged as soon as one
    completion of that image by silent events of the other side is alive."""
    m1, pairs, m2 = key
    es1, es2 = eng.es1, eng.es2
    cfg1_masks = es1.configuration_masks()
    cfg2_masks = es2.configuration_masks()
    sub = m1
    while True:
        if sub != m1 and sub in cfg1_masks:
            kept = tuple(p for p in pairs if sub >> p[0] & 1)
            image = 0
            for _, j in kept:
                image |= 1 << j
            if eng.branching:
                silent_rest = m2 & es2.silent_mask
                extra = silent_rest
                while True:
                    cand = image | extra
                    if cand in cfg2_masks and (sub, kept, cand) in alive:
                        break
                    if extra == 0:
                        return False
                    extra = (extra - 1) & silent_rest
            elif image in cfg2_masks and (sub, kept, image) not in alive:
                return False
        if sub == 0:
            break
        sub = (sub - 1) & m1
    if not eng.branching:
        return True
    sub = m2
    while True:
        if sub != m2 and sub in cfg2_masks:
            kept = tuple(p for p in pairs if sub >> p[1] & 1)
            image = 0
            for i, _ in kept:
                image |= 1 << i
            silent_rest = m1 & es1.silent_mask
            extra = silent_rest
            while True:
                cand = image | extra
                if cand in cfg1_masks and (cand, kept, sub) in alive:
                    break
                if extra == 0:
                    return False
                extra = (extra - 1) & silent_rest
        if sub == 0:
            break
        sub = (sub - 1) & m2
    return True


def _closure_fixpoint(
    eng: _Engine, universe: list[TripleKey], alive: set[TripleKey]
) -> set[TripleKey]:
    while True:
        changed = False
        for key in universe:
            if key in alive and not _triple_supported(eng, key, alive):
                alive.discard(key)
                changed = True
        if not changed:
            break
    if eng.kind.flavor is Flavor.HHP:
        while True:
            demoted = [
                key
                for key in universe
                if key in alive and not _hereditary_ok(eng, key, alive)
            ]
            if not demoted:
                break
            alive.difference_update(demoted)
            while True:
                changed = False
                for key in universe:
                    if key in alive and not _triple_supported(eng, key, alive):
                        alive.discard(key)
                        changed = True
                if not changed:
                    break
    return alive


# ----------------------------------------------------------------------
# public entry points


def greatest_bisimulation(
    es1: EventStructure,
    es2: EventStructure,
    kind: BisimulationKind,
    *,
    strong_tau_erasure: bool = False,
    caps: Caps | None = None,
) -> Relation:
    """The largest relation closed under the kind's transfer conditions."""
    eng = _Engine(es1, es2, kind, strong_tau_erasure, caps)
    if kind.posetal:
        universe = _triple_universe(eng)
        alive: set[TripleKey] = set(universe)
        alive = _closure_fixpoint(eng, universe, alive)
        matchings = frozenset(
            Matching(es1, es2, m1, m2, pairs, eng.branching)
            for m1, pairs, m2 in alive
        )
        return Relation(es1, es2, kind, matchings=matchings)
    pair_universe = _pair_universe(eng)
    pairs_alive: set[PairKey] = set(pair_universe)
    while True:
        changed = False
        for key in pair_universe:
            if key in pairs_alive and not _pair_supported(eng, key, pairs_alive):
                pairs_alive.discard(key)
                changed = True
        if not changed:
            break
    pairs = frozenset(
        (Configuration(es1, m1), Configuration(es2, m2)) for m1, m2 in pairs_alive
    )
    return Relation(es1, es2, kind, pairs=pairs)


def check(
    es1: EventStructure,
    es2: EventStructure,
    kind: BisimulationKind,
    *,
    strong_tau_erasure: bool = False,
    caps: Caps | None = None,
) -> Verdict:
    """Decide equivalence; the empty pair or matching must survive."""
    relation = greatest_bisimulation(
        es1, es2, kind, strong_tau_erasure=strong_tau_erasure, caps=caps
    )
    if kind.posetal:
        assert relation.matchings is not None
        empty = Matching(es1, es2, 0, 0, (), kind.branching)
        equivalent = empty in relation.matchings
    else:
        assert relation.pairs is not None
        empty_pair = (es1.empty_configuration(), es2.empty_configuration())
        equivalent = empty_pair in relation.pairs
    return Verdict(kind, equivalent, relation if equivalent else None)


def verify_witness(
    es1: EventStructure,
    es2: EventStructure,
    kind: BisimulationKind,
    members: Relation | Iterable,
    *,
    strong_tau_erasure: bool = False,
    caps: Caps | None = None,
) -> bool:
    """Re-check that a claimed relation is closed under the kind's
    transfer conditions (and hereditarily closed for hhp).  Malformed
    elements raise MalformedWitnessError; a well-formed set that merely
    fails closure returns False."""
    eng = _Engine(es1, es2, kind, strong_tau_erasure, caps)
    if isinstance(members, Relation):
        members = members.sorted_members()
    if kind.posetal:
        keys: set[TripleKey] = set()
        for m in members:
            if not isinstance(m, Matching):
                raise MalformedWitnessError(f"expected a matching, got {m!r}")
            if m.es1 is not es1 or m.es2 is not es2:
                raise MalformedWitnessError("matching belongs to a different structure pair")
            if m.weak != eng.branching:
                raise MalformedWitnessError(
                    f"matching mode does not fit {kind}: expected "
                    f"{'weak' if eng.branching else 'strong'}"
                )
            reason = m.invalid_reason()
            if reason:
                raise MalformedWitnessError(reason)
            keys.add((m.mask1, m.pairs, m.mask2))
        for key in keys:
            if not _triple_supported(eng, key, keys):
                return False
        if kind.flavor is Flavor.HHP:
            for key in keys:
                if not _hereditary_ok(eng, key, keys):
                    return False
        return True
    pair_keys: set[PairKey] = set()
    for m in members:
        try:
            c1, c2 = m
        except (TypeError, ValueError):
            raise MalformedWitnessError(f"expected a configuration pair, got {m!r}") from None
        if not isinstance(c1, Configuration) or not isinstance(c2, Configuration):
            raise MalformedWitnessError(f"expected a configuration pair, got {m!r}")
        if c1.owner is not es1 or c2.owner is not es2:
            raise MalformedWitnessError("configuration pair belongs to a different structure pair")
        if not es1.is_configuration_mask(c1.mask) or not es2.is_configuration_mask(c2.mask):
            raise MalformedWitnessError(f"{c1} or {c2} is not a configuration")
        pair_keys.add((c1.mask, c2.mask))
    return all(_pair_supported(eng, key, pair_keys) for key in pair_keys)
