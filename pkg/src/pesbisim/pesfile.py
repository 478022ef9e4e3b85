"""Line-oriented text format for event structures.

Grammar (one statement per line, any amount of surrounding whitespace):

    pes <name>
    event <id> : <label>
    cause <id> < <id>
    conflict <id> # <id>          (the symbol form "♯" also works)
    terminating maximal
    terminating none
    terminating { {<id>,...} ... }

The first statement must be ``pes``.  Events must be declared before they
are referenced; at most one ``terminating`` statement is allowed, and the
policy defaults to ``maximal``.  The label ``tau`` marks silent events.
A ``#`` at the start of a line or after whitespace begins a comment, with
one exception: the operator slot of a ``conflict`` statement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .pes import Caps, EventStructure

_TOKEN = re.compile(r"\S+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.'-]*\Z")
_CONFLICT_OPS = ("#", "♯")


@dataclass(frozen=True)
class PesDocument:
    """The parsed declarations, in source order, before validation."""

    name: str
    events: tuple[tuple[str, str], ...]
    causes: tuple[tuple[str, str], ...]
    conflicts: tuple[tuple[str, str], ...]
    termination: str | tuple[tuple[str, ...], ...]

    def to_event_structure(self, caps: Caps | None = None) -> EventStructure:
        termination = (
            self.termination if isinstance(self.termination, str) else list(self.termination)
        )
        return EventStructure(
            self.name,
            list(self.events),
            list(self.causes),
            list(self.conflicts),
            termination,
            caps,
        )


def _tokenize(line: str, lineno: int, conflict_aware: bool) -> list[tuple[str, int]]:
    """Whitespace tokens with 1-based columns, truncated at a comment.

    conflict_aware keeps a '#' in the operator slot (third token) of a
    conflict statement from starting a comment."""
    tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
    out: list[tuple[str, int]] = []
    for i, (tok, col) in enumerate(tokens):
        if tok.startswith("#") and not (conflict_aware and i == 2 and tok == "#"):
            break
        out.append((tok, col))
    return out


def _ident(tok: str, col: int, lineno: int, what: str) -> str:
    if not _IDENT.match(tok):
        raise ParseError(lineno, col, f"invalid {what} {tok!r}")
    return tok


def _parse_terminating_sets(
    rest: str, offset: int, lineno: int
) -> tuple[tuple[str, ...], ...]:
    """Parse '{ {a,b} {c} }' into a tuple of event-name tuples."""
    groups: list[tuple[str, ...]] = []
    pos = 0
    depth = 0
    current: list[str] | None = None
    word = ""
    word_col = 0

    def flush(col: int) -> None:
        nonlocal word
        if word:
            if current is None:
                raise ParseError(lineno, word_col, "event name outside a set")
            current.append(_ident(word, word_col, lineno, "event name"))
            word = ""

    while pos < len(rest):
        ch = rest[pos]
        col = offset + pos + 1
        if ch == "#" and (pos == 0 or rest[pos - 1].isspace()):
            break
        if ch == "{":
            flush(col)
            depth += 1
            if depth == 1:
                pass
            elif depth == 2:
                current = []
            else:
                raise ParseError(lineno, col, "sets nest at most one level")
        elif ch == "}":
            flush(col)
            if depth == 2:
                assert current is not None
                groups.append(tuple(current))
                current = None
            elif depth != 1:
                raise ParseError(lineno, col, "unbalanced '}'")
            depth -= 1
        elif ch == ",":
            flush(col)
            if current is None:
                raise ParseError(lineno, col, "',' outside a set")
        elif ch.isspace():
            flush(col)
        else:
            if not word:
                word_col = col
            word += ch
        pos += 1
    flush(offset + pos + 1)
    if depth != 0:
        raise ParseError(lineno, offset + pos, "unbalanced '{'")
    return tuple(groups)


def parse_document(text: str) -> PesDocument:
    name: str | None = None
    events: list[tuple[str, str]] = []
    declared: set[str] = set()
    causes: list[tuple[str, str]] = []
    conflicts: list[tuple[str, str]] = []
    termination: str | tuple[tuple[str, ...], ...] | None = None

    def need_declared(tok: str, col: int, lineno: int) -> str:
        if tok not in declared:
            raise ParseError(lineno, col, f"undeclared event {tok!r}")
        return tok

    for lineno, raw in enumerate(text.splitlines(), start=1):
        head = _TOKEN.search(raw)
        if head is None or head.group().startswith("#"):
            continue
        keyword = head.group()
        tokens = _tokenize(raw, lineno, conflict_aware=keyword == "conflict")
        if name is None and keyword != "pes":
            raise ParseError(lineno, head.start() + 1, "expected 'pes <name>' first")
        if keyword == "pes":
            if name is not None:
                raise ParseError(lineno, head.start() + 1, "duplicate 'pes' statement")
            if len(tokens) != 2:
                raise ParseError(lineno, head.start() + 1, "expected 'pes <name>'")
            name = _ident(tokens[1][0], tokens[1][1], lineno, "structure name")
        elif keyword == "event":
            if len(tokens) != 4 or tokens[2][0] != ":":
                raise ParseError(lineno, head.start() + 1, "expected 'event <id> : <label>'")
            ev = _ident(tokens[1][0], tokens[1][1], lineno, "event name")
            lbl = _ident(tokens[3][0], tokens[3][1], lineno, "label")
            if ev in declared:
                raise ParseError(lineno, tokens[1][1], f"duplicate event {ev!r}")
            declared.add(ev)
            events.append((ev, lbl))
        elif keyword == "cause":
            if len(tokens) != 4 or tokens[2][0] != "<":
                raise ParseError(lineno, head.start() + 1, "expected 'cause <id> < <id>'")
            a = need_declared(tokens[1][0], tokens[1][1], lineno)
            b = need_declared(tokens[3][0], tokens[3][1], lineno)
            causes.append((a, b))
        elif keyword == "conflict":
            if len(tokens) != 4 or tokens[2][0] not in _CONFLICT_OPS:
                raise ParseError(lineno, head.start() + 1, "expected 'conflict <id> # <id>'")
            a = need_declared(tokens[1][0], tokens[1][1], lineno)
            b = need_declared(tokens[3][0], tokens[3][1], lineno)
            conflicts.append((a, b))
        elif keyword == "terminating":
            if termination is not None:
                raise ParseError(lineno, head.start() + 1, "duplicate 'terminating' statement")
            if len(tokens) >= 2 and tokens[1][0] in ("maximal", "none") and len(tokens) == 2:
                termination = tokens[1][0]
            else:
                brace = raw.find("{", head.end())
                if brace < 0:
                    raise ParseError(
                        lineno,
                        head.start() + 1,
                        "expected 'terminating maximal|none|{ {...} ... }'",
                    )
                groups = _parse_terminating_sets(raw[brace:], brace, lineno)
                for group in groups:
                    for ev in group:
                        if ev not in declared:
                            raise ParseError(lineno, brace + 1, f"undeclared event {ev!r}")
                termination = groups
        else:
            raise ParseError(lineno, head.start() + 1, f"unknown statement {keyword!r}")
    if name is None:
        raise ParseError(1, 1, "empty document: expected 'pes <name>'")
    return PesDocument(
        name,
        tuple(events),
        tuple(causes),
        tuple(conflicts),
        "maximal" if termination is None else termination,
    )


def format_document(doc: PesDocument) -> str:
    """Canonical text form; parsing it back yields an equal document."""
    lines = [f"pes {doc.name}"]
    lines.extend(f"event {e} : {lbl}" for e, lbl in doc.events)
    lines.extend(f"cause {a} < {b}" for a, b in doc.causes)
    lines.extend(f"conflict {a} # {b}" for a, b in doc.conflicts)
    if isinstance(doc.termination, str):
        lines.append(f"terminating {doc.termination}")
    else:
        sets = " ".join("{" + ",".join(group) + "}" for group in doc.termination)
        lines.append(("terminating { " + sets + " }") if sets else "terminating { }")
    return "\n".join(lines) + "\n"


def parse_pes(text: str, caps: Caps | None = None) -> EventStructure:
    """Parse and validate a .pes document in one go."""
    return parse_document(text).to_event_structure(caps)
