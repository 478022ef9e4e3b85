"""Command line interface.

Exit codes: 0 equivalent, 1 inequivalent, 2 usage/parse/validation error,
3 cap exceeded, 4 the two engines disagree (engine=both only).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from typing import Any

from . import games, oracle
from .errors import CapExceededError, IllegalMoveError, ParseError, PesBisimError, ValidationError
from .export import arena_dot, configuration_graph_dot
from .games import Role
from .kinds import BisimulationKind
from .pes import Caps, EventStructure
from .pesfile import parse_pes

REPORT_FORMAT = 1


@dataclass(frozen=True)
class Report:
    """Machine-readable check outcome; serializes to versioned JSON."""

    relation: str
    mode: str
    engine: str
    left: str
    right: str
    equivalent: bool
    agreement: bool | None
    witness_summary: dict[str, Any]
    caps: dict[str, int]
    elapsed_ms: float
    witness: list | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "format": REPORT_FORMAT,
            "relation": self.relation,
            "mode": self.mode,
            "engine": self.engine,
            "left": self.left,
            "right": self.right,
            "equivalent": self.equivalent,
            "witness_summary": self.witness_summary,
            "caps": self.caps,
            "elapsed_ms": self.elapsed_ms,
        }
        if self.agreement is not None:
            out["agreement"] = self.agreement
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Report:
        if data.get("format") != REPORT_FORMAT:
            raise ValidationError(f"unsupported report format {data.get('format')!r}")
        return cls(
            relation=data["relation"],
            mode=data["mode"],
            engine=data["engine"],
            left=data["left"],
            right=data["right"],
            equivalent=data["equivalent"],
            agreement=data.get("agreement"),
            witness_summary=data["witness_summary"],
            caps=data["caps"],
            elapsed_ms=data["elapsed_ms"],
            witness=data.get("witness"),
        )


def _caps_from_args(args: argparse.Namespace) -> Caps:
    return Caps(
        max_events=args.max_events,
        max_configurations=args.max_configurations,
        max_positions=args.max_positions,
    )


def _add_common(parser: argparse.ArgumentParser, *, kinds: bool) -> None:
    if kinds:
        parser.add_argument(
            "--rel", required=True, choices=["pomset", "step", "hp", "hhp"],
            help="bisimilarity flavor",
        )
        parser.add_argument(
            "--mode", required=True, choices=["strong", "branching"],
            help="strong or branching transfer conditions",
        )
        parser.add_argument(
            "--strong-tau-erasure", action="store_true",
            help="compare strong-mode pomsets after erasing silent events",
        )
    parser.add_argument("--max-events", type=int, default=Caps.max_events)
    parser.add_argument("--max-configurations", type=int, default=Caps.max_configurations)
    parser.add_argument("--max-positions", type=int, default=Caps.max_positions)


def _load(path: str, caps: Caps) -> EventStructure:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        return parse_pes(text, caps)
    except ParseError as exc:
        raise ParseError(exc.line, exc.column, f"{path}: {exc.args[0].split(': ', 1)[-1]}") from exc


def _serialize_witness(verdict: oracle.Verdict) -> list:
    assert verdict.witness is not None
    out = []
    for member in verdict.witness.sorted_members():
        if verdict.kind.posetal:
            out.append(
                {
                    "left": list(member.cfg1.events),
                    "right": list(member.cfg2.events),
                    "map": [list(p) for p in member.pairs_by_name],
                }
            )
        else:
            c1, c2 = member
            out.append({"left": list(c1.events), "right": list(c2.events)})
    return out


def _serialize_strategy(gv: games.GameVerdict) -> list:
    return [
        {
            "position": gv.arena.describe(pos),
            "rule": mv.rule,
            "move": gv.arena.describe_move(pos, mv),
        }
        for pos, mv in gv.strategy_moves()
    ]


def cmd_check(args: argparse.Namespace) -> int:
    caps = _caps_from_args(args)
    kind = BisimulationKind.parse(args.rel, args.mode)
    es1 = _load(args.files[0], caps)
    es2 = _load(args.files[1], caps)
    started = time.perf_counter()
    oracle_verdict = None
    game_verdict = None
    if args.engine in ("oracle", "both"):
        oracle_verdict = oracle.check(
            es1, es2, kind, strong_tau_erasure=args.strong_tau_erasure, caps=caps
        )
    if args.engine in ("game", "both"):
        game_verdict = games.game_check(
            es1, es2, kind, strong_tau_erasure=args.strong_tau_erasure, caps=caps
        )
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    agreement: bool | None = None
    if oracle_verdict is not None and game_verdict is not None:
        agreement = oracle_verdict.equivalent == game_verdict.equivalent
    equivalent = (
        oracle_verdict.equivalent if oracle_verdict is not None else game_verdict.equivalent
    )

    if equivalent and oracle_verdict is not None and oracle_verdict.witness is not None:
        summary: dict[str, Any] = {"kind": "relation", "size": len(oracle_verdict.witness)}
    elif game_verdict is not None:
        summary = {
            "kind": "strategy",
            "winner": game_verdict.winner.value,
            "moves": len(game_verdict.strategy_moves()),
        }
    else:
        summary = {"kind": "none"}

    witness = None
    if args.witness:
        if equivalent and oracle_verdict is not None:
            witness = _serialize_witness(oracle_verdict)
        elif game_verdict is not None:
            witness = _serialize_strategy(game_verdict)

    report = Report(
        relation=args.rel,
        mode=args.mode,
        engine=args.engine,
        left=es1.name,
        right=es2.name,
        equivalent=equivalent,
        agreement=agreement,
        witness_summary=summary,
        caps={
            "max_events": caps.max_events,
            "max_configurations": caps.max_configurations,
            "max_positions": caps.max_positions,
        },
        elapsed_ms=round(elapsed_ms, 3),
        witness=witness,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        verdict_word = "equivalent" if equivalent else "inequivalent"
        print(f"{es1.name} vs {es2.name}: {kind}: {verdict_word}")
        if summary["kind"] == "relation":
            print(f"witness relation of size {summary['size']}")
        elif summary["kind"] == "strategy":
            n = summary["moves"]
            word = "move" if n == 1 else "moves"
            print(f"{summary['winner']} wins with a strategy of {n} {word}")
        if witness is not None:
            for entry in witness:
                print(f"  {json.dumps(entry)}")
    if agreement is False:
        print("engine disagreement: oracle and game verdicts differ", file=sys.stderr)
        return 4
    return 0 if equivalent else 1


def cmd_play(args: argparse.Namespace) -> int:
    caps = _caps_from_args(args)
    kind = BisimulationKind.parse(args.rel, args.mode)
    es1 = _load(args.files[0], caps)
    es2 = _load(args.files[1], caps)
    gv = games.game_check(
        es1, es2, kind, strong_tau_erasure=args.strong_tau_erasure, caps=caps
    )
    arena, solution = gv.arena, gv.solution
    human = Role(args.human_role)
    machine = human.other()
    print(f"{kind} game on {es1.name} vs {es2.name}; you play {human.value}")
    pos = arena.initial
    machine_rules: list[str] = []
    while True:
        if pos.challenge is None and pos in solution.demoted:
            print("hereditary closure violated; Spoiler wins")
            winner = Role.SPOILER
            break
        legal = arena.moves[pos]
        owner = pos.owner
        if not legal:
            if owner is Role.SPOILER:
                print("Spoiler stuck; Duplicator wins")
                winner = Role.DUPLICATOR
            else:
                print("Duplicator stuck; Spoiler wins")
                winner = Role.SPOILER
            break
        print(f"position {arena.describe(pos)}")
        if owner is human:
            for i, mv in enumerate(legal):
                print(f"  [{i}] {arena.describe_move(pos, mv)}")
            choice = None
            while choice is None:
                print(f"{human.value} move> ", end="", flush=True)
                line = sys.stdin.readline()
                if not line:
                    print("\nend of input; aborting game", file=sys.stderr)
                    return 2
                line = line.strip()
                if line.isdigit() and int(line) < len(legal):
                    choice = int(line)
                else:
                    print(f"enter a move number between 0 and {len(legal) - 1}")
            mv = legal[choice]
            print(f"{human.value} plays [{choice}] {arena.describe_move(pos, mv)}")
        else:
            mv = solution.strategy.get(pos, legal[0])
            print(f"{machine.value} plays {arena.describe_move(pos, mv)}  [{mv.rule}]")
            machine_rules.append(mv.rule)
        pos = mv.target
    if winner is machine and machine_rules:
        print(f"machine strategy rationale: {' -> '.join(machine_rules)}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    caps = _caps_from_args(args)
    if args.what == "configs":
        if len(args.files) != 1:
            raise ValidationError("export --what configs takes exactly one file")
        es = _load(args.files[0], caps)
        sys.stdout.write(configuration_graph_dot(es))
        return 0
    if len(args.files) != 2:
        raise ValidationError("export --what arena takes exactly two files")
    if not args.rel or not args.mode:
        raise ValidationError("export --what arena needs --rel and --mode")
    kind = BisimulationKind.parse(args.rel, args.mode)
    es1 = _load(args.files[0], caps)
    es2 = _load(args.files[1], caps)
    gv = games.game_check(
        es1, es2, kind, strong_tau_erasure=args.strong_tau_erasure, caps=caps
    )
    sys.stdout.write(arena_dot(gv.arena, gv.solution))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pesbisim",
        description="Decide truly concurrent bisimilarities on prime event structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide equivalence of two structures")
    _add_common(p_check, kinds=True)
    p_check.add_argument("--engine", choices=["oracle", "game", "both"], default="both")
    p_check.add_argument("--json", action="store_true", help="emit a JSON report")
    p_check.add_argument("--witness", action="store_true", help="include the full witness")
    p_check.add_argument("files", nargs=2, metavar="FILE")
    p_check.set_defaults(func=cmd_check)

    p_play = sub.add_parser("play", help="play the bisimulation game interactively")
    _add_common(p_play, kinds=True)
    p_play.add_argument(
        "--as", dest="human_role", required=True, choices=["spoiler", "duplicator"],
        help="role played by the human",
    )
    p_play.add_argument("files", nargs=2, metavar="FILE")
    p_play.set_defaults(func=cmd_play)

    p_export = sub.add_parser("export", help="emit DOT graphs")
    p_export.add_argument("--what", required=True, choices=["configs", "arena"])
    p_export.add_argument("--rel", choices=["pomset", "step", "hp", "hhp"])
    p_export.add_argument("--mode", choices=["strong", "branching"])
    p_export.add_argument("--strong-tau-erasure", action="store_true")
    p_export.add_argument("--max-events", type=int, default=Caps.max_events)
    p_export.add_argument("--max-configurations", type=int, default=Caps.max_configurations)
    p_export.add_argument("--max-positions", type=int, default=Caps.max_positions)
    p_export.add_argument("files", nargs="+", metavar="FILE")
    p_export.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ParseError, ValidationError, IllegalMoveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PesBisimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
