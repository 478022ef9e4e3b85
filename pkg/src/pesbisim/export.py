"""Deterministic DOT renderings of configuration graphs and arenas."""

from __future__ import annotations

from .games import Arena, Role, Solution
from .pes import EventStructure


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def configuration_graph_dot(es: EventStructure) -> str:
    """Configurations as nodes, pomset transitions as labelled edges.

    Nodes appear in canonical (mask) order; terminating configurations
    are drawn with a double border."""
    configs = es.configurations()
    index = {c.mask: i for i, c in enumerate(configs)}
    lines = [f"digraph {_quote(es.name)} {{", "  rankdir=LR;"]
    for i, c in enumerate(configs):
        shape = "doubleoctagon" if es.terminates(c) else "box"
        lines.append(f"  n{i} [label={_quote(str(c))} shape={shape}];")
    for c in configs:
        for x, target in es.transition_masks(c.mask, step=False):
            lines.append(
                f"  n{index[c.mask]} -> n{index[target]} [label={_quote(es.format_mask(x))}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def arena_dot(arena: Arena, solution: Solution) -> str:
    """Positions as nodes (Spoiler-owned boxes, Duplicator-owned
    diamonds) coloured by winner, moves as rule-labelled edges."""
    lines = [f"digraph {_quote(arena.es1.name + '_vs_' + arena.es2.name)} {{"]
    for i, pos in enumerate(arena.positions):
        shape = "box" if pos.owner is Role.SPOILER else "diamond"
        color = "palegreen" if solution.winner[pos] is Role.DUPLICATOR else "lightcoral"
        extra = " peripheries=2" if pos in solution.demoted else ""
        lines.append(
            f"  n{i} [label={_quote(arena.describe(pos))} shape={shape} "
            f"style=filled fillcolor={color}{extra}];"
        )
    for i, pos in enumerate(arena.positions):
        for mv in arena.moves[pos]:
            lines.append(
                f"  n{i} -> n{arena.index[mv.target]} [label={_quote(mv.rule)}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
