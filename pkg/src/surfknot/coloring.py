"""Bikei labelings of marked vertex diagrams and the counting invariant.

A labeling assigns a table element to every semiarc so that at each
classical crossing the outgoing under/over colors are the images of the
incoming pair under the two operations, every saddle is monochromatic,
and virtual crossings pass colors through unchanged.  The number of
labelings is the counting invariant; free loops are unconstrained and
contribute a factor of the table order each.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .bikei import BikeiTable
from .diagram import (
    Classical,
    MarkedVertexDiagram,
    Saddle,
    Virtual,
    naive_components,
    require_valid,
)
from .parity import ParityUnionFind


@dataclass(frozen=True)
class Coloring:
    assignment: dict[int, int]
    loop_colors: tuple[int, ...]
    table: BikeiTable

    def vector(self, semiarcs: list[int]) -> tuple[int, ...]:
        return tuple(self.assignment[s] for s in semiarcs) + self.loop_colors


def _constraints_ok(d: MarkedVertexDiagram, t: BikeiTable, colors: dict[int, int]) -> bool:
    """Check every node rule whose semiarcs are all colored."""
    for node in d.nodes:
        vals = [colors.get(s) for s in node.slots]
        if any(v is None for v in vals):
            continue
        if not _node_ok(node, t, vals):
            return False
    return True


def _node_ok(node, t: BikeiTable, vals: list[int]) -> bool:
    if isinstance(node, Classical):
        u1, o1, u2, o2 = vals
        return u2 == t.up_at(u1, o1) and o2 == t.down_at(o1, u1)
    if isinstance(node, Saddle):
        return vals[0] == vals[1] == vals[2] == vals[3]
    a, b, c, cc = vals
    return a == c and b == cc


def _search_order(d: MarkedVertexDiagram) -> list[int]:
    """Semiarcs along naive-component traversals, components ordered and
    started at their smallest identifier."""
    comps = [c for c in naive_components(d) if c]
    ordered: list[int] = []
    for comp in sorted(comps, key=min):
        k = comp.index(min(comp))
        ordered.extend(comp[k:] + comp[:k])
    return ordered


def _forced_value(
    d: MarkedVertexDiagram, t: BikeiTable, colors: dict[int, int], s: int,
    touching: list[tuple[int, int]],
) -> int | None:
    """Value of semiarc s forced through some node it touches.

    Saddles force monochromaticity from any colored slot, virtual nodes
    copy the opposite slot, and a classical crossing determines either
    outgoing pair from the incoming one (and conversely, using the
    involutory inverses, valid for verified tables)."""
    for node_idx, slot in touching:
        node = d.nodes[node_idx]
        vals = [colors.get(x) for x in node.slots]
        if vals[slot] is not None:
            continue
        if isinstance(node, Saddle):
            known = next((v for v in vals if v is not None), None)
            if known is not None:
                return known
            continue
        if isinstance(node, Virtual):
            partner = vals[(slot + 2) % 4]
            if partner is not None:
                return partner
            continue
        u1, o1, u2, o2 = vals
        if slot == 2 and u1 is not None and o1 is not None:
            return t.up_at(u1, o1)
        if slot == 3 and o1 is not None and u1 is not None:
            return t.down_at(o1, u1)
        if slot == 0 and u2 is not None and o2 is not None:
            return t.up_at(u2, o2)
        if slot == 1 and o2 is not None and u2 is not None:
            return t.down_at(o2, u2)
    return None


def _constraints_ok_touching(d, t, colors, touching) -> bool:
    for node_idx, _slot in touching:
        node = d.nodes[node_idx]
        vals = [colors.get(x) for x in node.slots]
        if any(v is None for v in vals):
            continue
        if not _node_ok(node, t, vals):
            return False
    return True


def _solve(d: MarkedVertexDiagram, t: BikeiTable) -> list[dict[int, int]]:
    """All satisfying semiarc assignments, by depth-first search along
    the naive-component traversal order with forced-value propagation."""
    require_valid(d)
    order = _search_order(d)
    occ = d.occurrences()
    n = t.order
    colors: dict[int, int] = {}
    out: list[dict[int, int]] = []

    def extend(pos: int) -> None:
        if pos == len(order):
            out.append(dict(colors))
            return
        s = order[pos]
        forced = _forced_value(d, t, colors, s, occ[s])
        candidates = (forced,) if forced is not None else range(1, n + 1)
        for value in candidates:
            colors[s] = value
            if _constraints_ok_touching(d, t, colors, occ[s]):
                extend(pos + 1)
            del colors[s]

    extend(0)
    return out


def color_count(d: MarkedVertexDiagram, t: BikeiTable) -> int:
    """Number of labelings of d by t (the counting invariant)."""
    return len(_solve(d, t)) * t.order ** d.free_loops


def colorings(
    d: MarkedVertexDiagram, t: BikeiTable, limit: int | None = None
) -> list[Coloring]:
    """The labelings themselves, in lexicographic order of the color
    vector (semiarcs ascending, then free loop colors), truncated at
    ``limit``."""
    semiarcs = sorted(d.semiarcs())
    assignments = sorted(_solve(d, t), key=lambda a: tuple(a[s] for s in semiarcs))
    loop_choices = list(itertools.product(range(1, t.order + 1), repeat=d.free_loops))
    result: list[Coloring] = []
    for assignment in assignments:
        for loops in loop_choices:
            result.append(Coloring(assignment, loops, t))
            if limit is not None and len(result) >= limit:
                return result
    return result


def brute_force_count(d: MarkedVertexDiagram, t: BikeiTable) -> int:
    """Independent oracle: enumerate all n^m assignments directly."""
    require_valid(d)
    semiarcs = d.semiarcs()
    n = t.order
    count = 0
    for values in itertools.product(range(1, n + 1), repeat=len(semiarcs)):
        colors = dict(zip(semiarcs, values))
        if all(_node_ok(node, t, [colors[s] for s in node.slots]) for node in d.nodes):
            count += 1
    return count * n ** d.free_loops


def two_colorable(d: MarkedVertexDiagram) -> bool:
    """Whether the diagram admits a labeling by the two-element table
    whose both operations flip: implemented as parity propagation.

    Classical passages flip the color, saddles equate all four slots,
    virtual crossings pass through.
    """
    require_valid(d)
    uf = ParityUnionFind()
    for node in d.nodes:
        a, b, c, dd = node.slots
        if isinstance(node, Classical):
            pairs = [(a, c, 1), (b, dd, 1)]
        elif isinstance(node, Saddle):
            pairs = [(a, b, 0), (b, c, 0), (c, dd, 0)]
        else:
            pairs = [(a, c, 0), (b, dd, 0)]
        for s1, s2, parity in pairs:
            if not uf.union(s1, s2, parity):
                return False
    return True
