"""Shared test utilities: independent oracles and fixture certificates."""

from __future__ import annotations

import itertools

from surfknot.diagram import (
    Classical,
    MarkedVertexDiagram,
    Saddle,
    Virtual,
    genus_of_projection,
    naive_components,
    renumber,
    validate,
)


def reduce_classical(d: MarkedVertexDiagram, max_steps: int = 100) -> MarkedVertexDiagram:
    """Greedy kink and bigon cancellation on a planar classical diagram.

    Each step removes a crossing whose loop arc occupies adjacent slots
    (a kink, any chirality or side) or a pair of crossings spanning an
    empty bigon with consistent over/under (a poke).  Both are link-type
    preserving, so reaching a crossingless diagram certifies a trivial
    unlink.
    """
    assert all(isinstance(n, Classical) for n in d.nodes), "classical diagrams only"
    assert genus_of_projection(d) == 0, "planar diagrams only"
    cur = d
    for _ in range(max_steps):
        if not cur.nodes:
            return cur
        nxt = _kink_step(cur)
        if nxt is None:
            nxt = _poke_step(cur)
        if nxt is None:
            return cur
        cur = nxt
    return cur


def is_unlink_diagram(d: MarkedVertexDiagram, components: int | None = None) -> bool:
    reduced = reduce_classical(d)
    if reduced.nodes:
        return False
    if components is not None and reduced.free_loops != components:
        return False
    return True


def _heal(d: MarkedVertexDiagram, removed: set[int], joins) -> MarkedVertexDiagram:
    """Delete nodes and merge semiarcs along the given slot joins."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for a, b in joins:
        union(a, b)

    survivors = [n for j, n in enumerate(d.nodes) if j not in removed]
    occurrences: dict = {}
    for node in survivors:
        for s in node.slots:
            root = find(s)
            occurrences[root] = occurrences.get(root, 0) + 1
    # arcs glued to themselves close into loops; arcs that merely lose
    # both endpoints (a kink's loop arc) evaporate with the crossing
    loops = 0
    seen_roots = set()
    for a, b in joins:
        root = find(a)
        if occurrences.get(root, 0) == 0 and root not in seen_roots:
            seen_roots.add(root)
            loops += 1

    names: dict = {}

    def ident(s):
        root = find(s)
        if root not in names:
            names[root] = len(names) + 1
        return names[root]

    out = []
    for node in survivors:
        slots = tuple(ident(s) for s in node.slots)
        if isinstance(node, Classical):
            out.append(Classical(slots))
        elif isinstance(node, Saddle):
            out.append(Saddle(slots, node.marker))
        else:
            out.append(Virtual(slots))
    healed = renumber(MarkedVertexDiagram(tuple(out), d.free_loops + loops))
    assert not validate(healed), validate(healed)
    return healed


def _kink_step(d: MarkedVertexDiagram) -> MarkedVertexDiagram | None:
    for j, node in enumerate(d.nodes):
        s = node.slots
        for k in range(4):
            if s[k] == s[(k + 1) % 4]:
                other = (s[(k + 2) % 4], s[(k + 3) % 4])
                return _heal(d, {j}, [other])
    return None


def _poke_step(d: MarkedVertexDiagram) -> MarkedVertexDiagram | None:
    occ: dict[int, list[tuple[int, int]]] = {}
    for j, node in enumerate(d.nodes):
        for k, s in enumerate(node.slots):
            occ.setdefault(s, []).append((j, k))
    shared: dict[tuple[int, int], list[int]] = {}
    for s, points in occ.items():
        (j1, _), (j2, _) = points
        if j1 != j2:
            shared.setdefault(tuple(sorted((j1, j2))), []).append(s)
    for (j1, j2), arcs in shared.items():
        for x, y in itertools.permutations(arcs, 2):
            sl1, sl2 = d.nodes[j1].slots, d.nodes[j2].slots
            k1x, k1y = sl1.index(x), sl1.index(y)
            k2x, k2y = sl2.index(x), sl2.index(y)
            under1 = k1x in (0, 2)
            under2 = k2x in (0, 2)
            over1 = k1y in (1, 3)
            over2 = k2y in (1, 3)
            adjacent1 = (k1x - k1y) % 4 in (1, 3)
            adjacent2 = (k2x - k2y) % 4 in (1, 3)
            if under1 and under2 and over1 and over2 and adjacent1 and adjacent2:
                a1 = sl1[(k1x + 2) % 4]
                a2 = sl2[(k2x + 2) % 4]
                b1 = sl1[(k1y + 2) % 4]
                b2 = sl2[(k2y + 2) % 4]
                return _heal(d, {j1, j2}, [(a1, a2), (b1, b2)])
    return None
