"""Local rewriting of marked vertex diagrams.

Each move is a pair of diagram fragments sharing an ordered boundary
interface, stored as data files under ``moves/schema``.  A fragment is
matched into a diagram up to the node rotation identities; applying the
move removes the matched nodes and grafts the opposite fragment onto
the dangling semiarc ends.  Moves are matched in both directions.

The detour move, which reroutes a purely virtual strand segment, is
implemented separately since its right-hand side is parametrized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .diagram import (
    Classical,
    MarkedVertexDiagram,
    Node,
    Saddle,
    Virtual,
    _node_variants,
    naive_components,
    renumber,
    require_valid,
    validate,
)

MOVE_IDS = ("Y1", "Y1'", "Y2", "Y3", "Y4", "Y4'", "Y5", "Y6", "Y6'", "Y7", "Y8")

_FILE_NAMES = {m: m.lower().replace("'", "p") for m in MOVE_IDS}


class MoveError(ValueError):
    """Unknown move, unmatched pattern or stale site."""


@dataclass(frozen=True)
class Fragment:
    nodes: tuple[Node, ...]
    boundary: tuple[int, ...]

    def arc_ids(self) -> set[int]:
        ids = {s for node in self.nodes for s in node.slots}
        ids.update(self.boundary)
        return ids

    def internal_ids(self) -> set[int]:
        return self.arc_ids() - set(self.boundary)

    def strands(self) -> list[tuple[int, int]]:
        """Bare strands: boundary position pairs holding the same id."""
        pos: dict[int, list[int]] = {}
        for k, s in enumerate(self.boundary):
            pos.setdefault(s, []).append(k)
        return [tuple(v) for v in pos.values() if len(v) == 2]


def parse_fragment(text: str, filename: str = "<fragment>") -> Fragment:
    boundary: tuple[int, ...] | None = None
    nodes: list[Node] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        tag = toks[0].upper()
        if tag == "BOUNDARY":
            boundary = tuple(int(t) for t in toks[1:])
        elif tag == "X":
            nodes.append(Classical(tuple(int(t) for t in toks[1:5])))
        elif tag == "S":
            vals = [int(t) for t in toks[1:6]]
            nodes.append(Saddle(tuple(vals[:4]), vals[4]))
        elif tag == "V":
            nodes.append(Virtual(tuple(int(t) for t in toks[1:5])))
        else:
            raise MoveError(f"{filename}:{lineno}: unknown fragment line {toks[0]!r}")
    if boundary is None:
        raise MoveError(f"{filename}: missing BOUNDARY line")
    frag = Fragment(tuple(nodes), boundary)
    count: dict[int, int] = {}
    for node in frag.nodes:
        for s in node.slots:
            count[s] = count.get(s, 0) + 1
    for s in frag.boundary:
        count[s] = count.get(s, 0) + 1
    bad = {s: c for s, c in count.items() if c != 2}
    if bad:
        raise MoveError(f"{filename}: fragment ids with wrong multiplicity: {bad}")
    return frag


@dataclass(frozen=True)
class Move:
    move_id: str
    lhs: Fragment
    rhs: Fragment


def _load_move(move_id: str) -> Move:
    name = _FILE_NAMES[move_id]
    pkg = resources.files(__package__) / "moves" / "schema"
    lhs = parse_fragment((pkg / f"{name}.lhs.mvd").read_text(), f"{name}.lhs.mvd")
    rhs = parse_fragment((pkg / f"{name}.rhs.mvd").read_text(), f"{name}.rhs.mvd")
    return Move(move_id, lhs, rhs)


_CATALOG: dict[str, Move] = {}


def catalog() -> dict[str, Move]:
    if not _CATALOG:
        for move_id in MOVE_IDS:
            _CATALOG[move_id] = _load_move(move_id)
    return _CATALOG


@dataclass(frozen=True)
class MoveSite:
    move_id: str
    direction: str  # "forward" | "backward"
    matched_nodes: tuple[int, ...]
    matched_semiarcs: tuple[int, ...]
    # match data needed to rewrite: fragment arc -> diagram arc, fragment
    # node -> diagram node, and bare strands matched onto free loops
    arc_map: tuple[tuple[int, int], ...] = field(repr=False, default=())
    node_map: tuple[tuple[int, int], ...] = field(repr=False, default=())
    loop_strands: tuple[tuple[int, int], ...] = field(repr=False, default=())
    expected_nodes: tuple = field(repr=False, default=())


def _pattern_and_replacement(move: Move, direction: str) -> tuple[Fragment, Fragment]:
    return (move.lhs, move.rhs) if direction == "forward" else (move.rhs, move.lhs)


def _find_node_matches(d: MarkedVertexDiagram, frag: Fragment):
    """Embeddings of a node-bearing fragment.

    Returns (node_map, arc_map) pairs.  Every internal fragment arc must
    be fully consumed inside the matched nodes; boundary arcs dangle, or
    may pair up with each other when a strand closes within the match.
    """
    occ = d.occurrences()
    n_frag = len(frag.nodes)
    results: list[tuple[dict[int, int], dict[int, int]]] = []
    chosen_variant: dict[int, tuple] = {}

    def extend(i: int, node_map: dict[int, int], arc_map: dict[int, int]) -> None:
        if i == n_frag:
            # positions inside the match labeled by each fragment arc
            label_positions: dict[int, set] = {}
            for fi, dj in node_map.items():
                fnode = frag.nodes[fi]
                variant_slots = chosen_variant[fi]
                for k in range(4):
                    orig_slot = _variant_slot(d.nodes[dj], variant_slots, k)
                    label_positions.setdefault(fnode.slots[k], set()).add(
                        (dj, orig_slot)
                    )
            for fs in frag.internal_ids():
                if set(occ[arc_map[fs]]) != label_positions.get(fs, set()):
                    return
            results.append((dict(node_map), dict(arc_map)))
            return
        fnode = frag.nodes[i]
        for j, dnode in enumerate(d.nodes):
            if j in node_map.values() or dnode.kind != fnode.kind:
                continue
            for slots, marker in _node_variants(dnode):
                if isinstance(fnode, Saddle) and marker != fnode.marker:
                    continue
                new_map = dict(arc_map)
                ok = True
                for fs, ds in zip(fnode.slots, slots):
                    if fs in new_map:
                        if new_map[fs] != ds:
                            ok = False
                            break
                    else:
                        new_map[fs] = ds
                if not ok:
                    continue
                node_map[i] = j
                chosen_variant[i] = slots
                extend(i + 1, node_map, new_map)
                del node_map[i]
                del chosen_variant[i]

    extend(0, {}, {})
    return results


def _variant_slot(dnode: Node, variant_slots: tuple, k: int) -> int:
    """Original slot index of position k of the given rotation variant."""
    s = dnode.slots
    for rot in range(4):
        if tuple(s[(i + rot) % 4] for i in range(4)) == variant_slots:
            return (k + rot) % 4
    raise AssertionError("variant is not a rotation of the node")


def _find_bare_matches(d: MarkedVertexDiagram, frag: Fragment):
    """Ordered injective assignments of bare strands to semiarcs/loops."""
    strands = frag.strands()
    targets = [("arc", a) for a in d.semiarcs()]
    targets += [("loop", i) for i in range(d.free_loops)]
    results: list[list] = []

    def extend(i: int, chosen: list) -> None:
        if i == len(strands):
            results.append(list(chosen))
            return
        for tgt in targets:
            if tgt in chosen:
                continue
            chosen.append(tgt)
            extend(i + 1, chosen)
            chosen.pop()

    extend(0, [])
    return results


class _TokenUF:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _rebuild_node(node: Node, slots: tuple[int, ...]) -> Node:
    if isinstance(node, Classical):
        return Classical(slots)
    if isinstance(node, Saddle):
        return Saddle(slots, node.marker)
    return Virtual(slots)


def _rewrite(
    d: MarkedVertexDiagram,
    pattern: Fragment,
    replacement: Fragment,
    node_map: dict[int, int],
    arc_map: dict[int, int],
    loop_strands: dict[int, int],
) -> MarkedVertexDiagram:
    removed = set(node_map.values())
    occ = d.occurrences()
    uf = _TokenUF()

    # bare strands matched onto real semiarcs split the arc in two; the
    # surviving endpoint occurrences get end-specific tokens
    bare_split = set() if pattern.nodes else {arc_map[s] for s in arc_map}

    def old_token(a: int, point) -> tuple:
        if a in bare_split:
            end = 0 if occ[a][0] == point else 1
            return ("end", a, end)
        return ("old", a)

    # boundary gluing: pattern side position k attaches to replacement
    # side position k
    consumed_loops = 0
    loop_positions: dict[int, list[int]] = {}
    strand_positions: dict[int, list[int]] = {}
    for k, frag_arc in enumerate(pattern.boundary):
        strand_positions.setdefault(frag_arc, []).append(k)
    for k, frag_arc in enumerate(pattern.boundary):
        r_tok = ("new", replacement.boundary[k])
        if frag_arc in loop_strands:
            loop_positions.setdefault(frag_arc, []).append(k)
            continue
        a = arc_map[frag_arc]
        if not pattern.nodes:
            # positions of this strand attach to the arc's two endpoints
            k1, k2 = strand_positions[frag_arc]
            end = 0 if k == k1 else 1
            uf.union(("end", a, end), r_tok)
        else:
            uf.union(("old", a), r_tok)
    for frag_arc, ks in loop_positions.items():
        k1, k2 = ks
        uf.union(
            ("new", replacement.boundary[k1]), ("new", replacement.boundary[k2])
        )
        consumed_loops += 1

    new_nodes: list[tuple[Node, tuple]] = []
    for j, node in enumerate(d.nodes):
        if j in removed:
            continue
        slots = tuple(old_token(s, (j, k)) for k, s in enumerate(node.slots))
        new_nodes.append((node, slots))
    for node in replacement.nodes:
        new_nodes.append((node, tuple(("new", s) for s in node.slots)))

    occurrences: dict = {}
    for _node, slots in new_nodes:
        for tok in slots:
            root = uf.find(tok)
            occurrences[root] = occurrences.get(root, 0) + 1

    interface_roots = {
        uf.find(("new", replacement.boundary[k]))
        for k in range(len(replacement.boundary))
    }
    new_loops = sum(1 for root in interface_roots if occurrences.get(root, 0) == 0)

    ids: dict = {}

    def ident(tok) -> int:
        root = uf.find(tok)
        if root not in ids:
            ids[root] = len(ids) + 1
        return ids[root]

    out_nodes = [
        _rebuild_node(node, tuple(ident(tok) for tok in slots))
        for node, slots in new_nodes
    ]
    result = MarkedVertexDiagram(
        tuple(out_nodes), d.free_loops - consumed_loops + new_loops
    )
    result = renumber(result)
    errors = validate(result)
    if errors:
        raise MoveError("rewrite produced an invalid diagram: " + "; ".join(errors))
    return result


def _site_from_match(
    move: Move,
    direction: str,
    node_map: dict[int, int],
    arc_map: dict[int, int],
    loop_strands: dict[int, int],
    d: MarkedVertexDiagram,
) -> MoveSite:
    return MoveSite(
        move_id=move.move_id,
        direction=direction,
        matched_nodes=tuple(sorted(node_map.values())),
        matched_semiarcs=tuple(sorted(set(arc_map.values()))),
        arc_map=tuple(sorted(arc_map.items())),
        node_map=tuple(sorted(node_map.items())),
        loop_strands=tuple(sorted(loop_strands.items())),
        expected_nodes=tuple(d.nodes[j] for j in sorted(node_map.values())),
    )


def _matches_for(d: MarkedVertexDiagram, move: Move, direction: str):
    pattern, _repl = _pattern_and_replacement(move, direction)
    found: list[tuple[dict, dict, dict]] = []
    if pattern.nodes:
        for node_map, arc_map in _find_node_matches(d, pattern):
            found.append((node_map, arc_map, {}))
    else:
        strands = pattern.strands()
        for assignment in _find_bare_matches(d, pattern):
            arc_map: dict[int, int] = {}
            loop_strands: dict[int, int] = {}
            for strand_positions, tgt in zip(strands, assignment):
                strand_id = pattern.boundary[strand_positions[0]]
                if tgt[0] == "arc":
                    arc_map[strand_id] = tgt[1]
                else:
                    loop_strands[strand_id] = tgt[1]
            found.append(({}, arc_map, loop_strands))
    return found


def _canon_key(d: MarkedVertexDiagram):
    norm = d.normalized()
    return (
        norm.free_loops,
        tuple((n.kind, n.slots, getattr(n, "marker", 0)) for n in norm.nodes),
    )


def applicable_sites(d: MarkedVertexDiagram, move_id: str) -> list[MoveSite]:
    """All embeddings of the move's two sides, forward then backward.

    Matches on the same nodes and semiarcs that rewrite to identical
    diagrams (pattern self-symmetries) are reported once."""
    require_valid(d)
    if move_id not in MOVE_IDS:
        raise MoveError(f"unknown move id {move_id!r}; expected one of {MOVE_IDS}")
    move = catalog()[move_id]
    sites: list[MoveSite] = []
    seen: set = set()
    for direction in ("forward", "backward"):
        for node_map, arc_map, loop_strands in _matches_for(d, move, direction):
            site = _site_from_match(move, direction, node_map, arc_map, loop_strands, d)
            try:
                result = apply_move(d, site)
            except MoveError:
                continue
            key = (
                direction,
                site.matched_nodes,
                site.matched_semiarcs,
                site.loop_strands,
                _canon_key(result),
            )
            if key in seen:
                continue
            seen.add(key)
            sites.append(site)
    sites.sort(
        key=lambda s: (
            s.direction != "forward",
            s.matched_nodes,
            s.matched_semiarcs,
            s.loop_strands,
            s.arc_map,
        )
    )
    return sites


def apply_move(d: MarkedVertexDiagram, site: MoveSite) -> MarkedVertexDiagram:
    """Rewrite the diagram at a previously discovered site.

    The site is revalidated first; a site computed against a different
    diagram state is rejected with a mismatch report.
    """
    require_valid(d)
    move = catalog().get(site.move_id)
    if move is None:
        raise MoveError(f"unknown move id {site.move_id!r}")
    pattern, replacement = _pattern_and_replacement(move, site.direction)
    node_map = dict(site.node_map)
    arc_map = dict(site.arc_map)
    loop_strands = dict(site.loop_strands)

    for _k, j in node_map.items():
        if not 0 <= j < len(d.nodes):
            raise MoveError(f"stale site: node index {j} out of range")
    for (_k, j), expected in zip(
        sorted(node_map.items(), key=lambda kv: kv[1]), site.expected_nodes
    ):
        if d.nodes[j] != expected:
            raise MoveError(f"stale site: node {j} is {d.nodes[j]}, expected {expected}")
    arcs = set(d.semiarcs())
    for _frag_arc, a in arc_map.items():
        if a not in arcs:
            raise MoveError(f"stale site: semiarc {a} no longer present")
    for _strand, loop_idx in loop_strands.items():
        if loop_idx >= d.free_loops:
            raise MoveError(f"stale site: free loop {loop_idx} no longer present")
    if pattern.nodes and (node_map, arc_map) not in _find_node_matches(d, pattern):
        raise MoveError("stale site: pattern no longer matches the diagram")

    return _rewrite(d, pattern, replacement, node_map, arc_map, loop_strands)


def merge_components(d: MarkedVertexDiagram) -> MarkedVertexDiagram:
    """Merge naive components by the strand exchange of Y8, applied at
    markers whose two strands lie on distinct components, until one
    component remains."""
    require_valid(d)
    current = d
    while True:
        comps = [c for c in naive_components(current) if c]
        total = len(comps) + current.free_loops
        if total <= 1:
            return current
        comp_of: dict[int, int] = {}
        for idx, comp in enumerate(comps):
            for s in comp:
                comp_of[s] = idx
        target = None
        for j, node in enumerate(current.nodes):
            if not isinstance(node, Saddle):
                continue
            a, b, _c, _dd = node.slots
            if comp_of[a] != comp_of[b]:
                target = j
                break
        if target is None:
            raise MoveError(
                "cannot merge: no marker joins two distinct naive components"
            )
        for site in applicable_sites(current, "Y8"):
            if site.direction == "forward" and site.matched_nodes == (target,):
                current = apply_move(current, site)
                break
        else:
            raise MoveError("no strand-exchange site at the chosen marker")


def detour(
    d: MarkedVertexDiagram,
    virtual_path: list[int],
    new_route: list[int] | None = None,
) -> MarkedVertexDiagram:
    """Reroute a strand segment that crosses only virtual nodes.

    Every virtual crossing on ``virtual_path`` is removed and the freed
    strand is reinstalled crossing the semiarcs named in ``new_route``
    (identified by their smallest surviving id after healing) virtually,
    in order.  An empty route is plain removal.
    """
    require_valid(d)
    if not virtual_path:
        raise MoveError("empty virtual path")
    occ = d.occurrences()
    arcs = set(d.semiarcs())
    for s in virtual_path:
        if s not in arcs:
            raise MoveError(f"unknown semiarc {s} in path")

    for s1, s2 in zip(virtual_path, virtual_path[1:]):
        found = None
        for (n1, k1) in occ[s1]:
            node = d.nodes[n1]
            if node.slots[(k1 + 2) % 4] == s2:
                found = n1
                break
        if found is None:
            raise MoveError(f"semiarcs {s1} and {s2} are not consecutive on a strand")
        if not isinstance(d.nodes[found], Virtual):
            raise MoveError(f"path touches a non-virtual node between {s1} and {s2}")

    # the path's own virtual crossings with anything, including itself
    path_set = set(virtual_path)
    to_remove = set()
    for j, node in enumerate(d.nodes):
        if isinstance(node, Virtual) and path_set & set(node.slots):
            to_remove.add(j)

    uf = _TokenUF()
    for j in to_remove:
        node = d.nodes[j]
        uf.union(("a", node.slots[0]), ("a", node.slots[2]))
        uf.union(("a", node.slots[1]), ("a", node.slots[3]))

    survivors = [
        (node, tuple(("a", s) for s in node.slots))
        for j, node in enumerate(d.nodes)
        if j not in to_remove
    ]

    occurrences: dict = {}
    for _node, slots in survivors:
        for tok in slots:
            root = uf.find(tok)
            occurrences[root] = occurrences.get(root, 0) + 1
    loop_roots = set()
    for j in to_remove:
        for s in d.nodes[j].slots:
            root = uf.find(("a", s))
            if occurrences.get(root, 0) == 0:
                loop_roots.add(root)
    new_loops = len(loop_roots)

    # keep merged arcs named after their smallest original id
    names: dict = {}
    for s in sorted(arcs):
        root = uf.find(("a", s))
        if root not in names and occurrences.get(root, 0):
            names[root] = len(names) + 1

    out_nodes = [
        _rebuild_node(node, tuple(names[uf.find(tok)] for tok in slots))
        for node, slots in survivors
    ]
    healed = MarkedVertexDiagram(tuple(out_nodes), d.free_loops + new_loops)
    errors = validate(healed)
    if errors:
        raise MoveError("detour healing produced an invalid diagram: " + "; ".join(errors))

    if not new_route:
        return renumber(healed) if healed.nodes else healed

    det_root = None
    for s in sorted(virtual_path):
        root = uf.find(("a", s))
        if occurrences.get(root, 0):
            det_root = names[root]
            break
    if det_root is None:
        raise MoveError("detour strand closed into a free loop; nothing to reroute")

    current = healed
    det_arc = det_root
    for r in new_route:
        if r not in set(current.semiarcs()):
            raise MoveError(f"route semiarc {r} not present after healing")
        if r == det_arc:
            raise MoveError("cannot cross the detour strand with itself in one step")
        current, det_arc = _insert_virtual(current, det_arc, r)
    return renumber(current)


def _insert_virtual(
    d: MarkedVertexDiagram, arc_a: int, arc_b: int
) -> tuple[MarkedVertexDiagram, int]:
    """Split arcs a and b and join the halves at a new virtual node.

    Returns the diagram (not renumbered) and the continuation piece of
    arc a."""
    m = max(d.semiarcs(), default=0)
    a2, b2 = m + 1, m + 2
    occ = d.occurrences()
    nodes = list(d.nodes)

    def replace_second(arc: int, new_arc: int) -> None:
        _first, second = sorted(occ[arc])
        j, k = second
        slots = list(nodes[j].slots)
        slots[k] = new_arc
        nodes[j] = _rebuild_node(nodes[j], tuple(slots))

    replace_second(arc_a, a2)
    replace_second(arc_b, b2)
    nodes.append(Virtual((arc_a, arc_b, a2, b2)))
    return MarkedVertexDiagram(tuple(nodes), d.free_loops), a2
