"""Combinatorial marked vertex diagrams.

A diagram is a list of 4-valent nodes (classical crossings, marked
saddle vertices, virtual crossings) over semiarc identifiers 1..m, each
identifier appearing exactly twice across all node slots, plus a count
of crossingless free loops.  Slots are stored counterclockwise; for a
classical node the under strand occupies slots 1 and 3 (0 and 2 here,
0-based).  Strands pass through opposite slots at every node kind.

Saddle smoothing semantics for Saddle(a, b, c, d, m): with m = 0 the
lower resolution joins a-b and c-d while the upper joins b-c and d-a;
m = 1 swaps the two levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Union

from .parity import ParityUnionFind


class DiagramError(ValueError):
    """Structurally invalid diagram or node reference."""


@dataclass(frozen=True)
class Classical:
    slots: tuple[int, int, int, int]
    kind = "X"


@dataclass(frozen=True)
class Saddle:
    slots: tuple[int, int, int, int]
    marker: int
    kind = "S"


@dataclass(frozen=True)
class Virtual:
    slots: tuple[int, int, int, int]
    kind = "V"


Node = Union[Classical, Saddle, Virtual]


def _node_variants(node: Node) -> list[tuple[tuple[int, int, int, int], int]]:
    """Equivalent (slots, marker) presentations under drawing rotation."""
    s = node.slots
    rot1 = (s[1], s[2], s[3], s[0])
    rot2 = (s[2], s[3], s[0], s[1])
    rot3 = (s[3], s[0], s[1], s[2])
    if isinstance(node, Classical):
        return [(s, 0), (rot2, 0)]
    if isinstance(node, Saddle):
        m = node.marker
        return [(s, m), (rot2, m), (rot1, 1 - m), (rot3, 1 - m)]
    return [(s, 0), (rot1, 0), (rot2, 0), (rot3, 0)]


def normalize_node(node: Node) -> Node:
    """Lexicographically least equivalent presentation."""
    slots, marker = min(_node_variants(node))
    if isinstance(node, Classical):
        return Classical(slots)
    if isinstance(node, Saddle):
        return Saddle(slots, marker)
    return Virtual(slots)


@dataclass(frozen=True)
class MarkedVertexDiagram:
    nodes: tuple[Node, ...]
    free_loops: int = 0

    def __post_init__(self) -> None:
        if self.free_loops < 0:
            raise DiagramError("free_loops must be non-negative")

    @property
    def semiarc_count(self) -> int:
        return 2 * len(self.nodes)

    def semiarcs(self) -> list[int]:
        return sorted({s for node in self.nodes for s in node.slots})

    def occurrences(self) -> dict[int, list[tuple[int, int]]]:
        occ: dict[int, list[tuple[int, int]]] = {}
        for i, node in enumerate(self.nodes):
            for slot, s in enumerate(node.slots):
                occ.setdefault(s, []).append((i, slot))
        return occ

    def normalized(self) -> "MarkedVertexDiagram":
        return MarkedVertexDiagram(
            tuple(normalize_node(n) for n in self.nodes), self.free_loops
        )


@dataclass(frozen=True)
class DiagramCounts:
    c: int
    h: int
    v: int

    @property
    def ch(self) -> int:
        return self.c + self.h

    @property
    def vch(self) -> int:
        return self.c + self.h + self.v


@dataclass(frozen=True)
class SurfaceClass:
    euler: int
    orientable: bool
    genus_or_crosscaps: int
    closed_surface_assumed: bool = True


@dataclass(frozen=True)
class Orientation:
    io: dict  # (node_index, slot) -> "in" | "out"
    loop_dirs: tuple[int, ...]


@dataclass(frozen=True)
class NonOrientableWitness:
    cycle: tuple[int, ...]  # semiarcs forming an odd constraint cycle


def validate(d: MarkedVertexDiagram) -> list[str]:
    """Return all structural errors; empty list means the diagram is valid."""
    errors: list[str] = []
    if d.free_loops < 0:
        errors.append("free_loops must be non-negative")
    for i, node in enumerate(d.nodes):
        if len(node.slots) != 4:
            errors.append(f"node {i}: must have exactly 4 slots")
        if isinstance(node, Saddle) and node.marker not in (0, 1):
            errors.append(f"node {i}: marker bit {node.marker} not in {{0,1}}")
    seen: dict[int, int] = {}
    for node in d.nodes:
        for s in node.slots:
            seen[s] = seen.get(s, 0) + 1
    for s, count in sorted(seen.items()):
        if count != 2:
            errors.append(f"semiarc {s}: occurs {count} times, expected 2")
    if seen:
        m = max(seen)
        if min(seen) < 1:
            errors.append("semiarc identifiers must be positive")
        missing = [s for s in range(1, m + 1) if s not in seen]
        if missing:
            errors.append(f"semiarc numbering has gaps: missing {missing}")
    return errors


def require_valid(d: MarkedVertexDiagram) -> None:
    errors = validate(d)
    if errors:
        raise DiagramError("; ".join(errors))


def _through(slot: int) -> int:
    return (slot + 2) % 4


def naive_components(d: MarkedVertexDiagram) -> list[list[int]]:
    """Closed curves obtained by passing straight through every node.

    Returns one cyclic semiarc sequence per component; free loops
    contribute empty sequences.
    """
    occ = d.occurrences()
    visited: set[int] = set()
    components: list[list[int]] = []
    for start in sorted(occ):
        if start in visited:
            continue
        seq: list[int] = []
        s = start
        # enter s at its first occurrence
        entry = occ[s][0]
        while True:
            seq.append(s)
            visited.add(s)
            node_idx, slot = entry
            exit_slot = _through(slot)
            s_next = d.nodes[node_idx].slots[exit_slot]
            # move along s_next to its other endpoint
            a, b = occ[s_next]
            entry = b if a == (node_idx, exit_slot) else a
            s = s_next
            if s == start and entry == occ[start][0]:
                break
        components.append(seq)
    components.extend([] for _ in range(d.free_loops))
    return components


def counts(d: MarkedVertexDiagram) -> DiagramCounts:
    c = sum(1 for n in d.nodes if isinstance(n, Classical))
    h = sum(1 for n in d.nodes if isinstance(n, Saddle))
    v = sum(1 for n in d.nodes if isinstance(n, Virtual))
    return DiagramCounts(c, h, v)


def _saddle_joins(node: Saddle, level: str) -> list[tuple[int, int]]:
    """Slot pairs joined when resolving the saddle at the given level."""
    low = level == "lower"
    if (node.marker == 0) == low:
        return [(0, 1), (2, 3)]
    return [(1, 2), (3, 0)]


def resolve_saddles(
    d: MarkedVertexDiagram, levels: dict[int, str]
) -> MarkedVertexDiagram:
    """Delete the saddles named in ``levels`` and rejoin their strands.

    ``levels`` maps node index -> "lower" | "upper".  Strand chains that
    close up become free loops; the rest are renumbered contiguously in
    first-occurrence order over the surviving nodes.
    """
    require_valid(d)
    for idx, level in levels.items():
        if not isinstance(d.nodes[idx], Saddle):
            raise DiagramError(f"node {idx} is not a saddle")
        if level not in ("lower", "upper"):
            raise DiagramError(f"unknown smoothing level {level!r}")

    occ = d.occurrences()
    # points = occurrences; connectivity via semiarcs and via joins
    neighbors: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def link(p: tuple[int, int], q: tuple[int, int]) -> None:
        neighbors.setdefault(p, []).append(q)
        neighbors.setdefault(q, []).append(p)

    for s, points in occ.items():
        link(points[0], points[1])
    for idx, level in levels.items():
        node = d.nodes[idx]
        for sa, sb in _saddle_joins(node, level):
            link((idx, sa), (idx, sb))

    surviving = [i for i in range(len(d.nodes)) if i not in levels]
    is_surviving_point = lambda p: p[0] not in levels

    # walk chains, assigning a group id to every occurrence point
    group: dict[tuple[int, int], int] = {}
    group_endpoints: dict[int, list[tuple[int, int]]] = {}
    next_group = 0
    for p in sorted(neighbors):
        if p in group:
            continue
        gid = next_group
        next_group += 1
        stack = [p]
        group[p] = gid
        members = []
        while stack:
            cur = stack.pop()
            members.append(cur)
            for nxt in neighbors[cur]:
                if nxt not in group:
                    group[nxt] = gid
                    stack.append(nxt)
        group_endpoints[gid] = [q for q in members if is_surviving_point(q)]

    new_loops = d.free_loops
    arc_groups: set[int] = set()
    for gid, endpoints in group_endpoints.items():
        if not endpoints:
            new_loops += 1
        elif len(endpoints) == 2:
            arc_groups.add(gid)
        else:
            raise DiagramError(
                f"smoothing produced a chain with {len(endpoints)} endpoints"
            )

    # rename groups to contiguous semiarc ids in first-occurrence order
    rename: dict[int, int] = {}
    new_nodes: list[Node] = []
    for i in surviving:
        node = d.nodes[i]
        new_slots = []
        for slot in range(4):
            gid = group[(i, slot)]
            if gid not in rename:
                rename[gid] = len(rename) + 1
            new_slots.append(rename[gid])
        new_slots = tuple(new_slots)
        if isinstance(node, Classical):
            new_nodes.append(Classical(new_slots))
        elif isinstance(node, Saddle):
            new_nodes.append(Saddle(new_slots, node.marker))
        else:
            new_nodes.append(Virtual(new_slots))
    return MarkedVertexDiagram(tuple(new_nodes), new_loops)


def smooth_saddles(
    d: MarkedVertexDiagram, level: Literal["lower", "upper"]
) -> MarkedVertexDiagram:
    """Resolve every saddle at the same level."""
    saddles = {i: level for i, n in enumerate(d.nodes) if isinstance(n, Saddle)}
    return resolve_saddles(d, saddles)


def orient(d: MarkedVertexDiagram) -> Orientation | NonOrientableWitness:
    """Find a semiarc orientation satisfying pass-through at classical and
    virtual nodes and source-sink at saddles, or report an odd cycle.

    One parity variable per semiarc encodes its direction; node rules
    become XOR constraints solved by union-find.
    """
    require_valid(d)
    occ = d.occurrences()
    order = {s: tuple(points) for s, points in occ.items()}

    def io_offset(s: int, point: tuple[int, int]) -> int:
        # io(point) = direction_var(s) XOR offset; offset flags which end
        return 0 if order[s][0] == point else 1

    uf = ParityUnionFind()
    constraints: list[tuple[int, int, int]] = []
    for i, node in enumerate(d.nodes):
        slots = node.slots
        pairs: list[tuple[int, int, int]]  # (slot_a, slot_b, want_equal)
        if isinstance(node, Saddle):
            pairs = [(0, 2, 1), (1, 3, 1), (0, 1, 0)]
        else:
            pairs = [(0, 2, 0), (1, 3, 0)]
        for sa, sb, want_equal in pairs:
            s1, s2 = slots[sa], slots[sb]
            k1 = io_offset(s1, (i, sa))
            k2 = io_offset(s2, (i, sb))
            parity = k1 ^ k2 ^ (0 if want_equal else 1)
            constraints.append((s1, s2, parity))

    for s1, s2, parity in constraints:
        if not uf.union(s1, s2, parity):
            cycle = uf.witness_cycle(s1, s2, parity)
            return NonOrientableWitness(tuple(cycle))

    io: dict[tuple[int, int], str] = {}
    for s, points in occ.items():
        direction = uf.parity_of(s)
        for point in points:
            bit = io_offset(s, point) ^ direction
            io[point] = "in" if bit else "out"
    return Orientation(io, tuple(0 for _ in range(d.free_loops)))


def euler_characteristic(d: MarkedVertexDiagram) -> SurfaceClass:
    """Euler characteristic of the represented closed surface.

    Computed as components(lower) + components(upper) - saddles; the
    caller is responsible for the smoothings being unlink diagrams,
    which is flagged, not checked.
    """
    require_valid(d)
    lower = len(naive_components(smooth_saddles(d, "lower")))
    upper = len(naive_components(smooth_saddles(d, "upper")))
    h = counts(d).h
    chi = lower + upper - h
    orientable = isinstance(orient(d), Orientation)
    genus = (2 - chi) // 2 if orientable else 2 - chi
    return SurfaceClass(chi, orientable, genus)


def crossing_change(d: MarkedVertexDiagram, node_index: int) -> MarkedVertexDiagram:
    """Swap the over and under strands of one classical crossing."""
    if not 0 <= node_index < len(d.nodes):
        raise DiagramError(f"node index {node_index} out of range")
    node = d.nodes[node_index]
    if not isinstance(node, Classical):
        raise DiagramError(f"node {node_index} is not a classical crossing")
    u1, o1, u2, o2 = node.slots
    new_nodes = list(d.nodes)
    new_nodes[node_index] = Classical((o1, u2, o2, u1))
    return MarkedVertexDiagram(tuple(new_nodes), d.free_loops)


def genus_of_projection(d: MarkedVertexDiagram) -> int:
    """Genus of the thickened rotation-system surface carrying the
    classical and saddle crossings; virtual nodes are passed through.

    Faces are traced on each connected piece and the genera summed.
    Free loops and purely virtual circles are planar and contribute 0.
    """
    require_valid(d)
    occ = d.occurrences()
    real = [i for i, n in enumerate(d.nodes) if not isinstance(n, Virtual)]
    real_set = set(real)
    darts = [(i, slot) for i in real for slot in range(4)]
    if not darts:
        return 0

    def other_end(point: tuple[int, int], s: int) -> tuple[int, int]:
        a, b = occ[s]
        return b if a == point else a

    # twin: follow the strand out of a dart through any virtual nodes
    twin: dict[tuple[int, int], tuple[int, int]] = {}
    for dart in darts:
        node_idx, slot = dart
        s = d.nodes[node_idx].slots[slot]
        point = other_end(dart, s)
        while point[0] not in real_set:
            v_idx, v_slot = point
            out_slot = _through(v_slot)
            s = d.nodes[v_idx].slots[out_slot]
            point = other_end((v_idx, out_slot), s)
        twin[dart] = point

    # connected pieces of the 4-valent graph
    piece: dict[int, int] = {}
    for i in real:
        if i in piece:
            continue
        pid = i
        stack = [i]
        piece[i] = pid
        while stack:
            cur = stack.pop()
            for slot in range(4):
                nxt = twin[(cur, slot)][0]
                if nxt not in piece:
                    piece[nxt] = pid
                    stack.append(nxt)

    total = 0
    for pid in sorted(set(piece.values())):
        vertices = [i for i in real if piece[i] == pid]
        piece_darts = [(i, slot) for i in vertices for slot in range(4)]
        edges = len(piece_darts) // 2
        faces = 0
        seen: set[tuple[int, int]] = set()
        for dart in piece_darts:
            if dart in seen:
                continue
            faces += 1
            cur = dart
            while cur not in seen:
                seen.add(cur)
                t = twin[cur]
                cur = (t[0], (t[1] + 1) % 4)
        chi = len(vertices) - edges + faces
        total += (2 - chi) // 2
    return total


# -- equality up to relabeling ------------------------------------------------

def equivalent(d1: MarkedVertexDiagram, d2: MarkedVertexDiagram) -> bool:
    """Combinatorial isomorphism: a semiarc bijection and node bijection
    matching node presentations up to the rotation identities."""
    if d1.free_loops != d2.free_loops or len(d1.nodes) != len(d2.nodes):
        return False

    def kind_of(n: Node) -> str:
        return n.kind

    if sorted(map(kind_of, d1.nodes)) != sorted(map(kind_of, d2.nodes)):
        return False

    n_nodes = len(d1.nodes)
    used = [False] * n_nodes

    def backtrack(i: int, arc_map: dict[int, int], used_targets: set[int]) -> bool:
        if i == n_nodes:
            return True
        node = d1.nodes[i]
        for j in range(n_nodes):
            if used[j] or kind_of(d2.nodes[j]) != kind_of(node):
                continue
            marker = node.marker if isinstance(node, Saddle) else 0
            for slots, vmarker in _node_variants(d2.nodes[j]):
                if vmarker != marker:
                    continue
                new_map = dict(arc_map)
                new_targets = set(used_targets)
                ok = True
                for s_from, s_to in zip(node.slots, slots):
                    if s_from in new_map:
                        if new_map[s_from] != s_to:
                            ok = False
                            break
                    elif s_to in new_targets:
                        ok = False
                        break
                    else:
                        new_map[s_from] = s_to
                        new_targets.add(s_to)
                if not ok:
                    continue
                used[j] = True
                if backtrack(i + 1, new_map, new_targets):
                    return True
                used[j] = False
        return False

    return backtrack(0, {}, set())


def renumber(d: MarkedVertexDiagram) -> MarkedVertexDiagram:
    """Relabel semiarcs 1..m in first-occurrence order over the nodes."""
    rename: dict[int, int] = {}
    new_nodes: list[Node] = []
    for node in d.nodes:
        slots = []
        for s in node.slots:
            if s not in rename:
                rename[s] = len(rename) + 1
            slots.append(rename[s])
        slots = tuple(slots)
        if isinstance(node, Classical):
            new_nodes.append(Classical(slots))
        elif isinstance(node, Saddle):
            new_nodes.append(Saddle(slots, node.marker))
        else:
            new_nodes.append(Virtual(slots))
    return MarkedVertexDiagram(tuple(new_nodes), d.free_loops)


# -- file format --------------------------------------------------------------

def parse_mvd(text: str, filename: str = "<string>") -> MarkedVertexDiagram:
    """Parse the .mvd format: optional ``O k`` plus X/S/V node lines."""
    nodes: list[Node] = []
    free_loops = 0
    saw_loops = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag, args = tokens[0].upper(), tokens[1:]

        def ints(count: int) -> list[int]:
            if len(args) != count:
                raise DiagramError(
                    f"{filename}:{lineno}: {tag} expects {count} fields, got {len(args)}"
                )
            try:
                return [int(a) for a in args]
            except ValueError:
                bad = next(a for a in args if not a.lstrip('-').isdigit())
                raise DiagramError(
                    f"{filename}:{lineno}: invalid integer token {bad!r}"
                ) from None

        if tag == "O":
            if saw_loops:
                raise DiagramError(f"{filename}:{lineno}: duplicate O line")
            (free_loops,) = ints(1)
            if free_loops < 0:
                raise DiagramError(f"{filename}:{lineno}: free loop count must be >= 0")
            saw_loops = True
        elif tag == "X":
            nodes.append(Classical(tuple(ints(4))))
        elif tag == "S":
            vals = ints(5)
            if vals[4] not in (0, 1):
                raise DiagramError(f"{filename}:{lineno}: marker bit must be 0 or 1")
            nodes.append(Saddle(tuple(vals[:4]), vals[4]))
        elif tag == "V":
            nodes.append(Virtual(tuple(ints(4))))
        else:
            raise DiagramError(f"{filename}:{lineno}: unknown node tag {tokens[0]!r}")
    d = MarkedVertexDiagram(tuple(nodes), free_loops)
    errors = validate(d)
    if errors:
        raise DiagramError(f"{filename}: " + "; ".join(errors))
    return d


def write_mvd(d: MarkedVertexDiagram) -> str:
    lines = []
    if d.free_loops:
        lines.append(f"O {d.free_loops}")
    for node in d.nodes:
        norm = normalize_node(node)
        if isinstance(norm, Classical):
            lines.append("X " + " ".join(map(str, norm.slots)))
        elif isinstance(norm, Saddle):
            lines.append("S " + " ".join(map(str, norm.slots)) + f" {norm.marker}")
        else:
            lines.append("V " + " ".join(map(str, norm.slots)))
    return "\n".join(lines) + ("\n" if lines else "")
