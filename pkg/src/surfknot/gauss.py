"""Gauss words for single-component marked vertex diagrams.

The word records one trip around the unique naive component: classical
crossings contribute an over and an under token carrying a shared
handedness sign, saddles contribute two marked tokens with a shared
direction flag.  Virtual crossings are artifacts of drawing the word in
the plane and are never recorded; reconstruction reinserts them at
interleaved chords.

Handedness is + when, at the under passage, the over strand enters the
crossing one slot counterclockwise from the under entry.  The saddle
flag reproduces the node's marker bit read with the first passage
rotated to the leading strand; both conventions are pinned by the
to_gauss / from_gauss round trip.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagram import (
    Classical,
    DiagramError,
    MarkedVertexDiagram,
    Node,
    Saddle,
    Virtual,
    naive_components,
    renumber,
    require_valid,
)


class GaussError(ValueError):
    """Malformed Gauss word."""


@dataclass(frozen=True)
class Token:
    kind: str  # "O" | "U" | "M"
    ident: int
    value: int  # handedness +1/-1 for O/U, flag 0/1 for M

    def __str__(self) -> str:
        if self.kind == "M":
            return f"M{self.ident}{self.value}"
        sign = "+" if self.value > 0 else "-"
        return f"{self.kind}{self.ident}{sign}"


@dataclass(frozen=True)
class GaussMVD:
    word: tuple[Token, ...]

    def __str__(self) -> str:
        return " ".join(str(tok) for tok in self.word)

    def saddle_ids(self) -> list[int]:
        return sorted({t.ident for t in self.word if t.kind == "M"})

    def classical_ids(self) -> list[int]:
        return sorted({t.ident for t in self.word if t.kind != "M"})


def validate_word(g: GaussMVD) -> list[str]:
    errors = []
    by_id: dict[int, list[tuple[int, Token]]] = {}
    for pos, tok in enumerate(g.word):
        by_id.setdefault(tok.ident, []).append((pos, tok))
    for ident, entries in sorted(by_id.items()):
        kinds = sorted(t.kind for _p, t in entries)
        if kinds == ["M", "M"]:
            if entries[0][1].value != entries[1][1].value:
                errors.append(f"saddle chord {ident}: flags differ")
        elif kinds == ["O", "U"]:
            if entries[0][1].value != entries[1][1].value:
                errors.append(f"classical chord {ident}: handedness differs")
        else:
            errors.append(
                f"chord {ident}: expected one O and one U or two M tokens, got {kinds}"
            )
    return errors


def require_valid_word(g: GaussMVD) -> None:
    errors = validate_word(g)
    if errors:
        raise GaussError("; ".join(errors))


def _relabel(word: tuple[Token, ...]) -> tuple[Token, ...]:
    """Rename chord ids 1.. in order of first appearance."""
    rename: dict[int, int] = {}
    out = []
    for tok in word:
        if tok.ident not in rename:
            rename[tok.ident] = len(rename) + 1
        out.append(Token(tok.kind, rename[tok.ident], tok.value))
    return tuple(out)


def canonical_word(g: GaussMVD) -> tuple[Token, ...]:
    """Least relabeled rotation, in either reading direction.

    The base circle has no preferred starting point, and a diagram does
    not remember the direction its word was read in, so canonical
    comparison quotients by rotation and reversal as well as by chord
    renaming.
    """
    w = g.word
    best = None
    for word in (w, tuple(reversed(w))):
        for k in range(len(word) or 1):
            cand = _relabel(word[k:] + word[:k])
            key = tuple((t.kind, t.ident, t.value) for t in cand)
            if best is None or key < best[0]:
                best = (key, cand)
    return best[1] if best else ()


def same_word(a: GaussMVD, b: GaussMVD) -> bool:
    return canonical_word(a) == canonical_word(b)


# -- diagram -> word ----------------------------------------------------------

def _traverse(d: MarkedVertexDiagram, start_entry) -> list[tuple[int, int]]:
    """Node passages (node_index, entry_slot) around the component."""
    occ = d.occurrences()
    passages = []
    s, entry = start_entry
    start = (s, entry)
    while True:
        node_idx, slot = entry
        passages.append((node_idx, slot))
        exit_slot = (slot + 2) % 4
        s_next = d.nodes[node_idx].slots[exit_slot]
        a, b = occ[s_next]
        entry = b if a == (node_idx, exit_slot) else a
        s = s_next
        if (s, entry) == start:
            return passages


def _word_from_passages(
    d: MarkedVertexDiagram, passages: list[tuple[int, int]]
) -> tuple[Token, ...]:
    ids: dict[int, int] = {}
    first_entry: dict[int, int] = {}
    tokens: list[Token] = []
    # precompute handedness per classical node from its two entry slots
    entries: dict[int, list[int]] = {}
    for node_idx, slot in passages:
        entries.setdefault(node_idx, []).append(slot)

    def handedness(node_idx: int) -> int:
        p = next(s for s in entries[node_idx] if s in (0, 2))
        q = next(s for s in entries[node_idx] if s in (1, 3))
        return 1 if (q - p) % 4 == 1 else -1

    def saddle_flag(node_idx: int) -> int:
        node = d.nodes[node_idx]
        p1, p2 = entries[node_idx]
        rot = p1  # rotate left so the first entry sits at slot 0
        marker = node.marker if rot % 2 == 0 else 1 - node.marker
        return marker if (p2 - rot) % 4 == 1 else 1 - marker

    for node_idx, slot in passages:
        node = d.nodes[node_idx]
        if isinstance(node, Virtual):
            continue
        if node_idx not in ids:
            ids[node_idx] = len(ids) + 1
            first_entry[node_idx] = slot
        ident = ids[node_idx]
        if isinstance(node, Classical):
            kind = "U" if slot in (0, 2) else "O"
            tokens.append(Token(kind, ident, handedness(node_idx)))
        else:
            tokens.append(Token("M", ident, saddle_flag(node_idx)))
    return tuple(tokens)


def to_gauss(d: MarkedVertexDiagram) -> GaussMVD:
    """Gauss word of a diagram with exactly one naive component.

    The traversal starts along the least semiarc; of the two reading
    directions the one with the smaller canonical word is returned.
    """
    require_valid(d)
    if d.free_loops:
        raise DiagramError("diagram has free loops; no single base circle")
    if not d.nodes:
        raise DiagramError("diagram has no nodes; word would be empty")
    comps = [c for c in naive_components(d) if c]
    if len(comps) != 1:
        raise DiagramError(
            f"diagram has {len(comps)} naive components; merge them first "
            "(moves.merge_components)"
        )
    occ = d.occurrences()
    candidates = []
    for entry in occ[1]:
        passages = _traverse(d, (1, entry))
        word = _word_from_passages(d, passages)
        key = tuple((t.kind, t.ident, t.value) for t in canonical_word(GaussMVD(word)))
        candidates.append((key, word))
    candidates.sort(key=lambda kw: kw[0])
    return GaussMVD(candidates[0][1])


# -- word -> diagram ----------------------------------------------------------

def _interleaved(a: tuple[int, int], b: tuple[int, int], length: int) -> bool:
    """Whether two chords with endpoint positions a, b interleave on the
    cycle 0..length-1."""
    (u, v), (x, y) = a, b

    def between(p: int) -> bool:
        # p strictly inside the arc from u to v (walking forward)
        return (p - u) % length < (v - u) % length and p != u

    return between(x) != between(y)


def from_gauss(g: GaussMVD) -> MarkedVertexDiagram:
    """Realize a Gauss word as a marked vertex diagram.

    The base circle is laid out with one node per chord at its first
    passage; the second passage is routed to it along the chord by a
    pair of parallel tracks.  Tracks of interleaved chords cross, and
    every such crossing becomes a virtual node.  The result has one
    naive component and reproduces the word under :func:`to_gauss`.
    """
    require_valid_word(g)
    length = len(g.word)
    if length == 0:
        raise GaussError("empty word has no diagram; use a free loop instead")

    positions: dict[int, list[int]] = {}
    for pos, tok in enumerate(g.word):
        positions.setdefault(tok.ident, []).append(pos)
    chords = {ident: tuple(pos) for ident, pos in positions.items()}

    next_arc = [0]

    def fresh() -> int:
        next_arc[0] += 1
        return next_arc[0]

    base = {i: fresh() for i in range(length)}  # arc after token i

    # tracks: (ident, "in" | "out") -> ordered crossing partners
    def partner_key(ident: int) -> tuple:
        return chords[ident]

    crossings: dict[tuple[int, str], list[tuple[int, str]]] = {}
    idents = sorted(chords)
    for k in idents:
        for lane in ("in", "out"):
            partners: list[tuple[int, str]] = []
            for k2 in sorted((x for x in idents if x != k), key=partner_key):
                if _interleaved(chords[k], chords[k2], length):
                    partners.extend([(k2, "in"), (k2, "out")])
            crossings[(k, lane)] = partners

    # subdivide each track into pieces separated by its crossings
    pieces: dict[tuple[int, str], list[int]] = {}
    for k in idents:
        u, v = chords[k]
        for lane in ("in", "out"):
            count = len(crossings[(k, lane)])
            if lane == "in":
                # starts as the base arc before the second passage
                chain = [base[(v - 1) % length]] + [fresh() for _ in range(count)]
            else:
                chain = [fresh() for _ in range(count)] + [base[v]]
            pieces[(k, lane)] = chain

    def piece_around(track: tuple[int, str], other: tuple[int, str]) -> tuple[int, int]:
        idx = crossings[track].index(other)
        chain = pieces[track]
        return chain[idx], chain[idx + 1]

    virtual_nodes: list[Node] = []
    done: set[frozenset] = set()
    for track, partners in crossings.items():
        for other in partners:
            key = frozenset((track, other))
            if key in done:
                continue
            done.add(key)
            a, b = piece_around(track, (other[0], other[1]))
            x, y = piece_around(other, track)
            virtual_nodes.append(Virtual((a, x, b, y)))

    real_nodes: list[Node] = []
    for k in sorted(idents, key=lambda i: chords[i][0]):
        u, v = chords[k]
        tok_u, tok_v = g.word[u], g.word[v]
        a_pre = base[(u - 1) % length]
        a_post = base[u]
        c_in = pieces[(k, "in")][-1]
        d_out = pieces[(k, "out")][0]
        if tok_u.kind == "M":
            real_nodes.append(Saddle((a_pre, c_in, a_post, d_out), tok_u.value))
        else:
            hand = tok_u.value
            if tok_u.kind == "U":
                slots = (a_pre, c_in, a_post, d_out) if hand > 0 else (
                    a_pre, d_out, a_post, c_in)
            else:
                slots = (c_in, a_pre, d_out, a_post) if hand > 0 else (
                    c_in, a_post, d_out, a_pre)
            real_nodes.append(Classical(slots))

    d = MarkedVertexDiagram(tuple(real_nodes) + tuple(virtual_nodes), 0)
    d = renumber(d)
    require_valid(d)
    return d


def gauss_orientable(g: GaussMVD) -> bool:
    """Orientability test: every saddle chord must have an even number
    of saddle-chord endpoints strictly between its two endpoints.
    Classical arrow endpoints do not obstruct orientation."""
    require_valid_word(g)
    saddle_positions = [
        pos for pos, tok in enumerate(g.word) if tok.kind == "M"
    ]
    by_id: dict[int, list[int]] = {}
    for pos, tok in enumerate(g.word):
        if tok.kind == "M":
            by_id.setdefault(tok.ident, []).append(pos)
    length = len(g.word)
    for ident, (p1, p2) in by_id.items():
        between = sum(
            1 for q in saddle_positions if (q - p1) % length < (p2 - p1) % length and q != p1
        )
        if between % 2:
            return False
    return True


# -- file format --------------------------------------------------------------

_TOKEN_RE = re.compile(r"^([OUM])(\d+)([+\-01])$")


def parse_gauss(text: str, filename: str = "<string>") -> GaussMVD:
    tokens: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for tok_text in line.split():
            m = _TOKEN_RE.match(tok_text)
            if not m:
                raise GaussError(f"{filename}:{lineno}: bad token {tok_text!r}")
            kind, ident, val = m.group(1), int(m.group(2)), m.group(3)
            if kind == "M":
                if val not in "01":
                    raise GaussError(
                        f"{filename}:{lineno}: saddle token {tok_text!r} needs flag 0/1"
                    )
                tokens.append(Token("M", ident, int(val)))
            else:
                if val not in "+-":
                    raise GaussError(
                        f"{filename}:{lineno}: token {tok_text!r} needs sign +/-"
                    )
                tokens.append(Token(kind, ident, 1 if val == "+" else -1))
    g = GaussMVD(tuple(tokens))
    errors = validate_word(g)
    if errors:
        raise GaussError(f"{filename}: " + "; ".join(errors))
    return g


def write_gauss(g: GaussMVD) -> str:
    return str(g) + "\n"
