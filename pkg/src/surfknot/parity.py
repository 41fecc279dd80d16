"""Union-find over boolean variables with parity constraints.

Each constraint ties two variables by an XOR relation ``x ^ y = parity``.
The structure answers satisfiability incrementally and, on the first
contradiction, can report an odd cycle of constraints as a witness.
"""

from __future__ import annotations

from typing import Hashable


class ParityUnionFind:
    def __init__(self) -> None:
        self.parent: dict[Hashable, Hashable] = {}
        self.rank: dict[Hashable, int] = {}
        # parity of a node relative to its parent
        self.offset: dict[Hashable, int] = {}
        # every accepted constraint, kept for witness extraction
        self.edges: list[tuple[Hashable, Hashable, int]] = []

    def add(self, v: Hashable) -> None:
        if v not in self.parent:
            self.parent[v] = v
            self.rank[v] = 0
            self.offset[v] = 0

    def find(self, v: Hashable) -> tuple[Hashable, int]:
        """Return (root, parity of v relative to root)."""
        self.add(v)
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        root = v
        # path compression, accumulating parities from the far end
        parity = 0
        for node in reversed(path):
            parity ^= self.offset[node]
            self.parent[node] = root
            self.offset[node] = parity
        return root, self.offset[path[0]] if path else 0

    def parity_of(self, v: Hashable) -> int:
        return self.find(v)[1]

    def union(self, a: Hashable, b: Hashable, parity: int) -> bool:
        """Impose a ^ b = parity.  Returns False on contradiction."""
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        if ra == rb:
            if pa ^ pb != parity:
                return False
            self.edges.append((a, b, parity))
            return True
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
            pa, pb = pb, pa
        self.parent[rb] = ra
        self.offset[rb] = pa ^ pb ^ parity
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.edges.append((a, b, parity))
        return True

    def witness_cycle(self, a: Hashable, b: Hashable, parity: int) -> list[Hashable]:
        """Odd cycle through a and b given that union(a, b, parity) failed.

        Returns the vertices of a path from a to b through previously
        accepted constraints; closing it with the rejected constraint
        gives a cycle of odd total parity.
        """
        adj: dict[Hashable, list[Hashable]] = {}
        for u, v, _ in self.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        prev = {a: None}
        queue = [a]
        while queue:
            cur = queue.pop(0)
            if cur == b:
                break
            for nxt in adj.get(cur, []):
                if nxt not in prev:
                    prev[nxt] = cur
                    queue.append(nxt)
        if b not in prev:
            return [a, b]
        path = [b]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        path.reverse()
        return path
