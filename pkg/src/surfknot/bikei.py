"""Finite bikei (involutory biquandles) as operation tables.

A bikei on {1..n} is a pair of binary operations, written here as
``up[x][y]`` (the over-passage action x -> x^y) and ``down[x][y]``
(the under-passage action x -> x_y), subject to the axioms checked by
:func:`verify_bikei`.  Tables are stored 1-based to match the usual
n x 2n matrix layout where columns 1..n hold the first operation and
columns n+1..2n the second.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


class BikeiError(ValueError):
    """Malformed table, group or parameter input."""


@dataclass(frozen=True)
class BikeiTable:
    order: int
    up: tuple[tuple[int, ...], ...]
    down: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.order
        if n <= 0:
            raise BikeiError("order must be positive")
        for name, table in (("up", self.up), ("down", self.down)):
            if len(table) != n:
                raise BikeiError(f"{name} table must have {n} rows")
            for i, row in enumerate(table):
                if len(row) != n:
                    raise BikeiError(f"{name} row {i + 1} must have {n} entries")
                for j, v in enumerate(row):
                    if not 1 <= v <= n:
                        raise BikeiError(
                            f"{name}[{i + 1}][{j + 1}] = {v} out of range 1..{n}"
                        )

    # 1-based accessors used throughout
    def up_at(self, x: int, y: int) -> int:
        return self.up[x - 1][y - 1]

    def down_at(self, x: int, y: int) -> int:
        return self.down[x - 1][y - 1]

    def combined(self) -> tuple[tuple[int, ...], ...]:
        """Rows of the n x 2n matrix (up block, then down block)."""
        return tuple(self.up[i] + self.down[i] for i in range(self.order))

    def is_kei(self) -> bool:
        n = self.order
        return all(self.down[x][y] == x + 1 for x in range(n) for y in range(n))


def table_from_combined(rows: list[list[int]]) -> BikeiTable:
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != 2 * n:
            raise BikeiError(f"row {i + 1} has {len(row)} entries, expected {2 * n}")
    up = tuple(tuple(row[:n]) for row in rows)
    down = tuple(tuple(row[n:]) for row in rows)
    return BikeiTable(n, up, down)


@dataclass
class AxiomReport:
    valid: bool
    violations: list[tuple[str, tuple]] = field(default_factory=list)


@dataclass(frozen=True)
class FixedSet:
    members: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.members)


def verify_bikei(t: BikeiTable) -> AxiomReport:
    """Check all bikei axioms, reporting every violation.

    Axioms, for all x, y, z in {1..n}:
      i    x^x = x_x
      ii   S(x, y) = (y_x, x^y) is a bijection of pairs
      iii  the three exchange laws
      iv   (x^y)^y = x and (x_y)_y = x
      v    x^(y_x) = x^y
      vi   x_(y^x) = x_y
    """
    n = t.order
    up, down = t.up_at, t.down_at
    violations: list[tuple[str, tuple]] = []
    rng = range(1, n + 1)

    for x in rng:
        if up(x, x) != down(x, x):
            violations.append(("i", (x,)))

    seen: dict[tuple[int, int], tuple[int, int]] = {}
    for x in rng:
        for y in rng:
            image = (down(y, x), up(x, y))
            if image in seen:
                violations.append(("ii", (seen[image], (x, y))))
            else:
                seen[image] = (x, y)

    for x in rng:
        for y in rng:
            if up(up(x, y), y) != x:
                violations.append(("iv.up", (x, y)))
            if down(down(x, y), y) != x:
                violations.append(("iv.down", (x, y)))
            if up(x, down(y, x)) != up(x, y):
                violations.append(("v", (x, y)))
            if down(x, up(y, x)) != down(x, y):
                violations.append(("vi", (x, y)))

    for x in rng:
        for y in rng:
            for z in rng:
                if up(up(x, y), up(z, y)) != up(up(x, z), down(y, z)):
                    violations.append(("iii.1", (x, y, z)))
                if down(up(x, y), up(z, y)) != up(down(x, z), down(y, z)):
                    violations.append(("iii.2", (x, y, z)))
                if down(down(x, y), down(z, y)) != down(down(x, z), up(y, z)):
                    violations.append(("iii.3", (x, y, z)))

    return AxiomReport(valid=not violations, violations=violations)


def alexander_bikei(modulus: int, s: int, t: int) -> BikeiTable:
    """Bikei on Z_modulus with x^y = t*x + (s-t)*y and x_y = s*x.

    Element i of {1..n} stands for the residue i mod n (so n is 0).
    The parameters must satisfy s^2 = t^2 = 1 and (1+t) = s(1+t).
    """
    n = modulus
    if n <= 0:
        raise BikeiError("modulus must be positive")
    s %= n
    t %= n
    if (s * s) % n != 1 % n:
        raise BikeiError(f"invalid parameters: s^2 = {s * s % n} != 1 (mod {n})")
    if (t * t) % n != 1 % n:
        raise BikeiError(f"invalid parameters: t^2 = {t * t % n} != 1 (mod {n})")
    if (1 + t) % n != (s * (1 + t)) % n:
        raise BikeiError(
            f"invalid parameters: (1+t) = {(1 + t) % n} != s(1+t) = {s * (1 + t) % n} (mod {n})"
        )

    def idx(value: int) -> int:
        return (value - 1) % n + 1

    up = tuple(
        tuple(idx(t * x + (s - t) * y) for y in range(1, n + 1)) for x in range(1, n + 1)
    )
    down = tuple(tuple(idx(s * x) for _y in range(1, n + 1)) for x in range(1, n + 1))
    return BikeiTable(n, up, down)


def _check_group(cayley: tuple[tuple[int, ...], ...]) -> int:
    """Validate a Cayley table over {1..n}; return the identity element."""
    n = len(cayley)
    for i, row in enumerate(cayley):
        if len(row) != n:
            raise BikeiError(f"group row {i + 1} must have {n} entries")
        for j, v in enumerate(row):
            if not 1 <= v <= n:
                raise BikeiError(f"group entry ({i + 1},{j + 1}) = {v} out of range")

    def mul(a: int, b: int) -> int:
        return cayley[a - 1][b - 1]

    identity = None
    for e in range(1, n + 1):
        if all(mul(e, x) == x and mul(x, e) == x for x in range(1, n + 1)):
            identity = e
            break
    if identity is None:
        raise BikeiError("invalid group: no identity element")
    for x in range(1, n + 1):
        if not any(mul(x, y) == identity and mul(y, x) == identity for y in range(1, n + 1)):
            raise BikeiError(f"invalid group: element {x} has no inverse")
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for c in range(1, n + 1):
                if mul(mul(a, b), c) != mul(a, mul(b, c)):
                    raise BikeiError(f"invalid group: associativity fails at {(a, b, c)}")
    return identity


def core_bikei(cayley, side: str = "up") -> BikeiTable:
    """Bikei from a group: x^y = y x^-1 y with x_y = x (or mirrored).

    ``side`` names the nontrivial operation, "up" or "down".
    """
    table = tuple(tuple(row) for row in cayley)
    n = len(table)
    identity = _check_group(table)

    def mul(a: int, b: int) -> int:
        return table[a - 1][b - 1]

    inv = {}
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            if mul(x, y) == identity and mul(y, x) == identity:
                inv[x] = y
                break

    core = tuple(
        tuple(mul(mul(y, inv[x]), y) for y in range(1, n + 1)) for x in range(1, n + 1)
    )
    trivial = tuple(tuple(x for _y in range(1, n + 1)) for x in range(1, n + 1))
    if side == "up":
        return BikeiTable(n, core, trivial)
    if side == "down":
        return BikeiTable(n, trivial, core)
    raise BikeiError(f"unknown side {side!r}; expected 'up' or 'down'")


def fixed_set(t: BikeiTable) -> FixedSet:
    """F = elements fixed by both diagonal actions: x^x = x_x = x."""
    members = frozenset(
        x for x in range(1, t.order + 1) if t.up_at(x, x) == x and t.down_at(x, x) == x
    )
    return FixedSet(members)


# -- enumeration -------------------------------------------------------------

def _involutions(n: int) -> list[tuple[int, ...]]:
    """All involutions of {1..n}, as 1-based image tuples."""
    result = []
    for perm in itertools.permutations(range(1, n + 1)):
        if all(perm[perm[i] - 1] == i + 1 for i in range(n)):
            result.append(perm)
    return result


def canonical_form(t: BikeiTable) -> tuple[tuple[int, ...], ...]:
    """Lexicographically minimal combined matrix over all relabelings."""
    n = t.order
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        # perm[i-1] is the new name of element i
        inv = [0] * (n + 1)
        for old, new in enumerate(perm, start=1):
            inv[new] = old
        rows = []
        for new_x in range(1, n + 1):
            old_x = inv[new_x]
            up_row = tuple(perm[t.up_at(old_x, inv[new_y]) - 1] for new_y in range(1, n + 1))
            down_row = tuple(perm[t.down_at(old_x, inv[new_y]) - 1] for new_y in range(1, n + 1))
            rows.append(up_row + down_row)
        rows = tuple(rows)
        if best is None or rows < best:
            best = rows
    return best


def enumerate_bikei(n: int, dedup: bool = False) -> list[BikeiTable]:
    """All bikei tables on {1..n}, sorted by combined matrix.

    With ``dedup`` one representative per isomorphism class is returned,
    the table whose combined matrix is the canonical (minimal) one.

    The search fills the y-th columns of both tables together; axiom iv
    restricts every column to an involution, axiom i ties the diagonal,
    and the remaining axioms prune partial assignments.
    """
    involutions = _involutions(n)
    # column pairs (beta, alpha) with matching diagonal entry at y
    col_pairs = {
        y: [(b, a) for b in involutions for a in involutions if b[y - 1] == a[y - 1]]
        for y in range(1, n + 1)
    }

    up_cols: list[tuple[int, ...]] = []
    down_cols: list[tuple[int, ...]] = []
    results: list[BikeiTable] = []

    def up(x: int, y: int) -> int:
        return up_cols[y - 1][x - 1]

    def down(x: int, y: int) -> int:
        return down_cols[y - 1][x - 1]

    def consistent(k: int) -> bool:
        rng = range(1, n + 1)
        placed = range(1, k + 1)
        for x in rng:
            for y in placed:
                w = down(y, x) if x <= k else None
                if w is not None and w <= k and up(x, w) != up(x, y):
                    return False
                w = up(y, x) if x <= k else None
                if w is not None and w <= k and down(x, w) != down(x, y):
                    return False
        for x in rng:
            for y in placed:
                for z in placed:
                    a = up(z, y)
                    b = down(y, z)
                    if a <= k and b <= k:
                        if up(up(x, y), a) != up(up(x, z), b):
                            return False
                        if down(up(x, y), a) != up(down(x, z), b):
                            return False
                    c = down(z, y)
                    d = up(y, z)
                    if c <= k and d <= k:
                        if down(down(x, y), c) != down(down(x, z), d):
                            return False
        return True

    def search(y: int) -> None:
        if y > n:
            candidate = BikeiTable(
                n,
                tuple(tuple(up_cols[j][i] for j in range(n)) for i in range(n)),
                tuple(tuple(down_cols[j][i] for j in range(n)) for i in range(n)),
            )
            if verify_bikei(candidate).valid:
                results.append(candidate)
            return
        for beta, alpha in col_pairs[y]:
            up_cols.append(beta)
            down_cols.append(alpha)
            if consistent(y):
                search(y + 1)
            up_cols.pop()
            down_cols.pop()

    search(1)

    if dedup:
        by_class: dict[tuple, BikeiTable] = {}
        for t in results:
            key = canonical_form(t)
            if key not in by_class:
                by_class[key] = table_from_combined([list(r) for r in key])
        results = list(by_class.values())

    results.sort(key=lambda t: t.combined())
    return results


# -- file format -------------------------------------------------------------

def parse_bikei(text: str, filename: str = "<string>") -> BikeiTable:
    """Parse the .bikei format: first line n, then n rows of 2n integers."""
    rows: list[list[int]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise BikeiError(f"{filename}:{lineno}: {exc}") from None
        if n is None:
            if len(values) != 1:
                raise BikeiError(f"{filename}:{lineno}: expected a single order value")
            n = values[0]
            if n <= 0:
                raise BikeiError(f"{filename}:{lineno}: order must be positive")
        else:
            if len(values) != 2 * n:
                raise BikeiError(
                    f"{filename}:{lineno}: expected {2 * n} entries, got {len(values)}"
                )
            rows.append(values)
    if n is None:
        raise BikeiError(f"{filename}: empty table file")
    if len(rows) != n:
        raise BikeiError(f"{filename}: expected {n} rows, got {len(rows)}")
    try:
        return table_from_combined(rows)
    except BikeiError as exc:
        raise BikeiError(f"{filename}: {exc}") from None


def write_bikei(t: BikeiTable) -> str:
    lines = [str(t.order)]
    for row in t.combined():
        lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"
