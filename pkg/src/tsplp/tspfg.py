"""The TSP flow graph and the column index of its LP variables.

Nodes are pairs ``[i, r]`` (city ``i`` visited at time-of-travel ``r``) with
``i, r`` in ``1..m``; arcs are triples ``[i, r, j]`` joining ``[i, r]`` to
``[j, r + 1]`` for ``r`` in ``1..m-1`` and ``i != j``.

Two variable families live on the graph:

* ``y[i,r,j]`` -- flow on arc ``[i, r, j]``;
* ``x[i,r][j,s,k]`` -- flow through node ``[i, r]`` *and* arc ``[j, s, k]``.

Most ``x`` combinations are implicit zeros (they would revisit a city or
break stage adjacency) and get no column at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import DomainError, ValidationError

MIN_MODEL_CITIES = 6

Arc = Tuple[int, int, int]
XKey = Tuple[int, int, int, int, int]


def is_implicit_zero_x(i: int, r: int, j: int, s: int, k: int, m: int) -> bool:
    """True iff ``x[i,r][j,s,k]`` is forced to zero and therefore not created.

    Zero when the arc is a self-loop (``j == k``), when the node shares the
    arc's tail stage but not its city (``s == r, i != j``), when it shares
    the arc's head stage but not its city (``s == r - 1, i != k``), or when
    the node is away from the arc yet repeats one of its cities.
    """
    if not (1 <= i <= m and 1 <= j <= m and 1 <= k <= m):
        raise ValidationError(f"city index out of range 1..{m}: i={i}, j={j}, k={k}")
    if not 1 <= r <= m:
        raise ValidationError(f"node stage r={r} out of range 1..{m}")
    if not 1 <= s <= m - 1:
        raise ValidationError(f"arc stage s={s} out of range 1..{m - 1}")
    if j == k:
        return True
    if s == r:
        return i != j
    if s == r - 1:
        return i != k
    return i == j or i == k


def y_count_formula(n: int) -> int:
    m = n - 1
    return m * (m - 1) ** 2


def x_count_formula(n: int) -> int:
    m = n - 1
    return m * (m - 1) ** 2 * ((m - 2) ** 2 + 2)


def y_name(i: int, r: int, j: int) -> str:
    return f"y_{i}_{r}_{j}"


def x_name(i: int, r: int, j: int, s: int, k: int) -> str:
    return f"x_{i}_{r}_{j}_{s}_{k}"


def iter_arcs(m: int) -> Iterator[Arc]:
    """All arcs ``(i, r, j)`` in lexicographic order."""
    for i in range(1, m + 1):
        for r in range(1, m):
            for j in range(1, m + 1):
                if i != j:
                    yield (i, r, j)


def iter_x_keys(m: int) -> Iterator[XKey]:
    """Surviving ``(i, r, j, s, k)`` in lexicographic order.

    Generated constructively (no filter over all ``m^5`` tuples) so that large
    ``n`` stays cheap; tests cross-check against the brute-force filter.
    """
    cities = range(1, m + 1)
    for i in cities:
        for r in range(1, m + 1):
            for j in cities:
                for s in range(1, m):
                    if s == r:
                        if j != i:
                            continue
                        for k in cities:
                            if k != i:
                                yield (i, r, j, s, k)
                    elif s == r - 1:
                        if j != i:
                            yield (i, r, j, s, i)
                    elif j != i:
                        for k in cities:
                            if k != i and k != j:
                                yield (i, r, j, s, k)


@dataclass(frozen=True, eq=False)
class VariableIndex:
    """Bijection between surviving variables and dense column ids.

    Columns ``0 .. y_count-1`` hold the ``y`` block, the ``x`` block follows;
    both in lexicographic index order.
    """

    n: int
    y_keys: Tuple[Arc, ...]
    x_keys: Tuple[XKey, ...]
    y_cols: Dict[Arc, int] = field(repr=False)
    x_cols: Dict[XKey, int] = field(repr=False)

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def y_count(self) -> int:
        return len(self.y_keys)

    @property
    def x_count(self) -> int:
        return len(self.x_keys)

    @property
    def size(self) -> int:
        return len(self.y_keys) + len(self.x_keys)

    def y(self, i: int, r: int, j: int) -> Optional[int]:
        return self.y_cols.get((i, r, j))

    def x(self, i: int, r: int, j: int, s: int, k: int) -> Optional[int]:
        col = self.x_cols.get((i, r, j, s, k))
        return None if col is None else col + self.y_count

    def decode(self, col: int) -> Tuple[str, tuple]:
        """Map a column id back to ``("y", (i, r, j))`` or ``("x", (i, r, j, s, k))``."""
        if not 0 <= col < self.size:
            raise ValidationError(f"column {col} out of range 0..{self.size - 1}")
        if col < self.y_count:
            return "y", self.y_keys[col]
        return "x", self.x_keys[col - self.y_count]

    def encode(self, kind: str, key: tuple) -> int:
        col = self.y(*key) if kind == "y" else self.x(*key) if kind == "x" else None
        if col is None:
            raise ValidationError(f"no variable {kind}{key}")
        return col

    def name(self, col: int) -> str:
        kind, key = self.decode(col)
        return y_name(*key) if kind == "y" else x_name(*key)

    def names(self) -> List[str]:
        return [y_name(*a) for a in self.y_keys] + [x_name(*k) for k in self.x_keys]

    def lookup_name(self, name: str) -> Optional[int]:
        """Column of a variable name such as ``y_3_1_5``; None if unknown."""
        parts = name.split("_")
        try:
            nums = tuple(int(p) for p in parts[1:])
        except ValueError:
            return None
        if any(str(v) != p for v, p in zip(nums, parts[1:])):
            return None  # reject non-canonical spellings like y_03_1_5
        if parts[0] == "y" and len(nums) == 3:
            return self.y(*nums)
        if parts[0] == "x" and len(nums) == 5:
            return self.x(*nums)
        return None


def build_index(n: int) -> VariableIndex:
    """Index every arc and every surviving node/arc pair of an ``n``-city graph."""
    if n < MIN_MODEL_CITIES:
        raise DomainError(
            f"the flow model needs more than 5 cities (Big-M costs can pad smaller instances); got n={n}"
        )
    m = n - 1
    y_keys = tuple(iter_arcs(m))
    x_keys = tuple(iter_x_keys(m))
    return VariableIndex(
        n=n,
        y_keys=y_keys,
        x_keys=x_keys,
        y_cols={key: col for col, key in enumerate(y_keys)},
        x_cols={key: col for col, key in enumerate(x_keys)},
    )
