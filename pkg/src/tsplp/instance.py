"""TSP instances: random generation, CSV persistence and tour costing.

Cities are labelled ``0..n-1`` and city 0 is the depot. A tour is written as
the order ``(i_1, ..., i_m)`` in which the remaining ``m = n - 1`` cities are
visited; the legs from and back to the depot are implicit.

Random numbers come from numpy's PCG64 bit generator. Every random quantity
draws from its own stream, derived from the user seed with
:class:`numpy.random.SeedSequence`:

* ``spawn_key=(0,)`` -- city coordinates (Euclidean model),
* ``spawn_key=(1, i, j)`` -- the cost draw of pair ``(i, j)``; symmetric
  instances use the unordered key ``(1, min(i, j), max(i, j))``.

Changing ``n`` therefore leaves the draw of an existing pair untouched, and the
streams are identical on every platform numpy supports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, GenerationError, ParseError, ValidationError

COST_MODELS = ("euclidean_pct", "uniform")
GRID_SIZE = 100.0
TRIANGLE_MAX_PASSES = 8


@dataclass(frozen=True)
class GenConfig:
    """Parameters of a random instance."""

    n: int
    cost_model: str = "euclidean_pct"
    pct_low: float = 0.9
    pct_high: float = 1.1
    low: float = 0.0
    high: float = 100.0
    symmetric: bool = True
    integer: bool = False
    triangle: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.cost_model not in COST_MODELS:
            raise ConfigError(f"unknown cost model {self.cost_model!r}; expected one of {COST_MODELS}")
        if self.n < 3:
            raise ConfigError(f"need at least 3 cities, got n={self.n}")
        if self.pct_low > self.pct_high:
            raise ConfigError(f"pct_low={self.pct_low} exceeds pct_high={self.pct_high}")
        if self.low > self.high:
            raise ConfigError(f"low={self.low} exceeds high={self.high}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)


EXTERNAL = "external"


@dataclass(frozen=True, eq=False)
class TspInstance:
    """An ``n``-city instance with travel cost matrix ``cost[i, j]``.

    The matrix is stored as read-only float64. Its diagonal is zero and is
    never read by any consumer.
    """

    n: int
    cost: np.ndarray
    meta: Union[GenConfig, str] = EXTERNAL

    def __post_init__(self):
        cost = np.array(self.cost, dtype=np.float64)
        if cost.shape != (self.n, self.n):
            raise ValidationError(f"cost matrix must be {self.n}x{self.n}, got {cost.shape}")
        if not np.all(np.isfinite(cost)):
            raise ValidationError("cost matrix contains non-finite entries")
        np.fill_diagonal(cost, 0.0)
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.cost, self.cost.T))

    @property
    def is_integer(self) -> bool:
        return bool(np.all(self.cost == np.round(self.cost)))

    def transposed(self) -> "TspInstance":
        return TspInstance(self.n, self.cost.T.copy(), EXTERNAL)

    def __eq__(self, other):
        if not isinstance(other, TspInstance):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.cost, other.cost)

    __hash__ = None


def _pair_rng(seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, i, j))))


def _coords(seed: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0,))))
    return rng.uniform(0.0, GRID_SIZE, size=(n, 2))


def euclidean_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def _repair_triangle(cost: np.ndarray) -> np.ndarray:
    """Clamp ``cost[i, j]`` down to the shortest ``i -> j`` path length.

    This is the repair variant (no re-drawing): a Floyd-Warshall closure. One
    pass is exact in real arithmetic; further passes absorb floating point
    residue, and the budget guards against non-convergence.
    """
    n = cost.shape[0]
    out = cost.copy()
    for _ in range(TRIANGLE_MAX_PASSES):
        for k in range(n):
            np.minimum(out, out[:, k : k + 1] + out[k : k + 1, :], out=out)
        np.fill_diagonal(out, 0.0)
        if satisfies_triangle(out):
            return out
    raise GenerationError(f"triangle repair did not converge within {TRIANGLE_MAX_PASSES} passes")


def satisfies_triangle(cost: np.ndarray, tol: float = 0.0) -> bool:
    """True if ``cost[i, j] <= cost[i, k] + cost[k, j] + tol`` for all triples."""
    c = np.asarray(cost, dtype=np.float64)
    via = c[:, :, None] + c[None, :, :]  # via[i, k, j] = c[i, k] + c[k, j]
    best = via.min(axis=1)
    off = ~np.eye(c.shape[0], dtype=bool)
    return bool(np.all(c[off] <= best[off] + tol))


def generate_random(config: GenConfig) -> TspInstance:
    """Draw a random instance; a pure function of ``config`` (seed included).

    ``euclidean_pct`` places cities uniformly on the ``[0, 100]^2`` square and
    scales each distance ``d(i, j)`` by a factor drawn uniformly from
    ``[pct_low, pct_high]``. ``uniform`` draws every cost uniformly from
    ``[low, high]``. Symmetric instances draw once per unordered pair,
    asymmetric ones once per ordered pair. ``integer`` rounds to the nearest
    integer after scaling; ``triangle`` then clamps to shortest-path lengths.
    """
    config.validate()
    n = config.n
    cost = np.zeros((n, n), dtype=np.float64)
    dist = euclidean_distances(_coords(config.seed, n)) if config.cost_model == "euclidean_pct" else None
    for i in range(n):
        for j in range(n):
            if i == j or (config.symmetric and j < i):
                continue
            rng = _pair_rng(config.seed, i, j)
            if dist is not None:
                value = rng.uniform(config.pct_low, config.pct_high) * dist[i, j]
            else:
                value = rng.uniform(config.low, config.high)
            cost[i, j] = value
            if config.symmetric:
                cost[j, i] = value
    if config.integer:
        cost = np.round(cost)
    if config.triangle:
        cost = _repair_triangle(cost)
    return TspInstance(n, cost, config)


def _format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def save_csv(instance: TspInstance, path) -> None:
    """Write the cost matrix as ``n`` lines of ``n`` comma-separated numbers."""
    lines = [",".join(_format_number(v) for v in row) for row in instance.cost]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv(path) -> TspInstance:
    """Read a square cost matrix written by :func:`save_csv` (or by hand)."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", path, lineno, col) from None
                if not math.isfinite(value):
                    raise ParseError(f"non-finite cell {cell!r}", path, lineno, col)
                values.append(value)
            if rows and len(values) != len(rows[0]):
                raise ParseError(
                    f"ragged row: expected {len(rows[0])} fields, found {len(values)}", path, lineno
                )
            rows.append(values)
    n = len(rows)
    if n < 3:
        raise ParseError(f"need at least 3 rows, found {n}", path)
    if len(rows[0]) != n:
        raise ParseError(f"matrix is {n}x{len(rows[0])}, expected square", path, 1)
    return TspInstance(n, np.array(rows), EXTERNAL)


def validate_tour(tour: Sequence[int], m: int) -> tuple:
    """Return ``tour`` as a tuple after checking it permutes ``1..m``."""
    try:
        order = tuple(int(c) for c in tour)
    except (TypeError, ValueError):
        raise ValidationError(f"tour must be a sequence of integers, got {tour!r}") from None
    if sorted(order) != list(range(1, m + 1)):
        raise ValidationError(f"tour {order} is not a permutation of 1..{m}")
    return order


def tour_cost(instance: TspInstance, tour: Sequence[int]) -> float:
    """Length of the closed tour ``0 -> i_1 -> ... -> i_m -> 0``.

    Legs are accumulated left to right, the same order the exact oracles use,
    so equal tours produce bitwise-equal costs.
    """
    order = validate_tour(tour, instance.m)
    c = instance.cost
    total = float(c[0, order[0]])
    for a, b in zip(order, order[1:]):
        total += float(c[a, b])
    total += float(c[order[-1], 0])
    return total
