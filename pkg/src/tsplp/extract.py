"""Tour extraction from ``y`` vectors by iterative elimination.

A ``y`` vector is the ``y`` block of a point (lexicographic ``(i, r, j)``
order) or a whole point; functions here only read the ``y`` block. Internally
it is reshaped to ``flow[r - 1, i - 1, j - 1]``.

A TSP path of ``y`` picks one city per stage, all distinct, with every arc
``[i_r, r, i_{r+1}]`` carrying more than ``threshold`` flow. Iterative
elimination repeatedly peels such a path off ``y`` with weight equal to its
smallest arc value (at least one arc drops to exactly zero each round), until
nothing above the threshold remains.

Search order is deterministic: at stage 1 the arcs are tried by decreasing
flow, ties by smaller tail then smaller head; later stages extend the current
city by decreasing flow, ties by smaller head city.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .errors import DomainError, ValidationError
from .tspfg import iter_arcs, x_count_formula, y_count_formula

DEFAULT_THRESHOLD = 1e-6
DEFAULT_ENUM_LIMIT = 10_000
STAGE_MASS_TOL = 1e-6

Tour = Tuple[int, ...]


def _infer_m(length: int) -> Tuple[int, int]:
    """(m, y_count) for a y block or full point of the given length."""
    for n in range(3, 64):
        yc = y_count_formula(n)
        if length == yc or (n >= 6 and length == yc + x_count_formula(n)):
            return n - 1, yc
        if yc > length:
            break
    raise ValidationError(f"length {length} is neither a y block nor a full point")


def stage_array(y) -> np.ndarray:
    """Reshape a y block (or full point) into ``flow[r-1, i-1, j-1]``."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 3:
        return arr.copy()
    m, yc = _infer_m(arr.size)
    keys = np.array(list(iter_arcs(m)), dtype=np.int64)
    flow = np.zeros((m - 1, m, m))
    flow[keys[:, 1] - 1, keys[:, 0] - 1, keys[:, 2] - 1] = arr[:yc]
    return flow


def y_block(flow: np.ndarray) -> np.ndarray:
    """Inverse of :func:`stage_array`."""
    m = flow.shape[1]
    keys = np.array(list(iter_arcs(m)), dtype=np.int64)
    return flow[keys[:, 1] - 1, keys[:, 0] - 1, keys[:, 2] - 1].copy()


def tour_flow(tour, m: int) -> np.ndarray:
    """Stage array of a tour's characteristic ``y``."""
    flow = np.zeros((m - 1, m, m))
    for r in range(m - 1):
        flow[r, tour[r] - 1, tour[r + 1] - 1] = 1.0
    return flow


def _paths(flow: np.ndarray, threshold: float) -> Iterator[Tour]:
    m = flow.shape[1]
    stage1 = [(-flow[0, a, b], a, b) for a in range(m) for b in range(m)
              if a != b and flow[0, a, b] > threshold]
    stage1.sort()
    visited = np.zeros(m, dtype=bool)
    path: List[int] = []

    def extend(stage: int) -> Iterator[Tour]:
        # path holds cities of stages 1..stage; extend with an arc at `stage`
        if stage == m:
            yield tuple(c + 1 for c in path)
            return
        row = flow[stage - 1, path[-1]]
        nxt = [c for c in np.flatnonzero(row > threshold) if not visited[c]]
        nxt.sort(key=lambda c: (-row[c], c))
        for c in nxt:
            visited[c] = True
            path.append(int(c))
            yield from extend(stage + 1)
            path.pop()
            visited[c] = False

    for _, a, b in stage1:
        visited[a] = visited[b] = True
        path[:] = [a, b]
        yield from extend(2)
        visited[a] = visited[b] = False


def find_tsp_path(y, threshold: float = DEFAULT_THRESHOLD) -> Optional[Tour]:
    """First TSP path in the support of ``y`` (search order above), or None."""
    return next(_paths(stage_array(y), threshold), None)


def enumerate_tsp_paths(y, threshold: float = DEFAULT_THRESHOLD, limit: int = DEFAULT_ENUM_LIMIT) -> List[Tour]:
    """Up to ``limit`` distinct TSP paths, in the same order as :func:`find_tsp_path`."""
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit}")
    out = []
    for p in _paths(stage_array(y), threshold):
        out.append(p)
        if len(out) >= limit:
            break
    return out


def path_bottleneck(flow: np.ndarray, tour: Tour) -> float:
    return float(min(flow[r, tour[r] - 1, tour[r + 1] - 1] for r in range(len(tour) - 1)))


@dataclass
class Decomposition:
    parts: List[Tuple[float, Tour]] = field(default_factory=list)
    residual_norm: float = 0.0
    exhausted: bool = True
    mass: float = 0.0  # common stage mass of the input
    mode: str = "greedy"

    @property
    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.parts))

    def reconstruct(self, m: int) -> np.ndarray:
        """Stage array ``sum w * char(tour)``."""
        flow = np.zeros((m - 1, m, m))
        for w, tour in self.parts:
            flow += w * tour_flow(tour, m)
        return flow


def stage_masses(flow: np.ndarray) -> np.ndarray:
    return flow.sum(axis=(1, 2))


def iterative_elimination(y, mode: str = "greedy", threshold: float = DEFAULT_THRESHOLD,
                          enum_limit: int = DEFAULT_ENUM_LIMIT) -> Decomposition:
    """Split ``y`` into weighted tours.

    ``greedy`` removes the first path found; ``enumerative`` looks at up to
    ``enum_limit`` paths per round and removes the one with the largest
    bottleneck. Stops when every arc is at or below ``threshold`` (exhausted)
    or when no path remains (not exhausted; callers may retry enumeratively).
    """
    if mode not in ("greedy", "enumerative"):
        raise ValidationError(f"unknown mode {mode!r}; expected 'greedy' or 'enumerative'")
    flow = stage_array(y)
    if np.any(flow < -threshold):
        raise DomainError(f"y has negative entries (min {flow.min():.3e})")
    masses = stage_masses(flow)
    if masses.size and masses.max() - masses.min() > STAGE_MASS_TOL:
        raise DomainError(
            f"stage masses differ by {masses.max() - masses.min():.3e} (> {STAGE_MASS_TOL}); "
            "y is not a scaled point of the y polytope"
        )
    flow = np.maximum(flow, 0.0)
    result = Decomposition(mass=float(masses.mean()) if masses.size else 0.0, mode=mode)
    while flow.max(initial=0.0) > threshold:
        if mode == "greedy":
            path = find_tsp_path(flow, threshold)
        else:
            candidates = enumerate_tsp_paths(flow, threshold, enum_limit)
            path = max(candidates, key=lambda p: path_bottleneck(flow, p)) if candidates else None
        if path is None:
            break
        eps = path_bottleneck(flow, path)
        for r in range(len(path) - 1):
            a, b = path[r] - 1, path[r + 1] - 1
            # the bottleneck arc lands on exactly 0
            flow[r, a, b] = 0.0 if flow[r, a, b] == eps else flow[r, a, b] - eps
        result.parts.append((eps, path))
    result.residual_norm = float(np.abs(flow).max(initial=0.0))
    result.exhausted = result.residual_norm <= threshold
    return result


def decompose_with_fallback(y, threshold: float = DEFAULT_THRESHOLD,
                            enum_limit: int = DEFAULT_ENUM_LIMIT) -> Decomposition:
    """Greedy elimination, escalating to enumerative when greedy stalls."""
    dec = iterative_elimination(y, "greedy", threshold)
    if dec.exhausted:
        return dec
    return iterative_elimination(y, "enumerative", threshold, enum_limit)
