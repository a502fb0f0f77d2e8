"""Sparse equality LP over the flow-graph variables.

Row families, in emission order (``tag``: quantifiers, index tuple order):

====  ==================================  ===============================
tag   family                              rows for
====  ==================================  ===============================
f1    initial flow (rhs 1)                one row
g2    mass balance, right of node         i != j, r = 1..m-2
g3    mass balance, left of node          i != j, r = 3..m
g4    mass balance through node           i, r = 2..m-1
g5    mass balance between nodes          i != u, r, p = 2..m-1, p not in {r-1,r,r+1}
p6    reciprocity, separation 2           i, j, k distinct, r = 1..m-2
p7    reciprocity, separation > 2         i != j, r = 1..m-2, s = r+3..m
c8    flow consistency, arc tail          i != j, r = 1..m-1
c9    flow consistency, arc head          i != j, r = 1..m-1
c10   flow consistency, away from arc     i != j, r = 1..m-1, s not in {r, r+1}
a11   visit requirement, arcs             i, j, u distinct, r = 1..m-1
n12   visit requirement, nodes            i, u = 2..m, i != u, r = 1..m
n13   visit requirement, node of city 1   u = 3..m, r = 1..m
====  ==================================  ===============================

Row names for export are ``tag`` followed by the index tuple, e.g.
``g2_3_5_2`` for the ``g2`` row with ``i=3, j=5, r=2``; the single ``f1`` row
is just ``f1``. Terms referring to pruned variables or out-of-range stages
are dropped. Nonnegativity is a variable bound, not a row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError, ValidationError
from .instance import TspInstance, validate_tour
from .tspfg import MIN_MODEL_CITIES, VariableIndex, build_index

VISIT_FAMILIES = ("nodes_only", "arcs_only", "both")

FAMILY_TAGS = ("f1", "g2", "g3", "g4", "g5", "p6", "p7", "c8", "c9", "c10", "a11", "n12", "n13")

FAMILY_FIELDS = {
    "f1": (),
    "g2": ("i", "j", "r"),
    "g3": ("i", "j", "r"),
    "g4": ("i", "r"),
    "g5": ("i", "u", "r", "p"),
    "p6": ("i", "j", "k", "r"),
    "p7": ("i", "j", "r", "s"),
    "c8": ("i", "j", "r"),
    "c9": ("i", "j", "r"),
    "c10": ("i", "j", "r", "s"),
    "a11": ("i", "j", "u", "r"),
    "n12": ("i", "u", "r"),
    "n13": ("u", "r"),
}


@dataclass(frozen=True)
class BuildOptions:
    visit_family: str = "nodes_only"
    include_flow_consist_nonadjacent: bool = True

    def validate(self) -> None:
        if self.visit_family not in VISIT_FAMILIES:
            raise ConfigError(f"unknown visit_family {self.visit_family!r}; expected one of {VISIT_FAMILIES}")

    def families(self) -> Tuple[str, ...]:
        self.validate()
        keep = []
        for tag in FAMILY_TAGS:
            if tag == "c10" and not self.include_flow_consist_nonadjacent:
                continue
            if tag == "a11" and self.visit_family == "nodes_only":
                continue
            if tag in ("n12", "n13") and self.visit_family == "arcs_only":
                continue
            keep.append(tag)
        return tuple(keep)


RowTag = Tuple[str, Tuple[int, ...]]


def row_name(tag: RowTag) -> str:
    family, idx = tag
    return "_".join([family, *map(str, idx)])


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``min objective @ v  s.t.  A v = rhs, v >= 0`` over ``index`` columns."""

    index: VariableIndex
    A: sp.csr_matrix
    rhs: np.ndarray
    objective: np.ndarray
    row_tags: Tuple[RowTag, ...]
    options: BuildOptions

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    def row(self, k: int) -> List[Tuple[int, float]]:
        lo, hi = self.A.indptr[k], self.A.indptr[k + 1]
        return list(zip(self.A.indices[lo:hi].tolist(), self.A.data[lo:hi].tolist()))

    @property
    def rows(self) -> List[List[Tuple[int, float]]]:
        return [self.row(k) for k in range(self.n_rows)]

    def row_names(self) -> List[str]:
        return [row_name(t) for t in self.row_tags]

    def family_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for fam, _ in self.row_tags:
            counts[fam] = counts.get(fam, 0) + 1
        return counts


# --- row generators -------------------------------------------------------
# Each yields (index tuple, [(col, coef), ...]) in lexicographic tuple order.

Terms = List[Tuple[int, float]]


def _collect(idx: VariableIndex, plus: Sequence[tuple] = (), minus: Sequence[tuple] = (),
             y_plus: Sequence[tuple] = ()) -> Terms:
    terms = []
    for key in y_plus:
        col = idx.y(*key)
        if col is not None:
            terms.append((col, 1.0))
    for key in plus:
        col = idx.x(*key)
        if col is not None:
            terms.append((col, 1.0))
    for key in minus:
        col = idx.x(*key)
        if col is not None:
            terms.append((col, -1.0))
    return terms


def _rows_f1(idx, m):
    keys = [(i, 1, j, 2, k) for i in range(1, m + 1) for j in range(1, m + 1) if j != i
            for k in range(1, m + 1) if k not in (i, j)]
    yield (), _collect(idx, plus=keys)


def _rows_g2(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j:
                continue
            for r in range(1, m - 1):
                minus = [(i, r, j, r + 1, k) for k in range(1, m + 1) if k not in (i, j)]
                yield (i, j, r), _collect(idx, plus=[(i, r, i, r, j)], minus=minus)


def _rows_g3(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j:
                continue
            for r in range(3, m + 1):
                minus = [(i, r, k, r - 2, j) for k in range(1, m + 1) if k not in (i, j)]
                yield (i, j, r), _collect(idx, plus=[(i, r, j, r - 1, i)], minus=minus)


def _rows_g4(idx, m):
    for i in range(1, m + 1):
        for r in range(2, m):
            plus = [(i, r, k, r - 1, i) for k in range(1, m + 1) if k != i]
            minus = [(i, r, i, r, k) for k in range(1, m + 1) if k != i]
            yield (i, r), _collect(idx, plus=plus, minus=minus)


def _rows_g5(idx, m):
    for i in range(1, m + 1):
        for u in range(1, m + 1):
            if i == u:
                continue
            for r in range(1, m + 1):
                for p in range(2, m):
                    if p in (r - 1, r, r + 1):
                        continue
                    ks = [k for k in range(1, m + 1) if k not in (i, u)]
                    plus = [(i, r, k, p - 1, u) for k in ks]
                    minus = [(i, r, u, p, k) for k in ks]
                    yield (i, u, r, p), _collect(idx, plus=plus, minus=minus)


def _rows_p6(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for k in range(1, m + 1):
                if len({i, j, k}) < 3:
                    continue
                for r in range(1, m - 1):
                    yield (i, j, k, r), _collect(idx, plus=[(i, r, k, r + 1, j)], minus=[(j, r + 2, i, r, k)])


def _rows_p7(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j:
                continue
            for r in range(1, m - 1):
                for s in range(r + 3, m + 1):
                    ks = [k for k in range(1, m + 1) if k not in (i, j)]
                    plus = [(i, r, k, s - 1, j) for k in ks]
                    minus = [(j, s, i, r, k) for k in ks]
                    yield (i, j, r, s), _collect(idx, plus=plus, minus=minus)


def _flow_consistency(idx, m, node_of):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j:
                continue
            for r in range(1, m):
                node_i, node_r = node_of(i, r, j)
                yield (i, j, r), _collect(idx, y_plus=[(i, r, j)], minus=[(node_i, node_r, i, r, j)])


def _rows_c8(idx, m):
    return _flow_consistency(idx, m, lambda i, r, j: (i, r))


def _rows_c9(idx, m):
    return _flow_consistency(idx, m, lambda i, r, j: (j, r + 1))


def _rows_c10(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j:
                continue
            for r in range(1, m):
                for s in range(1, m + 1):
                    if s in (r, r + 1):
                        continue
                    minus = [(k, s, i, r, j) for k in range(1, m + 1) if k not in (i, j)]
                    yield (i, j, r, s), _collect(idx, y_plus=[(i, r, j)], minus=minus)


def _rows_a11(idx, m):
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for u in range(1, m + 1):
                if len({i, j, u}) < 3:
                    continue
                for r in range(1, m):
                    minus = [(u, s, i, r, j) for s in range(1, m + 1) if s not in (r, r + 1)]
                    yield (i, j, u, r), _collect(idx, y_plus=[(i, r, j)], minus=minus)


def _visit_keys(m: int, i: int, u: int, r: int) -> List[tuple]:
    """Variables ``x[i,r][.]`` whose arc places city ``u`` at some stage != r.

    Covers ``u`` as an arc tail at stages ``1..r-2``, at stage ``r-1`` via
    ``[u, r-1, i]``, at stage ``r+1`` via ``[i, r, u]``, and as an arc head at
    stages ``r+2..m``. Boundary terms with no valid arc stage are skipped.
    """
    keys = []
    for p in range(1, r - 1):
        keys.extend((i, r, u, p, k) for k in range(1, m + 1) if k not in (i, u))
    if r >= 2:
        keys.append((i, r, u, r - 1, i))
    if r <= m - 1:
        keys.append((i, r, i, r, u))
    for p in range(r + 1, m):
        keys.extend((i, r, k, p, u) for k in range(1, m + 1) if k not in (i, u))
    return keys


def _rows_n12(idx, m):
    for i in range(2, m + 1):
        for u in range(2, m + 1):
            if i == u:
                continue
            for r in range(1, m + 1):
                yield (i, u, r), _collect(idx, plus=_visit_keys(m, i, u, r), minus=_visit_keys(m, i, 1, r))


def _rows_n13(idx, m):
    for u in range(3, m + 1):
        for r in range(1, m + 1):
            yield (u, r), _collect(idx, plus=_visit_keys(m, 1, u, r), minus=_visit_keys(m, 1, 2, r))


ROW_GENERATORS: Dict[str, Callable[[VariableIndex, int], Iterator]] = {
    "f1": _rows_f1, "g2": _rows_g2, "g3": _rows_g3, "g4": _rows_g4, "g5": _rows_g5,
    "p6": _rows_p6, "p7": _rows_p7, "c8": _rows_c8, "c9": _rows_c9, "c10": _rows_c10,
    "a11": _rows_a11, "n12": _rows_n12, "n13": _rows_n13,
}


def _range_len(lo: int, hi: int) -> int:
    return max(0, hi - lo + 1)


def row_counts(n: int, options: BuildOptions = BuildOptions()) -> Dict[str, int]:
    """Rows per family in closed form, without building anything."""
    if n < MIN_MODEL_CITIES:
        raise DomainError(f"the flow model needs more than 5 cities; got n={n}")
    m = n - 1
    pairs = m * (m - 1)
    triples = m * (m - 1) * (m - 2)
    g5_rp = sum(1 for r in range(1, m + 1) for p in range(2, m) if p not in (r - 1, r, r + 1))
    p7_rs = sum(_range_len(r + 3, m) for r in range(1, m - 1))
    full = {
        "f1": 1,
        "g2": pairs * _range_len(1, m - 2),
        "g3": pairs * _range_len(3, m),
        "g4": m * _range_len(2, m - 1),
        "g5": pairs * g5_rp,
        "p6": triples * _range_len(1, m - 2),
        "p7": pairs * p7_rs,
        "c8": pairs * (m - 1),
        "c9": pairs * (m - 1),
        "c10": pairs * (m - 1) * (m - 2),
        "a11": triples * (m - 1),
        "n12": (m - 1) * (m - 2) * m,
        "n13": (m - 2) * m,
    }
    return {tag: full[tag] for tag in options.families()}


def objective_vector(instance: TspInstance, index: VariableIndex) -> np.ndarray:
    """Arc costs on the ``y`` block (depot legs folded into the first and last stage)."""
    m = index.m
    c = instance.cost
    obj = np.zeros(index.size)
    for col, (i, r, j) in enumerate(index.y_keys):
        coef = c[i, j]
        if r == 1:
            coef = c[0, i] + coef
        if r == m - 1:
            coef = coef + c[j, 0]
        obj[col] = coef
    return obj


def build_model(instance: TspInstance, options: BuildOptions = BuildOptions(),
                index: VariableIndex = None) -> LinearModel:
    """Assemble the LP for ``instance``."""
    if not isinstance(options, BuildOptions):
        raise ConfigError(f"options must be BuildOptions, got {type(options).__name__}")
    options.validate()
    if instance.n < MIN_MODEL_CITIES:
        raise DomainError(f"the flow model needs more than 5 cities; got n={instance.n}")
    if index is None:
        index = build_index(instance.n)
    elif index.n != instance.n:
        raise ValidationError(f"index built for n={index.n}, instance has n={instance.n}")
    m = index.m

    indptr = [0]
    indices: List[int] = []
    data: List[float] = []
    rhs: List[float] = []
    tags: List[RowTag] = []
    for family in options.families():
        for key, terms in ROW_GENERATORS[family](index, m):
            merged: Dict[int, float] = {}
            for col, coef in terms:
                merged[col] = merged.get(col, 0.0) + coef
            for col in sorted(merged):
                if merged[col] != 0.0:
                    indices.append(col)
                    data.append(merged[col])
            indptr.append(len(indices))
            rhs.append(1.0 if family == "f1" else 0.0)
            tags.append((family, key))

    A = sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(rhs), index.size),
    )
    return LinearModel(
        index=index,
        A=A,
        rhs=np.array(rhs),
        objective=objective_vector(instance, index),
        row_tags=tuple(tags),
        options=options,
    )


# --- points ----------------------------------------------------------------


def tour_to_point(index: VariableIndex, tour: Sequence[int]) -> np.ndarray:
    """0/1 characteristic vector of ``tour`` (a permutation of ``1..m``)."""
    m = index.m
    order = validate_tour(tour, m)
    point = np.zeros(index.size)
    for r in range(1, m):
        point[index.y(order[r - 1], r, order[r])] = 1.0
    for r in range(1, m + 1):
        for s in range(1, m):
            col = index.x(order[r - 1], r, order[s - 1], s, order[s])
            if col is not None:
                point[col] = 1.0
    return point


def blend_points(weighted: Sequence[Tuple[float, np.ndarray]]) -> np.ndarray:
    """Convex combination ``sum w * p``; weights must be positive and sum to 1."""
    if not weighted:
        raise ValidationError("nothing to blend")
    weights = np.array([w for w, _ in weighted], dtype=np.float64)
    if np.any(weights <= 0):
        raise ValidationError(f"blend weights must be positive, got {weights.tolist()}")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError(f"blend weights sum to {weights.sum()!r}, expected 1")
    length = len(weighted[0][1])
    out = np.zeros(length)
    for w, p in weighted:
        if len(p) != length:
            raise ValidationError(f"point lengths differ: {len(p)} vs {length}")
        out += w * np.asarray(p, dtype=np.float64)
    return out


@dataclass
class FeasibilityReport:
    feasible: bool
    max_residual: float
    violated: List[Tuple[str, float]]  # (row name, residual)
    min_value: float
    min_column: int

    def summary(self) -> str:
        state = "feasible" if self.feasible else "INFEASIBLE"
        return (f"{state}: max |row residual| = {self.max_residual:.3e}, "
                f"{len(self.violated)} violated rows, min component = {self.min_value:.3e}")


def check_point(model: LinearModel, point: np.ndarray, tol: float = 1e-9) -> FeasibilityReport:
    """Audit ``point`` against every row and the nonnegativity bounds.

    Residuals are ``A @ point - rhs``. A row is reported when its residual
    exceeds ``tol`` in absolute value.
    """
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (model.n_cols,):
        raise ValidationError(f"point has shape {point.shape}, model has {model.n_cols} columns")
    residual = model.A @ point - model.rhs
    abs_res = np.abs(residual)
    bad = np.flatnonzero(abs_res > tol)
    violated = [(row_name(model.row_tags[k]), float(residual[k])) for k in bad]
    min_col = int(np.argmin(point)) if point.size else -1
    min_value = float(point[min_col]) if point.size else 0.0
    max_res = float(abs_res.max()) if abs_res.size else 0.0
    return FeasibilityReport(
        feasible=not violated and min_value >= -tol,
        max_residual=max_res,
        violated=violated,
        min_value=min_value,
        min_column=min_col,
    )
