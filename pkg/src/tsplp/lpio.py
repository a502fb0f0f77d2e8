"""Model export (free MPS, LP text) and external solution import."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ParseError, TspLpError, ValidationError
from .tspfg import VariableIndex

OBJ_ROW = "COST"
NEGATIVE_TOL = 1e-9


class FileError(TspLpError, OSError):
    """Writing or reading a model or solution file failed."""


def fmt(value: float) -> str:
    """Shortest decimal that round-trips; integral values drop the ``.0``."""
    value = float(value)
    if value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="ascii")
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc}") from exc


def render_mps(name: str, row_names: Sequence[str], row_senses: Sequence[str], A: sp.spmatrix,
               objective: np.ndarray, col_names: Sequence[str], rhs: np.ndarray,
               integer_cols: Optional[np.ndarray] = None,
               bounds: Iterable[Tuple[str, str, Optional[float]]] = ()) -> str:
    """Free-format MPS text.

    Columns are written in order; each lists its objective entry (if nonzero)
    followed by its row entries in row order. A column with no entries at all
    still gets an explicit zero objective entry so that it is declared.
    ``integer_cols`` is a boolean mask; consecutive integer columns are wrapped
    in ``MARKER INTORG/INTEND`` pairs.
    """
    A = sp.csc_matrix(A)
    A.sort_indices()
    out = io.StringIO()
    out.write(f"NAME {name}\n")
    out.write("ROWS\n")
    out.write(f" N {OBJ_ROW}\n")
    for rn, sense in zip(row_names, row_senses):
        out.write(f" {sense} {rn}\n")
    out.write("COLUMNS\n")
    in_int = False
    marker = 0
    for col, cn in enumerate(col_names):
        want_int = bool(integer_cols[col]) if integer_cols is not None else False
        if want_int != in_int:
            tag = "'INTORG'" if want_int else "'INTEND'"
            out.write(f" MARKER{marker} 'MARKER' {tag}\n")
            marker += 1
            in_int = want_int
        lo, hi = A.indptr[col], A.indptr[col + 1]
        cost = objective[col]
        if cost != 0.0 or lo == hi:
            out.write(f" {cn} {OBJ_ROW} {fmt(cost)}\n")
        for k in range(lo, hi):
            out.write(f" {cn} {row_names[A.indices[k]]} {fmt(A.data[k])}\n")
    if in_int:
        out.write(f" MARKER{marker} 'MARKER' 'INTEND'\n")
    out.write("RHS\n")
    for rn, value in zip(row_names, rhs):
        if value != 0.0:
            out.write(f" RHS {rn} {fmt(value)}\n")
    out.write("BOUNDS\n")
    for kind, cn, value in bounds:
        out.write(f" {kind} BND {cn}" + ("" if value is None else f" {fmt(value)}") + "\n")
    out.write("ENDATA\n")
    return out.getvalue()


def render_lp(model) -> str:
    """CPLEX-style LP text of a built model (variables default to >= 0)."""
    names = model.index.names()
    out = io.StringIO()
    out.write("\\ TSP flow-graph LP\n")
    out.write("Minimize\n")
    out.write(" obj:" + _lp_expr((names[c], model.objective[c]) for c in np.flatnonzero(model.objective)) + "\n")
    out.write("Subject To\n")
    for k, rn in enumerate(model.row_names()):
        lo, hi = model.A.indptr[k], model.A.indptr[k + 1]
        terms = ((names[c], v) for c, v in zip(model.A.indices[lo:hi], model.A.data[lo:hi]))
        out.write(f" {rn}:{_lp_expr(terms)} = {fmt(model.rhs[k])}\n")
    out.write("End\n")
    return out.getvalue()


def _lp_expr(terms) -> str:
    parts = []
    for name, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f" {sign} {name}" if mag == 1.0 else f" {sign} {fmt(mag)} {name}")
    if not parts:
        return " 0"
    first = parts[0]
    if first.startswith(" + "):
        parts[0] = " " + first[3:]
    return "".join(parts)


def write_model(model, path, format: str = "mps") -> None:
    """Write ``model`` as free MPS (``"mps"``) or LP text (``"lp"``/``"lp_text"``).

    Output depends only on the model, so repeated exports are byte-identical.
    """
    if format == "mps":
        text = render_mps(
            name=f"TSPFG_N{model.index.n}",
            row_names=model.row_names(),
            row_senses=["E"] * model.n_rows,
            A=model.A,
            objective=model.objective,
            col_names=model.index.names(),
            rhs=model.rhs,
        )
    elif format in ("lp", "lp_text"):
        text = render_lp(model)
    else:
        raise ValidationError(f"unknown model format {format!r}")
    _write_text(path, text)


def render_solution(index: VariableIndex, point: np.ndarray, skip_zeros: bool = True) -> str:
    lines = []
    for col in range(index.size):
        v = float(point[col])
        if skip_zeros and v == 0.0:
            continue
        lines.append(f"{index.name(col)} {fmt(v)}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_solution(index: VariableIndex, point: np.ndarray, path) -> None:
    _write_text(path, render_solution(index, point))


def read_solution(path, index: VariableIndex) -> np.ndarray:
    """Parse ``name value`` lines into a point.

    Blank lines and ``#`` comments are ignored, unnamed variables default to
    zero, and values below ``-1e-9`` are rejected.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    point = np.zeros(index.size)
    seen: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected 'name value', got {raw!r}", path, lineno)
        name, value_text = fields
        col = index.lookup_name(name)
        if col is None:
            raise ParseError(f"unknown variable {name!r}", path, lineno)
        try:
            value = float(value_text)
        except ValueError:
            raise ParseError(f"malformed number {value_text!r}", path, lineno) from None
        if not np.isfinite(value):
            raise ParseError(f"non-finite value {value_text!r}", path, lineno)
        if value < -NEGATIVE_TOL:
            raise ParseError(f"negative value {value_text} for {name}", path, lineno)
        point[col] = value
        seen.append(col)
    return point
