"""Solving the flow LP.

Three methods sit behind one :func:`solve` contract:

``ipm`` (default)
    HiGHS interior point *without crossover*. Fast on this model, and under
    alternate optima it stops inside the optimal face; extraction copes.
``simplex``
    HiGHS simplex, returning a vertex optimum. HiGHS handles degeneracy by
    cost perturbation.
``bland``
    The package's own revised simplex (:mod:`tsplp.simplex`): Dantzig pricing
    with a Bland's-rule fallback after a stall window. Only for small models.

Whatever HiGHS reports, the result is re-audited here: primal residual,
bound violation and duality gap are recomputed from the returned primal and
dual vectors. A claimed optimum that fails the audit is retried with the
simplex method and, failing that, downgraded to ``iteration_limit`` with a
note. "optimal" is never reported without passing these checks.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ValidationError
from .model import LinearModel

log = logging.getLogger(__name__)

METHODS = ("ipm", "simplex", "bland")
STATUSES = ("optimal", "infeasible", "unbounded", "iteration_limit")


@dataclass(frozen=True)
class SolverSettings:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    max_iterations: Optional[int] = None  # default 10 * (rows + cols)
    scaling: bool = True
    method: str = "ipm"

    def validate(self) -> None:
        if not (self.feas_tol > 0 and self.opt_tol > 0):
            raise ConfigError("solver tolerances must be positive")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")


@dataclass
class Solution:
    status: str
    objective: float
    point: np.ndarray
    max_primal_residual: float
    optimality_certificate: float
    duals: Optional[np.ndarray] = None
    dual_bound: float = float("nan")
    iterations: int = 0
    method: str = "ipm"
    wall_time: float = 0.0
    note: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class _Audit:
    primal_residual: float
    min_value: float
    gap: float
    min_reduced_cost: float
    dual_bound: float
    certificate: float = field(init=False)

    def __post_init__(self):
        self.certificate = max(self.gap, max(0.0, -self.min_reduced_cost))


def audit(model: LinearModel, x: np.ndarray, duals: Optional[np.ndarray]) -> _Audit:
    """Primal residual, bound violation, relative gap and dual infeasibility.

    The gap is ``|c@x - b@duals| / max(1, |c@x|)``; the reduced costs are
    ``c - A.T @ duals`` scaled the same way.
    """
    residual = float(np.abs(model.A @ x - model.rhs).max(initial=0.0))
    obj = float(model.objective @ x)
    scale = max(1.0, abs(obj))
    if duals is None:
        return _Audit(residual, float(x.min(initial=0.0)), float("inf"), -float("inf"), float("nan"))
    dual_bound = float(model.rhs @ duals)
    reduced = model.objective - model.A.T @ duals
    return _Audit(
        primal_residual=residual,
        min_value=float(x.min(initial=0.0)),
        gap=abs(obj - dual_bound) / scale,
        min_reduced_cost=float(reduced.min(initial=0.0)) / scale,
        dual_bound=dual_bound,
    )


def _passes(a: _Audit, settings: SolverSettings) -> bool:
    return (a.primal_residual <= settings.feas_tol and a.min_value >= -settings.feas_tol
            and a.certificate <= settings.opt_tol)


def _highs_solve(model: LinearModel, settings: SolverSettings, method: str, max_iter: int):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    h.setOptionValue("primal_feasibility_tolerance", settings.feas_tol * 1e-1)
    h.setOptionValue("dual_feasibility_tolerance", settings.opt_tol * 1e-1)
    if method == "ipm":
        h.setOptionValue("solver", "ipm")
        h.setOptionValue("run_crossover", "off")
        # the relative gap must be far tighter than opt_tol: objectives of a few
        # hundred are compared against exact tour costs at 1e-6 absolute
        h.setOptionValue("ipm_optimality_tolerance", settings.opt_tol * 1e-4)
        h.setOptionValue("ipm_iteration_limit", int(min(max_iter, 2**31 - 1)))
    else:
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("simplex_iteration_limit", int(min(max_iter, 2**31 - 1)))
        if not settings.scaling:
            h.setOptionValue("simplex_scale_strategy", 0)

    A = model.A.tocsc()
    lp = highspy.HighsLp()
    lp.num_col_ = model.n_cols
    lp.num_row_ = model.n_rows
    lp.col_cost_ = model.objective
    lp.col_lower_ = np.zeros(model.n_cols)
    lp.col_upper_ = np.full(model.n_cols, highspy.kHighsInf)
    lp.row_lower_ = model.rhs
    lp.row_upper_ = model.rhs
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = A.indptr
    lp.a_matrix_.index_ = A.indices
    lp.a_matrix_.value_ = A.data
    h.passModel(lp)
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    iterations = int(info.simplex_iteration_count if method != "ipm" else info.ipm_iteration_count)
    name = h.modelStatusToString(status)
    if status == highspy.HighsModelStatus.kOptimal:
        sol = h.getSolution()
        return "optimal", np.array(sol.col_value), np.array(sol.row_dual), iterations, name
    if status == highspy.HighsModelStatus.kInfeasible:
        return "infeasible", None, None, iterations, name
    if status in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
        return "unbounded", None, None, iterations, name
    return "iteration_limit", None, None, iterations, name


def _bland_solve(model: LinearModel, settings: SolverSettings, max_iter: int):
    from .simplex import revised_simplex

    res = revised_simplex(model.A, model.rhs, model.objective, tol=min(settings.opt_tol, 1e-9),
                          max_iterations=max_iter)
    x = res.x if res.status == "optimal" else None
    duals = res.duals if res.status == "optimal" else None
    note = res.note or f"{res.bland_pivots} Bland pivots"
    return res.status, x, duals, res.iterations, note


def solve(model: LinearModel, settings: SolverSettings = SolverSettings()) -> Solution:
    """Minimise the model objective over ``A v = rhs, v >= 0``."""
    settings.validate()
    if model.n_rows < 1:
        raise ValidationError("model has no rows")
    max_iter = settings.max_iterations or 10 * (model.n_rows + model.n_cols)
    start = time.perf_counter()

    attempts = [settings.method] + (["simplex"] if settings.method == "ipm" else [])
    notes = []
    status = "iteration_limit"
    for method in attempts:
        if method == "bland":
            status, x, duals, iterations, note = _bland_solve(model, settings, max_iter)
        else:
            status, x, duals, iterations, note = _highs_solve(model, settings, method, max_iter)
        if status != "optimal":
            notes.append(f"{method}: {note}")
            if status in ("infeasible", "unbounded"):
                break
            continue
        a = audit(model, x, duals)
        if _passes(a, settings):
            notes.append(f"{method}: {note}")
            return Solution(
                status="optimal",
                objective=float(model.objective @ x),
                point=x,
                max_primal_residual=a.primal_residual,
                optimality_certificate=a.certificate,
                duals=duals,
                dual_bound=a.dual_bound,
                iterations=iterations,
                method=method,
                wall_time=time.perf_counter() - start,
                note="; ".join(notes),
            )
        msg = (f"{method}: claimed optimal but failed audit (residual {a.primal_residual:.2e}, "
               f"min {a.min_value:.2e}, certificate {a.certificate:.2e})")
        log.warning(msg)
        notes.append(msg)
        status = "iteration_limit"

    return Solution(
        status=status,
        objective=float("nan"),
        point=np.zeros(model.n_cols),
        max_primal_residual=float("nan"),
        optimality_certificate=float("nan"),
        method=settings.method,
        wall_time=time.perf_counter() - start,
        note="; ".join(notes),
    )
