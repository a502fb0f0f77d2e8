"""One replication of the generate -> build -> solve -> extract -> verify loop."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError
from .extract import Decomposition, decompose_with_fallback, iterative_elimination
from .instance import TspInstance, save_csv, tour_cost
from .lpio import render_solution
from .model import BuildOptions, build_model, check_point, row_counts
from .oracle import held_karp_opt
from .solver import SolverSettings, solve
from .tspfg import build_index, x_count_formula, y_count_formula


def objectives_match(lp: float, oracle: float, rel: float = 1e-6) -> bool:
    return abs(lp - oracle) <= rel * max(1.0, abs(oracle))


@dataclass
class ReportRow:
    instance_id: str
    n: int
    y_count: int
    x_count: int
    row_count: int
    status: str = ""
    lp_objective: Optional[float] = None
    oracle_objective: Optional[float] = None
    match: Optional[bool] = None
    extraction_mode: str = ""
    parts: Optional[int] = None
    residual: Optional[float] = None
    audit_ok: Optional[bool] = None
    best_part_cost: Optional[float] = None
    t_build: float = 0.0
    t_solve: float = 0.0
    t_extract: float = 0.0
    t_oracle: float = 0.0
    note: str = ""

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]


@dataclass
class Outcome:
    row: ReportRow
    instance: TspInstance
    point: Optional[np.ndarray] = None
    decomposition: Optional[Decomposition] = None
    oracle_tour: Optional[tuple] = None
    audit_summary: str = ""
    violated_rows: Sequence = ()


def size_row(instance_id: str, n: int, options: BuildOptions = BuildOptions()) -> ReportRow:
    return ReportRow(instance_id, n, y_count_formula(n), x_count_formula(n), sum(row_counts(n, options).values()))


def run_replication(instance: TspInstance, instance_id: str, options: BuildOptions = BuildOptions(),
                    settings: SolverSettings = SolverSettings(), verify: bool = False,
                    external_point: Optional[np.ndarray] = None, mode: str = "auto") -> Outcome:
    """Build, solve (or take ``external_point``), audit, decompose, optionally verify.

    ``mode`` is ``greedy``, ``enumerative`` or ``auto`` (greedy with
    enumerative fallback).
    """
    row = size_row(instance_id, instance.n, options)
    t0 = time.perf_counter()
    model = build_model(instance, options, build_index(instance.n))
    row.t_build = time.perf_counter() - t0
    row.row_count = model.n_rows

    t0 = time.perf_counter()
    if external_point is None:
        sol = solve(model, settings)
        row.status = sol.status
        row.note = sol.note
        point = sol.point if sol.is_optimal else None
    else:
        point = external_point
        row.status = "external"
    row.t_solve = time.perf_counter() - t0
    out = Outcome(row=row, instance=instance)
    if point is None:
        return out

    report = check_point(model, point, settings.feas_tol)
    row.audit_ok = report.feasible
    out.audit_summary = report.summary()
    out.violated_rows = report.violated[:50]
    out.point = point
    # objectives are only reported once the independent audit has passed
    if report.feasible:
        row.lp_objective = float(model.objective @ point)

    t0 = time.perf_counter()
    y = point[: model.index.y_count]
    try:
        dec = decompose_with_fallback(y) if mode == "auto" else iterative_elimination(y, mode)
    except DomainError as exc:
        row.note = "; ".join(filter(None, [row.note, f"extraction skipped: {exc}"]))
        dec = None
    row.t_extract = time.perf_counter() - t0
    if dec is None:
        return out
    row.extraction_mode = dec.mode
    row.parts = len(dec.parts)
    row.residual = dec.residual_norm
    out.decomposition = dec
    if dec.parts:
        row.best_part_cost = min(tour_cost(instance, t) for _, t in dec.parts)

    if verify:
        t0 = time.perf_counter()
        hk_cost, hk_tour = held_karp_opt(instance)
        row.t_oracle = time.perf_counter() - t0
        row.oracle_objective = hk_cost
        out.oracle_tour = hk_tour
        if row.lp_objective is not None:
            row.match = objectives_match(row.lp_objective, hk_cost)
    return out


def write_forensics(outcome: Outcome, directory) -> Path:
    """Dump instance, solution and audit so a mismatch can be re-examined."""
    row = outcome.row
    path = Path(directory) / row.instance_id
    path.mkdir(parents=True, exist_ok=True)
    save_csv(outcome.instance, path / "instance.csv")
    index = build_index(outcome.instance.n)
    if outcome.point is not None:
        (path / "solution.txt").write_text(render_solution(index, outcome.point), encoding="ascii")
    bundle = {
        "report": asdict(row),
        "audit": outcome.audit_summary,
        "violated_rows": [list(v) for v in outcome.violated_rows],
        "oracle_tour": list(outcome.oracle_tour) if outcome.oracle_tour else None,
        "decomposition": None if outcome.decomposition is None else {
            "exhausted": outcome.decomposition.exhausted,
            "residual_norm": outcome.decomposition.residual_norm,
            "parts": [
                {"weight": w, "tour": list(t), "cost": tour_cost(outcome.instance, t)}
                for w, t in outcome.decomposition.parts
            ],
        },
    }
    (path / "residual.json").write_text(json.dumps(bundle, indent=2), encoding="utf-8")
    return path


def write_report(rows: Sequence[ReportRow], path) -> None:
    """CSV report plus a ``.json`` sidecar with the same rows."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=ReportRow.columns())
        writer.writeheader()
        for r in rows:
            writer.writerow(asdict(r))
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps([asdict(r) for r in rows], indent=2), encoding="utf-8"
    )
