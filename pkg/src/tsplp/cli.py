"""Command line driver: ``tsplp <subcommand> [options]``.

Exit codes: 0 ok, 2 usage, 3 verification mismatch, 4 solver failure, 5 I/O.
The ``TSPLP_JOBS`` environment variable overrides ``--jobs``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ParseError, TspLpError
from .experiment import ReportRow, run_replication, size_row, write_forensics, write_report
from .extract import decompose_with_fallback, iterative_elimination
from .instance import GenConfig, generate_random, load_csv, save_csv, tour_cost
from .lpio import FileError, read_solution, write_model
from .model import BuildOptions, build_model, row_counts
from .solver import SolverSettings
from .tspfg import build_index, x_count_formula, y_count_formula

log = logging.getLogger("tsplp")

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4, 5
VISIT = {"nodes": "nodes_only", "arcs": "arcs_only", "both": "both"}
COST_MODEL = {"euclid": "euclidean_pct", "uniform": "uniform"}
MODES = {"greedy": "greedy", "enum": "enumerative", "auto": "auto"}
SUBCOMMANDS = ("gen", "build", "solve", "verify", "decompose", "bench", "count")


@dataclass
class Command:
    subcommand: str
    options: Dict[str, object] = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


def city_range(text: str) -> List[int]:
    """``"6..9"`` -> ``[6, 7, 8, 9]``; a bare ``"7"`` -> ``[7]``."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if lo > hi or lo < 3:
        raise argparse.ArgumentTypeError(f"invalid city range {text!r}")
    return list(range(lo, hi + 1))


def _add_generation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--reps", type=int, default=1, help="replications per city count")
    p.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    p.add_argument("--cost-model", choices=sorted(COST_MODEL), default="euclid", help="cost model")
    p.add_argument("--pct-low", type=float, default=0.9, help="lower distance factor (euclid)")
    p.add_argument("--pct-high", type=float, default=1.1, help="upper distance factor (euclid)")
    p.add_argument("--low", type=float, default=0.0, help="lower cost bound (uniform)")
    p.add_argument("--high", type=float, default=100.0, help="upper cost bound (uniform)")
    p.add_argument("--asymmetric", action="store_true", help="draw each ordered pair separately")
    p.add_argument("--integer", action="store_true", help="round costs to integers")
    p.add_argument("--triangle", action="store_true", help="repair costs to satisfy the triangle inequality")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--visit", choices=sorted(VISIT), default="nodes", help="visit-requirement family")
    p.add_argument("--no-c10", action="store_true", help="drop the away-from-arc flow consistency rows")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("ipm", "simplex", "bland"), default="ipm", help="LP method")
    p.add_argument("--mode", choices=sorted(MODES), default="auto", help="tour extraction mode")
    p.add_argument("--jobs", type=int, default=1, help="parallel replications (TSPLP_JOBS overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsplp", description="Flow-graph LP for the TSP: build, solve, audit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("gen", help="generate random instances as CSV")
    p.add_argument("--cities", type=int, required=True, help="city count n")
    _add_generation(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("build", help="export the LP model")
    p.add_argument("--instance", required=True, help="instance CSV")
    p.add_argument("--format", choices=("mps", "lp"), default="mps", help="model file format")
    _add_model(p)
    p.add_argument("--out", required=True, help="output model file")

    p = sub.add_parser("solve", help="solve one instance and extract tours")
    p.add_argument("--instance", required=True, help="instance CSV")
    _add_model(p)
    _add_solver(p)
    p.add_argument("--report", help="CSV report path (JSON sidecar alongside)")
    p.add_argument("--external-solution", help="take the point from a 'name value' file instead of solving")

    p = sub.add_parser("verify", help="solve and compare against the Held-Karp optimum")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance CSV")
    src.add_argument("--cities", type=int, help="generate instances with this many cities")
    _add_generation(p)
    _add_model(p)
    _add_solver(p)
    p.add_argument("--report", help="CSV report path (JSON sidecar alongside)")
    p.add_argument("--forensics", default="forensics", help="directory for mismatch bundles")
    p.add_argument("--external-solution", help="audit a 'name value' point instead of solving (needs --instance)")

    p = sub.add_parser("decompose", help="split a solution file into weighted tours")
    p.add_argument("--instance", required=True, help="instance CSV")
    p.add_argument("--solution", required=True, help="'name value' solution file")
    p.add_argument("--mode", choices=("greedy", "enum"), default="greedy", help="extraction mode")

    p = sub.add_parser("bench", help="sweep city counts, emitting report rows as CSV")
    p.add_argument("--cities", type=city_range, required=True, help="range A..B")
    _add_generation(p)
    _add_model(p)
    _add_solver(p)
    p.add_argument("--count-only", action="store_true", help="sizes only, no solving")
    p.add_argument("--report", help="CSV report path (default: stdout)")

    p = sub.add_parser("count", help="model sizes and cubic fit of the variable count")
    p.add_argument("--cities", type=city_range, required=True, help="range A..B")
    _add_model(p)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> Command:
    """Parse ``argv``; usage errors exit with status 2."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    return Command(sub, ns)


# --- helpers ---------------------------------------------------------------


def _jobs(cmd: Command) -> int:
    env = os.environ.get("TSPLP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer TSPLP_JOBS=%r", env)
    return max(1, int(cmd.options.get("jobs", 1) or 1))


def _gen_config(cmd: Command, n: int, rep: int) -> GenConfig:
    return GenConfig(
        n=n,
        cost_model=COST_MODEL[cmd.cost_model],
        pct_low=cmd.pct_low,
        pct_high=cmd.pct_high,
        low=cmd.low,
        high=cmd.high,
        symmetric=not cmd.asymmetric,
        integer=cmd.integer,
        triangle=cmd.triangle,
        seed=replication_seed(cmd.seed, n, rep),
    )


def replication_seed(master: int, n: int, rep: int) -> int:
    """Per-replication seed: first 64-bit word of ``SeedSequence(master, spawn_key=(2, n, rep))``."""
    ss = np.random.SeedSequence(master, spawn_key=(2, n, rep))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _build_options(cmd: Command) -> BuildOptions:
    return BuildOptions(visit_family=VISIT[cmd.visit], include_flow_consist_nonadjacent=not cmd.no_c10)


def _replicate(args):
    instance, iid, options, settings, verify, mode = args
    return run_replication(instance, iid, options, settings, verify=verify, mode=mode)


def _run_all(cmd: Command, jobs, verify: bool):
    options = _build_options(cmd)
    settings = SolverSettings(method=cmd.method)
    work = [(inst, iid, options, settings, verify, MODES[cmd.mode]) for iid, inst in jobs]
    n_jobs = _jobs(cmd)
    if n_jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(_replicate, work))  # map preserves submission order
    return [_replicate(w) for w in work]


def _print_outcome(out) -> None:
    r = out.row
    print(f"[{r.instance_id}] n={r.n} rows={r.row_count} cols={r.y_count + r.x_count} status={r.status}")
    if r.lp_objective is not None:
        print(f"  LP objective: {r.lp_objective:.6f}")
    elif out.audit_summary:
        print(f"  audit: {out.audit_summary}")
    if r.oracle_objective is not None:
        print(f"  Held-Karp:    {r.oracle_objective:.6f}  match={r.match}")
    if out.decomposition is not None:
        d = out.decomposition
        print(f"  extraction ({d.mode}): {len(d.parts)} part(s), residual {d.residual_norm:.2e}, exhausted={d.exhausted}")
        for w, t in d.parts:
            print(f"    {w:.6f} x {' '.join(map(str, t))}  cost {tour_cost(out.instance, t):.6f}")


# --- subcommands -----------------------------------------------------------


def _cmd_gen(cmd: Command) -> int:
    out = Path(cmd.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for rep in range(cmd.reps):
        cfg = _gen_config(cmd, cmd.cities, rep)
        inst = generate_random(cfg)
        name = f"inst_n{cmd.cities}_r{rep:03d}.csv"
        save_csv(inst, out / name)
        manifest.append({"file": name, "replication": rep, "master_seed": cmd.seed, "config": cfg.to_dict()})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    print(f"wrote {cmd.reps} instance(s) to {out}")
    return EXIT_OK


def _cmd_build(cmd: Command) -> int:
    inst = load_csv(cmd.instance)
    model = build_model(inst, _build_options(cmd))
    write_model(model, cmd.out, cmd.format)
    print(f"wrote {cmd.format} model: {model.n_rows} rows, {model.n_cols} columns -> {cmd.out}")
    return EXIT_OK


def _cmd_solve(cmd: Command, verify: bool = False) -> int:
    if cmd.options.get("instance"):
        inst = load_csv(cmd.instance)
        jobs = [(Path(cmd.instance).stem, inst)]
    else:
        jobs = []
        for rep in range(cmd.reps):
            cfg = _gen_config(cmd, cmd.cities, rep)
            jobs.append((f"n{cmd.cities}_s{cmd.seed}_r{rep:03d}", generate_random(cfg)))

    external = cmd.options.get("external_solution")
    if external and not cmd.options.get("instance"):
        print("--external-solution needs --instance", file=sys.stderr)
        return EXIT_USAGE
    if external:
        inst = jobs[0][1]
        point = read_solution(external, build_index(inst.n))
        outcomes = [run_replication(inst, jobs[0][0], _build_options(cmd), SolverSettings(method=cmd.method),
                                    verify=verify, external_point=point, mode=MODES[cmd.mode])]
    else:
        outcomes = _run_all(cmd, jobs, verify)

    for out in outcomes:
        _print_outcome(out)
    rows = [o.row for o in outcomes]
    if cmd.options.get("report"):
        write_report(rows, cmd.report)

    failed = [o for o in outcomes if o.row.status not in ("optimal", "external")]
    if failed:
        for o in failed:
            print(f"solver phase failed on {o.row.instance_id}: {o.row.status} ({o.row.note})", file=sys.stderr)
        return EXIT_SOLVER
    unaudited = [o for o in outcomes if not o.row.audit_ok]
    if verify:
        mismatched = [o for o in outcomes if o.row.match is not True]
        for o in mismatched:
            where = write_forensics(o, cmd.forensics)
            print(f"MISMATCH on {o.row.instance_id}: LP={o.row.lp_objective} HK={o.row.oracle_objective}; "
                  f"bundle in {where}", file=sys.stderr)
        print(f"verified {len(outcomes) - len(mismatched)}/{len(outcomes)} instance(s)")
        return EXIT_MISMATCH if mismatched else EXIT_OK
    if unaudited:
        for o in unaudited:
            print(f"audit failed on {o.row.instance_id}: {o.audit_summary}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_decompose(cmd: Command) -> int:
    inst = load_csv(cmd.instance)
    point = read_solution(cmd.solution, build_index(inst.n))
    y = point[: y_count_formula(inst.n)]
    mode = MODES[cmd.mode]
    dec = iterative_elimination(y, mode)
    print(f"mode={mode} parts={len(dec.parts)} residual={dec.residual_norm:.3e} exhausted={dec.exhausted}")
    for w, t in dec.parts:
        print(f"{w:.9f} {' '.join(map(str, t))} cost={tour_cost(inst, t):.6f}")
    if not dec.exhausted and mode == "greedy":
        print("greedy extraction stalled; retry with --mode enum", file=sys.stderr)
    return EXIT_OK if dec.exhausted else EXIT_SOLVER


def _emit_rows(rows: List[ReportRow], path) -> None:
    if path:
        write_report(rows, path)
        return
    import csv

    writer = csv.DictWriter(sys.stdout, fieldnames=ReportRow.columns())
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))


def _cmd_bench(cmd: Command) -> int:
    options = _build_options(cmd)
    if cmd.count_only:
        rows = [size_row(f"n{n}_s{cmd.seed}_r{rep:03d}", n, options) for n in cmd.cities for rep in range(cmd.reps)]
        _emit_rows(rows, cmd.options.get("report"))
        return EXIT_OK
    jobs = [(f"n{n}_s{cmd.seed}_r{rep:03d}", generate_random(_gen_config(cmd, n, rep)))
            for n in cmd.cities for rep in range(cmd.reps)]
    outcomes = _run_all(cmd, jobs, verify=all(n <= 17 for n in cmd.cities))
    _emit_rows([o.row for o in outcomes], cmd.options.get("report"))
    return EXIT_SOLVER if any(o.row.status != "optimal" for o in outcomes) else EXIT_OK


def cubic_fit(ns: Sequence[int], values: Sequence[float]):
    """Least-squares cubic polynomial in ``n``; returns (coefficients, R^2)."""
    x = np.asarray(ns, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    coef = np.polyfit(x, y, 3)
    pred = np.polyval(coef, x)
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return coef, (1.0 - ss_res / ss_tot) if ss_tot > 0 else 1.0


def size_table(ns: Sequence[int], options: BuildOptions = BuildOptions()):
    table = []
    for n in ns:
        yc, xc = y_count_formula(n), x_count_formula(n)
        table.append({"n": n, "y": yc, "x": xc, "vars": yc + xc, "rows": sum(row_counts(n, options).values())})
    return table


def _cmd_count(cmd: Command) -> int:
    table = size_table(cmd.cities, _build_options(cmd))
    print(f"{'n':>3} {'y':>8} {'x':>10} {'variables':>10} {'rows':>9}")
    for t in table:
        print(f"{t['n']:>3} {t['y']:>8} {t['x']:>10} {t['vars']:>10} {t['rows']:>9}")
    if len(table) >= 5:
        ns = [t["n"] for t in table]
        coef, r2 = cubic_fit(ns, [t["vars"] for t in table])
        print("cubic fit, variables: " + " ".join(f"{c:.6g}" for c in coef) + f"  R^2={r2:.6f}")
        coef, r2 = cubic_fit(ns, [t["rows"] for t in table])
        print("cubic fit, rows:      " + " ".join(f"{c:.6g}" for c in coef) + f"  R^2={r2:.6f}")
    else:
        print("cubic fit needs at least 5 city counts")
    return EXIT_OK


HANDLERS = {
    "gen": _cmd_gen,
    "build": _cmd_build,
    "solve": _cmd_solve,
    "verify": lambda cmd: _cmd_solve(cmd, verify=True),
    "decompose": _cmd_decompose,
    "bench": _cmd_bench,
    "count": _cmd_count,
}


def execute(cmd: Command) -> int:
    """Run a parsed command and map failures onto exit codes."""
    try:
        return HANDLERS[cmd.subcommand](cmd)
    except (FileError, ParseError, OSError) as exc:
        print(f"{cmd.subcommand}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TspLpError as exc:
        print(f"{cmd.subcommand}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cmd = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if cmd.options.get("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
