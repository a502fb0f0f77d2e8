import csv
import json

import numpy as np
import pytest

from tsplp.cli import city_range, cubic_fit, main, parse_args, replication_seed, size_table
from tsplp.instance import GenConfig, generate_random, load_csv, save_csv, tour_cost
from tsplp.lpio import write_solution
from tsplp.model import tour_to_point
from tsplp.oracle import brute_force_opt
from tsplp.tspfg import build_index


def test_parse_gen_defaults():
    cmd = parse_args(["gen", "--cities", "7", "--reps", "5", "--seed", "42", "--out", "d"])
    assert cmd.subcommand == "gen"
    assert (cmd.cities, cmd.reps, cmd.seed, cmd.out) == (7, 5, 42, "d")
    assert (cmd.cost_model, cmd.pct_low, cmd.pct_high, cmd.asymmetric) == ("euclid", 0.9, 1.1, False)


def test_parse_count_range():
    assert parse_args(["count", "--cities", "6..9"]).cities == [6, 7, 8, 9]


@pytest.mark.parametrize("argv", [["solve"], ["frobnicate"], ["count", "--cities", "9..6"], []])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as err:
        parse_args(argv)
    assert err.value.code == 2
    assert main(argv) == 2


def test_city_range():
    assert city_range("7") == [7]
    assert city_range("7..9") == [7, 8, 9]


def test_replication_seed_is_stable():
    assert replication_seed(42, 7, 3) == replication_seed(42, 7, 3)
    assert len({replication_seed(42, 7, r) for r in range(50)}) == 50


def test_gen_writes_instances_and_manifest(tmp_path):
    out = tmp_path / "inst"
    assert main(["gen", "--cities", "7", "--reps", "3", "--seed", "42", "--out", str(out), "--integer"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert [m["file"] for m in manifest] == [f"inst_n7_r{r:03d}.csv" for r in range(3)]
    first = load_csv(out / "inst_n7_r000.csv")
    assert first.is_integer and first.is_symmetric
    again = tmp_path / "again"
    main(["gen", "--cities", "7", "--reps", "3", "--seed", "42", "--out", str(again), "--integer"])
    assert (again / "inst_n7_r002.csv").read_bytes() == (out / "inst_n7_r002.csv").read_bytes()


def test_build_exports(tmp_path):
    inst = tmp_path / "i.csv"
    save_csv(generate_random(GenConfig(6, seed=1)), inst)
    assert main(["build", "--instance", str(inst), "--out", str(tmp_path / "m.mps")]) == 0
    assert (tmp_path / "m.mps").read_text().startswith("NAME TSPFG_N6")
    assert main(["build", "--instance", str(inst), "--format", "lp", "--out", str(tmp_path / "m.lp")]) == 0


def test_missing_instance_is_io_error(tmp_path):
    assert main(["solve", "--instance", str(tmp_path / "none.csv")]) == 5


def test_small_instance_is_domain_error(tmp_path):
    inst = tmp_path / "i.csv"
    save_csv(generate_random(GenConfig(5, seed=1)), inst)
    assert main(["solve", "--instance", str(inst)]) == 4


def test_solve_with_report(tmp_path, capsys):
    inst = tmp_path / "i.csv"
    save_csv(generate_random(GenConfig(7, integer=True, seed=8)), inst)
    report = tmp_path / "r.csv"
    assert main(["solve", "--instance", str(inst), "--report", str(report)]) == 0
    row = next(csv.DictReader(report.open()))
    assert row["status"] == "optimal" and row["audit_ok"] == "True"
    assert json.loads(report.with_suffix(".csv.json").read_text())[0]["instance_id"] == "i"
    assert "LP objective" in capsys.readouterr().out


def test_verify_twenty_seeded_instances(tmp_path):
    report = tmp_path / "v.csv"
    code = main(["verify", "--cities", "7", "--reps", "20", "--seed", "2024", "--integer", "--report", str(report),
                 "--forensics", str(tmp_path / "f"), "--jobs", "2"])
    rows = list(csv.DictReader(report.open()))
    assert code == 0
    assert [r["instance_id"] for r in rows] == [f"n7_s2024_r{r:03d}" for r in range(20)]
    assert all(r["match"] == "True" for r in rows)
    assert not (tmp_path / "f").exists()


def test_verify_mismatch_writes_forensics(tmp_path):
    inst = generate_random(GenConfig(7, integer=True, seed=3))
    worst = max(((tour_cost(inst, t), t) for t in [(1, 2, 3, 4, 5, 6), (6, 1, 5, 2, 4, 3)]))[1]
    assert tour_cost(inst, worst) > brute_force_opt(inst)[0]
    save_csv(inst, tmp_path / "i.csv")
    write_solution(build_index(7), tour_to_point(build_index(7), worst), tmp_path / "s.txt")
    code = main(["verify", "--instance", str(tmp_path / "i.csv"), "--external-solution", str(tmp_path / "s.txt"),
                 "--forensics", str(tmp_path / "f")])
    assert code == 3
    bundle = tmp_path / "f" / "i"
    assert {p.name for p in bundle.iterdir()} == {"instance.csv", "solution.txt", "residual.json"}
    data = json.loads((bundle / "residual.json").read_text())
    assert data["report"]["match"] is False and data["report"]["audit_ok"] is True


def test_decompose_characteristic_solution(tmp_path, capsys):
    inst = generate_random(GenConfig(7, integer=True, seed=3))
    save_csv(inst, tmp_path / "i.csv")
    write_solution(build_index(7), tour_to_point(build_index(7), (2, 5, 1, 6, 3, 4)), tmp_path / "s.txt")
    assert main(["decompose", "--instance", str(tmp_path / "i.csv"), "--solution", str(tmp_path / "s.txt")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("mode=greedy parts=1")
    assert out[1].startswith("1.000000000 2 5 1 6 3 4")


def test_count_fit(capsys):
    assert main(["count", "--cities", "7..22"]) == 0
    out = capsys.readouterr().out
    r2 = float(out.split("R^2=")[1].split()[0])
    assert r2 > 0.999


def test_cubic_fit_exact_on_cubic():
    ns = list(range(5, 15))
    _, r2 = cubic_fit(ns, [2 * n**3 - n + 4 for n in ns])
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_size_table_matches_index():
    row = size_table([7])[0]
    assert (row["y"], row["x"], row["rows"]) == (150, 2700, 2329)


def test_bench_count_only(tmp_path):
    report = tmp_path / "b.csv"
    assert main(["bench", "--cities", "6..8", "--reps", "2", "--count-only", "--report", str(report)]) == 0
    rows = list(csv.DictReader(report.open()))
    assert len(rows) == 6 and rows[0]["y_count"] == "80"


def test_bench_solves(tmp_path):
    report = tmp_path / "b.csv"
    assert main(["bench", "--cities", "6..7", "--integer", "--report", str(report)]) == 0
    assert all(r["match"] == "True" for r in csv.DictReader(report.open()))
