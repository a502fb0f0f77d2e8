import os

import numpy as np
import pytest
import scipy.sparse as sp

from tsplp.errors import ParseError, ValidationError
from tsplp.instance import GenConfig, TspInstance, generate_random
from tsplp.lpio import FileError, fmt, read_solution, render_solution, write_model, write_solution
from tsplp.model import build_model, tour_to_point
from tsplp.oracle import held_karp_opt, render_mtz, write_mtz
from tsplp.tspfg import build_index


def read_free_mps(path):
    """Minimal free-MPS reader: rows, columns, rhs, bounds and integer markers."""
    rows, senses, cols, entries, obj, rhs, bounds, integer = [], {}, [], {}, {}, {}, [], set()
    section, in_int = None, False
    for line in open(path):
        if not line.strip():
            continue
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        f = line.split()
        if section == "ROWS":
            senses[f[1]] = f[0]
            if f[0] != "N":
                rows.append(f[1])
        elif section == "COLUMNS":
            if len(f) == 3 and f[1] == "'MARKER'":
                in_int = f[2].strip("'") == "INTORG"
                continue
            name = f[0]
            if name not in entries:
                cols.append(name)
                entries[name] = {}
                if in_int:
                    integer.add(name)
            for r, v in zip(f[1::2], f[2::2]):
                if senses[r] == "N":
                    obj[name] = float(v)
                else:
                    entries[name][r] = float(v)
        elif section == "RHS":
            rhs[f[1]] = float(f[2])
        elif section == "BOUNDS":
            bounds.append(tuple(f))
    row_of = {r: k for k, r in enumerate(rows)}
    data, ri, ci = [], [], []
    for c, name in enumerate(cols):
        for r, v in entries[name].items():
            ri.append(row_of[r])
            ci.append(c)
            data.append(v)
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), len(cols)))
    return dict(rows=rows, senses=senses, cols=cols, A=A,
                obj=np.array([obj.get(c, 0.0) for c in cols]),
                rhs=np.array([rhs.get(r, 0.0) for r in rows]), bounds=bounds, integer=integer)


@pytest.mark.parametrize("n", [6, 7, 8, 9])
def test_mps_round_trip_lossless(tmp_path, n):
    inst = generate_random(GenConfig(n, seed=n))  # non-integer costs exercise decimal rendering
    model = build_model(inst)
    path = tmp_path / "m.mps"
    write_model(model, path)
    got = read_free_mps(path)
    assert got["cols"] == model.index.names()
    assert got["rows"] == model.row_names()
    assert (got["A"] != model.A).nnz == 0
    assert np.array_equal(got["obj"], model.objective)
    assert np.array_equal(got["rhs"], model.rhs)


def test_mps_column_count_n6(tmp_path):
    path = tmp_path / "m.mps"
    write_model(build_model(TspInstance(6, np.ones((6, 6)))), path)
    assert len(read_free_mps(path)["cols"]) == 80 + 880


def test_export_deterministic(tmp_path):
    model = build_model(generate_random(GenConfig(7, seed=1)))
    for fmt_name in ("mps", "lp"):
        write_model(model, tmp_path / "a", fmt_name)
        write_model(model, tmp_path / "b", fmt_name)
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_highs_reads_exported_mps(tmp_path):
    highspy = pytest.importorskip("highspy")
    model = build_model(generate_random(GenConfig(6, seed=2)))
    path = tmp_path / "m.mps"
    write_model(model, path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    lp = h.getLp()
    assert (lp.num_col_, lp.num_row_) == (model.n_cols, model.n_rows)


def test_lp_text_format(tmp_path):
    model = build_model(TspInstance(6, np.ones((6, 6))))
    path = tmp_path / "m.lp"
    write_model(model, path, "lp")
    text = path.read_text()
    assert text.count("\n f1:") == 1 and text.rstrip().endswith("End")
    assert text.count(" = ") == model.n_rows


def test_unknown_format(tmp_path):
    with pytest.raises(ValidationError):
        write_model(build_model(TspInstance(6, np.ones((6, 6)))), tmp_path / "m", "xml")


def test_write_to_missing_directory(tmp_path):
    with pytest.raises(FileError):
        write_model(build_model(TspInstance(6, np.ones((6, 6)))), tmp_path / "nope" / "m.mps")


@pytest.mark.parametrize("value,text", [(1.0, "1"), (-3.0, "-3"), (0.1, "0.1"), (1 / 3, "0.3333333333333333")])
def test_fmt(value, text):
    assert fmt(value) == text
    assert float(fmt(value)) == value


def test_solution_round_trip(tmp_path):
    idx = build_index(7)
    rng = np.random.default_rng(0)
    point = rng.random(idx.size) * (rng.random(idx.size) < 0.1)
    write_solution(idx, point, tmp_path / "s.txt")
    assert np.max(np.abs(read_solution(tmp_path / "s.txt", idx) - point)) <= 1e-12


def test_solution_tour_point(tmp_path):
    idx = build_index(6)
    p = tour_to_point(idx, (2, 4, 1, 5, 3))
    (tmp_path / "s.txt").write_text("# tour\n\n" + render_solution(idx, p))
    assert np.array_equal(read_solution(tmp_path / "s.txt", idx), p)


def test_empty_solution_file(tmp_path):
    (tmp_path / "s.txt").write_text("")
    assert not read_solution(tmp_path / "s.txt", build_index(6)).any()


@pytest.mark.parametrize("body,line", [
    ("y_1_1_2 1\ny_9_9_9 1\n", 2),
    ("y_1_1_2 one\n", 1),
    ("y_1_1_2\n", 1),
    ("y_1_1_2 -0.5\n", 1),
    ("y_1_1_2 nan\n", 1),
])
def test_solution_parse_errors(tmp_path, body, line):
    (tmp_path / "s.txt").write_text(body)
    with pytest.raises(ParseError) as err:
        read_solution(tmp_path / "s.txt", build_index(6))
    assert err.value.line == line


def test_missing_solution_file(tmp_path):
    with pytest.raises(FileError):
        read_solution(tmp_path / "none.txt", build_index(6))


def test_mtz_counts(tmp_path):
    path = tmp_path / "mtz.mps"
    write_mtz(TspInstance(6, np.ones((6, 6))), path)
    got = read_free_mps(path)
    assert len(got["integer"]) == 30
    assert len([c for c in got["cols"] if c.startswith("u_")]) == 5
    assert sum(1 for b in got["bounds"] if b[0] == "BV") == 30


def test_highs_reads_exported_mtz(tmp_path):
    highspy = pytest.importorskip("highspy")
    path = tmp_path / "mtz.mps"
    write_mtz(TspInstance(6, np.ones((6, 6))), path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    lp = h.getLp()
    assert lp.num_col_ == 35
    assert sum(1 for v in lp.integrality_ if v == highspy.HighsVarType.kInteger) == 30


def test_mtz_deterministic():
    inst = generate_random(GenConfig(7, seed=5))
    assert render_mtz(inst) == render_mtz(inst)


@pytest.mark.external
@pytest.mark.skipif(os.environ.get("TSPLP_EXTERNAL") != "1", reason="set TSPLP_EXTERNAL=1 to run the ILP cross-check")
def test_mtz_solved_externally_matches_held_karp(tmp_path):
    highspy = pytest.importorskip("highspy")
    inst = generate_random(GenConfig(7, integer=True, seed=21))
    path = tmp_path / "mtz.mps"
    write_mtz(inst, path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    h.run()
    assert h.getInfo().objective_function_value == pytest.approx(held_karp_opt(inst)[0], abs=1e-6)
