from types import SimpleNamespace

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_tour
from tsplp.errors import ConfigError
from tsplp.experiment import objectives_match
from tsplp.instance import GenConfig, TspInstance, generate_random, tour_cost
from tsplp.model import build_model, check_point
from tsplp.oracle import held_karp_opt
from tsplp.simplex import revised_simplex
from tsplp.solver import SolverSettings, solve


def toy(A, b, c):
    A = sp.csr_matrix(np.array(A, dtype=float))
    return SimpleNamespace(A=A, rhs=np.array(b, dtype=float), objective=np.array(c, dtype=float),
                           n_rows=A.shape[0], n_cols=A.shape[1])


# Beale's example: Dantzig's rule with the textbook tie-breaking cycles on it
BEALE = toy(
    [[1, 0, 0, 0.25, -8, -1, 9], [0, 1, 0, 0.5, -12, -0.5, 3], [0, 0, 1, 0, 0, 1, 0]],
    [0, 0, 1],
    [0, 0, 0, -0.75, 20, -0.5, 6],
)


@pytest.fixture(scope="module")
def const6():
    return build_model(TspInstance(6, np.full((6, 6), 5.0)))


@pytest.mark.parametrize("method", ["ipm", "simplex", "bland"])
def test_constant_costs(const6, method):
    sol = solve(const6, SolverSettings(method=method))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(30, abs=1e-6)
    assert check_point(const6, sol.point, 1e-7).feasible


@pytest.mark.parametrize("method", ["ipm", "simplex", "bland"])
def test_beale(method):
    sol = solve(BEALE, SolverSettings(method=method))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-1.25, abs=1e-9)


@pytest.mark.parametrize("method", ["ipm", "simplex", "bland"])
def test_infeasible_toy(method):
    assert solve(toy([[1.0], [1.0]], [0, 1], [1]), SolverSettings(method=method)).status == "infeasible"


@pytest.mark.parametrize("method", ["simplex", "bland"])
def test_unbounded_toy(method):
    assert solve(toy([[1, -1]], [0], [-1, 0]), SolverSettings(method=method)).status == "unbounded"


def test_iteration_limit_never_reports_optimal(const6):
    sol = solve(const6, SolverSettings(method="bland", max_iterations=5))
    assert sol.status == "iteration_limit"
    assert np.isnan(sol.objective)


def test_revised_simplex_degenerate_lp():
    # highly degenerate: many zero right-hand sides
    rng = np.random.default_rng(0)
    A = rng.integers(-2, 3, size=(8, 20)).astype(float)
    x0 = np.zeros(20)
    x0[:3] = 1
    b = A @ x0
    c = rng.random(20)
    res = revised_simplex(sp.csc_matrix(A), b, c)
    assert res.status == "optimal"
    assert np.allclose(A @ res.x, b, atol=1e-9) and res.x.min() >= -1e-12
    assert c @ res.x <= c @ x0 + 1e-9
    # strong duality from the returned duals
    assert res.duals @ b == pytest.approx(c @ res.x, abs=1e-8)


@pytest.mark.parametrize("seed", [0, 1])
def test_n7_matches_held_karp(seed):
    inst = generate_random(GenConfig(7, integer=True, seed=seed))
    model = build_model(inst)
    sol = solve(model)
    assert sol.is_optimal
    hk, _ = held_karp_opt(inst)
    assert objectives_match(sol.objective, hk)
    assert sol.objective >= sol.dual_bound - 1e-7 * max(1, abs(sol.objective))
    assert check_point(model, sol.point, 1e-7).feasible
    rng = np.random.default_rng(seed)
    assert all(sol.objective <= tour_cost(inst, random_tour(rng, 6)) + 1e-6 for _ in range(100))


def test_simplex_vertex_n7_matches_ipm():
    inst = generate_random(GenConfig(7, integer=True, seed=4))
    model = build_model(inst)
    a = solve(model, SolverSettings(method="simplex"))
    b = solve(model, SolverSettings(method="ipm"))
    assert a.objective == pytest.approx(b.objective, rel=1e-7)


@pytest.mark.parametrize("kwargs", [dict(feas_tol=0), dict(method="dual"), dict(max_iterations=0)])
def test_bad_settings(const6, kwargs):
    with pytest.raises(ConfigError):
        solve(const6, SolverSettings(**kwargs))
