import itertools

import numpy as np
import pytest

from tsplp.errors import DomainError
from tsplp.instance import GenConfig, TspInstance, generate_random, tour_cost
from tsplp.oracle import brute_force_opt, held_karp_opt


def test_brute_force_all_ones():
    assert brute_force_opt(TspInstance(6, np.ones((6, 6)))) == (6.0, (1, 2, 3, 4, 5))


def test_brute_force_abs_diff_hand_loop():
    n = 5
    cost = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    best = None
    for tour in itertools.permutations(range(1, n)):
        total, prev = 0.0, 0
        for city in tour:
            total += abs(prev - city)
            prev = city
        total += prev
        best = total if best is None else min(best, total)
    assert brute_force_opt(TspInstance(n, cost))[0] == best == 8


def test_symmetric_transpose():
    inst = generate_random(GenConfig(7, seed=1))
    assert brute_force_opt(inst)[0] == brute_force_opt(inst.transposed())[0]


def test_held_karp_constant():
    assert held_karp_opt(TspInstance(8, np.full((8, 8), 5.0)))[0] == 40


@pytest.mark.parametrize("seed", range(5))
def test_held_karp_asymmetric_transpose(seed):
    inst = generate_random(GenConfig(9, cost_model="uniform", symmetric=False, integer=True, seed=seed))
    assert held_karp_opt(inst)[0] == held_karp_opt(inst.transposed())[0]


@pytest.mark.parametrize("seed", range(30))
def test_oracles_agree_and_reproduce(seed):
    n = 5 + seed % 5
    symmetric = seed % 2 == 0
    inst = generate_random(GenConfig(n, cost_model="uniform", symmetric=symmetric, seed=seed))
    bf_cost, bf_tour = brute_force_opt(inst)
    hk_cost, hk_tour = held_karp_opt(inst)
    assert bf_cost == hk_cost
    assert tour_cost(inst, bf_tour) == bf_cost
    assert tour_cost(inst, hk_tour) == hk_cost


def test_held_karp_larger_than_brute_force_limit():
    inst = generate_random(GenConfig(13, integer=True, seed=0))
    cost, tour = held_karp_opt(inst)
    assert tour_cost(inst, tour) == cost


def test_limits():
    with pytest.raises(DomainError):
        brute_force_opt(TspInstance(11, np.ones((11, 11))))
    with pytest.raises(DomainError):
        held_karp_opt(TspInstance(18, np.ones((18, 18))))
