import itertools

import numpy as np
import pytest

from tsplp.instance import GenConfig, TspInstance, generate_random

ACCEPTANCE_LINES = []


def record_acceptance(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def all_tours(m):
    return list(itertools.permutations(range(1, m + 1)))


def random_tour(rng, m):
    return tuple(int(c) for c in rng.permutation(np.arange(1, m + 1)))


@pytest.fixture
def ones6():
    return TspInstance(6, np.ones((6, 6)))


@pytest.fixture
def int7():
    return generate_random(GenConfig(7, integer=True, seed=7))
