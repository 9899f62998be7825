import random

import pytest

from ellmq.algebra import CurvatureMatrix


def random_curvature(alg, n, gens, rng, span=2):
    """Random antisymmetric matrix of 2-forms spanned by ``gens`` (degree-2 names)."""
    upper = []
    for _ in range(n * (n - 1) // 2):
        entry = alg.zero()
        for g in rng.sample(gens, min(len(gens), rng.randint(1, span))):
            entry = entry + alg.gen(g) * rng.randint(-3, 3)
        upper.append(entry)
    return CurvatureMatrix.from_upper(alg, n, upper)


@pytest.fixture
def rng():
    return random.Random(20261016)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
