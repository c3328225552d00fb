import math

import numpy as np
import pytest

from ccbif import families

R1, R2, R3 = math.sqrt(2) / 7, math.sqrt(2) / 6, math.sqrt(2) / 5


def random_configuration(rng, n, min_dist=0.2, box=1.0):
    """Uniform points in a box, rejecting near-collisions."""
    while True:
        P = rng.uniform(-box, box, size=(n, 2))
        d = np.linalg.norm(P[:, None] - P[None], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() >= min_dist:
            return P.ravel()


def random_masses(rng, n):
    return rng.uniform(0.5, 2.0, size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lemma_points():
    return {r: families.two_squares_point(r) for r in (R1, R2, R3)}


@pytest.fixture(scope="session")
def family_points():
    """25 two-squares points and 25 rosette points."""
    pts = [families.two_squares_point(r) for r in np.linspace(0.05, 0.36, 25)]
    m = np.linspace(0.2, 4.8, 5)
    pts += [families.rosette_point(a, b) for a in m for b in m]
    return pts


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
