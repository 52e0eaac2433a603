"""Shared helpers for the test suite."""

import numpy as np
import pytest

from qcrb.collective import p_nr
from qcrb.spin import rho_jp_weights

# Acceptance tests append one verdict line per criterion; the summary hook
# below echoes them after the run regardless of output capturing.
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def random_pd_matrix(rng, dim, jitter=0.05):
    """Well-conditioned random positive-definite symmetric matrix."""
    a = rng.standard_normal((dim, dim))
    return a @ a.T + jitter * np.eye(dim)


def spin_level_joint(n):
    """Joint family over (total spin, magnetic level) for n qubit copies.

    Returns a callable theta -> list of per-block probability rows; the
    spin-0 block (present for even n) is a single sure outcome.
    """

    def joint(theta):
        dist = p_nr(n, theta)
        p = (1.0 - theta) / (1.0 + theta)
        rows = []
        for j, prob in zip(dist.support, dist.probs):
            w = np.array([1.0]) if j == 0 else rho_jp_weights(j, p)
            rows.append(prob * w)
        return rows

    return joint


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
