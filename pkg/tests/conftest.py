import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entclt.distributions import DistributionSpec as D
from entclt.distributions import make_density

settings.register_profile(
    "numeric",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")

N = 4096


@lru_cache(maxsize=None)
def dens(spec, n_points=N):
    """Cached grid density; specs are frozen dataclasses so they hash."""
    return make_density(spec, n_points)


def gauss_pdf(x, mu=0.0, sd=1.0):
    z = (np.asarray(x, float) - mu) / sd
    return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


SMOOTH_SPECS = [
    D.gaussian(),
    D.generalized_gaussian(1.5),
    D.generalized_gaussian(3),
    D.generalized_gaussian(4),
    D.student_t(5),
    D.student_t(6),
    D.student_t(8),
    D.student_t(10),
    D.gaussian_mixture([0.3, 0.7], [-1.0, 0.5], [0.6, 0.9]),
]


@pytest.fixture(scope="session")
def gaussian():
    return dens(D.gaussian())


@pytest.fixture(scope="session")
def q4():
    return dens(D.generalized_gaussian(4))


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    """Store (and print) one acceptance verdict line; returns ``passed``."""
    line = f"acceptance {number:02d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
