import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    """Keep NETLIB fetches inside a per-session cache."""
    old = os.environ.get("DUALPATH_CACHE")
    os.environ["DUALPATH_CACHE"] = str(tmp_path_factory.mktemp("netlib-cache"))
    yield
    if old is None:
        os.environ.pop("DUALPATH_CACHE", None)
    else:
        os.environ["DUALPATH_CACHE"] = old


def random_feasible_lp(rng: np.random.Generator, n: int, m_eq: int, name: str = "rand"):
    """Bounded-feasible LP: ``b = A x0`` for an interior ``x0`` and a cost
    that is nonnegative on the box, so the optimum is finite."""
    from dualpath import LinearProgram

    A = rng.standard_normal((m_eq, n))
    x0 = rng.uniform(0.5, 1.5, n)
    b = A @ x0
    c = rng.uniform(0.1, 1.0, n)
    upper = np.where(rng.random(n) < 0.5, 3.0, np.inf)
    return LinearProgram(c, A, b, np.zeros(n), upper, name=name)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
