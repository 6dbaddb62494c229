import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def complex_vectors(dim):
    """Nonzero complex vectors of a fixed dimension, normalized."""
    floats = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
    return (
        st.lists(st.tuples(floats, floats), min_size=dim, max_size=dim)
        .map(lambda xs: np.array([a + 1j * b for a, b in xs]))
        .filter(lambda v: np.linalg.norm(v) > 1e-3)
        .map(lambda v: v / np.linalg.norm(v))
    )


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance verdicts, one line per criterion, printed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record ``PASS``/``FAIL`` for an acceptance criterion and assert it."""

    def record(number: int, title: str, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d} {title}: {detail}"
        print(ACCEPTANCE_LINES[number])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
