import numpy as np
import pytest

from corrqst import ChainSpec, build_channel, build_full, correlated_disorder, eigendecompose


@pytest.fixture
def make_spec():
    def _make(N=50, alpha=None, seed=0, g=0.001, g_s=None, g_r=None, omega_s=0.0, omega_r=0.0):
        disorder = None if alpha is None else correlated_disorder(N, alpha, seed)
        return ChainSpec(N, 1.0, g if g_s is None else g_s, g if g_r is None else g_r,
                         omega_s, omega_r, disorder)
    return _make


def decompose(spec):
    """(channel, full) eigensystems for a ChainSpec."""
    return eigendecompose(build_channel(spec)), eigendecompose(build_full(spec))


def random_tridiagonal(rng, M, scale=1.0):
    return rng.normal(scale=scale, size=M), -np.abs(rng.normal(size=M - 1)) - 0.1


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
