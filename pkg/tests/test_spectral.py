import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrqst import ChainSpec, TriMatrix, build_channel, build_full, correlated_disorder, eigendecompose, participation
from corrqst.spectral import EigenSystem, central_band_mean, write_eigenmap_csv


def test_two_by_two():
    e = eigendecompose(TriMatrix([0, 0], [-1]))
    np.testing.assert_allclose(e.energies, [-1, 1], atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(e.vectors[:, 0], [s, s], atol=1e-15)
    # largest entry positive, tie broken by the lowest index
    np.testing.assert_allclose(e.vectors[:, 1], [s, -s], atol=1e-15)


def test_three_site_uniform():
    e = eigendecompose(build_channel(ChainSpec(3)))
    np.testing.assert_allclose(e.energies, [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-14)


@pytest.mark.parametrize("N,J", [(2, 1.0), (17, 1.0), (50, 1.0), (101, 0.7)])
def test_open_chain_closed_form(N, J):
    e = eigendecompose(build_channel(ChainSpec(N, J)))
    q = np.arange(1, N + 1)
    np.testing.assert_allclose(e.energies, np.sort(-2 * J * np.cos(q * np.pi / (N + 1))), atol=1e-10)
    assert np.all(np.abs(e.energies) <= 2 * J)


@settings(max_examples=40, deadline=None)
@given(N=st.integers(2, 200), alpha=st.floats(0, 4), seed=st.integers(0, 2**32),
       g=st.floats(0, 1))
def test_eigen_invariants(N, alpha, seed, g):
    spec = ChainSpec(N, 1.0, g, g, 0.1, -0.2, correlated_disorder(N, alpha, seed))
    for m in (build_channel(spec), build_full(spec)):
        e = eigendecompose(m)
        assert np.all(np.diff(e.energies) >= 0)
        assert e.residuals(m).max() <= 1e-10 * max(1.0, m.norm1())
        assert e.orthonormality_error() <= 1e-10
        # dense LAPACK solver as an independent oracle for the spectrum
        np.testing.assert_allclose(e.energies, np.linalg.eigvalsh(m.dense()), atol=1e-10)
        idx = np.argmax(np.abs(e.vectors), axis=0)
        assert np.all(e.vectors[idx, np.arange(e.size)] > 0)


def test_sign_convention_deterministic():
    m = build_channel(ChainSpec(30, disorder=correlated_disorder(30, 2.0, 4)))
    a, b = eigendecompose(m), eigendecompose(m)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_participation_limits():
    N = 10
    localized = EigenSystem(np.arange(N, dtype=float), np.eye(N))
    np.testing.assert_allclose(participation(localized, N).xi, 1 / N)
    uniform = np.full((N, N), 1 / np.sqrt(N))
    assert participation(EigenSystem(np.zeros(N), uniform), N).xi[0] == pytest.approx(1.0)


def sine_mode_xi(N, q):
    """xi of the exact open-chain eigenvector sqrt(2/(N+1)) sin(q pi i/(N+1))."""
    i = np.arange(1, N + 1)
    v = np.sqrt(2 / (N + 1)) * np.sin(q * np.pi * i / (N + 1))
    return 1 / (N * np.sum(v**4))


def test_noiseless_participation_two_thirds():
    N = 100
    xi = participation(eigendecompose(build_channel(ChainSpec(N))), N).xi
    oracle = np.array([sine_mode_xi(N, q) for q in range(1, N + 1)])
    np.testing.assert_allclose(xi, 2 * (N + 1) / (3 * N), atol=1e-6)
    np.testing.assert_allclose(np.sort(xi), np.sort(oracle), atol=1e-10)
    assert 2 * (N + 1) / (3 * N) == pytest.approx(0.6733, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(2, 150), alpha=st.floats(0, 4), seed=st.integers(0, 2**32))
def test_participation_bounds(N, alpha, seed):
    e = eigendecompose(build_channel(ChainSpec(N, disorder=correlated_disorder(N, alpha, seed))))
    xi = participation(e, N).xi
    assert np.all(xi >= 1 / N - 1e-12) and np.all(xi <= 1 + 1e-12)


def test_participation_rejects_full_system():
    spec = ChainSpec(10, 1.0, 0.01, 0.01)
    with pytest.raises(ValueError):
        participation(eigendecompose(build_full(spec)), 10)


def test_central_band_mean():
    xi = np.arange(100.0)
    assert central_band_mean(xi) == pytest.approx(np.mean(np.arange(40, 60)))


def test_eigenmap_export(tmp_path):
    e = eigendecompose(build_channel(ChainSpec(4)))
    lines = write_eigenmap_csv(e, tmp_path / "map.csv").read_text().splitlines()
    assert lines[0] == "k,i,prob" and len(lines) == 17
    probs = np.array([float(l.split(",")[2]) for l in lines[1:]]).reshape(4, 4)
    np.testing.assert_allclose(probs.sum(axis=1), 1, atol=1e-12)
