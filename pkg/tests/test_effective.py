import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from corrqst import (
    ChainSpec,
    DisorderSequence,
    NullDynamics,
    ResonantLevel,
    WeakCouplingWarning,
    build_channel,
    build_full,
    correlated_disorder,
    detuning_ratio,
    eigendecompose,
    reduce,
    two_level_max,
)
from corrqst.effective import EffectiveTwoSite, two_level_amplitude


def reduce_spec(spec, warn=False):
    return reduce(eigendecompose(build_channel(spec)), spec, warn=warn)


def test_two_site_hand_evaluation():
    # E = -1 with (1,1)/sqrt2 and E = +1 with (1,-1)/sqrt2:
    # h = -g^2 (1/2 / -1 + 1/2 / 1) = 0,  J' = g^2 (1/2 / -1 - 1/2 / 1) = -g^2
    g = 0.01
    eff = reduce_spec(ChainSpec(2, 1.0, g, g))
    assert eff.h_s == pytest.approx(0, abs=1e-18)
    assert eff.h_r == pytest.approx(0, abs=1e-18)
    assert eff.j_eff == pytest.approx(-g * g, rel=1e-12)
    assert eff.delta == eff.h_s - eff.h_r


@pytest.mark.parametrize("N", [5, 10, 50])
def test_mirror_symmetric_channel_has_no_detuning(N):
    half = correlated_disorder(N, 1.0, 3).values[: (N + 1) // 2]
    sym = np.concatenate([half, half[: N // 2][::-1]])
    spec = ChainSpec(N, 1.0, 0.001, 0.001, disorder=DisorderSequence(sym))
    eff = reduce_spec(spec)
    assert abs(eff.delta) <= 1e-12 * abs(eff.j_eff)
    assert detuning_ratio(eff) <= 1e-9


def test_resonant_level_rejected():
    ch = eigendecompose(build_channel(ChainSpec(5)))
    spec = ChainSpec(5, 1.0, 0.001, 0.001, omega_s=float(ch.energies[1]))
    with pytest.raises(ResonantLevel):
        reduce(ch, spec)


def test_weak_coupling_warning():
    spec = ChainSpec(50, 1.0, 0.2, 0.2)
    with pytest.warns(WeakCouplingWarning):
        reduce_spec(spec, warn=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        reduce_spec(spec)
        reduce_spec(ChainSpec(50, 1.0, 0.001, 0.001), warn=True)


def test_two_level_max():
    g = 0.001
    f, t = two_level_max(EffectiveTwoSite(0.0, 0.0, g * g, 1, 1))
    assert f == pytest.approx(1.0)
    assert t == pytest.approx(np.pi / (2 * g * g))
    f, _ = two_level_max(EffectiveTwoSite(2e-6, 0.0, 1e-6, 1, 1))
    assert f == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(NullDynamics):
        two_level_max(EffectiveTwoSite(1e-3, 0.0, 0.0, 1, 1))


def test_two_level_max_matches_matrix_exponential():
    from scipy.linalg import expm

    eff = EffectiveTwoSite(3e-6, -1e-6, 2e-6, 1, 1)
    f, t = two_level_max(eff)
    amp = abs(expm(-1j * eff.matrix() * t)[1, 0])
    assert amp == pytest.approx(f, abs=1e-12)
    ts = np.linspace(0, 3 * t, 301)
    direct = [abs(expm(-1j * eff.matrix() * x)[1, 0]) for x in ts]
    np.testing.assert_allclose(two_level_amplitude(eff, ts), direct, atol=1e-10)
    assert max(direct) <= f + 1e-12


def test_detuning_ratio():
    assert detuning_ratio(EffectiveTwoSite(0.002, 0.0, 0.001, 1, 1)) == pytest.approx(2.0)
    with pytest.raises(NullDynamics):
        detuning_ratio(EffectiveTwoSite(0.002, 0.0, 0.0, 1, 1))


@settings(max_examples=100, deadline=None)
@given(N=st.integers(2, 8), alpha=st.floats(0, 4), seed=st.integers(0, 2**32),
       g=st.floats(1e-5, 1e-3), w_s=st.floats(-0.5, 0.5), w_r=st.floats(-0.5, 0.5))
def test_full_matrix_oracle(N, alpha, seed, g, w_s, w_r):
    spec = ChainSpec(N, 1.0, g, g, w_s, w_r, correlated_disorder(N, alpha, seed))
    ch = eigendecompose(build_channel(spec))
    # the perturbative series needs omega_v well separated from the channel band
    assume(np.abs(ch.energies - w_s).min() > 0.1 and np.abs(ch.energies - w_r).min() > 0.1)
    eff = reduce(ch, spec, warn=False)
    two = np.linalg.eigvalsh(eff.matrix())
    full = eigendecompose(build_full(spec))
    weight = full.vectors[0] ** 2 + full.vectors[-1] ** 2
    picked = np.sort(full.energies[np.argsort(weight)[-2:]])
    assert np.abs(picked - two).max() <= 10 * g**3


def test_exchange_symmetry():
    d = correlated_disorder(30, 2.0, 11)
    spec = ChainSpec(30, 1.0, 0.002, 0.001, 0.05, -0.03, d)
    mirrored = ChainSpec(30, 1.0, 0.001, 0.002, -0.03, 0.05, DisorderSequence(d.values[::-1]))
    a, b = reduce_spec(spec), reduce_spec(mirrored)
    assert b.h_s == pytest.approx(a.h_r, rel=1e-10, abs=1e-18)
    assert b.h_r == pytest.approx(a.h_s, rel=1e-10, abs=1e-18)
    assert b.j_eff == pytest.approx(a.j_eff, rel=1e-10)


def test_coupling_scaling():
    d = correlated_disorder(40, 2.5, 5)
    a = reduce_spec(ChainSpec(40, 1.0, 0.001, 0.001, 0.02, 0.02, d))
    b = reduce_spec(ChainSpec(40, 1.0, 0.003, 0.003, 0.02, 0.02, d))
    assert b.h_s - 0.02 == pytest.approx(9 * (a.h_s - 0.02), rel=1e-10)
    assert b.j_eff == pytest.approx(9 * a.j_eff, rel=1e-10)
    assert detuning_ratio(b) == pytest.approx(detuning_ratio(a), rel=1e-10)


def test_detuning_ratio_trend():
    def mean_ratio(alpha):
        vals = [detuning_ratio(reduce_spec(ChainSpec(50, 1.0, 0.001, 0.001,
                                                     disorder=correlated_disorder(50, alpha, s)),
                                         warn=False))
                for s in range(500)]
        return np.mean(vals)

    assert mean_ratio(0.0) >= 10 * mean_ratio(3.0)
