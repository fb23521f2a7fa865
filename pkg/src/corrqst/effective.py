"""Second-order reduction of the chain to an effective sender/receiver two-level system.

    H_sr = [[h_s, -J'], [-J', h_r]]

    h_v = w_v - g_v^2 sum_k a_vk^2 / (E_k - w_v)
    J'  = (g_s g_r / 2) sum_k a_sk a_rk [1/(E_k - w_s) + 1/(E_k - w_r)]

with a_sk = <1|E_k> and a_rk = <N|E_k> taken from the bare channel eigenstates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NullDynamics, ResonantLevel, WeakCouplingWarning
from .hamiltonian import ChainSpec
from .spectral import EigenSystem

GAP_TOL = 1e-8


@dataclass(frozen=True)
class EffectiveTwoSite:
    h_s: float
    h_r: float
    j_eff: float
    min_gap_s: float
    min_gap_r: float

    @property
    def delta(self) -> float:
        return self.h_s - self.h_r

    def matrix(self) -> np.ndarray:
        return np.array([[self.h_s, -self.j_eff], [-self.j_eff, self.h_r]])


def reduce(channel_eigs: EigenSystem, spec: ChainSpec, gap_tol: float = GAP_TOL,
           warn: bool = True) -> EffectiveTwoSite:
    N = spec.N
    if channel_eigs.size != N:
        raise ValueError(f"need the {N}-site channel decomposition, got size {channel_eigs.size}")
    E = channel_eigs.energies
    a_s = channel_eigs.vectors[0]
    a_r = channel_eigs.vectors[N - 1]
    tol = gap_tol * spec.J

    ds = E - spec.omega_s
    dr = E - spec.omega_r
    gap_s, gap_r = float(np.abs(ds).min()), float(np.abs(dr).min())
    for name, gap, w in (("s", gap_s, spec.omega_s), ("r", gap_r, spec.omega_r)):
        if gap <= tol:
            raise ResonantLevel(f"omega_{name}={w} within {gap:.3e} of a channel eigenvalue")
    if warn:
        for name, gap, g in (("s", gap_s, spec.g_s), ("r", gap_r, spec.g_r)):
            if gap < 10 * g:
                warnings.warn(
                    f"g_{name}={g} is not small against the nearest channel gap {gap:.3e}; "
                    "effective two-level picture unreliable",
                    WeakCouplingWarning,
                    stacklevel=2,
                )

    h_s = spec.omega_s - spec.g_s**2 * np.sum(a_s**2 / ds)
    h_r = spec.omega_r - spec.g_r**2 * np.sum(a_r**2 / dr)
    prod = a_s * a_r
    j_eff = 0.5 * spec.g_s * spec.g_r * (np.sum(prod / ds) + np.sum(prod / dr))
    return EffectiveTwoSite(float(h_s), float(h_r), float(j_eff), gap_s, gap_r)


def two_level_max(eff: EffectiveTwoSite) -> tuple[float, float]:
    """Peak transfer amplitude and the first time it is reached.

    Returns (2|J'| / Omega, pi / Omega) with Omega = sqrt(4 J'^2 + Delta^2).
    """
    if eff.j_eff == 0:
        raise NullDynamics("J' = 0: sender and receiver are effectively decoupled")
    omega = np.hypot(2.0 * eff.j_eff, eff.delta)
    return float(2.0 * abs(eff.j_eff) / omega), float(np.pi / omega)


def two_level_amplitude(eff: EffectiveTwoSite, t) -> np.ndarray:
    """|<r| exp(-i H_sr t) |s>| of the effective Hamiltonian."""
    omega = np.hypot(2.0 * eff.j_eff, eff.delta)
    if omega == 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return 2.0 * abs(eff.j_eff) / omega * np.abs(np.sin(0.5 * omega * np.asarray(t, dtype=float)))


def detuning_ratio(eff: EffectiveTwoSite) -> float:
    """|Delta / J'|."""
    if eff.j_eff == 0:
        raise NullDynamics("J' = 0: detuning ratio undefined")
    return abs(eff.delta / eff.j_eff)
