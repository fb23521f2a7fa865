"""Tridiagonal eigendecomposition and participation ratios of channel eigenstates."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceFailure
from .hamiltonian import TriMatrix


@dataclass(frozen=True)
class EigenSystem:
    """Ascending energies and orthonormal eigenvectors stored as columns.

    ``vectors[i, k]`` is the amplitude <i|E_k>.
    """

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.energies)

    def residuals(self, m: TriMatrix) -> np.ndarray:
        """||H v_k - E_k v_k||_2 for every k."""
        r = m.matvec(self.vectors) - self.vectors * self.energies
        return np.linalg.norm(r, axis=0)

    def orthonormality_error(self) -> float:
        gram = self.vectors.T @ self.vectors
        return float(np.abs(gram - np.eye(self.size)).max())


@dataclass(frozen=True)
class ParticipationProfile:
    xi: np.ndarray

    @property
    def N(self) -> int:
        return len(self.xi)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # argmax returns the first index on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose(m: TriMatrix) -> EigenSystem:
    """Full eigendecomposition of a real symmetric tridiagonal matrix.

    Uses LAPACK's implicit-shift QL/QR driver (``?stev``).  Each eigenvector is
    signed so that its largest-magnitude entry is positive.
    """
    if m.size < 1:
        raise ValueError("empty matrix")
    if m.size == 1:
        return EigenSystem(m.diag.copy(), np.ones((1, 1)))
    try:
        w, v = eigh_tridiagonal(m.diag, m.offdiag, lapack_driver="stev")
    except LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise ConvergenceFailure("eigensolver returned non-finite values")
    order = np.argsort(w, kind="stable")
    w, v = w[order], _fix_signs(v[:, order])
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenSystem(w, v)


def participation(eigs: EigenSystem, N: int) -> ParticipationProfile:
    """Normalized participation ratio xi_k = 1 / (N sum_i |<i|E_k>|^4).

    Only defined for the bare N-site channel; passing the (N+2)-site
    decomposition of the full chain is rejected.
    """
    if eigs.vectors.shape != (N, N):
        raise ValueError(
            f"participation needs the {N}-site channel decomposition, got size {eigs.size}"
        )
    p4 = np.sum(eigs.vectors**4, axis=0)
    return ParticipationProfile(1.0 / (N * p4))


def central_band_mean(xi: np.ndarray, fraction: float = 0.2) -> float:
    """Mean of xi over the central `fraction` of energy-ordered eigenstates."""
    xi = np.asarray(xi)
    n = len(xi)
    width = max(1, int(round(fraction * n)))
    lo = (n - width) // 2
    return float(xi[lo : lo + width].mean())


def write_eigenmap_csv(eigs: EigenSystem, path) -> Path:
    """Eigenstate density map as `k,i,prob` with prob = |<i|E_k>|^2."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    prob = eigs.vectors**2
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "i", "prob"])
        for k in range(eigs.size):
            for i in range(eigs.size):
                w.writerow([k, i, repr(float(prob[i, k]))])
    return path
