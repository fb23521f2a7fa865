"""Single-excitation Hamiltonians of the XX channel and of the full s-channel-r chain.

Basis order for the full chain is (s, 1, ..., N, r): index 0 is the sender,
index N + 1 the receiver.  Matrix elements are <i|H|i> = omega_i and
<i|H|i+1> = -J (or -g_s, -g_r on the outer bonds).  The constant identity
shift sum(omega_i)/2 is dropped since it only contributes a global phase.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .disorder import DisorderSequence


@dataclass(frozen=True)
class ChainSpec:
    N: int
    J: float = 1.0
    g_s: float = 0.0
    g_r: float = 0.0
    omega_s: float = 0.0
    omega_r: float = 0.0
    disorder: DisorderSequence | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.J > 0:
            raise ValueError("J must be positive")
        if self.g_s < 0 or self.g_r < 0:
            raise ValueError("outer couplings must be non-negative")
        if self.disorder is None:
            object.__setattr__(self, "disorder", DisorderSequence.zeros(self.N))
        elif len(self.disorder) != self.N:
            raise ValueError(f"disorder has {len(self.disorder)} sites, expected N={self.N}")

    @property
    def omega(self) -> np.ndarray:
        return self.disorder.values

    @property
    def g(self) -> float:
        """Geometric-mean outer coupling sqrt(g_s g_r)."""
        return float(np.sqrt(self.g_s * self.g_r))

    @property
    def tau(self) -> float:
        """Noiseless transfer time pi / (2 g^2) in units of 1/J."""
        return np.pi / (2.0 * self.g**2)

    @property
    def sender(self) -> int:
        return 0

    @property
    def receiver(self) -> int:
        return self.N + 1


@dataclass(frozen=True)
class TriMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        e = np.array(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or len(e) != max(len(d) - 1, 0):
            raise ValueError("offdiag must have exactly len(diag) - 1 entries")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def norm1(self) -> float:
        return float(np.abs(self.dense()).sum(axis=0).max())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v for a vector or a matrix of column vectors, without forming H."""
        v = np.asarray(v)
        out = self.diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        e = self.offdiag.reshape((-1,) + (1,) * (v.ndim - 1))
        out[:-1] += e * v[1:]
        out[1:] += e * v[:-1]
        return out


def build_channel(spec: ChainSpec) -> TriMatrix:
    return TriMatrix(spec.omega.copy(), np.full(spec.N - 1, -spec.J))


def build_full(spec: ChainSpec) -> TriMatrix:
    diag = np.concatenate(([spec.omega_s], spec.omega, [spec.omega_r]))
    off = np.concatenate(([-spec.g_s], np.full(spec.N - 1, -spec.J), [-spec.g_r]))
    return TriMatrix(diag, off)


def write_matrix_csv(m: TriMatrix, path) -> Path:
    """Debug dump of the nonzero entries as `row,col,value`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "value"])
        for i in range(m.size):
            if i > 0 and m.offdiag[i - 1] != 0:
                w.writerow([i, i - 1, repr(float(m.offdiag[i - 1]))])
            if m.diag[i] != 0:
                w.writerow([i, i, repr(float(m.diag[i]))])
            if i < m.size - 1 and m.offdiag[i] != 0:
                w.writerow([i, i + 1, repr(float(m.offdiag[i]))])
    return path
