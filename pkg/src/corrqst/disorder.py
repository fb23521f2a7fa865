"""Long-range correlated on-site fields with power-law spectrum S(k) ~ 1/k^alpha.

The sequence is the trace of a fractional Brownian motion built from K = N // 2
Fourier modes with amplitudes k^(-alpha/2) and i.i.d. uniform random phases,
then shifted and rescaled to zero mean and unit (population) variance.

Seed-to-phase mapping (part of the stable interface)::

    rng = numpy.random.Generator(numpy.random.PCG64(numpy.random.SeedSequence(seed)))
    phases = 2 * pi * rng.random(N // 2)
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSequence

TWO_PI = 2.0 * np.pi
RNG_NAME = "numpy.PCG64(SeedSequence(seed)).random(K) * 2pi"
VARIANCE_FLOOR = 1e-24


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DisorderParams:
    N: int
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and non-negative, got {self.alpha!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    @property
    def K(self) -> int:
        """Number of Fourier components."""
        return self.N // 2


@dataclass(frozen=True)
class PhaseVector:
    phases: np.ndarray

    def __post_init__(self):
        p = _frozen(self.phases)
        if p.ndim != 1:
            raise ValueError("phases must be one-dimensional")
        if np.any(p < 0) or np.any(p >= TWO_PI):
            raise ValueError("phases must lie in [0, 2pi)")
        object.__setattr__(self, "phases", p)

    def __len__(self):
        return len(self.phases)


@dataclass(frozen=True)
class DisorderSequence:
    values: np.ndarray
    params: DisorderParams | None = None
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __len__(self):
        return len(self.values)

    @classmethod
    def zeros(cls, N: int) -> "DisorderSequence":
        """Noiseless channel (all fields zero)."""
        return cls(np.zeros(N), None, False)

    def metadata(self) -> dict:
        p = self.params
        return {
            "N": len(self.values),
            "alpha": None if p is None else p.alpha,
            "seed": None if p is None else p.seed,
            "normalized": self.normalized,
            "rng": RNG_NAME,
        }


def sample_phases(params: DisorderParams) -> PhaseVector:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(params.seed))))
    phases = TWO_PI * rng.random(params.K)
    # rounding of 2pi * (1 - 2**-53) can land exactly on 2pi
    phases[phases >= TWO_PI] = 0.0
    return PhaseVector(phases)


def generate_raw(params: DisorderParams, phases: PhaseVector) -> DisorderSequence:
    """Sum of K cosine modes, omega_n = sum_k k^(-alpha/2) cos(2 pi n k / N + phi_k), n = 1..N."""
    N, K = params.N, params.K
    if len(phases) != K:
        raise ValueError(f"expected {K} phases for N={N}, got {len(phases)}")
    k = np.arange(1, K + 1)
    # sum_k c_k exp(2 pi i n k / N) is N * ifft(c)[n mod N]
    coeffs = np.zeros(N, dtype=complex)
    coeffs[1 : K + 1] = k ** (-params.alpha / 2.0) * np.exp(1j * phases.phases)
    series = N * np.fft.ifft(coeffs).real
    values = np.roll(series, -1)  # n = 1..N
    return DisorderSequence(values, params, False)


def normalize(seq: DisorderSequence) -> DisorderSequence:
    v = np.asarray(seq.values, dtype=float)
    mean = v.mean()
    var = np.mean((v - mean) ** 2)
    if not var > VARIANCE_FLOOR:
        raise DegenerateSequence(f"population variance {var:.3e} too small to normalize")
    out = (v - mean) / np.sqrt(var)
    # one correction pass pins mean/variance to rounding level
    out = out - out.mean()
    out = out / np.sqrt(np.mean(out**2))
    return DisorderSequence(out, seq.params, True)


def correlated_disorder(N: int, alpha: float, seed: int) -> DisorderSequence:
    """Normalized sequence for (N, alpha, seed); a pure function of its arguments."""
    params = DisorderParams(N, alpha, seed)
    return normalize(generate_raw(params, sample_phases(params)))


def periodogram_slope(sequences, kmin: int = 2, kmax: int | None = None) -> float:
    """Least-squares slope of log <|DFT_k|^2> against log k for an ensemble of sequences."""
    x = np.atleast_2d(np.asarray(sequences, dtype=float))
    N = x.shape[1]
    if kmax is None:
        kmax = N // 8
    power = np.mean(np.abs(np.fft.rfft(x, axis=1)) ** 2, axis=0)
    k = np.arange(kmin, kmax + 1)
    slope, _ = np.polyfit(np.log(k), np.log(power[k]), 1)
    return float(slope)


def write_csv(seq: DisorderSequence, path) -> Path:
    """Write `n,omega` rows plus a JSON metadata sidecar next to the CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "omega"])
        for i, v in enumerate(seq.values, start=1):
            w.writerow([i, repr(float(v))])
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(seq.metadata(), indent=2) + "\n")
    return path


def read_csv(path) -> DisorderSequence:
    path = Path(path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    values = [float(r["omega"]) for r in rows]
    params, normalized = None, False
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        normalized = bool(meta.get("normalized", False))
        if meta.get("alpha") is not None:
            params = DisorderParams(int(meta["N"]), float(meta["alpha"]), int(meta["seed"]))
    return DisorderSequence(values, params, normalized)
