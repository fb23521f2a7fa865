"""Quantum-state transfer through XX spin channels with long-range correlated disorder."""

__version__ = "0.1.0"

from .disorder import (  # noqa: E402
    DisorderParams,
    DisorderSequence,
    PhaseVector,
    correlated_disorder,
    generate_raw,
    normalize,
    sample_phases,
)
from .dynamics import amplitude, avg_fidelity, find_f_max, occupancy_trace  # noqa: E402
from .effective import EffectiveTwoSite, detuning_ratio, reduce, two_level_max  # noqa: E402
from .errors import (  # noqa: E402
    ConvergenceFailure,
    DegenerateSequence,
    NullDynamics,
    ResonantLevel,
    WeakCouplingWarning,
)
from .hamiltonian import ChainSpec, TriMatrix, build_channel, build_full  # noqa: E402
from .spectral import EigenSystem, eigendecompose, participation  # noqa: E402

__all__ = [
    "ChainSpec",
    "ConvergenceFailure",
    "DegenerateSequence",
    "DisorderParams",
    "DisorderSequence",
    "EffectiveTwoSite",
    "EigenSystem",
    "NullDynamics",
    "PhaseVector",
    "ResonantLevel",
    "TriMatrix",
    "WeakCouplingWarning",
    "amplitude",
    "avg_fidelity",
    "build_channel",
    "build_full",
    "correlated_disorder",
    "detuning_ratio",
    "eigendecompose",
    "find_f_max",
    "generate_raw",
    "normalize",
    "occupancy_trace",
    "participation",
    "reduce",
    "sample_phases",
    "two_level_max",
]
