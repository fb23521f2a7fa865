"""Exception types raised across the pipeline."""


class CorrQSTError(Exception):
    """Base class for all package errors."""


class DegenerateSequence(CorrQSTError, ValueError):
    """A sequence with (numerically) zero variance cannot be normalized."""


class ConvergenceFailure(CorrQSTError, RuntimeError):
    """The tridiagonal eigensolver did not converge."""


class ResonantLevel(CorrQSTError, ValueError):
    """Sender or receiver frequency sits on a channel eigenvalue."""


class NullDynamics(CorrQSTError, ValueError):
    """Effective sender-receiver coupling vanishes; no transfer takes place."""


class WeakCouplingWarning(UserWarning):
    """Outer coupling is not small compared with the nearest channel gap."""
