"""Exception hierarchy shared by all modules.

Every numerical failure derives from :class:`NumericalError` so the CLI can map
it onto a single exit code; configuration problems derive from
:class:`ConfigError`.
"""


class GpBoseError(Exception):
    """Base class for all package errors."""


class ConfigError(GpBoseError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(ConfigError):
    """Aggregates every violation found in a config, not just the first."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{k}: {msg}" for k, msg in self.violations))


class NumericalError(GpBoseError):
    pass


class InvalidPotential(NumericalError, ValueError):
    pass


class UnsupportedKind(NumericalError, ValueError):
    pass


class NonConvergence(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class EigensolveFailure(NumericalError):
    pass


class GeometryError(NumericalError, ValueError):
    pass


class NormalizationError(NumericalError, ValueError):
    pass


class BracketFailure(NumericalError):
    pass


class GridMismatch(NumericalError, ValueError):
    pass


class DivergentEnergy(NumericalError):
    pass


class ConfinementError(NumericalError, ValueError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class ZeroMomentum(NumericalError, ValueError):
    pass


class NoConvergence(NonConvergence):
    """Raised by accelerated lattice sums whose spread grows."""


class ThresholdTooLarge(NumericalError):
    pass


class BudgetExceeded(NumericalError):
    pass


class UnstableForm(NumericalError, ValueError):
    pass


class IdentityViolation(NumericalError):
    def __init__(self, identity, row, col, deviation):
        self.identity = identity
        self.entry = (row, col)
        self.deviation = deviation
        super().__init__(
            f"{identity}: entry ({row}, {col}) deviates by {deviation:.3e}"
        )


class TruncationWarning(UserWarning):
    pass
