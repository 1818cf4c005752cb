"""Exception and warning hierarchy.

Every error raised by the library derives from :class:`QImpedanceError`.
Input problems are also ``ValueError`` subclasses so generic callers can
catch them without importing this module.
"""

from __future__ import annotations


class QImpedanceError(Exception):
    """Base class for all library errors."""


class InvalidInputError(QImpedanceError, ValueError):
    """A value or structure violates a documented precondition."""


class ParseError(InvalidInputError):
    """A document could not be parsed.

    Parameters
    ----------
    message : str
        Human-readable description.
    line, column : int, optional
        1-based position in the source text, when known.
    path : str, optional
        JSON-pointer-like location of the offending value.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, path: str | None = None):
        self.line = line
        self.column = column
        self.path = path
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if path:
            where.append(f"at {path}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class PhysicsGuardError(QImpedanceError):
    """A physical validity guard failed (dispersive regime, resonance, ...)."""


class ResonanceProximityError(PhysicsGuardError):
    """Evaluation frequency lies on (or too close to) a network resonance."""

    def __init__(self, message: str, nearest: float | None = None):
        self.nearest = nearest
        super().__init__(message)


class DispersiveViolationError(PhysicsGuardError):
    """A qubit is too close to a mode for the dispersive formulas to apply."""

    def __init__(self, message: str, qubit: str | int | None = None,
                 mode: int | None = None):
        self.qubit = qubit
        self.mode = mode
        super().__init__(message)


class SingularDenominatorError(DispersiveViolationError):
    """A second-order denominator omega_i^2 - omega_Rk^2 vanishes."""


class UnphysicalRenormalizationError(PhysicsGuardError):
    """The junction inductance renormalization has no physical solution."""


class ThermalDivergenceError(PhysicsGuardError):
    """The thermal occupation factor diverges (zero frequency at T > 0)."""


class UnsupportedInductiveStageError(PhysicsGuardError):
    """The impedance has a purely inductive A_inf stage, which is not synthesized."""


class InvalidResidueError(PhysicsGuardError):
    """A residue matrix is not symmetric PSD rank one, or A0 is not SPD."""


class UnsupportedCapacitiveCouplingError(PhysicsGuardError):
    """A0 is not diagonal: ports share a direct capacitive coupling."""


class IllDefinedOpenCircuitError(PhysicsGuardError):
    """An ABCD matrix has C = 0, so its open-circuit Z matrix does not exist."""


class ConvergenceError(QImpedanceError):
    """An iterative numerical procedure did not converge."""


class ValidationFailure(QImpedanceError):
    """A validation run exceeded its thresholds."""


class QImpedanceWarning(UserWarning):
    """Base class for library warnings."""


class DispersiveWarning(QImpedanceWarning):
    """Coupling or mixing is large enough that dispersive formulas degrade."""


class MergedPoleWarning(QImpedanceWarning):
    """Nearly degenerate poles were merged into one residue."""


class ApproximationWarning(QImpedanceWarning):
    """A simplifying approximation is outside its stated validity range."""


class InductiveStageWarning(QImpedanceWarning):
    """The impedance has a nonzero A_inf (inductor-only path across a port)."""
