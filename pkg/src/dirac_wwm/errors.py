"""
Exception taxonomy for dirac_wwm.

Every error raised on purpose by the library derives from DiracWWMError so
callers (the CLI in particular) can map families of failures onto exit codes.
"""

from typing import Optional


class DiracWWMError(Exception):
    """Base class for all library errors"""
    pass


class ExpressionParseError(DiracWWMError):
    """Raised when an expression string does not conform to the symbol grammar"""

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(self._render())

    def _render(self) -> str:
        if self.position is None:
            return self.message
        caret = " " * self.position + "^"
        return f"{self.message} at position {self.position}\n  {self.text}\n  {caret}"


class SpaceMismatchError(DiracWWMError):
    """Operands live in different phase spaces"""
    pass


class CoordinateIndexError(DiracWWMError):
    """Coordinate index outside 1..2n"""
    pass


class DimensionMismatchError(DiracWWMError):
    """A point or matrix has the wrong shape for the phase space"""
    pass


class SubstitutionDegreeError(DiracWWMError):
    """substitute_linear received an image of degree > 1"""
    pass


class ConstraintError(DiracWWMError):
    """Base class for constraint-set validation failures"""
    pass


class BadShapeError(ConstraintError):
    """alpha has an odd or zero row count, or 2m >= 2n, or wrong column count"""
    pass


class RankDeficientError(ConstraintError):
    """rank(alpha) < 2m"""
    pass


class SecondClassViolationError(ConstraintError):
    """det C = 0: the constraints are not second class"""
    pass


class SymplecticViolationError(ConstraintError):
    """A transform S fails S J S^T = J"""
    pass


class InhomogeneousConstraintError(ConstraintError):
    """A constraint expression carries a constant term or is not linear"""
    pass


class DarbouxChartError(DiracWWMError):
    """Symplectic Gram-Schmidt could not complete (internal defect)"""
    pass


class HamiltonianError(DiracWWMError):
    """The canonical hamiltonian is not real or depends on hbar"""
    pass


class InitialConditionOffMError(DiracWWMError):
    """The initial point does not satisfy the constraints"""
    pass


class DegreeUnsupportedError(DiracWWMError):
    """Quantum evolution requested for a hamiltonian of degree > 2"""
    pass


class ProblemFileError(DiracWWMError):
    """Problem file could not be read or validated"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        location = ""
        if path:
            location += f"{path}"
        if line is not None:
            location += f":{line}"
        super().__init__(f"{location}: {message}" if location else message)


class ConfigurationError(DiracWWMError):
    """Invalid value in the environment / .env configuration"""
    pass
