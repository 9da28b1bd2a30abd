"""
Problem File - JSON carrier for a constrained system

Schema:
    {
        "name": "S1",                          optional
        "description": "...",                  optional
        "n": 2,
        "constraints": [["0", "0", "1", "0"],  rows of alpha as rational strings
                        "p2"],                 or linear constraint expressions
        "hamiltonian": "(p1^2 + q1^2)/2"       optional expression
    }

Rational entries are strings "p/q" or JSON integers; JSON floats are refused.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from sympy import ImmutableMatrix, Rational

from .constraint_structure import (
    ConstraintReport,
    DiracStructure,
    as_rational,
    build_dirac_structure,
    check_constraints,
    parse_constraint,
)
from .dynamics import HamiltonianSystem
from .errors import ConstraintError, ExpressionParseError, ProblemFileError
from .expression_parser import parse_symbol
from .symbol_algebra import PhaseSpace, Symbol

logger = logging.getLogger(__name__)

KNOWN_KEYS = {'name', 'description', 'n', 'constraints', 'hamiltonian'}


class _FloatLiteral(str):
    """Marks a JSON number written with a fraction or exponent."""


def _line_of(text: str, needle: str) -> Optional[int]:
    position = text.find(needle)
    if position < 0:
        return None
    return text.count('\n', 0, position) + 1


@dataclass(frozen=True)
class ProblemFile:
    """A validated problem: phase space, alpha and an optional hamiltonian."""
    n: int
    alpha: ImmutableMatrix
    hamiltonian: Optional[str] = None
    name: Optional[str] = None
    description: Optional[str] = None
    path: Optional[str] = None

    @property
    def space(self) -> PhaseSpace:
        return PhaseSpace(self.n)

    def check(self) -> ConstraintReport:
        return check_constraints(self.space, self.alpha)

    def structure(self) -> DiracStructure:
        """Raises the ConstraintError subclasses of build_dirac_structure."""
        return build_dirac_structure(self.space, self.alpha)

    def hamiltonian_symbol(self) -> Symbol:
        if self.hamiltonian is None:
            raise ProblemFileError("problem defines no hamiltonian", path=self.path)
        return parse_symbol(self.hamiltonian, self.space)

    def system(self) -> HamiltonianSystem:
        return HamiltonianSystem(self.structure(), self.hamiltonian_symbol())


def _parse_row(entry, text: str, space: PhaseSpace, path: str) -> List[Rational]:
    if isinstance(entry, str) and not isinstance(entry, _FloatLiteral):
        try:
            return parse_constraint(entry, space)
        except (ExpressionParseError, ConstraintError) as e:
            raise ProblemFileError(f"constraint {entry!r}: {e}", _line_of(text, entry), path) from e
    if not isinstance(entry, list):
        raise ProblemFileError(f"constraint must be a row or an expression, got {entry!r}", path=path)
    row = []
    for value in entry:
        if isinstance(value, _FloatLiteral):
            raise ProblemFileError(f"float {value} refused; write rationals as strings like \"1/2\"",
                                   _line_of(text, value), path)
        try:
            row.append(as_rational(value))
        except (TypeError, ValueError) as e:
            needle = value if isinstance(value, str) else json.dumps(value)
            raise ProblemFileError(str(e), _line_of(text, needle), path) from e
    return row


def parse_problem(text: str, path: str = "<string>") -> ProblemFile:
    """
    Parse and validate a problem document.

    Raises:
        ProblemFileError: malformed JSON, wrong types, bad rationals or expressions
    """
    try:
        data = json.loads(text, parse_float=_FloatLiteral)
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"invalid JSON: {e.msg} (column {e.colno})", e.lineno, path) from e

    if not isinstance(data, dict):
        raise ProblemFileError("top level must be a JSON object", 1, path)
    unknown = set(data) - KNOWN_KEYS
    if unknown:
        logger.warning(f"{path}: ignoring unknown keys {sorted(unknown)}")

    n = data.get('n')
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ProblemFileError(f"'n' must be a positive integer, got {n!r}", _line_of(text, '"n"'), path)
    space = PhaseSpace(n)

    constraints = data.get('constraints')
    if not isinstance(constraints, list) or not constraints:
        raise ProblemFileError("'constraints' must be a non-empty list", _line_of(text, '"constraints"'), path)
    rows = [_parse_row(entry, text, space, path) for entry in constraints]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ProblemFileError(f"constraint rows have different lengths {sorted(widths)}",
                               _line_of(text, '"constraints"'), path)
    alpha = ImmutableMatrix(len(rows), widths.pop(), [x for r in rows for x in r])

    hamiltonian = data.get('hamiltonian')
    if hamiltonian is not None:
        if not isinstance(hamiltonian, str) or isinstance(hamiltonian, _FloatLiteral):
            raise ProblemFileError("'hamiltonian' must be an expression string",
                                   _line_of(text, '"hamiltonian"'), path)
        try:
            parse_symbol(hamiltonian, space)
        except ExpressionParseError as e:
            raise ProblemFileError(f"hamiltonian: {e}", _line_of(text, '"hamiltonian"'), path) from e

    for key in ('name', 'description'):
        if data.get(key) is not None and (not isinstance(data[key], str) or isinstance(data[key], _FloatLiteral)):
            raise ProblemFileError(f"'{key}' must be a string", _line_of(text, f'"{key}"'), path)

    return ProblemFile(
        n=n,
        alpha=alpha,
        hamiltonian=hamiltonian,
        name=data.get('name'),
        description=data.get('description'),
        path=path,
    )


def load_problem(path: Union[str, Path]) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ProblemFileError(f"cannot read problem file: {e.strerror}", path=str(path)) from e
    logger.debug(f"Loading problem file {path}")
    return parse_problem(text, str(path))
