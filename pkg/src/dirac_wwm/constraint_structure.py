"""
Constraint Structure - Dirac structure of linear second-class constraints

Given homogeneous linear constraints Phi_mu = sum_i alpha_{mu i} z_i, builds
the exact matrices of the Dirac formalism:

    C      = alpha J alpha^T                  ({Phi_mu, Phi_nu})
    C_inv  = C^{-1}
    JD     = J - J alpha^T C^{-1} alpha J     ({z_i, z_j}_D)

plus a canonical solution of alpha z = 0 (pivot coordinates written in terms
of the free ones) used to pick class representatives.

All matrices are sympy ImmutableMatrix over the rationals.

Usage:
    from dirac_wwm.constraint_structure import build_dirac_structure
    ds = build_dirac_structure(PhaseSpace(2), [[0, 0, 1, 0], [0, 0, 0, 1]])
    print(ds.JD)
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import ImmutableMatrix, Matrix, Rational, eye, zeros

from .errors import (
    BadShapeError,
    DimensionMismatchError,
    InhomogeneousConstraintError,
    RankDeficientError,
    SecondClassViolationError,
    SymplecticViolationError,
)
from .expression_parser import parse_symbol
from .symbol_algebra import PhaseSpace, Scalar, Symbol, to_scalar

logger = logging.getLogger(__name__)

RATIONAL_PATTERN = re.compile(r'^[+-]?\d+(/\d+)?$')


# ============================================================================
# RATIONAL MATRICES
# ============================================================================

def as_rational(value) -> Rational:
    """
    Exact rational from int, Fraction, sympy Rational or a "p/q" string.

    Raises:
        ValueError: malformed string or zero denominator
        TypeError: floats and other inexact input
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Rational(value)
    if isinstance(value, Fraction):
        return Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not RATIONAL_PATTERN.match(text):
            raise ValueError(f"malformed rational {value!r}")
        numerator, _, denominator = text.partition('/')
        denominator = int(denominator) if denominator else 1
        if denominator == 0:
            raise ValueError(f"zero denominator in {value!r}")
        return Rational(int(numerator), denominator)
    raise TypeError(f"inexact or unsupported value {value!r} ({type(value).__name__})")


def as_rational_matrix(rows) -> ImmutableMatrix:
    """Convert a nested sequence (or a sympy matrix) into an exact ImmutableMatrix."""
    if isinstance(rows, (Matrix, ImmutableMatrix)):
        return ImmutableMatrix(rows.shape[0], rows.shape[1], [as_rational(x) for x in rows])
    rows = [list(r) for r in rows]
    width = len(rows[0]) if rows else 0
    if any(len(r) != width for r in rows):
        raise BadShapeError("matrix rows have different lengths")
    return ImmutableMatrix(len(rows), width, [as_rational(x) for r in rows for x in r])


def matrix_to_strings(matrix) -> List[List[str]]:
    """Row-major array of reduced rational strings."""
    return [[str(matrix[i, j]) for j in range(matrix.cols)] for i in range(matrix.rows)]


@lru_cache(maxsize=None)
def _symplectic_matrix(n: int) -> ImmutableMatrix:
    J = zeros(2 * n, 2 * n)
    for k in range(n):
        J[2 * k, 2 * k + 1] = 1
        J[2 * k + 1, 2 * k] = -1
    return ImmutableMatrix(J)


def symplectic_matrix(space: PhaseSpace) -> ImmutableMatrix:
    """Block-diagonal J with {q_k, p_k} = 1."""
    return _symplectic_matrix(space.n)


@lru_cache(maxsize=256)
def kernel_entries(kernel: ImmutableMatrix) -> Tuple[Tuple[int, int, Scalar], ...]:
    """Nonzero entries (i, j, value) of a constant bracket kernel, 0-based."""
    return tuple(
        (i, j, to_scalar(kernel[i, j]))
        for i in range(kernel.rows)
        for j in range(kernel.cols)
        if kernel[i, j] != 0
    )


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class ConstraintSet:
    """Linear constraints Phi_mu = alpha_mu . z."""
    space: PhaseSpace
    alpha: ImmutableMatrix

    @property
    def count(self) -> int:
        return self.alpha.rows

    def symbols(self) -> List[Symbol]:
        return [Symbol.from_linear_form(self.space, list(self.alpha.row(mu))) for mu in range(self.count)]


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of the rank and second-class checks, produced without raising."""
    rows: int
    cols: int
    expected_rank: int
    rank: int
    det_C: Optional[Rational]
    shape_ok: bool
    rank_ok: bool
    second_class_ok: bool

    @property
    def passed(self) -> bool:
        return self.shape_ok and self.rank_ok and self.second_class_ok

    @property
    def failure(self) -> Optional[str]:
        if not self.shape_ok:
            return "BadShape"
        if not self.rank_ok:
            return "RankDeficient"
        if not self.second_class_ok:
            return "SecondClassViolation"
        return None


@dataclass(frozen=True)
class DiracStructure:
    """
    Exact Dirac data of a second-class linear constraint set.

    pivot_columns and dependent_solution use 1-based coordinate indices;
    dependent_solution[p] = {f: c} means z_p = sum_f c z_f on M.
    """
    constraints: ConstraintSet
    C: ImmutableMatrix
    C_inv: ImmutableMatrix
    JD: ImmutableMatrix
    pivot_columns: Tuple[int, ...]
    dependent_solution: Dict[int, Dict[int, Rational]]

    @property
    def space(self) -> PhaseSpace:
        return self.constraints.space

    @property
    def alpha(self) -> ImmutableMatrix:
        return self.constraints.alpha

    @property
    def free_columns(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, self.space.dim + 1) if i not in self.pivot_columns)

    @cached_property
    def kernel_entries(self) -> Tuple[Tuple[int, int, Scalar], ...]:
        return kernel_entries(self.JD)

    @cached_property
    def jd_rank(self) -> int:
        return self.JD.rank()

    @cached_property
    def null_space_basis(self) -> ImmutableMatrix:
        """Columns spanning ker alpha (the tangent directions of M)."""
        return ImmutableMatrix(Matrix.hstack(*self.alpha.nullspace()))

    @cached_property
    def alpha_gram_inverse(self) -> ImmutableMatrix:
        """Exact (alpha alpha^T)^-1, used to project points orthogonally onto M."""
        return ImmutableMatrix((self.alpha * self.alpha.T).inv())

    def constraint_symbols(self) -> List[Symbol]:
        return self.constraints.symbols()

    def dependent_assignment(self) -> Dict[int, Symbol]:
        """Pivot coordinate -> Symbol in the free coordinates."""
        assignment = {}
        for pivot, combination in self.dependent_solution.items():
            row = [combination.get(i, 0) for i in range(1, self.space.dim + 1)]
            assignment[pivot] = Symbol.from_linear_form(self.space, row)
        return assignment


# ============================================================================
# CONSTRUCTION
# ============================================================================

def check_constraints(space: PhaseSpace, alpha) -> ConstraintReport:
    """
    Evaluate the rank condition and det C != 0 without raising.

    Args:
        space: phase space R^{2n}
        alpha: 2m x 2n rational matrix

    Returns:
        ConstraintReport
    """
    alpha = as_rational_matrix(alpha)
    rows, cols = alpha.shape
    shape_ok = rows > 0 and rows % 2 == 0 and cols == space.dim and rows < space.dim
    rank = alpha.rank() if rows and cols else 0
    det_C = None
    if cols == space.dim and rows > 0:
        det_C = (alpha * symplectic_matrix(space) * alpha.T).det()
    return ConstraintReport(
        rows=rows,
        cols=cols,
        expected_rank=rows,
        rank=rank,
        det_C=det_C,
        shape_ok=shape_ok,
        rank_ok=shape_ok and rank == rows,
        second_class_ok=shape_ok and det_C is not None and det_C != 0,
    )


def build_dirac_structure(space: PhaseSpace, alpha) -> DiracStructure:
    """
    Build C, C^{-1}, J^D and the pivot solution of alpha z = 0.

    Raises:
        BadShapeError: odd or zero row count, 2m >= 2n, wrong column count
        RankDeficientError: rank(alpha) < 2m
        SecondClassViolationError: det C = 0
    """
    alpha = as_rational_matrix(alpha)
    report = check_constraints(space, alpha)
    if not report.shape_ok:
        raise BadShapeError(
            f"alpha is {report.rows}x{report.cols}; expected an even, positive number of rows "
            f"below {space.dim} and {space.dim} columns"
        )
    if not report.rank_ok:
        raise RankDeficientError(f"rank(alpha) = {report.rank}, expected {report.expected_rank}")
    if not report.second_class_ok:
        raise SecondClassViolationError(f"det C = {report.det_C}: constraints are not second class")

    J = symplectic_matrix(space)
    C = ImmutableMatrix(alpha * J * alpha.T)
    C_inv = ImmutableMatrix(C.inv())
    JD = ImmutableMatrix(J - J * alpha.T * C_inv * alpha * J)

    # eliminate on columns z_2n .. z_1 so representatives keep the low-index coordinates
    last = space.dim - 1
    flipped = alpha.extract(list(range(alpha.rows)), list(range(last, -1, -1)))
    reduced, flipped_pivots = flipped.rref()
    pivots = [last - p for p in flipped_pivots]
    free = [c for c in range(space.dim) if c not in pivots]
    dependent: Dict[int, Dict[int, Rational]] = {}
    for row, pivot in enumerate(pivots):
        dependent[pivot + 1] = {f + 1: -reduced[row, last - f] for f in free if reduced[row, last - f] != 0}
    dependent = dict(sorted(dependent.items()))

    logger.debug(f"Built Dirac structure n={space.n}, 2m={alpha.rows}, pivots={sorted(p + 1 for p in pivots)}")
    return DiracStructure(
        constraints=ConstraintSet(space, alpha),
        C=C,
        C_inv=C_inv,
        JD=JD,
        pivot_columns=tuple(sorted(p + 1 for p in pivots)),
        dependent_solution=dependent,
    )


def nullspace_defect(ds: DiracStructure) -> ImmutableMatrix:
    """JD alpha^T; the zero matrix for every valid structure."""
    return ImmutableMatrix(ds.JD * ds.alpha.T)


def jd_rank(ds: DiracStructure) -> int:
    return ds.jd_rank


# ============================================================================
# SYMPLECTIC TRANSFORMS
# ============================================================================

def is_symplectic(space: PhaseSpace, S) -> bool:
    J = symplectic_matrix(space)
    return ImmutableMatrix(S * J * S.T) == J


def apply_symplectic_transform(ds: DiracStructure, S) -> DiracStructure:
    """
    Rebuild the structure in coordinates z' = S z, i.e. alpha' = alpha S^{-1}.

    Raises:
        SymplecticViolationError: S J S^T != J
    """
    S = as_rational_matrix(S)
    if S.shape != (ds.space.dim, ds.space.dim):
        raise DimensionMismatchError(f"transform is {S.rows}x{S.cols}, expected {ds.space.dim}x{ds.space.dim}")
    if not is_symplectic(ds.space, S):
        raise SymplecticViolationError("S J S^T != J")
    return build_dirac_structure(ds.space, ds.alpha * S.inv())


def _random_rational(rng: np.random.Generator) -> Rational:
    return Rational(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))


def _elementary_symplectic(kind: str, space: PhaseSpace, rng: np.random.Generator) -> Matrix:
    G = eye(space.dim)
    k = int(rng.integers(space.n))
    q, p = 2 * k, 2 * k + 1
    if kind == 'rotation':
        # rational point on the unit circle
        t = _random_rational(rng)
        c, s = (1 - t ** 2) / (1 + t ** 2), 2 * t / (1 + t ** 2)
        G[q, q], G[q, p], G[p, q], G[p, p] = c, s, -s, c
    elif kind == 'q_shear':
        G[q, p] = _random_rational(rng)
    elif kind == 'p_shear':
        G[p, q] = _random_rational(rng)
    else:
        l = int(rng.integers(space.n - 1))
        if l >= k:
            l += 1
        ql, pl = 2 * l, 2 * l + 1
        if kind == 'pair_swap':
            G[q, q] = G[p, p] = G[ql, ql] = G[pl, pl] = 0
            G[q, ql] = G[ql, q] = G[p, pl] = G[pl, p] = 1
        else:
            c = _random_rational(rng)
            G[q, pl] = c
            G[ql, p] = c
    return G


def random_symplectic(space: PhaseSpace, seed: int) -> ImmutableMatrix:
    """
    Deterministic pseudo-random rational symplectic matrix: a product of
    5-15 pair rotations, shears, pair swaps and two-pair mixing shears.
    """
    rng = np.random.default_rng(seed)
    kinds = ['rotation', 'q_shear', 'p_shear']
    if space.n > 1:
        kinds += ['pair_swap', 'mixing_shear']
    S = eye(space.dim)
    for _ in range(int(rng.integers(5, 16))):
        kind = kinds[int(rng.integers(len(kinds)))]
        S = _elementary_symplectic(kind, space, rng) * S
    S = ImmutableMatrix(S)
    if not is_symplectic(space, S):
        raise SymplecticViolationError(f"generated transform for seed {seed} is not symplectic")
    return S


# ============================================================================
# CONSTRAINT EXPRESSIONS
# ============================================================================

def parse_constraint(text: str, space: PhaseSpace) -> List[Rational]:
    """
    Coefficient row of a constraint written as an expression, e.g. "q2 - q1".

    Raises:
        InhomogeneousConstraintError: constant term, nonlinear, hbar-dependent,
            complex or identically zero constraint
    """
    symbol = parse_symbol(text, space)
    if not symbol.is_hbar_free or not symbol.is_real:
        raise InhomogeneousConstraintError(f"constraint {text!r} must be real and hbar-free")
    if symbol.z_degree > 1:
        raise InhomogeneousConstraintError(f"constraint {text!r} is not linear")
    row = [Rational(0)] * space.dim
    for (exps, _), coeff in symbol.items():
        if not any(exps):
            raise InhomogeneousConstraintError(f"constraint {text!r} has a constant term")
        index = exps.index(1)
        row[index] = as_rational(Fraction(int(coeff.x.numerator), int(coeff.x.denominator)))
    if not any(row):
        raise InhomogeneousConstraintError(f"constraint {text!r} is identically zero")
    return row
