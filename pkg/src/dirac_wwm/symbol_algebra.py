"""
Symbol Algebra - exact polynomial Weyl symbols

Weyl symbols are polynomials in the phase-space coordinates
z = (q1, p1, q2, p2, ..., qn, pn) whose coefficients are polynomials in a
formal, central hbar over the Gaussian rationals. They are stored in a sympy
sparse polynomial ring over QQ_I with generators (z_1, ..., z_2n, hbar), so a
Symbol is a map from (exponent vector, hbar power) to an exact complex
rational.

Usage:
    from dirac_wwm.symbol_algebra import PhaseSpace, Symbol
    from dirac_wwm.expression_parser import parse_symbol

    space = PhaseSpace(2)
    a = parse_symbol("q1*p1 + (1/2)", space)
    print(a.partial_derivative(1))    # p1
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

from sympy import Rational
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .errors import (
    CoordinateIndexError,
    DimensionMismatchError,
    SpaceMismatchError,
    SubstitutionDegreeError,
)

logger = logging.getLogger(__name__)

# Exact complex rational; real and imaginary parts live in .x and .y
Scalar = GaussianRational
ScalarLike = Union[Scalar, int, Fraction, Rational, str]

# (exponent vector, hbar power)
TermKey = Tuple[Tuple[int, ...], int]

IMAGINARY_UNIT = GaussianRational(QQ(0), QQ(1))


# ============================================================================
# SCALARS
# ============================================================================

def to_scalar(value: ScalarLike) -> Scalar:
    """
    Convert an exact number to a Gaussian rational.

    Args:
        value: int, Fraction, sympy Rational, rational string "p/q" or a Scalar

    Returns:
        Scalar

    Raises:
        TypeError: for floats and other inexact values
    """
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return GaussianRational(QQ(value), QQ(0))
    if isinstance(value, Fraction):
        return GaussianRational(QQ(value.numerator, value.denominator), QQ(0))
    if isinstance(value, Rational):
        return GaussianRational(QQ(int(value.p), int(value.q)), QQ(0))
    if isinstance(value, str):
        return to_scalar(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} {value!r} to an exact scalar")


def _to_fraction(part) -> Fraction:
    return Fraction(int(part.numerator), int(part.denominator))


def scalar_parts(value: Scalar) -> Tuple[Fraction, Fraction]:
    """Return (real part, imaginary part) as Fractions."""
    return _to_fraction(value.x), _to_fraction(value.y)


def scalar_to_complex(value: Scalar) -> complex:
    re, im = scalar_parts(value)
    return complex(float(re), float(im))


# ============================================================================
# PHASE SPACE
# ============================================================================

@lru_cache(maxsize=None)
def _symbol_ring(n: int) -> PolyRing:
    names = []
    for k in range(1, n + 1):
        names.extend([f"q{k}", f"p{k}"])
    names.append("hbar")
    return PolyRing(names, QQ_I, grlex)


@dataclass(frozen=True)
class PhaseSpace:
    """
    Flat phase space R^{2n} with canonical pairs ordered
    z_{2k-1} = q_k, z_{2k} = p_k.
    """
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"number of canonical pairs must be a positive integer, got {self.n!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def ring(self) -> PolyRing:
        return _symbol_ring(self.n)

    @property
    def coordinate_names(self) -> Tuple[str, ...]:
        return tuple(str(s) for s in self.ring.symbols[:-1])

    def coordinate_name(self, index: int) -> str:
        self.check_index(index)
        return self.coordinate_names[index - 1]

    def index_of(self, name: str) -> int:
        """1-based coordinate index of a name like 'q2'; ValueError if unknown."""
        try:
            return self.coordinate_names.index(name) + 1
        except ValueError:
            raise ValueError(f"unknown coordinate {name!r} in a space with n={self.n}") from None

    def check_index(self, index: int) -> None:
        if not isinstance(index, int) or not 1 <= index <= self.dim:
            raise CoordinateIndexError(f"coordinate index {index!r} outside 1..{self.dim}")


# ============================================================================
# SYMBOL
# ============================================================================

class Symbol:
    """
    Immutable polynomial Weyl symbol.

    Two Symbols are equal iff they live in the same PhaseSpace and have the
    same canonical sparse form (no stored zero coefficients).
    """

    __slots__ = ("space", "poly")

    def __init__(self, space: PhaseSpace, poly: PolyElement):
        if poly.ring != space.ring:
            raise SpaceMismatchError(f"polynomial ring {poly.ring} does not belong to n={space.n}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "poly", poly)

    def __setattr__(self, name, value):
        raise AttributeError("Symbol is immutable")

    # --- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, space: PhaseSpace) -> "Symbol":
        return cls(space, space.ring.zero)

    @classmethod
    def one(cls, space: PhaseSpace) -> "Symbol":
        return cls(space, space.ring.one)

    @classmethod
    def constant(cls, space: PhaseSpace, value: ScalarLike) -> "Symbol":
        return cls(space, space.ring.ground_new(to_scalar(value)))

    @classmethod
    def coordinate(cls, space: PhaseSpace, index: int) -> "Symbol":
        space.check_index(index)
        return cls(space, space.ring.gens[index - 1])

    @classmethod
    def coordinates(cls, space: PhaseSpace) -> List["Symbol"]:
        return [cls.coordinate(space, i) for i in range(1, space.dim + 1)]

    @classmethod
    def hbar(cls, space: PhaseSpace) -> "Symbol":
        return cls(space, space.ring.gens[-1])

    @classmethod
    def from_terms(cls, space: PhaseSpace, terms: Mapping[TermKey, ScalarLike]) -> "Symbol":
        """
        Build a Symbol from {(exponent vector, hbar power): coefficient}.
        Repeated keys are not possible in a mapping; zero coefficients are dropped.
        """
        data = {}
        for (exps, k), value in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != space.dim:
                raise DimensionMismatchError(f"exponent vector {exps} has length {len(exps)}, expected {space.dim}")
            if k < 0 or any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in term {exps}, hbar^{k}")
            data[exps + (int(k),)] = to_scalar(value)
        return cls(space, space.ring.from_dict(data))

    @classmethod
    def from_linear_form(cls, space: PhaseSpace, row: Sequence[ScalarLike]) -> "Symbol":
        """Sum_i row[i] z_{i+1}."""
        if len(row) != space.dim:
            raise DimensionMismatchError(f"linear form has {len(row)} entries, expected {space.dim}")
        terms = {}
        for i, value in enumerate(row):
            exps = tuple(1 if j == i else 0 for j in range(space.dim))
            terms[(exps, 0)] = value
        return cls.from_terms(space, terms)

    # --- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Symbol":
        if isinstance(other, Symbol):
            if other.space != self.space:
                raise SpaceMismatchError(f"n={self.space.n} vs n={other.space.n}")
            return other
        return Symbol.constant(self.space, other)

    def __add__(self, other) -> "Symbol":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return Symbol(self.space, self.poly + other.poly)

    __radd__ = __add__

    def __sub__(self, other) -> "Symbol":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return Symbol(self.space, self.poly - other.poly)

    def __rsub__(self, other) -> "Symbol":
        return (-self) + other

    def __neg__(self) -> "Symbol":
        return Symbol(self.space, -self.poly)

    def __mul__(self, other) -> "Symbol":
        if isinstance(other, Symbol):
            other = self._coerce(other)
            return Symbol(self.space, self.poly * other.poly)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Symbol":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("symbols only support non-negative integer powers")
        return Symbol(self.space, self.poly ** exponent)

    def scale(self, value: ScalarLike) -> "Symbol":
        return Symbol(self.space, self.poly.mul_ground(to_scalar(value)))

    def __eq__(self, other) -> bool:
        if isinstance(other, Symbol):
            return self.space == other.space and self.poly == other.poly
        try:
            return self.poly == Symbol.constant(self.space, other).poly
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash((self.space, frozenset(self.poly.items())))

    def __bool__(self) -> bool:
        return bool(self.poly)

    # --- inspection ---------------------------------------------------------

    def items(self) -> Iterator[Tuple[TermKey, Scalar]]:
        """Terms in canonical print order."""
        for monom, coeff in sorted(self.poly.items(), key=_canonical_key):
            yield (tuple(monom[:-1]), monom[-1]), coeff

    @property
    def is_zero(self) -> bool:
        return not self.poly

    @property
    def z_degree(self) -> int:
        """Total degree in z (0 for constants and for the zero symbol)."""
        return max((sum(m[:-1]) for m in self.poly.keys()), default=0)

    @property
    def hbar_degree(self) -> int:
        return max((m[-1] for m in self.poly.keys()), default=0)

    @property
    def hbar_powers(self) -> List[int]:
        return sorted({m[-1] for m in self.poly.keys()})

    @property
    def is_constant(self) -> bool:
        """True for hbar-free constants, including zero."""
        return all(not any(m) for m in self.poly.keys())

    @property
    def is_hbar_free(self) -> bool:
        return all(m[-1] == 0 for m in self.poly.keys())

    @property
    def is_real(self) -> bool:
        return all(not c.y for c in self.poly.values())

    def constant_value(self) -> Scalar:
        """Value of an hbar-free constant symbol."""
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self.poly.get(self.space.ring.zero_monom, QQ_I.zero)

    # --- calculus -----------------------------------------------------------

    def partial_derivative(self, index: int) -> "Symbol":
        """Formal derivative in z_index; hbar is a constant."""
        self.space.check_index(index)
        return Symbol(self.space, self.poly.diff(index - 1))

    def substitute_linear(self, assignment: Mapping[int, "Symbol"]) -> "Symbol":
        """
        Simultaneously replace z_i by assignment[i].

        Raises:
            SubstitutionDegreeError: if an image has z-degree > 1
        """
        if not assignment:
            return self
        ring = self.space.ring
        replacements = []
        for index in sorted(assignment):
            self.space.check_index(index)
            image = self._coerce(assignment[index])
            if image.z_degree > 1:
                raise SubstitutionDegreeError(
                    f"image of {self.space.coordinate_name(index)} has degree {image.z_degree}: {image}"
                )
            replacements.append((ring.gens[index - 1], image.poly))
        return Symbol(self.space, self.poly.compose(replacements))

    def transport(self, target: PhaseSpace, images: Sequence["Symbol"]) -> "Symbol":
        """
        Rewrite the symbol in another phase space, z_i -> images[i-1].
        Every image must be a degree <= 1 symbol of the target space.
        """
        if len(images) != self.space.dim:
            raise DimensionMismatchError(f"{len(images)} images for {self.space.dim} coordinates")
        for i, image in enumerate(images, start=1):
            if image.space != target:
                raise SpaceMismatchError(f"image of z_{i} is not in the target space n={target.n}")
            if image.z_degree > 1:
                raise SubstitutionDegreeError(f"image of z_{i} has degree {image.z_degree}")
        ring = target.ring
        hbar = ring.gens[-1]
        result = ring.zero
        for monom, coeff in self.poly.items():
            term = ring.ground_new(coeff)
            for image, e in zip(images, monom[:-1]):
                if e:
                    term = term * image.poly ** e
            if monom[-1]:
                term = term * hbar ** monom[-1]
            result += term
        return Symbol(target, result)

    def evaluate(self, point: Sequence[ScalarLike], hbar_value: Union[ScalarLike, str] = "formal"):
        """
        Exact evaluation at a rational point.

        Returns:
            Scalar, or {hbar power: Scalar} when hbar_value is "formal"
        """
        if len(point) != self.space.dim:
            raise DimensionMismatchError(f"point has {len(point)} components, expected {self.space.dim}")
        values = [to_scalar(v) for v in point]
        grades: Dict[int, Scalar] = {}
        for monom, coeff in self.poly.items():
            term = coeff
            for v, e in zip(values, monom[:-1]):
                if e:
                    term = term * v ** e
            k = monom[-1]
            grades[k] = grades.get(k, QQ_I.zero) + term
        grades = {k: c for k, c in sorted(grades.items()) if c}
        if isinstance(hbar_value, str) and hbar_value == "formal":
            return grades
        h = to_scalar(hbar_value)
        total = QQ_I.zero
        for k, c in grades.items():
            total = total + c * h ** k
        return total

    def hbar_coefficient(self, r: int) -> "Symbol":
        """The hbar-free symbol multiplying hbar^r."""
        if r < 0:
            raise ValueError("hbar power must be non-negative")
        data = {m[:-1] + (0,): c for m, c in self.poly.items() if m[-1] == r}
        return Symbol(self.space, self.space.ring.from_dict(data))

    def semiclassical_terms(self) -> List["Symbol"]:
        """[A_c, a_1, a_2, ...] with A = A_c + sum_r hbar^r / r! a_r."""
        return [self.hbar_coefficient(r).scale(factorial(r)) for r in range(self.hbar_degree + 1)]

    def to_expr(self):
        """sympy expression in the symbols q1, p1, ..., hbar."""
        return self.poly.as_expr()

    def __str__(self) -> str:
        return format_symbol(self)

    def __repr__(self) -> str:
        return f"Symbol({format_symbol(self)!r}, n={self.space.n})"


def from_semiclassical_terms(space: PhaseSpace, terms: Sequence[Symbol]) -> Symbol:
    """Inverse of Symbol.semiclassical_terms."""
    result = Symbol.zero(space)
    hbar = Symbol.hbar(space)
    for r, term in enumerate(terms):
        result = result + term.scale(Fraction(1, factorial(r))) * hbar ** r
    return result


# ============================================================================
# CANONICAL PRINTING
# ============================================================================

def _canonical_key(item) -> tuple:
    monom = item[0]
    exps = monom[:-1]
    return (-sum(exps), tuple(-e for e in exps), monom[-1])


def _magnitude_text(value: Fraction) -> str:
    return str(value) if value.denominator == 1 else f"({value})"


def _format_term(space: PhaseSpace, monom: tuple, coeff: Scalar) -> Tuple[bool, str]:
    re, im = scalar_parts(coeff)
    negative = False
    factors: List[str] = []
    if im == 0:
        negative = re < 0
        if abs(re) != 1:
            factors.append(_magnitude_text(abs(re)))
    elif re == 0:
        negative = im < 0
        if abs(im) != 1:
            factors.append(_magnitude_text(abs(im)))
        factors.append("i")
    else:
        sign = "+" if im > 0 else "-"
        factors.append(f"({re} {sign} {abs(im)}*i)")

    k = monom[-1]
    if k == 1:
        factors.append("hbar")
    elif k > 1:
        factors.append(f"hbar^{k}")

    for name, e in zip(space.coordinate_names, monom[:-1]):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")

    return negative, "*".join(factors) if factors else "1"


def format_symbol(symbol: Symbol) -> str:
    """
    Canonical, parseable text: descending total z-degree, then descending
    exponents of z_1, z_2, ...; ascending hbar within a z-monomial.
    """
    pieces: List[str] = []
    for monom, coeff in sorted(symbol.poly.items(), key=_canonical_key):
        negative, body = _format_term(symbol.space, monom, coeff)
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces) if pieces else "0"


# ============================================================================
# FUNCTIONAL SURFACE
# ============================================================================

def _scalar_mul(a, b) -> Symbol:
    if isinstance(a, Symbol):
        return a.scale(b)
    return b.scale(a)


_ARITH_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "negate": lambda a, b=None: -a,
    "scalar_mul": _scalar_mul,
}


def arith(op: str, a, b=None) -> Symbol:
    """Exact ring arithmetic: add, sub, mul (pointwise), negate, scalar_mul."""
    try:
        fn = _ARITH_OPS[op]
    except KeyError:
        raise ValueError(f"unknown arithmetic operation {op!r}; expected one of {sorted(_ARITH_OPS)}") from None
    if op == "negate":
        return fn(a)
    if b is None:
        raise ValueError(f"{op} needs two operands")
    return fn(a, b)


def partial_derivative(symbol: Symbol, index: int) -> Symbol:
    return symbol.partial_derivative(index)


def substitute_linear(symbol: Symbol, assignment: Mapping[int, Symbol]) -> Symbol:
    return symbol.substitute_linear(assignment)


def evaluate(symbol: Symbol, point: Sequence[ScalarLike], hbar_value: Union[ScalarLike, str] = "formal"):
    return symbol.evaluate(point, hbar_value)


def hbar_coefficient(symbol: Symbol, r: int) -> Symbol:
    return symbol.hbar_coefficient(r)


def semiclassical_terms(symbol: Symbol) -> List[Symbol]:
    return symbol.semiclassical_terms()
