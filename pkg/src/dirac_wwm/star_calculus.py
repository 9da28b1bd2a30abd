"""
Star Calculus - generalized Groenewold star product and Moyal bracket

For a constant antisymmetric kernel K the star product of polynomial symbols
is the terminating series

    A * B = sum_k (1/k!) (i hbar / 2)^k P_k(A, B)

where P_k is the k-th power of the bidifferential operator
sum_ij K_ij d/dzeta_i d/dxi_j applied to A(zeta) B(xi) and then restricted to
zeta = xi = z. The tensor A(zeta) B(xi) is held as a single polynomial in a
doubled ring (zeta_1..zeta_2n, xi_1..xi_2n, hbar), so each power is one pass
of derivatives over its terms. The series stops at k = min(deg A, deg B).

With K = JD this is the star product of the constrained system; with K = J
it is the ordinary Moyal star of an unconstrained phase space.

Usage:
    from dirac_wwm.star_calculus import star, moyal
    print(star(q1, p1, ds))    # q1*p1 + (1/2)*i*hbar
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional

from sympy import ImmutableMatrix
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .bracket_calculus import dirac
from .constraint_structure import DiracStructure, kernel_entries, symplectic_matrix
from .errors import DimensionMismatchError, SpaceMismatchError
from .symbol_algebra import PhaseSpace, Symbol

logger = logging.getLogger(__name__)

HALF_I = GaussianRational(QQ(0), QQ(1, 2))
MINUS_I = GaussianRational(QQ(0), QQ(-1))


# ============================================================================
# BIDIFFERENTIAL POWERS
# ============================================================================

@lru_cache(maxsize=None)
def _tensor_ring(n: int) -> PolyRing:
    names = [f"zeta{i}" for i in range(1, 2 * n + 1)]
    names += [f"xi{i}" for i in range(1, 2 * n + 1)]
    names.append("hbar")
    return PolyRing(names, QQ_I, grlex)


def _tensor(A: Symbol, B: Symbol) -> PolyElement:
    """A(zeta) B(xi) in the doubled ring."""
    dim = A.space.dim
    ring = _tensor_ring(A.space.n)
    blank = (0,) * dim
    left = ring.from_dict({m[:-1] + blank + (m[-1],): c for m, c in A.poly.items()})
    right = ring.from_dict({blank + m[:-1] + (m[-1],): c for m, c in B.poly.items()})
    return left * right


def _collapse(tensor: PolyElement, space: PhaseSpace, hbar_shift: int = 0,
              factor: Optional[GaussianRational] = None) -> PolyElement:
    """Set zeta = xi = z, optionally multiplying by factor * hbar^hbar_shift."""
    dim = space.dim
    data: Dict[tuple, GaussianRational] = {}
    for monom, coeff in tensor.items():
        key = tuple(a + b for a, b in zip(monom[:dim], monom[dim:2 * dim])) + (monom[-1] + hbar_shift,)
        if factor is not None:
            coeff = coeff * factor
        data[key] = data[key] + coeff if key in data else coeff
    return space.ring.from_dict({k: c for k, c in data.items() if c})


def _apply_kernel(tensor: PolyElement, entries, dim: int) -> PolyElement:
    result = tensor.ring.zero
    for i, j, value in entries:
        term = tensor.diff(i)
        if not term:
            continue
        term = term.diff(dim + j)
        if term:
            result += term.mul_ground(value)
    return result


def _check_pair(A: Symbol, B: Symbol, kernel: ImmutableMatrix) -> None:
    if A.space != B.space:
        raise SpaceMismatchError(f"n={A.space.n} vs n={B.space.n}")
    if kernel.shape != (A.space.dim, A.space.dim):
        raise DimensionMismatchError(f"kernel is {kernel.rows}x{kernel.cols}, expected {A.space.dim}x{A.space.dim}")


def _tensor_powers(A: Symbol, B: Symbol, kernel: ImmutableMatrix, max_order: Optional[int]) -> List[PolyElement]:
    bound = min(A.z_degree, B.z_degree)
    if max_order is not None:
        bound = min(bound, max_order)
    entries = kernel_entries(kernel)
    powers = [_tensor(A, B)]
    while len(powers) <= bound and powers[-1]:
        powers.append(_apply_kernel(powers[-1], entries, A.space.dim))
    return powers


def bidifferential_powers(A: Symbol, B: Symbol, kernel: ImmutableMatrix,
                          max_order: Optional[int] = None) -> List[Symbol]:
    """
    [P_0, P_1, ..., P_K] with K = min(deg A, deg B) (or max_order if smaller).
    Trailing powers that vanish early are still listed, as zero symbols.
    """
    _check_pair(A, B, kernel)
    powers = _tensor_powers(A, B, kernel, max_order)
    bound = min(A.z_degree, B.z_degree) if max_order is None else min(A.z_degree, B.z_degree, max_order)
    result = [Symbol(A.space, _collapse(p, A.space)) for p in powers]
    while len(result) <= bound:
        result.append(Symbol.zero(A.space))
    return result


# ============================================================================
# STAR PRODUCTS AND BRACKETS
# ============================================================================

def groenewold_product(A: Symbol, B: Symbol, kernel: ImmutableMatrix) -> Symbol:
    """sum_k (1/k!) (i hbar/2)^k P_k(A, B) for a constant kernel."""
    _check_pair(A, B, kernel)
    space = A.space
    result = space.ring.zero
    factor = QQ_I.one
    for k, power in enumerate(_tensor_powers(A, B, kernel, None)):
        if k:
            factor = factor * HALF_I * GaussianRational(QQ(1, k), QQ(0))
        if power:
            result += _collapse(power, space, hbar_shift=k, factor=factor)
    return Symbol(space, result)


def star(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """Star product of the constrained system (kernel JD)."""
    if A.space != ds.space:
        raise SpaceMismatchError(f"symbol lives in n={A.space.n}, structure in n={ds.space.n}")
    return groenewold_product(A, B, ds.JD)


def standard_star(A: Symbol, B: Symbol) -> Symbol:
    """Unconstrained Moyal star of A's phase space (kernel J)."""
    return groenewold_product(A, B, symplectic_matrix(A.space))


def _divide_by_i_hbar(symbol: Symbol) -> Symbol:
    data = {}
    for monom, coeff in symbol.poly.items():
        if monom[-1] == 0:
            raise ArithmeticError(f"commutator {symbol} has an hbar^0 term")
        data[monom[:-1] + (monom[-1] - 1,)] = coeff * MINUS_I
    return Symbol(symbol.space, symbol.space.ring.from_dict(data))


def star_commutator(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """A*B - B*A."""
    return star(A, B, ds) - star(B, A, ds)


def moyal(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """Moyal bracket (A*B - B*A) / (i hbar), divided exactly by an hbar shift."""
    return _divide_by_i_hbar(star_commutator(A, B, ds))


def moyal_standard(A: Symbol, B: Symbol) -> Symbol:
    """Moyal bracket of the unconstrained phase space."""
    return _divide_by_i_hbar(standard_star(A, B) - standard_star(B, A))


# ============================================================================
# EQUIVALENCE CLASSES
# ============================================================================

@dataclass(frozen=True)
class EquivalenceClass:
    """Class of symbols agreeing on M, held by its pivot-free representative."""
    representative: Symbol
    ds: DiracStructure

    def __str__(self) -> str:
        return str(self.representative)


def reduce_to_canonical(A: Symbol, ds: DiracStructure) -> EquivalenceClass:
    """Eliminate pivot coordinates with the canonical solution of alpha z = 0."""
    return EquivalenceClass(A.substitute_linear(ds.dependent_assignment()), ds)


def class_equal(A: Symbol, B: Symbol, ds: DiracStructure) -> bool:
    return reduce_to_canonical(A - B, ds).representative.is_zero


def moyal_dirac_defect(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """moyal(A, B) - dirac(A, B); grades 0 and 1 vanish for hbar-free inputs."""
    return moyal(A, B, ds) - dirac(A, B, ds)
