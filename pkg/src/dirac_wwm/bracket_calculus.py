"""
Bracket Calculus - Poisson and Dirac brackets of Weyl symbols

Both brackets are contractions of gradients with a constant antisymmetric
kernel K:

    {A, B}_K = sum_ij K_ij dA/dz_i dB/dz_j

with K = J for the Poisson bracket and K = JD for the Dirac bracket. hbar is
a constant under differentiation.
"""

import logging
from typing import Callable, Dict, Optional

from sympy import ImmutableMatrix

from .constraint_structure import DiracStructure, kernel_entries, symplectic_matrix
from .errors import DimensionMismatchError, SpaceMismatchError
from .symbol_algebra import PhaseSpace, Symbol

logger = logging.getLogger(__name__)

BRACKET_KINDS = ('poisson', 'dirac', 'moyal')


def _check_space(space: PhaseSpace, *symbols: Symbol) -> None:
    for symbol in symbols:
        if symbol.space != space:
            raise SpaceMismatchError(f"symbol {symbol} lives in n={symbol.space.n}, expected n={space.n}")


def contract_bracket(A: Symbol, B: Symbol, kernel: ImmutableMatrix) -> Symbol:
    """sum_ij K_ij dA/dz_i dB/dz_j for a constant 2n x 2n kernel."""
    space = A.space
    _check_space(space, B)
    if kernel.shape != (space.dim, space.dim):
        raise DimensionMismatchError(f"kernel is {kernel.rows}x{kernel.cols}, expected {space.dim}x{space.dim}")

    left: Dict[int, Symbol] = {}
    right: Dict[int, Symbol] = {}
    result = space.ring.zero
    for i, j, value in kernel_entries(kernel):
        if i not in left:
            left[i] = A.partial_derivative(i + 1)
        if j not in right:
            right[j] = B.partial_derivative(j + 1)
        if left[i] and right[j]:
            result += (left[i].poly * right[j].poly).mul_ground(value)
    return Symbol(space, result)


def poisson(A: Symbol, B: Symbol, space: Optional[PhaseSpace] = None) -> Symbol:
    """Canonical Poisson bracket {A, B}."""
    space = space or A.space
    _check_space(space, A, B)
    return contract_bracket(A, B, symplectic_matrix(space))


def dirac(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """Dirac bracket as the JD contraction."""
    _check_space(ds.space, A, B)
    return contract_bracket(A, B, ds.JD)


def dirac_explicit(A: Symbol, B: Symbol, ds: DiracStructure) -> Symbol:
    """
    Dirac bracket in its correction form

        {A, B} - sum_{mu nu} {A, Phi_mu} C^{-1}_{mu nu} {Phi_nu, B}

    Slow path; agrees with dirac() identically.
    """
    _check_space(ds.space, A, B)
    phis = ds.constraint_symbols()
    left = [poisson(A, phi) for phi in phis]
    right = [poisson(phi, B) for phi in phis]
    result = poisson(A, B)
    for mu, a_mu in enumerate(left):
        if not a_mu:
            continue
        for nu, b_nu in enumerate(right):
            c = ds.C_inv[mu, nu]
            if c != 0 and b_nu:
                result = result - (a_mu * b_nu).scale(c)
    return result


def bracket_function(kind: str, ds: Optional[DiracStructure] = None,
                     space: Optional[PhaseSpace] = None) -> Callable[[Symbol, Symbol], Symbol]:
    """Binary bracket of the given kind; dirac and moyal need a DiracStructure."""
    if kind == 'poisson':
        return lambda a, b: poisson(a, b, space or (ds.space if ds else None))
    if ds is None:
        raise ValueError(f"{kind} bracket needs a DiracStructure")
    if kind == 'dirac':
        return lambda a, b: dirac(a, b, ds)
    if kind == 'dirac-explicit':
        return lambda a, b: dirac_explicit(a, b, ds)
    if kind == 'moyal':
        from .star_calculus import moyal
        return lambda a, b: moyal(a, b, ds)
    raise ValueError(f"unknown bracket kind {kind!r}")


def jacobi_defect(kind: str, A: Symbol, B: Symbol, Cs: Symbol, ds: Optional[DiracStructure] = None) -> Symbol:
    """Cyclic sum {{A,B},C} + {{C,A},B} + {{B,C},A}; zero for every kind."""
    space = ds.space if ds is not None else A.space
    _check_space(space, A, B, Cs)
    bracket = bracket_function(kind, ds, space)
    return bracket(bracket(A, B), Cs) + bracket(bracket(Cs, A), B) + bracket(bracket(B, Cs), A)
