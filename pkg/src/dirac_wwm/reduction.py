"""
Reduction - Darboux chart of the Dirac structure

Builds new linear coordinates (y_1, ..., y_2(n-m), Phi_1, ..., Phi_2m) = T z in
which the Dirac bracket of the y's is the standard symplectic form of
R^{2(n-m)} and the constraints are coordinates themselves. Symbols are pushed
to the reduced space by writing them in the chart and setting every Phi to
zero; on the reduced space the ordinary Moyal star applies.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

from sympy import ImmutableMatrix, Matrix, zeros

from .constraint_structure import DiracStructure, symplectic_matrix
from .errors import DarbouxChartError, SpaceMismatchError
from .star_calculus import moyal, moyal_standard, standard_star, star
from .symbol_algebra import PhaseSpace, Symbol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedChart:
    """
    T maps z to (y, Phi); the last 2m rows of T are the rows of alpha.
    """
    T: ImmutableMatrix
    T_inv: ImmutableMatrix
    space: PhaseSpace
    reduced_space: PhaseSpace

    @property
    def y_rows(self) -> ImmutableMatrix:
        return self.T[:self.reduced_space.dim, :]


def _pairing(u: Matrix, v: Matrix, JD: ImmutableMatrix):
    return (u * JD * v.T)[0, 0]


def _orthogonalize(v: Matrix, pairs: List[Tuple[Matrix, Matrix]], JD: ImmutableMatrix) -> Matrix:
    """Remove the components of v paired with already chosen Darboux pairs."""
    for e, f in pairs:
        v = v - _pairing(v, f, JD) * e + _pairing(v, e, JD) * f
    return v


def darboux_basis(ds: DiracStructure) -> ReducedChart:
    """
    Symplectic Gram-Schmidt over the rationals on the JD pairing.

    Standard basis vectors are taken in index order; each one independent of
    the rows chosen so far and of alpha becomes the first member e of a pair,
    its partner is the lowest-index basis vector with nonzero pairing,
    orthogonalized and rescaled so that e JD f^T = 1.

    Raises:
        DarbouxChartError: fewer than n - m pairs found
    """
    space = ds.space
    dim = space.dim
    JD = ds.JD
    target = (dim - ds.alpha.rows) // 2
    pairs: List[Tuple[Matrix, Matrix]] = []
    rank = ds.alpha.rank()

    for index in range(dim):
        if len(pairs) == target:
            break
        v = zeros(1, dim)
        v[0, index] = 1
        v = _orthogonalize(v, pairs, JD)
        candidate_rank = Matrix.vstack(ds.alpha, *[row for pair in pairs for row in pair], v).rank()
        if candidate_rank == rank:
            continue
        image = v * JD
        partner_index = next((j for j in range(dim) if image[0, j] != 0), None)
        if partner_index is None:
            raise DarbouxChartError(f"vector {list(v)} is independent of alpha but JD-null")
        w = zeros(1, dim)
        w[0, partner_index] = 1
        w = _orthogonalize(w, pairs, JD)
        f = w / _pairing(v, w, JD)
        pairs.append((v, f))
        rank += 2

    if len(pairs) != target:
        raise DarbouxChartError(f"found {len(pairs)} Darboux pairs, expected {target}")

    T = ImmutableMatrix(Matrix.vstack(*[row for pair in pairs for row in pair], ds.alpha))
    chart = ReducedChart(T=T, T_inv=ImmutableMatrix(T.inv()), space=space, reduced_space=PhaseSpace(target))
    logger.debug(f"Darboux chart with {target} pairs built for n={space.n}")
    return chart


def gram_matrix(chart: ReducedChart, ds: DiracStructure) -> ImmutableMatrix:
    """T JD T^T; block-diag(J_reduced, 0) for a valid chart."""
    return ImmutableMatrix(chart.T * ds.JD * chart.T.T)


def expected_gram_matrix(chart: ReducedChart) -> ImmutableMatrix:
    dim = chart.space.dim
    gram = zeros(dim, dim)
    r = chart.reduced_space.dim
    gram[:r, :r] = symplectic_matrix(chart.reduced_space)
    return ImmutableMatrix(gram)


def push_to_reduced(A: Symbol, chart: ReducedChart, ds: DiracStructure) -> Symbol:
    """Rewrite A in chart coordinates and set every constraint coordinate to zero."""
    if A.space != chart.space:
        raise SpaceMismatchError(f"symbol lives in n={A.space.n}, chart in n={chart.space.n}")
    r = chart.reduced_space.dim
    images = [
        Symbol.from_linear_form(chart.reduced_space, [chart.T_inv[i, a] for a in range(r)])
        for i in range(chart.space.dim)
    ]
    return A.transport(chart.reduced_space, images)


def pull_from_reduced(A_reduced: Symbol, chart: ReducedChart, ds: DiracStructure) -> Symbol:
    """Lift a reduced-space symbol to R^{2n} through y = T_top z."""
    if A_reduced.space != chart.reduced_space:
        raise SpaceMismatchError(f"symbol lives in n={A_reduced.space.n}, reduced space has n={chart.reduced_space.n}")
    images = [Symbol.from_linear_form(chart.space, list(chart.T.row(a))) for a in range(chart.reduced_space.dim)]
    return A_reduced.transport(chart.space, images)


def reduced_star_consistency(A: Symbol, B: Symbol, chart: ReducedChart, ds: DiracStructure) -> Symbol:
    """push(A * B) - push(A) *_standard push(B); zero on every input."""
    pushed = push_to_reduced(star(A, B, ds), chart, ds)
    return pushed - standard_star(push_to_reduced(A, chart, ds), push_to_reduced(B, chart, ds))


def reduced_moyal_consistency(A: Symbol, B: Symbol, chart: ReducedChart, ds: DiracStructure) -> Symbol:
    pushed = push_to_reduced(moyal(A, B, ds), chart, ds)
    return pushed - moyal_standard(push_to_reduced(A, chart, ds), push_to_reduced(B, chart, ds))
