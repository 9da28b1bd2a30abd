"""
Reference constraint matrices, seeded generators and hypothesis strategies
shared by the test modules.
"""

from fractions import Fraction
from typing import List

import numpy as np
from hypothesis import strategies as st

from dirac_wwm.constraint_structure import DiracStructure, build_dirac_structure, check_constraints
from dirac_wwm.symbol_algebra import IMAGINARY_UNIT, PhaseSpace, Symbol, to_scalar

S1_ALPHA = [[0, 0, 1, 0], [0, 0, 0, 1]]
S2_ALPHA = [[-1, 0, 1, 0], [0, 0, 0, 1]]
SBAD_ALPHA = [[1, 0, -1, 0], [0, 1, 0, 1]]


# ============================================================================
# SEEDED GENERATORS
# ============================================================================

def random_symbol(rng: np.random.Generator, space: PhaseSpace, max_degree: int = 3, terms: int = 4,
                  with_hbar: bool = False) -> Symbol:
    """Random symbol with small rational coefficients and total degree <= max_degree."""
    data = {}
    for _ in range(terms):
        exps = [0] * space.dim
        for _ in range(int(rng.integers(0, max_degree + 1))):
            exps[int(rng.integers(space.dim))] += 1
        k = int(rng.integers(0, 2)) if with_hbar else 0
        data[(tuple(exps), k)] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return Symbol.from_terms(space, data)


def random_valid_systems(count: int, seed: int = 2024) -> List[DiracStructure]:
    """Random second-class pairs of constraints (m = 1) with n in {2, 3}."""
    rng = np.random.default_rng(seed)
    systems = []
    while len(systems) < count:
        space = PhaseSpace(int(rng.integers(2, 4)))
        alpha = rng.integers(-2, 3, size=(2, space.dim)).tolist()
        if check_constraints(space, alpha).passed:
            systems.append(build_dirac_structure(space, alpha))
    return systems


# ============================================================================
# HYPOTHESIS STRATEGIES
# ============================================================================

def exponent_vectors(space: PhaseSpace, max_exponent: int = 2):
    return st.lists(st.integers(0, max_exponent), min_size=space.dim, max_size=space.dim).map(tuple)


def coefficients(complex_values: bool = False):
    rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)
    if not complex_values:
        return rationals.map(to_scalar)
    return st.tuples(rationals, rationals).map(lambda c: to_scalar(c[0]) + to_scalar(c[1]) * IMAGINARY_UNIT)


def symbols(space: PhaseSpace, max_exponent: int = 2, max_terms: int = 4, hbar_powers: int = 2,
            complex_values: bool = False):
    """Strategy of Symbols with at most max_terms terms."""
    keys = st.tuples(exponent_vectors(space, max_exponent), st.integers(0, hbar_powers))
    return st.dictionaries(keys, coefficients(complex_values), max_size=max_terms).map(
        lambda terms: Symbol.from_terms(space, terms)
    )
