"""
Tests for star_calculus: star product, Moyal bracket and equivalence classes.

Two independent oracles are used: a star product expanding every power of
the bidifferential operator by explicit index summation, and the Moyal
bracket as the sine series of the same operator.
"""

from fractions import Fraction
from itertools import product
from math import factorial

import numpy as np
import pytest

from dirac_wwm.bracket_calculus import dirac, jacobi_defect
from dirac_wwm.constraint_structure import build_dirac_structure, symplectic_matrix
from dirac_wwm.expression_parser import parse_symbol
from dirac_wwm.star_calculus import (
    bidifferential_powers,
    class_equal,
    moyal,
    moyal_dirac_defect,
    moyal_standard,
    reduce_to_canonical,
    standard_star,
    star,
    star_commutator,
)
from dirac_wwm.symbol_algebra import IMAGINARY_UNIT, PhaseSpace, Symbol
from dirac_wwm.testing import S1_ALPHA, S2_ALPHA, random_symbol, random_valid_systems

SPACE = PhaseSpace(2)
S1 = build_dirac_structure(SPACE, S1_ALPHA)
S2 = build_dirac_structure(SPACE, S2_ALPHA)


def sym(text, space=SPACE):
    return parse_symbol(text, space)


# ============================================================================
# ORACLES
# ============================================================================

def oracle_power(a, b, kernel, k):
    """P_k by explicit summation over all index tuples."""
    dim = a.space.dim
    entries = [(i, j) for i in range(dim) for j in range(dim) if kernel[i, j] != 0]
    total = Symbol.zero(a.space)
    for chosen in product(entries, repeat=k):
        weight = Fraction(1)
        left, right = a, b
        for i, j in chosen:
            weight *= Fraction(int(kernel[i, j].p), int(kernel[i, j].q))
            left = left.partial_derivative(i + 1)
            right = right.partial_derivative(j + 1)
        total = total + (left * right).scale(weight)
    return total


def oracle_star(a, b, kernel):
    half_i_hbar = Symbol.constant(a.space, IMAGINARY_UNIT).scale(Fraction(1, 2)) * Symbol.hbar(a.space)
    bound = min(a.z_degree, b.z_degree)
    return sum((half_i_hbar ** k * oracle_power(a, b, kernel, k).scale(Fraction(1, factorial(k)))
                for k in range(bound + 1)), Symbol.zero(a.space))


def oracle_sine_moyal(a, b, kernel):
    """(2/hbar) sin((hbar/2) P) = sum_l (-1)^l (hbar/2)^(2l) P_(2l+1) / (2l+1)!"""
    half_hbar = Symbol.hbar(a.space).scale(Fraction(1, 2))
    bound = min(a.z_degree, b.z_degree)
    total = Symbol.zero(a.space)
    for l in range((bound + 1) // 2):
        k = 2 * l + 1
        total = total + (half_hbar ** (2 * l) * oracle_power(a, b, kernel, k)).scale(
            Fraction((-1) ** l, factorial(k)))
    return total


# ============================================================================
# WORKED EXAMPLES
# ============================================================================

def test_coordinate_star_examples():
    assert str(star(sym("q1"), sym("p1"), S1)) == "q1*p1 + (1/2)*i*hbar"
    assert star(sym("q2"), sym("p2"), S1) == sym("q2*p2")


def test_cubic_star_on_free_pair():
    expected = sym("q1^3*p1^3 + 9/2*i*hbar*q1^2*p1^2 - 9/2*hbar^2*q1*p1 - 3/4*i*hbar^3")
    result = star(sym("q1^3"), sym("p1^3"), S1)
    assert result == expected
    assert result == oracle_star(sym("q1^3"), sym("p1^3"), S1.JD)
    assert str(result) == "q1^3*p1^3 + (9/2)*i*hbar*q1^2*p1^2 - (9/2)*hbar^2*q1*p1 - (3/4)*i*hbar^3"


def test_moyal_examples():
    assert moyal(sym("q1^2"), sym("p1^2"), S1) == sym("4*q1*p1")
    result = moyal(sym("q1^3"), sym("p1^3"), S1)
    assert str(result) == "9*q1^2*p1^2 - (3/2)*hbar^2"
    assert result == oracle_sine_moyal(sym("q1^3"), sym("p1^3"), S1.JD)


def test_standard_star_and_moyal():
    assert standard_star(sym("q2"), sym("p2")) == sym("q2*p2 + i*hbar/2")
    assert moyal_standard(sym("q2"), sym("p2")) == 1
    assert star(sym("q2"), sym("p2"), S1) != standard_star(sym("q2"), sym("p2"))


def test_unit_is_neutral():
    one = Symbol.one(SPACE)
    a = sym("q1^2*p2 + hbar*q2")
    assert star(one, a, S2) == a
    assert star(a, one, S2) == a


# ============================================================================
# COORDINATE IDENTITIES
# ============================================================================

def coordinate_systems():
    return [S1, S2, *random_valid_systems(20)]


def test_coordinate_star_identity():
    for ds in coordinate_systems():
        half_i_hbar = Symbol.constant(ds.space, IMAGINARY_UNIT).scale(Fraction(1, 2)) * Symbol.hbar(ds.space)
        z = Symbol.coordinates(ds.space)
        for i in range(ds.space.dim):
            for j in range(ds.space.dim):
                defect = star(z[i], z[j], ds) - z[i] * z[j] - half_i_hbar.scale(ds.JD[i, j])
                assert defect.is_zero


def test_coordinate_moyal_identity():
    for ds in coordinate_systems():
        z = Symbol.coordinates(ds.space)
        for i in range(ds.space.dim):
            for j in range(ds.space.dim):
                assert moyal(z[i], z[j], ds) == Symbol.constant(ds.space, ds.JD[i, j])
                assert moyal_dirac_defect(z[i], z[j], ds).is_zero


def test_coordinate_commutators():
    i_hbar = Symbol.constant(SPACE, IMAGINARY_UNIT) * Symbol.hbar(SPACE)
    z = Symbol.coordinates(SPACE)
    for i in range(4):
        for j in range(4):
            assert star_commutator(z[i], z[j], S2) == i_hbar.scale(S2.JD[i, j])


# ============================================================================
# PRODUCT PROPERTIES
# ============================================================================

def test_star_matches_index_summation_oracle():
    rng = np.random.default_rng(21)
    for ds in (S1, S2):
        for _ in range(15):
            a = random_symbol(rng, SPACE, max_degree=3, with_hbar=True)
            b = random_symbol(rng, SPACE, max_degree=3)
            assert star(a, b, ds) == oracle_star(a, b, ds.JD)
    kernel = symplectic_matrix(SPACE)
    a, b = sym("q1^2*p2 + q2*p1"), sym("p1^2*q2 - q1")
    assert standard_star(a, b) == oracle_star(a, b, kernel)


def test_series_terminates():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = random_symbol(rng, SPACE), random_symbol(rng, SPACE)
        bound = min(a.z_degree, b.z_degree)
        powers = bidifferential_powers(a, b, S2.JD)
        assert len(powers) == bound + 1
        assert oracle_power(a, b, S2.JD, bound + 1).is_zero
        for k, power in enumerate(powers):
            assert power == oracle_power(a, b, S2.JD, k)


def test_hbar_zero_grade_is_pointwise_product():
    rng = np.random.default_rng(6)
    for _ in range(30):
        a, b = random_symbol(rng, SPACE), random_symbol(rng, SPACE)
        assert star(a, b, S2).hbar_coefficient(0) == a * b


@pytest.mark.slow
@pytest.mark.parametrize("ds", [S1, S2], ids=["S1", "S2"])
def test_star_associativity(ds):
    rng = np.random.default_rng(100)
    for _ in range(50):
        a, b, c = (random_symbol(rng, SPACE) for _ in range(3))
        assert star(star(a, b, ds), c, ds) == star(a, star(b, c, ds), ds)


@pytest.mark.slow
def test_moyal_jacobi_identity():
    rng = np.random.default_rng(101)
    for index in range(100):
        ds = S1 if index % 2 else S2
        a, b, c = (random_symbol(rng, SPACE) for _ in range(3))
        assert jacobi_defect("moyal", a, b, c, ds).is_zero


def test_moyal_is_real_and_even_for_real_inputs():
    rng = np.random.default_rng(13)
    for _ in range(40):
        a, b = random_symbol(rng, SPACE), random_symbol(rng, SPACE)
        result = moyal(a, b, S2)
        assert result.is_real
        assert all(k % 2 == 0 for k in result.hbar_powers)
        assert result == oracle_sine_moyal(a, b, S2.JD)


def test_semiclassical_limit():
    rng = np.random.default_rng(30)
    for index in range(100):
        ds = S1 if index % 2 else S2
        a, b = random_symbol(rng, SPACE), random_symbol(rng, SPACE)
        defect = moyal_dirac_defect(a, b, ds)
        assert defect.hbar_coefficient(0).is_zero
        assert defect.hbar_coefficient(1).is_zero


def test_moyal_dirac_defect_examples():
    assert moyal_dirac_defect(sym("q1^2"), sym("p1^2"), S1).is_zero
    assert moyal_dirac_defect(sym("q1^3"), sym("p1^3"), S1) == sym("-3/2*hbar^2")


def test_moyal_equals_dirac_on_linear_left_argument():
    rng = np.random.default_rng(31)
    for _ in range(20):
        h = random_symbol(rng, SPACE, max_degree=4)
        for z in Symbol.coordinates(SPACE):
            assert moyal(z, h, S2) == dirac(z, h, S2)


# ============================================================================
# EQUIVALENCE CLASSES
# ============================================================================

def test_reduce_examples():
    assert reduce_to_canonical(sym("q2^2 + q1"), S1).representative == sym("q1")
    assert reduce_to_canonical(sym("q2"), S2).representative == sym("q1")
    for ds in (S1, S2):
        for phi in ds.constraint_symbols():
            assert reduce_to_canonical(phi, ds).representative.is_zero


def test_reduce_is_idempotent_and_pivot_free():
    rng = np.random.default_rng(40)
    for _ in range(20):
        a = random_symbol(rng, SPACE, with_hbar=True)
        representative = reduce_to_canonical(a, S2).representative
        assert reduce_to_canonical(representative, S2).representative == representative
        for pivot in S2.pivot_columns:
            assert representative.partial_derivative(pivot).is_zero


def test_class_equal_examples():
    assert class_equal(sym("q1 + q2*p1^5"), sym("q1"), S1)
    assert class_equal(sym("q1^2*p2"), sym("q1^2*p2"), S2)
    assert not class_equal(sym("q1"), sym("p1"), S1)


def test_class_independence():
    rng = np.random.default_rng(50)
    for index in range(50):
        ds = S1 if index % 2 else S2
        a, b = random_symbol(rng, SPACE), random_symbol(rng, SPACE)
        f = random_symbol(rng, SPACE, max_degree=2)
        phi = ds.constraint_symbols()[int(rng.integers(2))]
        shifted = a + f * phi
        assert class_equal(star(shifted, b, ds), star(a, b, ds), ds)
        assert class_equal(star(b, shifted, ds), star(b, a, ds), ds)


def test_constraints_generate_a_star_ideal():
    rng = np.random.default_rng(60)
    for ds in (S1, S2):
        zero = Symbol.zero(SPACE)
        for _ in range(50):
            a = random_symbol(rng, SPACE)
            for phi in ds.constraint_symbols():
                assert class_equal(star(phi, a, ds), zero, ds)
                assert class_equal(star(a, phi, ds), zero, ds)
