"""
Tests for dynamics: multipliers, vector fields, RK4 integration and Moyal evolution.
"""

import math

import numpy as np
import pytest

from dirac_wwm.bracket_calculus import dirac, poisson
from dirac_wwm.constraint_structure import build_dirac_structure
from dirac_wwm.dynamics import (
    HamiltonianSystem,
    Trajectory,
    _step_sizes,
    dirac_vector_field,
    evolve_symbol_moyal,
    hamilton_vector_field,
    integrate_classical,
    iter_moyal_evolution,
    lagrange_multipliers,
    project_to_M,
    total_hamiltonian,
)
from dirac_wwm.errors import (
    DegreeUnsupportedError,
    HamiltonianError,
    InitialConditionOffMError,
    SpaceMismatchError,
)
from dirac_wwm.expression_parser import parse_symbol
from dirac_wwm.problem_file import load_problem
from dirac_wwm.star_calculus import moyal
from dirac_wwm.symbol_algebra import PhaseSpace, Symbol
from dirac_wwm.testing import S1_ALPHA, S2_ALPHA, random_symbol

SPACE = PhaseSpace(2)
S1 = build_dirac_structure(SPACE, S1_ALPHA)
S2 = build_dirac_structure(SPACE, S2_ALPHA)
OSCILLATOR = "(p1^2 + p2^2 + q1^2 + q2^2)/2"


def sym(text):
    return parse_symbol(text, SPACE)


def oscillator(ds):
    return HamiltonianSystem(ds, sym(OSCILLATOR))


# ============================================================================
# EXACT LAYER
# ============================================================================

def test_hamiltonian_validation():
    with pytest.raises(HamiltonianError):
        HamiltonianSystem(S1, sym("hbar*q1^2"))
    with pytest.raises(HamiltonianError):
        HamiltonianSystem(S1, sym("i*q1*p1"))
    with pytest.raises(SpaceMismatchError):
        HamiltonianSystem(S1, parse_symbol("q1^2", PhaseSpace(1)))


def test_multipliers_s1():
    assert lagrange_multipliers(oscillator(S1)) == [sym("-q2"), sym("-p2")]
    assert total_hamiltonian(oscillator(S1)) == sym("(p1^2 + q1^2 - p2^2 - q2^2)/2")


def test_multipliers_vanish_for_zero_hamiltonian():
    system = HamiltonianSystem(S2, Symbol.zero(SPACE))
    assert all(lam.is_zero for lam in lagrange_multipliers(system))
    assert all(component.is_zero for component in dirac_vector_field(system))


def test_vector_field_examples():
    assert dirac_vector_field(oscillator(S1)) == [sym("p1"), sym("-q1"), Symbol.zero(SPACE), Symbol.zero(SPACE)]
    assert dirac_vector_field(oscillator(S2)) == [sym("p1"), sym("-q1 - q2"), sym("p1"), Symbol.zero(SPACE)]


def test_hamilton_field_equals_dirac_field():
    rng = np.random.default_rng(90)
    for index in range(20):
        ds = S1 if index % 2 else S2
        system = HamiltonianSystem(ds, random_symbol(rng, SPACE, max_degree=3))
        assert hamilton_vector_field(system) == dirac_vector_field(system)


def test_flow_is_tangent_to_the_constraint_surface():
    rng = np.random.default_rng(91)
    for index in range(20):
        ds = S1 if index % 2 else S2
        system = HamiltonianSystem(ds, random_symbol(rng, SPACE, max_degree=3))
        field = dirac_vector_field(system)
        for mu in range(ds.alpha.rows):
            tangent = Symbol.zero(SPACE)
            for i, component in enumerate(field):
                tangent = tangent + component.scale(ds.alpha[mu, i])
            assert tangent.is_zero
        for phi in ds.constraint_symbols():
            assert (poisson(phi, system.H_c) + sum(
                (lam * poisson(phi, other) for lam, other in zip(lagrange_multipliers(system), ds.constraint_symbols())),
                Symbol.zero(SPACE))).is_zero


def test_hamiltonian_is_conserved_by_its_own_flow():
    rng = np.random.default_rng(94)
    for index in range(20):
        ds = S1 if index % 2 else S2
        h = random_symbol(rng, SPACE, max_degree=3, terms=6)
        assert dirac(h, h, ds).is_zero


def test_moyal_of_coordinates_is_the_dirac_field():
    rng = np.random.default_rng(92)
    for _ in range(10):
        h = random_symbol(rng, SPACE, max_degree=4)
        for z in Symbol.coordinates(SPACE):
            assert moyal(z, h, S2) == dirac(z, h, S2)


# ============================================================================
# CLASSICAL INTEGRATION
# ============================================================================

def test_step_sizes():
    steps = _step_sizes(1.0, 0.3)
    assert len(steps) == 4
    assert steps[-1] == pytest.approx(0.1)
    assert sum(steps) == pytest.approx(1.0)
    assert _step_sizes(1.0, 0.25) == [0.25] * 4
    assert _step_sizes(0.0, 0.1) == []
    with pytest.raises(ValueError):
        _step_sizes(1.0, 0.0)
    with pytest.raises(ValueError):
        _step_sizes(-1.0, 0.1)


def test_oscillator_returns_after_one_period():
    trajectory = integrate_classical(oscillator(S1), [1.0, 0.0, 0.0, 0.0], t_end=2 * math.pi, dt=1e-3)
    assert trajectory.times[-1] == 2 * math.pi
    assert np.allclose(trajectory.final_point, [1.0, 0.0, 0.0, 0.0], atol=1e-8)
    assert trajectory.max_constraint_residual() <= 1e-12
    assert trajectory.relative_energy_drift() <= 1e-8


def test_locked_oscillators_keep_the_constraints():
    period = 2 * math.pi / math.sqrt(2)
    trajectory = integrate_classical(oscillator(S2), [1.0, 0.0, 1.0, 0.0], t_end=period, dt=1e-3)
    assert np.allclose(trajectory.final_point, [1.0, 0.0, 1.0, 0.0], atol=1e-8)
    assert trajectory.max_constraint_residual() <= 1e-12
    assert trajectory.relative_energy_drift() <= 1e-8


def test_initial_point_off_the_surface():
    with pytest.raises(InitialConditionOffMError):
        integrate_classical(oscillator(S1), [1.0, 0.0, 1.0, 0.0], t_end=1.0, dt=0.1)


def test_project_to_m():
    assert np.allclose(project_to_M([1.0, 2.0, 3.0, 4.0], S1), [1.0, 2.0, 0.0, 0.0])
    assert np.allclose(project_to_M([0.0, 0.0, 1.0, 0.0], S2), [0.5, 0.0, 0.5, 0.0])
    on_m = [0.3, -0.2, 0.3, 0.0]
    assert np.allclose(project_to_M(on_m, S2), on_m)


def test_projection_of_large_points_is_accepted(problems_dir):
    system = load_problem(problems_dir / "three_pairs.json").system()
    alpha = np.array(system.ds.alpha.tolist(), dtype=float)
    rng = np.random.default_rng(93)
    for _ in range(50):
        z = project_to_M(rng.uniform(-1.0, 1.0, size=6) * 1e5, system.ds)
        assert np.max(np.abs(alpha @ z)) <= 1e-12 * max(1.0, np.max(np.abs(z)))
        trajectory = integrate_classical(system, z, t_end=0.01, dt=0.01)
        assert len(trajectory.times) == 2


def test_trajectory_frame():
    trajectory = integrate_classical(oscillator(S1), [1.0, 0.0, 0.0, 0.0], t_end=0.5, dt=0.1)
    frame = trajectory.to_frame()
    assert list(frame.columns) == ['t', 'q1', 'p1', 'q2', 'p2', 'phi1', 'phi2', 'H']
    assert len(frame) == 6
    assert frame['H'].iloc[0] == pytest.approx(0.5)


def test_energy_drift_of_empty_and_zero_energy_runs():
    assert Trajectory(SPACE).relative_energy_drift() == 0.0
    trajectory = Trajectory(SPACE)
    trajectory.record(0.0, np.zeros(4), np.zeros(2), 0.0)
    trajectory.record(1.0, np.zeros(4), np.zeros(2), 1e-3)
    assert trajectory.relative_energy_drift() == pytest.approx(1e-3)


# ============================================================================
# MOYAL EVOLUTION
# ============================================================================

def test_coordinates_rotate_under_the_oscillator():
    system = oscillator(S1)
    q1 = evolve_symbol_moyal(system, sym("q1"), t_end=1.0, dt=1e-3)
    assert q1.coefficient((1, 0, 0, 0)) == pytest.approx(math.cos(1.0), abs=1e-10)
    assert q1.coefficient((0, 1, 0, 0)) == pytest.approx(math.sin(1.0), abs=1e-10)
    p1 = evolve_symbol_moyal(system, sym("p1"), t_end=1.0, dt=1e-3)
    assert p1.coefficient((1, 0, 0, 0)) == pytest.approx(-math.sin(1.0), abs=1e-10)
    assert p1.coefficient((0, 1, 0, 0)) == pytest.approx(math.cos(1.0), abs=1e-10)
    assert q1.coefficient((0, 0, 1, 0)) == 0


def test_conserved_observables_stay_constant():
    system = oscillator(S2)
    one = evolve_symbol_moyal(system, Symbol.one(SPACE), t_end=1.0, dt=0.1)
    assert one.coefficient((0, 0, 0, 0)) == 1
    energy = evolve_symbol_moyal(system, system.H_c, t_end=1.0, dt=0.1)
    for (exps, k), coeff in system.H_c.items():
        assert energy.coefficient(exps, k) == pytest.approx(0.5)
    assert np.count_nonzero(energy.coefficients) == 4


def test_evolution_yields_the_grid():
    states = list(iter_moyal_evolution(oscillator(S1), sym("q1*p1"), t_end=0.3, dt=0.1))
    assert len(states) == 4
    assert states[0][0] == 0.0
    assert states[-1][0] == 0.3
    assert all(state.is_real for _, state in states)


def test_quartic_hamiltonian_is_refused():
    system = HamiltonianSystem(S1, sym("q1^4 + p1^2"))
    with pytest.raises(DegreeUnsupportedError):
        evolve_symbol_moyal(system, sym("q1"), t_end=1.0, dt=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("ds", [S1, S2], ids=["S1", "S2"])
def test_moyal_evolution_of_coordinates_matches_the_classical_flow(ds):
    system = oscillator(ds)
    starts = np.array(ds.null_space_basis.tolist(), dtype=float).T
    finals = [integrate_classical(system, z0, t_end=1.0, dt=1e-3).final_point for z0 in starts]
    for i, z in enumerate(Symbol.coordinates(SPACE)):
        evolved = evolve_symbol_moyal(system, z, t_end=1.0, dt=1e-3)
        linear = np.array([evolved.coefficient(unit) for unit in np.eye(SPACE.dim, dtype=int).tolist()])
        for z0, final in zip(starts, finals):
            assert linear @ z0 == pytest.approx(final[i], abs=1e-10)
