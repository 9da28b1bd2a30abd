"""
Dynamics - Lagrange multipliers, Dirac-Hamilton flow and Moyal evolution

The exact layer (multipliers, vector fields) works on Symbols. Numbers only
enter at the integrator boundary: vector fields are turned into numpy
callables with sympy's lambdify and stepped with classic fourth-order
Runge-Kutta on a fixed grid whose final step is shortened to land on t_end.

Quantum evolution dA/dt = {A, H_c}_M is restricted to hamiltonians of degree
at most 2, where the Moyal bracket preserves the space of polynomials of
degree <= deg A and the flow is a linear ODE on a finite coefficient vector.

Usage:
    sys = HamiltonianSystem(ds, parse_symbol("(p1^2 + q1^2)/2", ds.space))
    trajectory = integrate_classical(sys, [1.0, 0.0, 0.0, 0.0], t_end=6.28, dt=1e-3)
    print(trajectory.to_frame().tail())
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import lambdify
from tqdm import tqdm

from .bracket_calculus import dirac, poisson
from .constraint_structure import DiracStructure
from .errors import (
    DegreeUnsupportedError,
    DimensionMismatchError,
    HamiltonianError,
    InitialConditionOffMError,
    SpaceMismatchError,
)
from .star_calculus import moyal
from .symbol_algebra import PhaseSpace, Symbol, TermKey, scalar_to_complex

logger = logging.getLogger(__name__)

ON_M_TOLERANCE = 1e-12


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class HamiltonianSystem:
    """Constrained system with a real, hbar-free canonical hamiltonian."""
    ds: DiracStructure
    H_c: Symbol

    def __post_init__(self):
        if self.H_c.space != self.ds.space:
            raise SpaceMismatchError(f"hamiltonian lives in n={self.H_c.space.n}, constraints in n={self.ds.space.n}")
        if not self.H_c.is_hbar_free:
            raise HamiltonianError(f"hamiltonian {self.H_c} depends on hbar")
        if not self.H_c.is_real:
            raise HamiltonianError(f"hamiltonian {self.H_c} has non-real coefficients")

    @property
    def space(self) -> PhaseSpace:
        return self.ds.space


@dataclass
class Trajectory:
    """Time series of a classical run; residuals are alpha . z(t)."""
    space: PhaseSpace
    times: List[float] = field(default_factory=list)
    points: List[np.ndarray] = field(default_factory=list)
    constraint_residuals: List[np.ndarray] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)

    def record(self, t: float, z: np.ndarray, residual: np.ndarray, energy: float) -> None:
        self.times.append(float(t))
        self.points.append(np.array(z, dtype=float))
        self.constraint_residuals.append(np.array(residual, dtype=float))
        self.energy.append(float(energy))

    @property
    def final_point(self) -> np.ndarray:
        return self.points[-1]

    def max_constraint_residual(self) -> float:
        if not self.constraint_residuals:
            return 0.0
        return float(max(np.max(np.abs(r)) if r.size else 0.0 for r in self.constraint_residuals))

    def relative_energy_drift(self) -> float:
        """max_t |H(t) - H(0)| / |H(0)|, or the absolute drift when H(0) = 0."""
        if not self.energy:
            return 0.0
        start = self.energy[0]
        drift = max(abs(e - start) for e in self.energy)
        return drift / abs(start) if start != 0 else drift

    def columns(self) -> List[str]:
        count = self.constraint_residuals[0].size if self.constraint_residuals else 0
        return ['t', *self.space.coordinate_names, *[f"phi{mu}" for mu in range(1, count + 1)], 'H']

    def to_frame(self) -> pd.DataFrame:
        rows = [
            [t, *z, *r, h]
            for t, z, r, h in zip(self.times, self.points, self.constraint_residuals, self.energy)
        ]
        return pd.DataFrame(rows, columns=self.columns())


@dataclass
class FloatSymbol:
    """Symbol with complex float coefficients on a fixed monomial basis."""
    space: PhaseSpace
    basis: List[TermKey]
    coefficients: np.ndarray

    def coefficient(self, exps: Sequence[int], k: int = 0) -> complex:
        key = (tuple(exps), k)
        try:
            return complex(self.coefficients[self.basis.index(key)])
        except ValueError:
            return 0j

    def monomial_name(self, index: int) -> str:
        exps, k = self.basis[index]
        factors = []
        if k:
            factors.append("hbar" if k == 1 else f"hbar^{k}")
        for name, e in zip(self.space.coordinate_names, exps):
            if e:
                factors.append(name if e == 1 else f"{name}^{e}")
        return "*".join(factors) if factors else "1"

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coefficients.imag == 0))


# ============================================================================
# EXACT LAYER
# ============================================================================

def lagrange_multipliers(sys: HamiltonianSystem) -> List[Symbol]:
    """lambda_mu = - sum_nu C^{-1}_{mu nu} {Phi_nu, H_c}."""
    ds = sys.ds
    brackets = [poisson(phi, sys.H_c) for phi in ds.constraint_symbols()]
    multipliers = []
    for mu in range(ds.alpha.rows):
        value = Symbol.zero(ds.space)
        for nu, b in enumerate(brackets):
            c = ds.C_inv[mu, nu]
            if c != 0:
                value = value - b.scale(c)
        multipliers.append(value)
    return multipliers


def total_hamiltonian(sys: HamiltonianSystem) -> Symbol:
    """H = H_c + sum_mu lambda_mu Phi_mu."""
    result = sys.H_c
    for lam, phi in zip(lagrange_multipliers(sys), sys.ds.constraint_symbols()):
        result = result + lam * phi
    return result


def hamilton_vector_field(sys: HamiltonianSystem) -> List[Symbol]:
    """z_i' = {z_i, H_c} + sum_mu lambda_mu {z_i, Phi_mu}, multipliers held as coefficients."""
    lambdas = lagrange_multipliers(sys)
    phis = sys.ds.constraint_symbols()
    field_components = []
    for z in Symbol.coordinates(sys.space):
        component = poisson(z, sys.H_c)
        for lam, phi in zip(lambdas, phis):
            component = component + lam * poisson(z, phi)
        field_components.append(component)
    return field_components


def dirac_vector_field(sys: HamiltonianSystem) -> List[Symbol]:
    """z_i' = {z_i, H_c}_D."""
    return [dirac(z, sys.H_c, sys.ds) for z in Symbol.coordinates(sys.space)]


# ============================================================================
# NUMERIC LAYER
# ============================================================================

def _step_sizes(t_end: float, dt: float) -> List[float]:
    if dt <= 0 or not math.isfinite(dt):
        raise ValueError(f"time step must be positive, got {dt}")
    if t_end < 0 or not math.isfinite(t_end):
        raise ValueError(f"end time must be non-negative, got {t_end}")
    full = int(math.floor(t_end / dt + 1e-9))
    steps = [dt] * full
    remainder = t_end - full * dt
    if remainder > 1e-12 * max(1.0, t_end):
        steps.append(remainder)
    elif remainder < 0 and steps:
        steps[-1] += remainder
    return steps


def _numeric_field(components: Sequence[Symbol], space: PhaseSpace) -> Callable[[np.ndarray], np.ndarray]:
    coords = space.ring.symbols[:-1]
    fn = lambdify(coords, [c.to_expr() for c in components], modules='numpy')
    return lambda z: np.array(fn(*z), dtype=float)


def _rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def project_to_M(z: Sequence[float], ds: DiracStructure) -> np.ndarray:
    """Euclidean least-squares projection onto ker alpha."""
    z = np.asarray(z, dtype=float)
    if z.shape != (ds.space.dim,):
        raise DimensionMismatchError(f"point has shape {z.shape}, expected ({ds.space.dim},)")
    basis = np.array(ds.null_space_basis.tolist(), dtype=float)
    coefficients, *_ = np.linalg.lstsq(basis, z, rcond=None)
    projected = basis @ coefficients
    # one exact-Gram correction step removes the lstsq drift along the rows of alpha
    alpha = np.array(ds.alpha.tolist(), dtype=float)
    gram_inverse = np.array(ds.alpha_gram_inverse.tolist(), dtype=float)
    return projected - alpha.T @ (gram_inverse @ (alpha @ projected))


def integrate_classical(sys: HamiltonianSystem, z0: Sequence[float], t_end: float, dt: float,
                        on_m_tolerance: float = ON_M_TOLERANCE, show_progress: bool = False) -> Trajectory:
    """
    Fixed-step RK4 on the Dirac vector field.

    Raises:
        InitialConditionOffMError: |alpha z0| exceeds on_m_tolerance * max(1, |z0|)
    """
    space = sys.space
    z = np.asarray(z0, dtype=float)
    if z.shape != (space.dim,):
        raise DimensionMismatchError(f"initial point has shape {z.shape}, expected ({space.dim},)")
    alpha = np.array(sys.ds.alpha.tolist(), dtype=float)
    residual = alpha @ z
    if np.max(np.abs(residual)) > on_m_tolerance * max(1.0, float(np.max(np.abs(z)))):
        raise InitialConditionOffMError(f"initial point violates the constraints: alpha z0 = {residual.tolist()}")

    steps = _step_sizes(t_end, dt)
    f = _numeric_field(dirac_vector_field(sys), space)
    energy = _numeric_field([sys.H_c], space)

    trajectory = Trajectory(space)
    t = 0.0
    trajectory.record(t, z, residual, energy(z)[0])
    for index, h in enumerate(tqdm(steps, desc="Integrating", unit="step", disable=not show_progress)):
        z = _rk4_step(f, z, h)
        t = t_end if index == len(steps) - 1 else t + h
        trajectory.record(t, z, alpha @ z, energy(z)[0])

    logger.debug(f"Integrated {len(steps)} RK4 steps to t={t_end}")
    return trajectory


def _moyal_basis(A0: Symbol) -> List[TermKey]:
    space = A0.space
    powers = A0.hbar_powers or [0]
    basis = []
    for degree in range(A0.z_degree, -1, -1):
        monomials = []
        for combo in combinations_with_replacement(range(space.dim), degree):
            exps = [0] * space.dim
            for i in combo:
                exps[i] += 1
            monomials.append(tuple(exps))
        for exps in sorted(monomials, reverse=True):
            basis.extend((exps, k) for k in powers)
    return basis


def moyal_generator(sys: HamiltonianSystem, basis: List[TermKey]) -> np.ndarray:
    """Matrix L with d c / dt = L c for A = sum_b c_b b."""
    if sys.H_c.z_degree > 2:
        raise DegreeUnsupportedError(
            f"quantum evolution needs a hamiltonian of degree <= 2, got degree {sys.H_c.z_degree}"
        )
    index = {key: i for i, key in enumerate(basis)}
    L = np.zeros((len(basis), len(basis)), dtype=complex)
    for column, key in enumerate(basis):
        image = moyal(Symbol.from_terms(sys.space, {key: 1}), sys.H_c, sys.ds)
        for term, coeff in image.items():
            L[index[term], column] = scalar_to_complex(coeff)
    return L


def iter_moyal_evolution(sys: HamiltonianSystem, A0: Symbol, t_end: float, dt: float,
                         show_progress: bool = False) -> Iterator[Tuple[float, FloatSymbol]]:
    """
    Yield (t, A(t)) on the RK4 grid, starting with (0, A0).

    Raises:
        DegreeUnsupportedError: deg H_c > 2
    """
    if A0.space != sys.space:
        raise SpaceMismatchError(f"observable lives in n={A0.space.n}, system in n={sys.space.n}")
    basis = _moyal_basis(A0)
    L = moyal_generator(sys, basis)
    steps = _step_sizes(t_end, dt)

    terms = dict(A0.items())
    c = np.array([scalar_to_complex(terms[key]) if key in terms else 0j for key in basis], dtype=complex)
    f = lambda y: L @ y

    t = 0.0
    yield t, FloatSymbol(sys.space, basis, c.copy())
    for index, h in enumerate(tqdm(steps, desc="Evolving", unit="step", disable=not show_progress)):
        c = _rk4_step(f, c, h)
        t = t_end if index == len(steps) - 1 else t + h
        yield t, FloatSymbol(sys.space, basis, c.copy())
    logger.debug(f"Moyal evolution on a basis of {len(basis)} monomials, {len(steps)} steps")


def evolve_symbol_moyal(sys: HamiltonianSystem, A0: Symbol, t_end: float, dt: float,
                        show_progress: bool = False) -> FloatSymbol:
    """A(t_end) under dA/dt = {A, H_c}_M."""
    state = None
    for _, state in iter_moyal_evolution(sys, A0, t_end, dt, show_progress):
        pass
    return state
