"""
dirac_wwm
=========

Exact computer algebra for the Weyl-Wigner-Moyal formulation of systems with
linear second-class constraints.

Main Components:
- symbol_algebra / expression_parser: polynomial Weyl symbols over Q(i)[hbar]
- constraint_structure: C, C^{-1}, JD and pivot data from the constraint matrix
- bracket_calculus: Poisson and Dirac brackets, Jacobi defects
- star_calculus: star product, Moyal bracket, equivalence classes
- reduction: Darboux chart and reduced-space consistency
- dynamics: Lagrange multipliers, classical flow, Moyal evolution

Quick Start:
-----------
    >>> from dirac_wwm import PhaseSpace, build_dirac_structure, parse_symbol, star
    >>> space = PhaseSpace(2)
    >>> ds = build_dirac_structure(space, [[0, 0, 1, 0], [0, 0, 0, 1]])
    >>> print(star(parse_symbol("q1", space), parse_symbol("p1", space), ds))
    q1*p1 + (1/2)*i*hbar
"""

from .symbol_algebra import (
    PhaseSpace,
    Symbol,
    arith,
    evaluate,
    format_symbol,
    from_semiclassical_terms,
    hbar_coefficient,
    partial_derivative,
    semiclassical_terms,
    substitute_linear,
    to_scalar,
)
from .expression_parser import parse_symbol
from .constraint_structure import (
    ConstraintReport,
    ConstraintSet,
    DiracStructure,
    apply_symplectic_transform,
    build_dirac_structure,
    check_constraints,
    jd_rank,
    nullspace_defect,
    parse_constraint,
    random_symplectic,
    symplectic_matrix,
)
from .bracket_calculus import contract_bracket, dirac, dirac_explicit, jacobi_defect, poisson
from .star_calculus import (
    EquivalenceClass,
    bidifferential_powers,
    class_equal,
    groenewold_product,
    moyal,
    moyal_dirac_defect,
    moyal_standard,
    reduce_to_canonical,
    standard_star,
    star,
    star_commutator,
)
from .reduction import (
    ReducedChart,
    darboux_basis,
    gram_matrix,
    pull_from_reduced,
    push_to_reduced,
    reduced_moyal_consistency,
    reduced_star_consistency,
)
from .dynamics import (
    FloatSymbol,
    HamiltonianSystem,
    Trajectory,
    dirac_vector_field,
    evolve_symbol_moyal,
    hamilton_vector_field,
    integrate_classical,
    iter_moyal_evolution,
    lagrange_multipliers,
    project_to_M,
    total_hamiltonian,
)
from .problem_file import ProblemFile, load_problem, parse_problem

__version__ = "0.1.0"

__all__ = [
    "PhaseSpace", "Symbol", "arith", "evaluate", "format_symbol", "from_semiclassical_terms",
    "hbar_coefficient", "partial_derivative", "semiclassical_terms", "substitute_linear", "to_scalar",
    "parse_symbol",
    "ConstraintReport", "ConstraintSet", "DiracStructure", "apply_symplectic_transform",
    "build_dirac_structure", "check_constraints", "jd_rank", "nullspace_defect", "parse_constraint",
    "random_symplectic", "symplectic_matrix",
    "contract_bracket", "dirac", "dirac_explicit", "jacobi_defect", "poisson",
    "EquivalenceClass", "bidifferential_powers", "class_equal", "groenewold_product", "moyal",
    "moyal_dirac_defect", "moyal_standard", "reduce_to_canonical", "standard_star", "star", "star_commutator",
    "ReducedChart", "darboux_basis", "gram_matrix", "pull_from_reduced", "push_to_reduced",
    "reduced_moyal_consistency", "reduced_star_consistency",
    "FloatSymbol", "HamiltonianSystem", "Trajectory", "dirac_vector_field", "evolve_symbol_moyal",
    "hamilton_vector_field", "integrate_classical", "iter_moyal_evolution", "lagrange_multipliers",
    "project_to_M", "total_hamiltonian",
    "ProblemFile", "load_problem", "parse_problem",
]
