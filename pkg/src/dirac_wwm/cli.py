"""
dirac-wwm command line

Commands:
    check        rank and second-class conditions of a problem's constraints
    structure    C, C^{-1}, JD, rank and pivot data (optionally after a random symplectic transform)
    bracket      poisson / dirac / moyal bracket of two expressions
    star         star product of two expressions
    reduce       canonical class representative of an expression
    darboux      Darboux chart T, its inverse and the Gram matrix
    multipliers  Lagrange multipliers and the total hamiltonian
    evolve       classical trajectory or Moyal evolution of an observable

Exit status: 0 success, 1 usage or input error, 2 constraint validation
failure, 3 refused computation.

Usage:
    python src/main.py check problems/s1.json
    python src/main.py star problems/s1.json "q1" "p1"
    python src/main.py evolve problems/s1.json --t 6.283185307179586 --initial "q1=1,p1=0"
"""

import functools
import json
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import click
import numpy as np
import pandas as pd

from config import OUTPUT_FORMATS, Settings

from .bracket_calculus import bracket_function
from .constraint_structure import apply_symplectic_transform, matrix_to_strings, random_symplectic
from .dynamics import (
    integrate_classical,
    iter_moyal_evolution,
    lagrange_multipliers,
    project_to_M,
    total_hamiltonian,
)
from .errors import ConstraintError, DegreeUnsupportedError, DiracWWMError
from .expression_parser import parse_symbol
from .problem_file import ProblemFile, load_problem
from .reduction import darboux_basis, gram_matrix
from .star_calculus import reduce_to_canonical, star
from .symbol_algebra import PhaseSpace, Symbol

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_REFUSED = 3

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


class DiracGroup(click.Group):
    """click group whose usage errors exit with status 1."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


# ============================================================================
# PLUMBING
# ============================================================================

def setup(env_file: Optional[str], verbose: bool) -> Settings:
    settings = Settings.from_env(env_file)
    level = logging.DEBUG if verbose else settings.log_level_value
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    return settings


def resolve_format(requested: Optional[str], settings: Settings, allowed: Sequence[str]) -> str:
    """Explicit --format must be supported; a configured default falls back to text."""
    if requested is not None:
        if requested not in allowed:
            raise click.BadParameter(f"{requested} output is not available for this command", param_hint='--format')
        return requested
    return settings.output_format if settings.output_format in allowed else 'text'


def emit(text: str, out: Optional[str]) -> None:
    if not text.endswith('\n'):
        text += '\n'
    if out:
        Path(out).write_text(text, encoding='utf-8')
        logger.info(f"Wrote {len(text)} bytes to {out}")
    else:
        click.echo(text, nl=False)


def format_matrix(matrix) -> str:
    return "[" + ", ".join("[" + ", ".join(row) + "]" for row in matrix_to_strings(matrix)) + "]"


def handle_errors(fn: Callable) -> Callable:
    """Map library exceptions onto exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ConstraintError as e:
            click.echo(f"Error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except DegreeUnsupportedError as e:
            click.echo(f"Error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_REFUSED)
        except DiracWWMError as e:
            click.echo(f"Error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            sys.exit(EXIT_USAGE)

    return wrapper


def common_options(formats: Sequence[str] = ('text', 'json')) -> Callable:
    def decorator(fn: Callable) -> Callable:
        fn = click.option('--env-file', default=None, help='Path to environment file (default: .env)')(fn)
        fn = click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')(fn)
        fn = click.option('--format', 'output_format', default=None, type=click.Choice(list(OUTPUT_FORMATS)),
                          help=f"Output format ({'|'.join(formats)}; default from DIRAC_WWM_OUTPUT_FORMAT)")(fn)
        fn = click.option('--out', default=None, type=click.Path(dir_okay=False), help='Write output to a file')(fn)
        fn = click.argument('problem_path', type=click.Path(dir_okay=False))(fn)
        return fn
    return decorator


def _symbol_result(result: Symbol, output_format: str) -> str:
    if output_format == 'json':
        return json.dumps({"result": str(result)}, indent=2)
    return str(result)


@click.group(cls=DiracGroup)
def cli():
    """Exact Weyl-Wigner-Moyal calculus for linear second-class constraints."""


# ============================================================================
# COMMANDS
# ============================================================================

@cli.command()
@common_options()
@handle_errors
def check(problem_path, out, output_format, verbose, env_file):
    """Check the rank and second-class conditions."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    report = problem.check()
    det_text = str(report.det_C) if report.det_C is not None else "n/a"

    if fmt == 'json':
        text = json.dumps({
            "name": problem.name,
            "n": problem.n,
            "constraints": report.rows,
            "rank": report.rank,
            "expected_rank": report.expected_rank,
            "det_C": det_text,
            "shape_ok": report.shape_ok,
            "rank_ok": report.rank_ok,
            "second_class_ok": report.second_class_ok,
            "passed": report.passed,
            "failure": report.failure,
        }, indent=2)
    else:
        def verdict(ok: bool, failure: str) -> str:
            if not report.shape_ok and failure != 'BadShape':
                return "skipped"
            return "PASS" if ok else f"FAIL {failure}"

        lines = []
        if problem.name:
            lines.append(f"problem: {problem.name}")
        lines.append(f"n = {problem.n}, 2m = {report.rows}")
        lines.append(f"shape: {verdict(report.shape_ok, 'BadShape')}")
        lines.append(f"rank(alpha) = {report.rank} (expected {report.expected_rank}): "
                     f"{verdict(report.rank_ok, 'RankDeficient')}")
        lines.append(f"det C = {det_text}: {verdict(report.second_class_ok, 'SecondClassViolation')}")
        lines.append(f"result: {'PASS' if report.passed else 'FAIL ' + report.failure}")
        text = "\n".join(lines)

    emit(text, out)
    if not report.passed:
        sys.exit(EXIT_VALIDATION)


@cli.command()
@common_options()
@click.option('--transform', 'seed', type=int, default=None, help='Apply random_symplectic(seed) first')
@handle_errors
def structure(problem_path, out, output_format, verbose, env_file, seed):
    """Print C, C^-1, JD, rank(JD) and the pivot solution."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    ds = problem.structure()
    S = None
    if seed is not None:
        S = random_symplectic(ds.space, seed)
        ds = apply_symplectic_transform(ds, S)

    dependent = {ds.space.coordinate_name(p): str(s) for p, s in ds.dependent_assignment().items()}
    if fmt == 'json':
        data = {}
        if S is not None:
            data["seed"] = seed
            data["S"] = matrix_to_strings(S)
            data["alpha"] = matrix_to_strings(ds.alpha)
        data.update({
            "C": matrix_to_strings(ds.C),
            "C_inv": matrix_to_strings(ds.C_inv),
            "JD": matrix_to_strings(ds.JD),
            "rank_JD": ds.jd_rank,
            "pivot_columns": list(ds.pivot_columns),
            "free_columns": list(ds.free_columns),
            "dependent_solution": dependent,
        })
        text = json.dumps(data, indent=2)
    else:
        lines = []
        if S is not None:
            lines.append(f"S (seed {seed}) = {format_matrix(S)}")
            lines.append(f"alpha' = {format_matrix(ds.alpha)}")
        lines.append(f"C = {format_matrix(ds.C)}")
        lines.append(f"C_inv = {format_matrix(ds.C_inv)}")
        lines.append(f"JD = {format_matrix(ds.JD)}")
        lines.append(f"rank(JD) = {ds.jd_rank}")
        lines.append(f"pivot columns = {list(ds.pivot_columns)}")
        lines.append(f"free columns = {list(ds.free_columns)}")
        lines.extend(f"{name} = {value}" for name, value in dependent.items())
        text = "\n".join(lines)
    emit(text, out)


@cli.command()
@common_options()
@click.argument('a')
@click.argument('b')
@click.option('--kind', type=click.Choice(['poisson', 'dirac', 'moyal', 'dirac-explicit']), default='dirac',
              show_default=True, help='Bracket to compute')
@click.option('--reduce', 'reduce_result', is_flag=True, help='Print the class representative')
@handle_errors
def bracket(problem_path, out, output_format, verbose, env_file, a, b, kind, reduce_result):
    """Bracket {A, B} of two expressions."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    ds = problem.structure() if kind != 'poisson' or reduce_result else None
    A, B = parse_symbol(a, problem.space), parse_symbol(b, problem.space)
    result = bracket_function(kind, ds, problem.space)(A, B)
    if reduce_result:
        result = reduce_to_canonical(result, ds).representative
    emit(_symbol_result(result, fmt), out)


@cli.command(name='star')
@common_options()
@click.argument('a')
@click.argument('b')
@click.option('--reduce', 'reduce_result', is_flag=True, help='Print the class representative')
@handle_errors
def star_command(problem_path, out, output_format, verbose, env_file, a, b, reduce_result):
    """Star product A * B."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    ds = problem.structure()
    result = star(parse_symbol(a, ds.space), parse_symbol(b, ds.space), ds)
    if reduce_result:
        result = reduce_to_canonical(result, ds).representative
    emit(_symbol_result(result, fmt), out)


@cli.command(name='reduce')
@common_options()
@click.argument('a')
@handle_errors
def reduce_command(problem_path, out, output_format, verbose, env_file, a):
    """Canonical representative of the class of A."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    ds = problem.structure()
    emit(_symbol_result(reduce_to_canonical(parse_symbol(a, ds.space), ds).representative, fmt), out)


@cli.command()
@common_options()
@handle_errors
def darboux(problem_path, out, output_format, verbose, env_file):
    """Darboux chart of the Dirac structure."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    problem = load_problem(problem_path)
    ds = problem.structure()
    chart = darboux_basis(ds)
    gram = gram_matrix(chart, ds)
    coordinates = {
        f"y{a + 1}": str(Symbol.from_linear_form(ds.space, list(chart.T.row(a))))
        for a in range(chart.reduced_space.dim)
    }
    if fmt == 'json':
        text = json.dumps({
            "T": matrix_to_strings(chart.T),
            "T_inv": matrix_to_strings(chart.T_inv),
            "gram": matrix_to_strings(gram),
            "reduced_n": chart.reduced_space.n,
            "coordinates": coordinates,
        }, indent=2)
    else:
        lines = [f"T = {format_matrix(chart.T)}",
                 f"T_inv = {format_matrix(chart.T_inv)}",
                 f"gram = {format_matrix(gram)}"]
        lines.extend(f"{name} = {value}" for name, value in coordinates.items())
        text = "\n".join(lines)
    emit(text, out)


@cli.command()
@common_options()
@handle_errors
def multipliers(problem_path, out, output_format, verbose, env_file):
    """Lagrange multipliers and the total hamiltonian."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'json'))
    system = load_problem(problem_path).system()
    values = {f"lambda{mu}": str(lam) for mu, lam in enumerate(lagrange_multipliers(system), start=1)}
    values["H_T"] = str(total_hamiltonian(system))
    if fmt == 'json':
        text = json.dumps(values, indent=2)
    else:
        text = "\n".join(f"{name} = {value}" for name, value in values.items())
    emit(text, out)


# ============================================================================
# EVOLVE
# ============================================================================

def parse_initial(text: str, space: PhaseSpace) -> np.ndarray:
    """'q1=1,p1=0.5' -> point; unspecified coordinates are 0."""
    point = np.zeros(space.dim)
    seen = set()
    for item in filter(None, (part.strip() for part in text.split(','))):
        name, sep, value = item.partition('=')
        name = name.strip()
        if not sep:
            raise click.BadParameter(f"expected name=value, got {item!r}", param_hint='--initial')
        if name in seen:
            raise click.BadParameter(f"{name} given twice", param_hint='--initial')
        try:
            index = space.index_of(name)
            point[index - 1] = float(value)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint='--initial') from None
        seen.add(name)
    return point


def frame_to_json(frame: pd.DataFrame) -> str:
    records = []
    for row in frame.itertuples(index=False):
        fields = ", ".join(f'"{column}": {float(value):.17g}' for column, value in zip(frame.columns, row))
        records.append("  {" + fields + "}")
    return "[\n" + ",\n".join(records) + "\n]"


def render_frame(frame: pd.DataFrame, output_format: str) -> str:
    if output_format == 'json':
        return frame_to_json(frame)
    return frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')


def observable_frame(states: List) -> pd.DataFrame:
    """t, real parts per basis monomial, and i*<monomial> columns for non-real observables."""
    first = states[0][1]
    names = [first.monomial_name(i) for i in range(len(first.basis))]
    complex_valued = any(not state.is_real for _, state in states)
    rows = []
    for t, state in states:
        row = [t, *state.coefficients.real]
        if complex_valued:
            row.extend(state.coefficients.imag)
        rows.append(row)
    columns = ['t', *names] + ([f"i*{name}" for name in names] if complex_valued else [])
    return pd.DataFrame(rows, columns=columns)


@cli.command()
@common_options(('csv', 'json'))
@click.option('--t', 't_end', type=float, required=True, help='End time')
@click.option('--dt', type=float, default=None, help='RK4 step (default from DIRAC_WWM_DEFAULT_DT)')
@click.option('--initial', default=None, help='Initial point, e.g. "q1=1,p1=0" (classical mode)')
@click.option('--quantum', is_flag=True, help='Moyal evolution of --observable instead of a trajectory')
@click.option('--observable', default=None, help='Observable expression (quantum mode)')
@click.option('--progress', is_flag=True, help='Show progress bars on stderr')
@handle_errors
def evolve(problem_path, out, output_format, verbose, env_file, t_end, dt, initial, quantum, observable, progress):
    """Classical trajectory or quantum evolution of an observable."""
    settings = setup(env_file, verbose)
    fmt = resolve_format(output_format, settings, ('text', 'csv', 'json'))
    dt = dt if dt is not None else settings.default_dt
    if not math.isfinite(dt) or dt <= 0:
        raise click.BadParameter("must be a positive finite number", param_hint='--dt')
    if not math.isfinite(t_end) or t_end < 0:
        raise click.BadParameter("must be a non-negative finite number", param_hint='--t')
    show_progress = progress or settings.show_progress

    problem = load_problem(problem_path)
    if quantum:
        if observable is None:
            raise click.UsageError("--quantum needs --observable")
        system = problem.system()
        A0 = parse_symbol(observable, system.space)
        states = list(iter_moyal_evolution(system, A0, t_end, dt, show_progress))
        frame = observable_frame(states)
    else:
        if initial is None:
            raise click.UsageError("classical evolution needs --initial")
        system = problem.system()
        z0 = parse_initial(initial, system.space)
        projected = project_to_M(z0, system.ds)
        shift = float(np.max(np.abs(projected - z0)))
        if shift > settings.projection_warn:
            logger.warning(f"Initial point moved by {shift:.3g} when projected onto the constraint surface")
        trajectory = integrate_classical(system, projected, t_end, dt,
                                         on_m_tolerance=settings.on_m_tolerance, show_progress=show_progress)
        frame = trajectory.to_frame()

    emit(render_frame(frame, 'json' if fmt == 'json' else 'csv'), out)


def main():
    cli(prog_name='dirac-wwm')


if __name__ == '__main__':
    main()
