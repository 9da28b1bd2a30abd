"""
Tests for problem file parsing and validation.
"""

import json
import logging

import pytest
from sympy import ImmutableMatrix, Rational

from dirac_wwm.errors import ProblemFileError, SecondClassViolationError
from dirac_wwm.problem_file import load_problem, parse_problem
from dirac_wwm.testing import S1_ALPHA, S2_ALPHA


def document(**data):
    base = {"n": 2, "constraints": [["0", "0", "1", "0"], ["0", "0", "0", "1"]]}
    base.update(data)
    return json.dumps(base, indent=2)


def test_reference_problems(problems_dir):
    s1 = load_problem(problems_dir / "s1.json")
    assert s1.name == "S1"
    assert s1.alpha == ImmutableMatrix(S1_ALPHA)
    assert s1.check().passed
    assert load_problem(problems_dir / "s2.json").alpha == ImmutableMatrix(S2_ALPHA)
    three = load_problem(problems_dir / "three_pairs.json")
    assert three.structure().C == ImmutableMatrix([[0, Rational(3, 2)], [Rational(-3, 2), 0]])


def test_sbad_loads_but_does_not_build(problems_dir):
    sbad = load_problem(problems_dir / "sbad.json")
    assert sbad.check().failure == "SecondClassViolation"
    with pytest.raises(SecondClassViolationError):
        sbad.structure()
    with pytest.raises(ProblemFileError):
        sbad.hamiltonian_symbol()


def test_system_from_problem(problems_dir):
    system = load_problem(problems_dir / "s2.json").system()
    assert system.H_c.z_degree == 2


def test_mixed_rows_and_expressions():
    problem = parse_problem(document(constraints=[[-1, 0, 1, 0], "p2/2"]))
    assert problem.alpha == ImmutableMatrix([[-1, 0, 1, 0], [0, 0, 0, Rational(1, 2)]])


@pytest.mark.parametrize("text, fragment", [
    ('{"n": 2, "constraints": [[0.5, 0, 1, 0], [0, 0, 0, 1]]}', "float"),
    ('{"n": 2, "constraints": [["1/0", "0", "1", "0"], ["0", "0", "0", "1"]]}', "zero denominator"),
    ('{"n": 0, "constraints": [["1", "0"]]}', "positive integer"),
    ('{"n": 2.0, "constraints": [["1", "0"]]}', "positive integer"),
    ('{"n": 2, "constraints": []}', "non-empty"),
    ('{"n": 2, "constraints": [["0", "0", "1", "0"], ["0", "1"]]}', "different lengths"),
    ('{"n": 2, "constraints": ["q1 + 1", "p2"]}', "constraint 'q1 + 1'"),
    ('{"n": 2, "constraints": ["q2", "p2"], "hamiltonian": "q1 +"}', "hamiltonian"),
    ('{"n": 2, "constraints": ["q2", "p2"], "hamiltonian": 3}', "expression string"),
    ('{"n": 2, "constraints": ["q2", "p2"], "name": 1.5}', "'name' must be a string"),
    ('[1, 2]', "JSON object"),
    ('{"n": 2,', "invalid JSON"),
])
def test_invalid_documents(text, fragment):
    with pytest.raises(ProblemFileError) as excinfo:
        parse_problem(text, "bad.json")
    assert fragment in str(excinfo.value)
    assert str(excinfo.value).startswith("bad.json")


def test_error_reports_line():
    text = document(constraints=[["0", "0", "1", "0"], ["0", "0", "0", "2/0"]])
    with pytest.raises(ProblemFileError) as excinfo:
        parse_problem(text, "bad.json")
    assert excinfo.value.line == text.splitlines().index('      "2/0"') + 1
    assert str(excinfo.value).startswith(f"bad.json:{excinfo.value.line}: ")


def test_unknown_keys_warn(caplog):
    with caplog.at_level(logging.WARNING):
        parse_problem(document(comment="free text"))
    assert "unknown keys ['comment']" in caplog.text


def test_missing_file(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "absent.json")
