"""
Shared fixtures: the reference systems S1, S2 and the problems directory.
"""

import numpy as np
import pytest
from hypothesis import settings

from dirac_wwm.constraint_structure import build_dirac_structure
from dirac_wwm.symbol_algebra import PhaseSpace
from dirac_wwm.testing import S1_ALPHA, S2_ALPHA

settings.register_profile("dirac_wwm", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("dirac_wwm")


@pytest.fixture
def space2():
    return PhaseSpace(2)


@pytest.fixture
def s1(space2):
    return build_dirac_structure(space2, S1_ALPHA)


@pytest.fixture
def s2(space2):
    return build_dirac_structure(space2, S2_ALPHA)


@pytest.fixture(params=["S1", "S2"])
def system(request, space2):
    return build_dirac_structure(space2, S1_ALPHA if request.param == "S1" else S2_ALPHA)


@pytest.fixture
def problems_dir(pytestconfig):
    return pytestconfig.rootpath / "problems"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
