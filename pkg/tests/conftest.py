import os
import tempfile

import hypothesis
import pytest

# pepbcd.config reads the data folder on import
os.environ.setdefault("PEPBCD_DATA_DIR", tempfile.mkdtemp(prefix="pepbcd-tests-"))

hypothesis.settings.register_profile("ci", deadline=None, max_examples=50)
hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

from pepbcd.core.expr import LipschitzVector  # noqa: E402
from pepbcd.pep import SolverOptions  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def options() -> SolverOptions:
    return SolverOptions(solver="CLARABEL", tol=1e-8)


@pytest.fixture
def unit2() -> LipschitzVector:
    return LipschitzVector.unit(2)


@pytest.fixture
def counterexample_path() -> str:
    return os.path.join(FIXTURES, "counterexample.json")
