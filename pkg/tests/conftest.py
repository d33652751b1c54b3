import pytest

from proofsketch.interp import default_data_dir, load_registry
from proofsketch.prover import SearchLimits, prove
from proofsketch.tptp import load_problem

DATA = default_data_dir()
TPTP = DATA / "tptp"
GCL = DATA / "gcl"


def problem(name: str):
    return load_problem((TPTP / name).read_text())


@pytest.fixture(scope="session")
def example1():
    return problem("example1.p")


@pytest.fixture(scope="session")
def p11():
    return problem("proposition_11.p")


@pytest.fixture(scope="session")
def varignon1():
    return problem("varignon_1.p")


@pytest.fixture(scope="session")
def varignon2():
    return problem("varignon_2.p")


@pytest.fixture(scope="session")
def example1_proof(example1):
    return prove(example1.theory, example1.conjecture())


@pytest.fixture(scope="session")
def p11_proof(p11):
    """The I.11 search is the slowest thing in the suite; run it once."""
    p = prove(p11.theory, p11.conjecture(), SearchLimits(12, 60.0))
    assert p, p
    return p


@pytest.fixture(scope="session")
def varignon1_proof(varignon1):
    return prove(varignon1.theory, varignon1.conjecture())


@pytest.fixture(scope="session")
def registry():
    return load_registry()
