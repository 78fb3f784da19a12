import numpy as np
import pytest

from opdkit.hs import BipartiteOperator, random_density

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_REPORT: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_REPORT, key=lambda k: int(k.split()[0])):
            terminalreporter.write_line(ACCEPTANCE_REPORT[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20221)


def random_two_qubit(rng):
    return BipartiteOperator(random_density(4, rng), 2, 2)


def realigned_rank(op: BipartiteOperator, tol: float) -> int:
    """Schmidt rank via the textbook reshuffle R[(s,s'),(e,e')] = O[(s,e),(s',e')]."""
    ds, de = op.dim_s, op.dim_e
    r = op.matrix.reshape(ds, de, ds, de).transpose(0, 2, 1, 3).reshape(ds * ds, de * de)
    s = np.linalg.svd(r, compute_uv=False)
    return int(np.sum(s > tol * s[0]))
