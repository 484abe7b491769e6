import pytest

from frobdens import kernels
from frobdens.fields import AbelianScenario, SnScenario


@pytest.fixture(scope="session", autouse=True)
def _jit_warm():
    # compile once so timing assertions measure the work, not numba
    kernels.warmup()


# session scenarios keep their classified prime tables between tests


@pytest.fixture(scope="session")
def tower15():
    """L = Q(zeta_15) over K = Q(zeta_5)."""
    return AbelianScenario(15, U=[11])


@pytest.fixture(scope="session")
def cubic_alt():
    return SnScenario([1, 0, 0, -2], "alternating")


@pytest.fixture(scope="session")
def cubic_full():
    return SnScenario([1, 0, 0, -2], "full")


@pytest.fixture(scope="session")
def cubic_trivial():
    return SnScenario([1, 0, 0, -2], "trivial")


@pytest.fixture(scope="session")
def gauss():
    return AbelianScenario(4)


@pytest.fixture(scope="session")
def cross12():
    """Q(zeta_12) over Q(i): Frobenius over Q decides p mod 4 and p mod 3."""
    return AbelianScenario(12, U=[5])


# acceptance criteria report one line each at the end of the run

_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{name} {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        _CRITERIA[name] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n[1:])):
        terminalreporter.write_line(_CRITERIA[name])
