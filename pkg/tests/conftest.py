import numpy as np
import pytest

from spintransfer import ChainSpec, RestStateKind, chain_propagator, rest_state

ACCEPTANCE_LINES = []


def record(label: str, ok: bool, detail: str = "") -> bool:
    line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def chain3():
    spec = ChainSpec(3)
    return spec, rest_state(spec, RestStateKind.ground()), chain_propagator(spec)


@pytest.fixture(scope="session")
def chain4():
    spec = ChainSpec(4)
    return spec, rest_state(spec, RestStateKind.ground()), chain_propagator(spec)
