import numpy as np
import pytest

from liegrad.pauli import PauliLabel


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_label(rng, d, allow_identity=True):
    while True:
        word = tuple(int(x) for x in rng.integers(0, 4, size=d))
        if allow_identity or any(word):
            return PauliLabel(word)


def ket(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail="", soft=False):
    status = "PASS" if ok else ("FAIL (soft)" if soft else "FAIL")
    line = f"{status} criterion {number:>2}: {title}" + (f" [{detail}]" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
