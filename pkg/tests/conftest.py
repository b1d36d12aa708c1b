import math

import numpy as np
import pytest

from fiberloop.architecture import ArchitectureSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def single(theta_over_pi, photons, d, phi=0.0):
    return ArchitectureSpec.single_loop(theta_over_pi * math.pi, photons, d, phi=phi)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_antihermitian(rng, n):
    a = random_complex(rng, n, n)
    return a - a.conj().T


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
