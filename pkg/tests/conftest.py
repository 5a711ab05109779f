import numpy as np
import pytest

from nsswipt.system_model import SystemConfig, generate_channels


@pytest.fixture
def cfg():
    return SystemConfig()


@pytest.fixture
def ch(cfg):
    return generate_channels(cfg, 0)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rand_herm(rng, n):
    A = crandn(rng, n, n)
    return (A + A.conj().T) / 2


ACCEPTANCE = {}  # criterion number -> (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
