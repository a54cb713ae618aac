import numpy as np
import pytest

from hpb.channel_model import SystemConfig, sample_realization

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, title, passed, detail):
    ACCEPTANCE[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number}. {title}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return SystemConfig(M=4, N=2, L=6, P=3)


@pytest.fixture
def small_realization(small_config):
    return sample_realization(small_config, np.random.default_rng(7))


def random_case(rng, max_N=3, max_L=16, max_P=8, M=None):
    """Random (config, realization) drawn from the small-instance family."""
    N = int(rng.integers(1, max_N + 1))
    L = 2 * int(rng.integers(1, max_L // 2 + 1))
    P = int(rng.integers(1, max_P + 1))
    M = M or int(rng.integers(1, 9))
    delta = float(rng.choice([0.25, 0.5, 0.5, 0.75]))
    config = SystemConfig(M=M, N=N, L=L, P=P, delta=delta)
    return config, sample_realization(config, rng)
