import json
import sys
from pathlib import Path

import numpy as np
import pytest

from hetnet import validate

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
sys.path.insert(0, str(Path(__file__).parent))


def load(name):
    return validate(json.loads((CONFIGS / name).read_text()))


@pytest.fixture(scope="session")
def fig2():
    return load("fig2.json")


@pytest.fixture(scope="session")
def fig3():
    return load("fig3_u2.json")


@pytest.fixture(scope="session")
def fig5():
    return load("fig5.json")


@pytest.fixture(scope="session")
def siso():
    return load("siso_single.json")


def random_model(rng, K=None, max_dof=10, alpha=None, usdma=False):
    """Valid random network with D_k <= max_dof."""
    K = K or int(rng.integers(1, 5))
    U_common = int(rng.integers(1, 4))
    tiers = []
    for _ in range(K):
        U = U_common if usdma else int(rng.integers(1, 5))
        M = U + int(rng.integers(0, max_dof))
        tiers.append({
            "lambda_per_km2": float(rng.uniform(1, 1000)),
            "power_w": float(10 ** rng.uniform(-2, 1.5)),
            "bias": 1.0 if usdma else float(10 ** rng.uniform(-1, 1)),
            "antennas": M,
            "users": U,
        })
    a = float(rng.uniform(2.5, 5.0)) if alpha is None else alpha
    return validate({"alpha": a, "tiers": tiers})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
