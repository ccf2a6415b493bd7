"""Shared fixtures. Puts the project root on sys.path so flat modules import."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from estimators import make_sample  # noqa: E402
from models import Sample  # noqa: E402

DANISH_ENV_VAR = "TAILAVG_DANISH"


def pytest_collection_modifyitems(config, items):
    if os.environ.get("TAILAVG_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="desk-scale Monte Carlo run; set TAILAVG_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pareto_draws(alpha: float, beta: float, n: int, seed: int) -> np.ndarray:
    """Inverse-CDF Pareto sampler beta * U^(-1/alpha)."""
    u = np.random.default_rng(seed).uniform(size=n)
    return beta * (1.0 - u) ** (-1.0 / alpha)


@pytest.fixture
def pareto_sample() -> Sample:
    """2500 draws from Pareto(alpha=1, beta=1)."""
    return make_sample(pareto_draws(1.0, 1.0, 2500, seed=11))


@pytest.fixture
def heavy_sample() -> Sample:
    """Absolute Student-t(3) draws: a power tail with a non-Pareto body."""
    rng = np.random.default_rng(5)
    return make_sample(rng.standard_t(3, size=1500), take_abs=True)


@pytest.fixture
def danish_path() -> Path:
    raw = os.environ.get(DANISH_ENV_VAR)
    if not raw or not Path(raw).is_file():
        pytest.skip(f"Danish fire losses not available; set {DANISH_ENV_VAR} to the data file")
    return Path(raw)
