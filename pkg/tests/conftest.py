"""Shared fixtures for the netdomain test suites."""
import numpy as np
import pandas as pd
import pytest

from netdomain.core.config import get_settings


@pytest.fixture(autouse=True)
def _quiet_settings(monkeypatch):
    """Keep tests independent of a developer's .env and progress bars."""
    monkeypatch.setenv("NETDOMAIN_PROGRESS", "false")
    monkeypatch.setenv("NETDOMAIN_JOBS", "1")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def xor_task():
    """
    Two informative features whose XOR defines the label, plus one noise
    column. Points keep a margin from the 0.5 boundaries; both bits are
    set with probability 1/4 so a greedy first split still finds 0.5.
    """
    gen = np.random.default_rng(7)
    n = 200
    a = (gen.random(n) < 0.25).astype(np.int64)
    b = (gen.random(n) < 0.25).astype(np.int64)
    x1 = a * 0.6 + gen.uniform(0.0, 0.4, size=n)
    x2 = b * 0.6 + gen.uniform(0.0, 0.4, size=n)
    noise = gen.uniform(0.0, 1.0, size=n)
    X = pd.DataFrame({"x1": x1, "x2": x2, "noise": noise}, index=[f"n{i:03d}" for i in range(n)])
    y = (a ^ b).astype(np.int64)
    return X, y
