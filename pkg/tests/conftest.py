import numpy as np
import pytest

from gsphqc.experiments import Scenario, synthetic_points, synthetic_signal
from gsphqc.graph import build_knn_graph, build_sampling_set, spectral_decompose


def desk_scenario(N=10, F=4, S=6, seed=3, K=3, theta=500.0, amp=1.0, strategy="greedy_minsv"):
    """Small synthetic station network with a bandlimited signal on it."""
    basis = spectral_decompose(build_knn_graph(synthetic_points(N, seed), K, theta))
    basis, x = synthetic_signal(basis, F, amp, seed)
    ds = build_sampling_set(basis, S, strategy, 1)
    return Scenario(basis, ds, x)


def random_symmetric(n, rng, density=0.5):
    a = rng.random((n, n)) * (rng.random((n, n)) < density)
    a = np.triu(a, 1)
    return a + a.T


@pytest.fixture
def desk():
    return desk_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def desk_config_dict(**over):
    """A small, fast, fully explicit synthetic experiment config."""
    d = {
        "schema_version": 1,
        "graph": {"source": "synthetic", "node_count": 10, "seed": 3},
        "K": 3,
        "theta": 500.0,
        "F_count": 4,
        "sample_count": 6,
        "sampling": {"strategy": "greedy_minsv", "seed": 1},
        "signal": {"amplitude": 1.0, "seed": 3},
        "noise": {"kind": "bernoulli_gaussian", "pr": 0.1, "var_eta": 0.01, "var_gamma": 100.0},
        "algorithms": [{"kind": "HQC", "mu": 0.5, "tau": 2.0}, {"kind": "LMS", "mu": 0.5}],
        "iterations": 200,
        "trials": 5,
        "output": {"dir": "out"},
    }
    d.update(over)
    return d


def desk_config(**over):
    from gsphqc.config import parse_config

    return parse_config(desk_config_dict(**over))


ACCEPTANCE = []


def record_criterion(number, ok, detail):
    """Remember one acceptance outcome for the terminal summary, then assert it."""
    ACCEPTANCE.append((number, bool(ok), detail))
    assert ok, f"criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
