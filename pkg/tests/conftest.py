import numpy as np
import pytest

from gtfl0.graph import build_graph, repair_connectivity

_ACCEPTANCE: list[str] = []


def random_connected_graph(n, p, rng):
    """Erdos-Renyi sample on ``n`` nodes made connected by edge repair."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges = np.column_stack([iu[keep], ju[keep]])
    edges, _ = repair_connectivity(n, edges, rng)
    return build_graph(n, edges)


def random_labels(n, k, rng):
    """Labels with every one of ``k`` clusters nonempty."""
    labels = np.concatenate([np.arange(k), rng.integers(k, size=n - k)])
    return rng.permutation(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
