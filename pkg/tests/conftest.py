import numpy as np
import pytest

from firstpassage import dp, instances


@pytest.fixture(scope="session")
def fishery():
    return instances.fishery()


@pytest.fixture(scope="session")
def fishery_exit():
    return instances.fishery_with_exit()


@pytest.fixture(scope="session")
def fishery_star(fishery):
    return dp.value_iteration(fishery, tolerance=1e-11)


def random_models(count, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return [instances.random_model(rng, **kw) for _ in range(count)]


ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (ok, detail)
    assert ok, f"criterion {criterion} failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
