import numpy as np
import pytest

from qbattery.hilbert import SpaceLayout

_CRITERIA: dict[str, tuple[bool, str]] = {}


def record_criterion(key: str, passed: bool, detail: str) -> None:
    _CRITERIA[key] = (bool(passed), detail)
    print(f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split()[1].rstrip(":"))):
        passed, detail = _CRITERIA[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}: {detail}")


def random_state(layout: SpaceLayout, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=layout.total_dim) + 1j * rng.normal(size=layout.total_dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, seed: int, rank: int | None = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    k = dim if rank is None else rank
    a = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
