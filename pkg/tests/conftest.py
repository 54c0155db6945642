import numpy as np
import pytest

from multibubble import CurvatureModel, closed_form_m2, compute_constants


@pytest.fixture(scope="session")
def model5():
    return CurvatureModel(n=5, K_z=1.0, dK_dnu=1.0, hessK1=np.diag([2.0, 1.0, 1.0, 1.0]))


@pytest.fixture(scope="session")
def consts5():
    return compute_constants(5)


@pytest.fixture(scope="session")
def crit5(model5):
    return closed_form_m2(model5, -1)


def random_spd_with_simple_top(rng, k, gap=0.3):
    """Symmetric matrix whose eigenvalues are separated from each other and from 0."""
    Q, _ = np.linalg.qr(rng.normal(size=(k, k)))
    while True:
        w = rng.uniform(-2.0, 2.0, size=k)
        w[np.argmax(w)] = abs(w.max()) + 0.5
        ws = np.sort(w)
        if np.min(np.abs(w)) > gap and np.min(np.diff(ws)) > gap:
            break
    return (Q * w) @ Q.T


def random_configuration(rng, m, k, min_sep=0.3):
    while True:
        x = rng.normal(size=(m, k))
        d = np.linalg.norm(x[:, None] - x[None], axis=-1) + np.eye(m) * 10
        if d.min() > min_sep:
            return x


_ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
