import numpy as np
import pytest

from multibubble.errors import DomainError
from multibubble.scaling import fit_exponent

EPS = np.array([1e-2, 3e-3, 1e-3, 3e-4])


def test_exact_power_law():
    fit = fit_exponent(EPS, 3.0 * EPS**1.2)
    assert fit.exponent == pytest.approx(1.2, abs=1e-10)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.sign_consistent and fit.resolved


def test_log_power_is_divided_out():
    r = -2.0 * EPS * np.log(EPS) ** 2
    fit = fit_exponent(EPS, r, log_power=2)
    assert fit.exponent == pytest.approx(1.0, abs=1e-10)
    assert fit.sign_consistent


def test_noisy_series_interval_covers_truth():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(200):
        se = 0.05 * EPS**1.5
        r = EPS**1.5 + se * rng.normal(size=EPS.size)
        fit = fit_exponent(EPS, r, se)
        hits += fit.ci_low <= 1.5 <= fit.ci_high
    assert hits >= 180


def test_sign_change_and_unresolved_flags():
    fit = fit_exponent(EPS, np.array([-1e-2, -1e-3, 2e-5, 5e-6]), np.array([1e-4, 1e-4, 2e-5, 1e-6]))
    assert not fit.sign_consistent
    assert not fit.resolved
    vec = fit_exponent(EPS, np.outer(EPS, [1.0, 0.5]))
    assert vec.exponent == pytest.approx(1.0, abs=1e-10) and vec.sign_consistent


def test_bad_input():
    with pytest.raises(DomainError):
        fit_exponent([1e-2], [1.0])
    with pytest.raises(DomainError):
        fit_exponent([1e-2, 2.0], [1.0, 2.0])
    assert np.isnan(fit_exponent(EPS, np.zeros(4)).exponent)
