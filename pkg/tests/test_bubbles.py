import math

import numpy as np
import pytest

from multibubble.bubbles import Bubble, BubbleEnsemble, check_M_eps, d_eps_ij_dx, eps_ij, eval_bubble
from multibubble.errors import DomainError
from multibubble.reduction import assemble

C0 = 15 ** 0.75  # (n(n-2))^((n-2)/4) for n = 5


def test_profile_values():
    b = Bubble.on_boundary(np.zeros(4), 4.0)
    assert eval_bubble(b, b.center) == pytest.approx(C0 * 4.0**1.5, rel=1e-15)
    b1 = Bubble.on_boundary(np.zeros(4), 1.0)
    assert eval_bubble(b1, np.array([1.0, 0, 0, 0, 0])) == pytest.approx(C0 / 2**1.5, rel=1e-15)


def test_center_must_be_on_boundary():
    with pytest.raises(DomainError):
        Bubble(np.array([0, 0, 0, 0, 0.1]), 1.0)
    with pytest.raises(DomainError):
        Bubble.on_boundary(np.zeros(4), -1.0)


def test_neumann_condition():
    rng = np.random.default_rng(0)
    b = Bubble.on_boundary(rng.normal(size=4), 50.0)
    for _ in range(10):
        x = np.append(b.tangential + rng.normal(size=4) / b.lam, 0.0)
        h = 1e-6 / b.lam
        e = np.zeros(5)
        e[-1] = h
        deriv = (eval_bubble(b, x + e) - eval_bubble(b, x - e)) / (2 * h)
        assert abs(deriv) / (eval_bubble(b, x) * b.lam) < 1e-8


def test_yamabe_equation_pointwise():
    n = 5
    p = (n + 2) / (n - 2)
    rng = np.random.default_rng(1)
    b = Bubble.on_boundary(rng.normal(size=4), 3.0)
    for _ in range(100):
        x = b.center + rng.normal(size=5) / b.lam
        x[-1] = abs(x[-1])
        h = 1e-3 / b.lam
        lap = sum(eval_bubble(b, x + h * e) - 2 * eval_bubble(b, x) + eval_bubble(b, x - h * e) for e in np.eye(5)) / h**2
        assert -lap == pytest.approx(eval_bubble(b, x) ** p, rel=1e-4)


def test_eps_ij_basics():
    a = Bubble.on_boundary(np.zeros(4), 7.0)
    assert eps_ij(a, a) == pytest.approx(2 ** -1.5, rel=1e-15)
    b = Bubble.on_boundary(np.array([0.3, 0.1, 0, 0]), 5.0)
    assert eps_ij(a, b) == eps_ij(b, a)
    c = Bubble.on_boundary(np.array([0.6, 0.2, 0, 0]), 5.0)
    assert eps_ij(a, c) < eps_ij(a, b)


def test_eps_ij_gradient():
    rng = np.random.default_rng(3)
    a = Bubble.on_boundary(rng.normal(size=4) * 0.1, 20.0)
    b = Bubble.on_boundary(rng.normal(size=4) * 0.1, 30.0)
    g = d_eps_ij_dx(a, b)
    h = 1e-7 / a.lam
    fd = np.array([(eps_ij(Bubble.on_boundary(a.tangential + h * e, a.lam), b)
                    - eps_ij(Bubble.on_boundary(a.tangential - h * e, a.lam), b)) / (2 * h) for e in np.eye(4)])
    np.testing.assert_allclose(g, fd, rtol=1e-7, atol=1e-7 * np.abs(g).max())
    np.testing.assert_allclose(d_eps_ij_dx(b, a), -g * 1.0, rtol=1e-12)
    assert np.all(d_eps_ij_dx(a, Bubble.on_boundary(a.tangential, 3.0)) == 0)


def test_M_eps_membership(model5, crit5):
    ens = assemble(model5, crit5, 1e-3)
    rep = check_M_eps(ens, C=10, mu=0.5, model=model5)
    assert rep.ok and not rep.violations
    amp = [c for c in rep.checks if c.constraint.startswith("|alpha")]
    band = 1e-3 * math.log(1e-3) ** 2
    assert all(abs(c.margin - band) < 1e-12 for c in amp)


def test_M_eps_reports_lambda_violation(model5, crit5):
    ens = assemble(model5, crit5, 1e-3)
    bad = BubbleEnsemble(1e-3, [Bubble(ens.bubbles[0].center, 1.0), ens.bubbles[1]], ens.alphas)
    rep = check_M_eps(bad, C=10, mu=0.5, model=model5)
    assert not rep.ok
    assert any(v.constraint.startswith("C^-1 eps <= lambda^-1") and v.index == (0,) for v in rep.violations)


def test_ensemble_json_round_trip(model5, crit5):
    ens = assemble(model5, crit5, 1e-3)
    back = BubbleEnsemble.from_dict(ens.to_dict())
    assert np.array_equal(back.centers, ens.centers) and np.array_equal(back.alphas, ens.alphas)
