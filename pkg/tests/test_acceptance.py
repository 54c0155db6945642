"""Acceptance criteria, one PASS/FAIL line each (collected in the terminal summary)."""

import json
import time

import numpy as np
import pytest

from conftest import random_spd_with_simple_top
from multibubble.bubbles import check_M_eps, eps_ij
from multibubble.cli import main
from multibubble.constants import closed_form_constants, compute_constants
from multibubble.critical_points import closed_form_m2, config_distance, deflated_search, newton_solve
from multibubble.expansion import energy_near_point, verify_expansion_series
from multibubble.hamiltonian import CurvatureModel, eval_F, grad_F, hess_F, radial_form
from multibubble.montecarlo import IntegratorSpec
from multibubble.reduction import assemble, balance_ratio, gamma_residual, solve_gamma
from multibubble.scaling import fit_exponent

SERIES_EPS = [1e-2, 3e-3, 1e-3, 3e-4]


def _random_model(rng, n, H=None):
    H = random_spd_with_simple_top(rng, n - 1) if H is None else H
    return CurvatureModel(n, float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)), H)


def test_c1_constants_dual_oracle(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(5, 11):
        q, c = compute_constants(n), closed_form_constants(n)
        worst = max(worst, max(q.rel_diff(c).values()))
    dt = time.perf_counter() - t0
    verdict("C1 constants dual oracle", worst <= 1e-8 and dt < 1.0,
            f"max rel diff {worst:.2e} (tol 1e-8), {dt:.2f} s (limit 1 s)")


def test_c2_closed_form_exactness(verdict):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_grad, worst_gap = 0.0, np.inf
    for _ in range(50):
        n = int(rng.choice([5, 6, 7]))
        model = _random_model(rng, n)
        rep = closed_form_m2(model, -1)
        # scale: size of each of the two cancelling force terms
        scale = np.linalg.norm(model.sym_hess, 2) * np.linalg.norm(rep.cfg)
        worst_grad = max(worst_grad, np.linalg.norm(grad_F(model, rep.cfg)) / scale)
        H = hess_F(model, rep.cfg)
        w = np.linalg.eigvalsh(H)
        worst_gap = min(worst_gap, np.abs(w).min() / np.abs(w).max())
    dt = time.perf_counter() - t0
    ok = worst_grad <= 1e-12 and worst_gap > 1e-8 and dt < 10
    verdict("C2 closed-form m=2 point", ok,
            f"max |grad F|/scale {worst_grad:.1e} (tol 1e-12), min |eig|/||H|| {worst_gap:.2e} (> 1e-8), {dt:.2f} s")


def test_c3_derivative_oracles(verdict):
    rng = np.random.default_rng(3)
    g_err = h_err = r_err = 0.0
    for _ in range(100):
        n = int(rng.choice([5, 6, 7]))
        A = rng.normal(size=(n - 1, n - 1))
        model = CurvatureModel(n, 1.0, 1.0, A + A.T + 0.1 * np.eye(n - 1))
        m = int(rng.choice([2, 3, 4]))
        x = rng.normal(size=(m, n - 1))
        while np.min(np.linalg.norm(x[:, None] - x[None], axis=-1) + 10 * np.eye(m)) < 0.5:
            x = rng.normal(size=(m, n - 1))
        h = 1e-5
        g = grad_F(model, x)
        H = hess_F(model, x)
        fd_g = np.zeros_like(x)
        fd_H = np.zeros_like(H)
        for k in range(x.size):
            e = np.zeros(x.size)
            e[k] = h
            e = e.reshape(x.shape)
            fd_g.flat[k] = (eval_F(model, x + e) - eval_F(model, x - e)) / (2 * h)
            fd_H[:, k] = (grad_F(model, x + e) - grad_F(model, x - e)).ravel() / (2 * h)
        g_err = max(g_err, np.abs(g - fd_g).max() / np.abs(g).max())
        h_err = max(h_err, np.abs(H - fd_H).max() / np.abs(H).max())
        lam = x / np.linalg.norm(x)
        r = float(rng.uniform(0.3, 3.0))
        d = radial_form(model, lam, r)[1]
        fd = (radial_form(model, lam, r + 1e-6 * r)[0] - radial_form(model, lam, r - 1e-6 * r)[0]) / (2e-6 * r)
        r_err = max(r_err, abs(d - fd) / max(abs(d), abs(radial_form(model, lam, r)[0]) / r))
    ok = g_err <= 1e-6 and h_err <= 1e-5 and r_err <= 1e-6
    verdict("C3 derivative oracles", ok,
            f"grad rel {g_err:.1e} (1e-6), hess rel {h_err:.1e} (1e-5), radial d/dr rel {r_err:.1e} (1e-6)")


def test_c4_negative_hessian_obstruction(verdict):
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    H = -(Q * rng.uniform(0.2, 2.0, 4)) @ Q.T
    model = CurvatureModel(5, 1.0, 1.0, H)
    radii = np.geomspace(1e-2, 1e2, 100)
    worst = -np.inf
    for _ in range(1000):
        m = int(rng.choice([2, 3, 4]))
        lam = rng.normal(size=(m, 4))
        lam /= np.linalg.norm(lam)
        worst = max(worst, radial_form(model, lam, radii)[1].max())
    found = deflated_search(model, 2, n_seeds=1000, seed=0)
    verdict("C4 obstruction for hessK1 <= 0", worst < 0 and found == [],
            f"max d/dr over 1e3 x 1e2 grid {worst:.3e} (< 0), critical points from 1e3 seeds: {len(found)}")


def test_c5_newton_recovers_closed_form(verdict):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        model = _random_model(rng, int(rng.choice([5, 6, 7])))
        ref = closed_form_m2(model, -1)
        start = ref.cfg + 0.05 * np.linalg.norm(ref.cfg) * rng.normal(size=ref.cfg.shape)
        got = newton_solve(model, 2, start)
        # swap is handled by the assignment; the eigenvector sign flip is the same as a swap for m = 2
        worst = max(worst, config_distance(got.cfg, ref.cfg) / np.linalg.norm(ref.cfg))
    dt = time.perf_counter() - t0
    verdict("C5 Newton vs closed form", worst <= 1e-8 and dt < 5,
            f"max relative distance {worst:.1e} (tol 1e-8), {dt:.2f} s (limit 5 s)")


def test_c6_assembly_identities(verdict, model5, consts5, crit5):
    n = 5
    kappa = balance_ratio(model5, consts5)
    gamma = solve_gamma(model5, consts5)
    worst = gamma_residual(model5, consts5, gamma)
    oks = []
    for eps in (1e-2, 1e-3, 1e-4):
        ens = assemble(model5, crit5, eps, constants=consts5, check=False)
        for b in ens.bubbles:
            worst = max(worst, abs(1 / (b.lam * eps) / kappa - 1))
        d = np.linalg.norm(ens.centers[0] - ens.centers[1]) / eps ** ((n - 2) / n)
        worst = max(worst, abs(d / (gamma * np.linalg.norm(crit5.cfg[0] - crit5.cfg[1])) - 1))
        oks.append(check_M_eps(ens, C=10, mu=0.5, model=model5).ok)
    verdict("C6 assembly identities", worst <= 1e-12 and all(oks),
            f"max rel deviation {worst:.1e} (tol 1e-12), M_eps membership at 1e-2/1e-3/1e-4: {oks}")


@pytest.fixture(scope="module")
def series(model5, consts5, crit5):
    spec = IntegratorSpec(samples=10_000_000, seed=0, target_rel_err=0.01)
    return verify_expansion_series(model5, consts5, crit5, SERIES_EPS, spec)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["alpha", "lambda", "x"])
def test_c7_expansion_exponents(verdict, series, kind):
    fit = series.fits[kind]
    target = series.targets[kind][0]
    flags = ("" if fit.sign_consistent else ", residual changes sign") + ("" if fit.resolved else ", unresolved")
    verdict(f"C7 {kind} remainder exponent", series.passed(kind, 0.15),
            f"fitted {fit.exponent:.3f} [{fit.ci_low:.3f}, {fit.ci_high:.3f}] vs {target:.3f} +- 0.15{flags}")


@pytest.mark.slow
def test_c7_standard_errors(verdict, series):
    worst = max(r.stderr_norm / r.leading_scale for r in series.reports)
    verdict("C7 Monte Carlo standard errors", worst < 0.01,
            f"max stderr / leading term {worst:.2e} (< 1e-2) at 1e7 points per integral")


@pytest.mark.slow
@pytest.mark.parametrize("m", [1, 2])
def test_c8_energy_quantization(verdict, model5, consts5, crit5, m):
    eps = 1e-4
    if m == 1:
        from multibubble.bubbles import Bubble, BubbleEnsemble

        kappa = balance_ratio(model5, consts5)
        ens = BubbleEnsemble(eps, [Bubble.on_boundary(np.zeros(4), 1 / (kappa * eps))], [model5.K_z ** -0.75])
    else:
        ens = assemble(model5, crit5, eps, constants=consts5)
    val, se = energy_near_point(model5, ens, 0.1, IntegratorSpec(samples=2_000_000, seed=8))
    target = m * consts5.S_n / model5.K_z ** 1.5
    tol = 0.03 * target + 3 * se
    verdict(f"C8 energy quantization m={m}", abs(val - target) <= tol,
            f"{val:.3f} +- {se:.3f} vs {target:.3f} (|diff| {abs(val - target):.3f} <= {tol:.3f})")


def test_c9_eps_ij_regime(verdict, model5, consts5, crit5):
    e = [eps_ij(*assemble(model5, crit5, x, constants=consts5, check=False).bubbles) for x in SERIES_EPS]
    fit = fit_exponent(SERIES_EPS, e)
    target = 2 * 3 / 5
    verdict("C9 eps_ij exponent", abs(fit.exponent - target) <= 0.05,
            f"fitted {fit.exponent:.4f} vs {target} +- 0.05")


def test_c10_cli_determinism(verdict, tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"n": 5, "K_z": 1.0, "dK_dnu": 1.0,
                                 "hessK1": [[3.0, 0, 0, 0], [0, 1.5, 0, 0], [0, 0, 0.7, 0], [0, 0, 0, 0.4]]}))
    commands = {
        "constants": ["constants", "--n", "6"],
        "critical-points": ["critical-points", "--model", str(model), "--m", "3", "--seeds", "20"],
        "configure": ["configure", "--model", str(model), "--eps", "1e-3"],
        "verify-expansion": ["verify-expansion", "--model", str(model), "--eps", "1e-2,1e-3", "--samples", "100000"],
        "landscape": ["landscape", "--model", str(model), "--grid", "9"],
    }
    parallel = {"critical-points", "verify-expansion"}
    mismatched = []
    for name, argv in commands.items():
        variants = [[], []] + ([["--workers", "3"]] if name in parallel else [])
        blobs = []
        for k, extra in enumerate(variants):
            out = tmp_path / f"{name}{k}.out"
            assert main(argv + extra + ["--output", str(out)]) == 0
            blobs.append(out.read_bytes())
        if any(b != blobs[0] for b in blobs):
            mismatched.append(name)
    verdict("C10 determinism", not mismatched,
            f"{len(commands)} commands repeated (and re-run with 3 workers where parallel); mismatches: {mismatched}")
