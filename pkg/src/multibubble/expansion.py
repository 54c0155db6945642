"""Gradient pairings of the subcritical functional: leading-order formulas and direct integration.

For u = sum_j alpha_j delta_j the pairing of the gradient with a test
function h is

    <u, h> - int K~ u^(p - eps) h  =  int (sum_j alpha_j delta_j^p - K~ u^(p - eps)) h

over the half-space (the Neumann identity <delta_j, h> = int delta_j^p h
removes the Dirichlet form).  The three test functions attached to bubble
i are delta_i, lambda_i d(delta_i)/d(lambda_i) and
lambda_i^-1 d(delta_i)/d(x_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bubbles import Bubble, BubbleEnsemble, bubble_gradient, c0_of, d_eps_ij_dx, eps_ij, eval_bubble
from .chart import ChartModel
from .constants import UniversalConstants
from .errors import DomainError
from .hamiltonian import CurvatureModel
from .montecarlo import IntegratorSpec, MixtureDensity, integrate

KINDS = ("alpha", "lambda", "x")


def _chart(model) -> ChartModel:
    return ChartModel(model) if isinstance(model, CurvatureModel) else model


# ---------------------------------------------------------------- analytic side

def analytic_pairing_alpha(model, constants: UniversalConstants, ensemble: BubbleEnsemble, i: int) -> float:
    chart = _chart(model)
    a = ensemble.alphas[i]
    K = chart.K_boundary(ensemble.bubbles[i].tangential)
    return float(a * constants.S_n * (1.0 - a ** (constants.p - 1) * K))


def analytic_pairing_lambda(model, constants: UniversalConstants, ensemble: BubbleEnsemble, i: int) -> float:
    chart = _chart(model)
    b = ensemble.bubbles[i]
    a = ensemble.alphas[i]
    K = chart.K_boundary(b.tangential)
    # the normal derivative is constant in the quadratic-plus-linear chart model
    return float(a**constants.p * (constants.c4 * K * ensemble.eps - constants.c3 * chart.model.dK_dnu / b.lam))


def analytic_pairing_x(model, constants: UniversalConstants, ensemble: BubbleEnsemble, i: int,
                       c2_factor: float = 1.0) -> np.ndarray:
    """Pair attraction plus curvature drift; ``c2_factor`` rescales the pair term (1 is the default normalization)."""
    chart = _chart(model)
    bi = ensemble.bubbles[i]
    pair = np.zeros(ensemble.n - 1)
    for j, bj in enumerate(ensemble.bubbles):
        if j != i:
            pair += ensemble.alphas[j] * d_eps_ij_dx(bi, bj)
    drift = ensemble.alphas[i] ** constants.p * constants.c5 * chart.grad_K1(bi.tangential)
    return -(c2_factor * constants.c2 * pair + drift) / bi.lam


def leading_scale(model, constants: UniversalConstants, ensemble: BubbleEnsemble, i: int, kind: str) -> float:
    """Size of the individual terms in the analytic pairing.

    At a balanced configuration the analytic pairings vanish, so accuracy
    targets are set against the size of the terms that cancel:
    alpha_i S_n, alpha_i^p c4 K(x_i) eps and alpha_i^p c5 |grad K1(x_i)| / lambda_i.
    """
    chart = _chart(model)
    b = ensemble.bubbles[i]
    a = ensemble.alphas[i]
    if kind == "alpha":
        return float(a * constants.S_n)
    if kind == "lambda":
        return float(a**constants.p * constants.c4 * chart.K_boundary(b.tangential) * ensemble.eps)
    if kind == "x":
        g = np.linalg.norm(chart.grad_K1(b.tangential))
        if g == 0:
            g = max((np.linalg.norm(d_eps_ij_dx(b, bj)) * constants.c2 / constants.c5 / a**constants.p
                     for j, bj in enumerate(ensemble.bubbles) if j != i), default=0.0)
        return float(a**constants.p * constants.c5 * g / b.lam)
    raise DomainError(f"unknown pairing kind {kind!r}")


def remainder_budget(ensemble: BubbleEnsemble, i: int, kind: str) -> float:
    """Shape of the neglected remainder (no constant): eps|ln eps|, eps^2|ln eps| + sum eps_ij, eps^2 ln^2 eps."""
    eps = ensemble.eps
    L = abs(math.log(eps))
    if kind == "alpha":
        return eps * L
    if kind == "lambda":
        bi = ensemble.bubbles[i]
        return eps**2 * L + sum(eps_ij(bi, bj) for j, bj in enumerate(ensemble.bubbles) if j != i)
    if kind == "x":
        return eps**2 * L**2
    raise DomainError(f"unknown pairing kind {kind!r}")


def analytic_pairing(model, constants, ensemble, i, kind, c2_factor: float = 1.0):
    if kind == "alpha":
        return analytic_pairing_alpha(model, constants, ensemble, i)
    if kind == "lambda":
        return analytic_pairing_lambda(model, constants, ensemble, i)
    if kind == "x":
        return analytic_pairing_x(model, constants, ensemble, i, c2_factor)
    raise DomainError(f"unknown pairing kind {kind!r}")


# ---------------------------------------------------------------- test functions

def delta_eps_factor(b: Bubble, eps: float, x) -> np.ndarray:
    """delta^(-eps) at x, computed in log form to stay accurate for large lambda."""
    n = b.n
    x = np.asarray(x, float)
    d = x - b.center
    r2 = np.einsum("...i,...i->...", d, d)
    log_delta = math.log(c0_of(n)) + (n - 2) / 2 * math.log(b.lam) - (n - 2) / 2 * np.log1p(b.lam**2 * r2)
    return np.exp(-eps * log_delta)


def delta_eps_factor_first_order(b: Bubble, eps: float, x) -> np.ndarray:
    """1 - eps ln delta, the first-order truncation of delta^(-eps)."""
    n = b.n
    d = np.asarray(x, float) - b.center
    r2 = np.einsum("...i,...i->...", d, d)
    log_delta = math.log(c0_of(n)) + (n - 2) / 2 * math.log(b.lam) - (n - 2) / 2 * np.log1p(b.lam**2 * r2)
    return 1.0 - eps * log_delta


def test_function(b: Bubble, kind: str, x: np.ndarray) -> np.ndarray:
    """delta, lambda d(delta)/d(lambda), or lambda^-1 d(delta)/d(a') at points x (N, n)."""
    n = b.n
    d = x - b.center
    rho = 1.0 + b.lam**2 * np.einsum("ij,ij->i", d, d)
    delta = eval_bubble(b, x)
    if kind == "alpha":
        return delta
    if kind == "lambda":
        return (n - 2) / 2 * delta * (2.0 / rho - 1.0)
    if kind == "x":
        return ((n - 2) * b.lam * delta / rho)[:, None] * d[:, :-1]
    raise DomainError(f"unknown pairing kind {kind!r}")


def test_function_gradient(b: Bubble, kind: str, x: np.ndarray) -> np.ndarray:
    """Spatial gradient of ``test_function``: shape (N, n) or (N, n-1, n) for kind x."""
    n = b.n
    beta = (n - 2) / 2
    d = x - b.center
    rho = 1.0 + b.lam**2 * np.einsum("ij,ij->i", d, d)
    delta = eval_bubble(b, x)
    gdelta = bubble_gradient(b, x)
    grho = 2 * b.lam**2 * d
    if kind == "alpha":
        return gdelta
    if kind == "lambda":
        return beta * (gdelta * (2.0 / rho - 1.0)[:, None] - (2 * delta / rho**2)[:, None] * grho)
    if kind == "x":
        k = n - 1
        out = np.empty((x.shape[0], k, n))
        for a in range(k):
            e = np.zeros(n)
            e[a] = 1.0
            out[:, a, :] = 2 * beta * b.lam * (gdelta * (d[:, a] / rho)[:, None] + (delta / rho)[:, None] * e
                                               - (delta * d[:, a] / rho**2)[:, None] * grho)
        return out
    raise DomainError(f"unknown pairing kind {kind!r}")


# ---------------------------------------------------------------- numeric side

def _density(ensemble: BubbleEnsemble) -> MixtureDensity:
    return MixtureDensity.for_bubbles(ensemble.n, ensemble.centers, ensemble.lams)


def self_pairings(chart: ChartModel, ensemble: BubbleEnsemble, i: int, kinds=KINDS, rel_tol: float = 1e-11) -> dict:
    """The part of each pairing that involves bubble i alone, by radial quadrature.

    With y = x - x_i the one-bubble core alpha delta^p - K~ (alpha delta)^(p-eps)
    is a radial function times a quadratic polynomial in y, so its pairing
    with each test function reduces to one-dimensional radial integrals
    weighted by hemisphere moments of y.
    """
    from .constants import _radial_quad, hemisphere_normal_moment, sphere_area

    n = ensemble.n
    p = (n + 2) / (n - 2)
    beta = (n - 2) / 2
    eps = ensemble.eps
    b = ensemble.bubbles[i]
    a = ensemble.alphas[i]
    lam = b.lam
    T = chart.tangential_scale * chart.model.hessK1
    xt = b.tangential
    c = chart.K_boundary(xt) * a ** (p - 1)
    half_area = 0.5 * sphere_area(n - 1)
    normal_moment = hemisphere_normal_moment(n)
    second_moment = sphere_area(n - 1) / (2 * n)
    log_c0 = math.log(c0_of(n)) + beta * math.log(lam) + math.log(a)

    def parts(s):
        # G = alpha delta^p, E = (alpha delta)^-eps, as functions of s = lambda r
        rho = 1.0 + s * s
        log_ad = log_c0 - beta * math.log1p(s * s)
        delta = math.exp(log_ad) / a
        G = a * delta**p
        em1 = math.expm1(-eps * log_ad)
        return rho, delta, G, em1

    def h_radial(kind, rho, delta):
        return delta if kind == "alpha" else beta * delta * (2.0 / rho - 1.0)

    def q(f, k):
        # int_0^inf f(s/lam) r^k dr in the variable s
        return _radial_quad(f, rel_tol) / lam ** (k + 1)

    out = {}
    for kind in kinds:
        if kind in ("alpha", "lambda"):
            def main(s, k=kind):
                rho, delta, G, em1 = parts(s)
                return G * ((1.0 - c) - c * em1) * h_radial(k, rho, delta) * s ** (n - 1)

            def weighted(s, pw, k=kind):
                rho, delta, G, em1 = parts(s)
                return G * a ** (p - 1) * (1.0 + em1) * h_radial(k, rho, delta) * s**pw

            val = half_area * q(main, n - 1)
            if chart.kappa_nu != 0:
                val -= chart.kappa_nu * normal_moment * q(lambda s: weighted(s, n), n)
            tr = np.trace(T)
            if tr != 0:
                val -= 0.5 * tr * second_moment * q(lambda s: weighted(s, n + 1), n + 1)
            out[kind] = float(val)
        elif kind == "x":
            Tx = T @ xt
            if np.any(Tx != 0):
                def radial_x(s):
                    rho, delta, G, em1 = parts(s)
                    return G * a ** (p - 1) * (1.0 + em1) * 2 * beta * lam * delta / rho * s ** (n + 1)

                out[kind] = -Tx * second_moment * q(radial_x, n + 1)
            else:
                out[kind] = np.zeros(n - 1)
        else:
            raise DomainError(f"unknown pairing kind {kind!r}")
    return out


def _interaction_core(chart: ChartModel, ensemble: BubbleEnsemble, i: int, x: np.ndarray) -> np.ndarray:
    """Core minus its bubble-i-only part, evaluated without cancellation near x_i."""
    p = (ensemble.n + 2) / (ensemble.n - 2)
    eps = ensemble.eps
    ds = [eval_bubble(b, x) for b in ensemble.bubbles]
    ui = ensemble.alphas[i] * ds[i]
    rest = sum(a * d for j, (a, d) in enumerate(zip(ensemble.alphas, ds)) if j != i)
    lin = sum(a * d**p for j, (a, d) in enumerate(zip(ensemble.alphas, ds)) if j != i)
    if not np.all(ui + rest > 0):
        raise FloatingPointError("u is not positive at a sample point")
    jump = ui ** (p - eps) * np.expm1((p - eps) * np.log1p(rest / ui))
    return lin - chart.K(x) * jump


def _gradient_core(chart: ChartModel, ensemble: BubbleEnsemble, x: np.ndarray) -> np.ndarray:
    p = (ensemble.n + 2) / (ensemble.n - 2)
    ds = [eval_bubble(b, x) for b in ensemble.bubbles]
    u = sum(a * d for a, d in zip(ensemble.alphas, ds))
    if not np.all(u > 0):
        raise FloatingPointError("u is not positive at a sample point")
    lin = sum(a * d**p for a, d in zip(ensemble.alphas, ds))
    return lin - chart.K(x) * u ** (p - ensemble.eps)


def pairing_integrand(chart: ChartModel, ensemble: BubbleEnsemble, i: int, kinds=KINDS, split: bool = False):
    """Integrand of the requested pairings, symmetrized under reflection through x_i.

    The reflection x' -> 2 x_i' - x' preserves the half-space and Lebesgue
    measure; delta_i and lambda_i d(delta_i)/d(lambda_i) are even under it,
    the x test function is odd.  Averaging over the two images leaves the
    integral unchanged and removes the odd part of the core from the even
    pairings, where it only adds variance.  With ``split`` the bubble-i-only
    part of the core is left out (see ``self_pairings``).
    """
    bi = ensemble.bubbles[i]
    shift = 2 * bi.center[:-1]
    if split:
        def core(y):
            return _interaction_core(chart, ensemble, i, y)
    else:
        def core(y):
            return _gradient_core(chart, ensemble, y)

    def f(x):
        xr = x.copy()
        xr[:, :-1] = shift - x[:, :-1]
        c1 = core(x)
        c2 = core(xr)
        even, odd = 0.5 * (c1 + c2), 0.5 * (c1 - c2)
        cols = []
        for kind in kinds:
            h = test_function(bi, kind, x)
            cols.append((even[:, None] if kind != "x" else odd[:, None]) * (h if h.ndim == 2 else h[:, None]))
        return np.hstack(cols)

    return f


@dataclass
class PairingReport:
    """Analytic and numeric pairing side by side.

    ``rel_err`` is ``abs_err`` relative to ``leading_scale`` (the analytic
    value itself vanishes at balanced configurations).
    """

    kind: str
    eps: float
    analytic: object
    numeric: object
    stderr: object
    leading_scale: float
    budget: float
    target_rel_err: float
    samples: int
    abs_err: float = field(init=False)
    rel_err: float = field(init=False)
    stderr_norm: float = field(init=False)
    target_met: bool = field(init=False)

    def __post_init__(self):
        diff = np.atleast_1d(np.asarray(self.numeric, float) - np.asarray(self.analytic, float))
        self.abs_err = float(np.linalg.norm(diff))
        self.stderr_norm = float(np.linalg.norm(np.atleast_1d(self.stderr)))
        self.rel_err = self.abs_err / self.leading_scale if self.leading_scale > 0 else float("inf")
        self.target_met = bool(self.stderr_norm <= self.target_rel_err * self.leading_scale)

    @property
    def residual(self):
        return np.asarray(self.numeric, float) - np.asarray(self.analytic, float)

    def to_dict(self) -> dict:
        def conv(v):
            v = np.asarray(v, float)
            return v.tolist() if v.ndim else float(v)

        return {"kind": self.kind, "eps": self.eps, "analytic": conv(self.analytic), "numeric": conv(self.numeric),
                "stderr": conv(self.stderr), "abs_err": self.abs_err, "rel_err": self.rel_err,
                "leading_scale": self.leading_scale, "budget": self.budget, "samples": self.samples,
                "target_met": self.target_met}


def numeric_pairings(model, ensemble: BubbleEnsemble, i: int, integrator: IntegratorSpec, kinds=KINDS,
                     split: bool = True) -> dict:
    """All requested pairings of bubble i from one shared sample: kind -> (value, stderr).

    By default the single-bubble part is integrated by radial quadrature and
    only the interaction remainder is sampled (``split=False`` samples the
    whole integrand; both estimate the same integral).  For a lone bubble
    the split result is deterministic with zero standard error.
    """
    if not 0 <= i < ensemble.m:
        raise DomainError(f"bubble index {i} out of range")
    chart = _chart(model)
    if split:
        base = self_pairings(chart, ensemble, i, kinds)
        if ensemble.m == 1:
            return {k: (base[k], np.zeros(ensemble.n - 1) if k == "x" else 0.0) for k in kinds}
    elif integrator.method != "mc":
        raise DomainError("the unsplit pairing needs the Monte Carlo integrator")
    density = _density(ensemble).symmetrized(ensemble.bubbles[i].center)
    res = integrate(pairing_integrand(chart, ensemble, i, kinds, split=split), density, integrator)
    out, k = {}, 0
    for kind in kinds:
        w = ensemble.n - 1 if kind == "x" else 1
        val, se = res.value[k:k + w], res.stderr[k:k + w]
        if split:
            val = val + base[kind]
        out[kind] = (val if kind == "x" else float(val[0]), se if kind == "x" else float(se[0]))
        k += w
    return out


def numeric_pairing(model, ensemble: BubbleEnsemble, i: int, kind: str, integrator: IntegratorSpec,
                    split: bool = True):
    if kind not in KINDS:
        raise DomainError(f"unknown pairing kind {kind!r}")
    return numeric_pairings(model, ensemble, i, integrator, kinds=(kind,), split=split)[kind]


def pairing_reports(model, constants: UniversalConstants, ensemble: BubbleEnsemble, i: int,
                    integrator: IntegratorSpec, kinds=KINDS) -> dict:
    num = numeric_pairings(model, ensemble, i, integrator, kinds)
    out = {}
    for kind in kinds:
        val, se = num[kind]
        out[kind] = PairingReport(kind=kind, eps=ensemble.eps,
                                  analytic=analytic_pairing(model, constants, ensemble, i, kind),
                                  numeric=val, stderr=se,
                                  leading_scale=leading_scale(model, constants, ensemble, i, kind),
                                  budget=remainder_budget(ensemble, i, kind),
                                  target_rel_err=integrator.target_rel_err, samples=integrator.samples)
    return out


def inner_product_two_ways(ensemble: BubbleEnsemble, i: int, kind: str, integrator: IntegratorSpec):
    """<u, h> as int grad u . grad h and as sum_j alpha_j int delta_j^p h, on the same samples.

    Returns ((dirichlet, stderr), (identity, stderr)).  The two agree because
    every bubble solves -Delta delta = delta^p with zero normal derivative on
    the boundary.
    """
    bi = ensemble.bubbles[i]
    p = (ensemble.n + 2) / (ensemble.n - 2)

    def f(x):
        gu = sum(a * bubble_gradient(b, x) for a, b in zip(ensemble.alphas, ensemble.bubbles))
        gh = test_function_gradient(bi, kind, x)
        dirichlet = np.einsum("ij,ij->i", gu, gh)[:, None] if kind != "x" else np.einsum("ij,ikj->ik", gu, gh)
        lin = sum(a * eval_bubble(b, x) ** p for a, b in zip(ensemble.alphas, ensemble.bubbles))
        h = test_function(bi, kind, x)
        ident = (lin * h)[:, None] if kind != "x" else lin[:, None] * h
        return np.hstack([dirichlet, ident])

    res = integrate(f, _density(ensemble), integrator)
    w = res.value.size // 2
    return (res.value[:w], res.stderr[:w]), (res.value[w:], res.stderr[w:])


def energy_near_point(model, ensemble: BubbleEnsemble, radius: float, integrator: IntegratorSpec):
    """int over the half-ball B_radius(z) of K~ u^(2n/(n-2)); returns (value, stderr)."""
    if not radius > 0:
        raise DomainError("radius must be positive")
    chart = _chart(model)
    n = ensemble.n
    z = ensemble.z

    def f(x):
        inside = np.einsum("ij,ij->i", x - z, x - z) < radius**2
        return np.where(inside, chart.K(x) * ensemble.u(x) ** (2 * n / (n - 2)), 0.0)

    res = integrate(f, _density(ensemble), integrator)
    return float(res.value[0]), float(res.stderr[0])


def radial_half_space_integral(g, n: int, lam: float, rel_tol: float = 1e-10) -> float:
    """int over R^n_+ of g(|x - a|) for a on the boundary, by adaptive radial quadrature."""
    from scipy import integrate as sint

    from .constants import sphere_area

    def h(t):
        if t >= 1.0:
            return 0.0
        s = 1.0 - t
        r = t / s / lam
        return g(r) * r ** (n - 1) / (lam * s * s)

    val, _ = sint.quad(h, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=500)
    return 0.5 * sphere_area(n - 1) * val


def pair_inner_product(bi: Bubble, bj: Bubble, integrator: IntegratorSpec):
    """int over the half-space of delta_j^p delta_i; returns (value, stderr).

    Identical bubbles with ``method="radial"`` use the radial quadrature,
    everything else the Monte Carlo mixture.
    """
    n = bi.n
    p = (n + 2) / (n - 2)
    same = np.array_equal(bi.center, bj.center) and bi.lam == bj.lam
    if integrator.method == "radial":
        if not same:
            raise DomainError("radial quadrature only applies to a single bubble")
        c0 = c0_of(n)
        beta = (n - 2) / 2
        val = radial_half_space_integral(lambda r: (c0 * bi.lam**beta / (1 + (bi.lam * r) ** 2) ** beta) ** (p + 1),
                                         n, bi.lam)
        return val, 0.0

    def f(x):
        return eval_bubble(bj, x) ** p * eval_bubble(bi, x)

    if same:
        dens = MixtureDensity.for_bubbles(n, [bi.center], [bi.lam])
    else:
        dens = MixtureDensity.for_bubbles(n, [bi.center, bj.center], [bi.lam, bj.lam])
    res = integrate(f, dens, integrator)
    return float(res.value[0]), float(res.stderr[0])


# ---------------------------------------------------------------- eps series and fits

def target_order(kind: str, n: int):
    """(exponent, log power) of the remainder each fit is compared with.

    The x series is fitted after multiplying by lambda_i / eps^((n-2)/n).
    """
    if kind == "alpha":
        return 1.0, 1
    if kind == "lambda":
        return 1.0 + (n - 4) / n, 0
    if kind == "x":
        return 2.0 / n, 2
    raise DomainError(f"unknown pairing kind {kind!r}")


def fit_quantity(report: PairingReport, ensemble: BubbleEnsemble, i: int):
    """Residual and standard error in the normalization used by the exponent fits."""
    res = report.residual
    se = report.stderr
    if report.kind == "x":
        n = ensemble.n
        f = ensemble.bubbles[i].lam / ensemble.eps ** ((n - 2) / n)
        return np.asarray(res) * f, np.asarray(se) * f
    return float(res), float(se)


@dataclass
class SeriesResult:
    eps: list
    reports: list
    fits: dict
    targets: dict

    def passed(self, kind: str, tol: float = 0.15) -> bool:
        return self.fits[kind].within(self.targets[kind][0], tol)


def verify_expansion_series(model, constants: UniversalConstants, crit, eps_list, integrator: IntegratorSpec,
                            i: int = 0, kinds=KINDS, progress=None) -> SeriesResult:
    """Pairing reports at each eps of the series and exponent fits of their residuals."""
    from .reduction import assemble
    from .scaling import fit_exponent

    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise DomainError("empty eps list")
    rows = []
    per_kind = {k: ([], []) for k in kinds}
    for e in eps_list:
        ens = assemble(model if isinstance(model, CurvatureModel) else model.model, crit, e,
                       constants=constants, chart=_chart(model), check=False)
        reps = pairing_reports(model, constants, ens, i, integrator, kinds)
        for k in kinds:
            r, s = fit_quantity(reps[k], ens, i)
            per_kind[k][0].append(r)
            per_kind[k][1].append(s)
            rows.append(reps[k])
        if progress:
            progress(e, reps)
    n = _chart(model).n
    targets = {k: target_order(k, n) for k in kinds}
    fits = {}
    for k in kinds:
        if len(eps_list) >= 2:
            fits[k] = fit_exponent(eps_list, np.array(per_kind[k][0]), np.array(per_kind[k][1]),
                                   log_power=targets[k][1])
    return SeriesResult(eps=eps_list, reports=rows, fits=fits, targets=targets)


# ---------------------------------------------------------------- chart conventions

@dataclass
class ConventionReport:
    normal_scale: float
    tangential_scale: float
    c2_factor: float
    normal_table: dict
    tangential_table: dict
    c2_table: dict

    def to_dict(self) -> dict:
        return {"normal_scale": self.normal_scale, "tangential_scale": self.tangential_scale,
                "c2_factor": self.c2_factor, "normal_table": self.normal_table,
                "tangential_table": self.tangential_table, "c2_table": self.c2_table}


def calibrate_conventions(model: CurvatureModel, constants: UniversalConstants, eps_list,
                          integrator: IntegratorSpec = None, crit=None) -> ConventionReport:
    """Pick the chart factors and the c2 normalization that the numerics support.

    Normal factor: a lone bubble at z with the balanced lambda.  Its lambda
    pairing is integrated exactly (radial quadrature), so the only candidate
    whose residual is o(eps) is the consistent one; the score is the largest
    residual relative to alpha^p c4 K eps.

    Tangential factor: a lone bubble displaced along the top eigenvector of
    hessK1 by the cluster scale; the score is the largest relative error of
    the x pairing.

    c2 normalization (needs ``crit`` with m >= 2 and a Monte Carlo
    ``integrator``): x-pairing residual of the assembled cluster with the
    pair term scaled by 1 or 1/2, relative to the leading scale.
    """
    from .critical_points import ring_radius
    from .reduction import assemble, balance_ratio, solve_gamma

    n = model.n
    p = constants.p
    eps_list = [float(e) for e in eps_list]
    kappa = balance_ratio(model, constants)
    gamma = solve_gamma(model, constants)
    w, V = np.linalg.eigh(model.sym_hess)
    direction = V[:, -1] * ring_radius(model)

    normal_table = {}
    for s in (-2.0, -1.0, 1.0, 2.0):
        chart = ChartModel(model, normal_scale=s)
        rel = []
        for e in eps_list:
            b = Bubble.on_boundary(np.zeros(n - 1), 1.0 / (kappa * e))
            ens = BubbleEnsemble(e, [b], [model.K_z ** (-(n - 2) / 4)])
            num = numeric_pairing(chart, ens, 0, "lambda", IntegratorSpec(method="radial"))[0]
            ana = analytic_pairing_lambda(chart, constants, ens, 0)
            rel.append(abs(num - ana) / leading_scale(chart, constants, ens, 0, "lambda"))
        normal_table[str(s)] = rel
    normal = min(normal_table, key=lambda k: max(normal_table[k]))

    tangential_table = {}
    for t in (1.0, 2.0):
        chart = ChartModel(model, normal_scale=float(normal), tangential_scale=t)
        rel = []
        for e in eps_list:
            xt = gamma * e ** ((n - 2) / n) * direction
            b = Bubble.on_boundary(xt, 1.0 / (kappa * e))
            ens = BubbleEnsemble(e, [b], [chart.K_boundary(xt) ** (-(n - 2) / 4)])
            num = numeric_pairing(chart, ens, 0, "x", IntegratorSpec(method="radial"))[0]
            ana = analytic_pairing_x(chart, constants, ens, 0)
            rel.append(float(np.linalg.norm(num - ana) / np.linalg.norm(ana)))
        tangential_table[str(t)] = rel
    tangential = min(tangential_table, key=lambda k: max(tangential_table[k]))

    c2_table = {}
    c2_factor = 1.0
    if crit is not None and integrator is not None and integrator.method == "mc":
        chart = ChartModel(model, normal_scale=float(normal), tangential_scale=float(tangential))
        c2_table = {"1.0": [], "0.5": []}
        for e in eps_list:
            ens = assemble(model, crit, e, constants=constants, chart=chart, check=False)
            if ens.m < 2:
                break
            num = numeric_pairing(chart, ens, 0, "x", integrator)[0]
            lead = leading_scale(chart, constants, ens, 0, "x")
            for f in (1.0, 0.5):
                ana = analytic_pairing_x(chart, constants, ens, 0, c2_factor=f)
                c2_table[str(f)].append(float(np.linalg.norm(num - ana) / lead))
        if c2_table["1.0"]:
            c2_factor = float(min(c2_table, key=lambda k: max(c2_table[k])))
        else:
            c2_table = {}
    return ConventionReport(float(normal), float(tangential), c2_factor, normal_table, tangential_table, c2_table)
