"""Critical points of F: the antipodal m=2 solution and a Newton search.

Critical points of F are saddles in general, so the solver drives grad F
to zero with a Levenberg-Marquardt regularized Newton step instead of
minimizing F.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConvergenceError, DomainError
from .hamiltonian import COLLISION_TOL, CurvatureModel, as_configuration, eval_F, grad_F, hess_F

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEDUP_TOL = 1e-6


@dataclass
class CriticalPointReport:
    cfg: np.ndarray
    value: float
    grad_norm: float
    hessian_spectrum: np.ndarray
    morse_index: int
    nondegenerate: bool
    method: str
    iterations: int = 0

    @property
    def m(self) -> int:
        return self.cfg.shape[0]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "m": self.m,
            "cfg": self.cfg.tolist(),
            "value": self.value,
            "grad_norm": self.grad_norm,
            "hessian_spectrum": self.hessian_spectrum.tolist(),
            "morse_index": self.morse_index,
            "nondegenerate": self.nondegenerate,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalPointReport":
        return cls(
            cfg=np.asarray(d["cfg"], float),
            value=float(d["value"]),
            grad_norm=float(d["grad_norm"]),
            hessian_spectrum=np.asarray(d["hessian_spectrum"], float),
            morse_index=int(d["morse_index"]),
            nondegenerate=bool(d["nondegenerate"]),
            method=d["method"],
            iterations=int(d.get("iterations", 0)),
        )


def classify(model: CurvatureModel, cfg, method: str, iterations: int = 0, rel_tol: float = 1e-8) -> CriticalPointReport:
    """Evaluate gradient norm and Hessian spectrum at ``cfg``.

    A point counts as non-degenerate when its smallest |eigenvalue| exceeds
    ``rel_tol`` times the spectral norm of the Hessian.
    """
    cfg = as_configuration(model, cfg)
    w = np.linalg.eigvalsh(hess_F(model, cfg))
    scale = np.abs(w).max()
    thresh = rel_tol * scale
    return CriticalPointReport(
        cfg=cfg.copy(),
        value=eval_F(model, cfg),
        grad_norm=float(np.linalg.norm(grad_F(model, cfg))),
        hessian_spectrum=w,
        morse_index=int(np.sum(w < -thresh)),
        nondegenerate=bool(np.abs(w).min() > thresh),
        method=method,
        iterations=iterations,
    )


def closed_form_m2(model: CurvatureModel, eig_index: int = -1) -> CriticalPointReport:
    """The antipodal pair (x, -x), x = (cbar/lam)^(1/n) u_lam.

    ``eig_index`` indexes the ascending eigenvalues of hessK1, so the default
    -1 picks the largest one.
    """
    n = model.n
    try:
        w, V = np.linalg.eigh(model.sym_hess)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"eigensolver failed: {exc}") from exc
    try:
        lam = w[eig_index]
    except IndexError as exc:
        raise DomainError(f"eig_index {eig_index} out of range for {w.size} eigenvalues") from exc
    if lam <= 0:
        raise DomainError(f"selected eigenvalue {lam:.6g} is not positive; the antipodal solution needs lam > 0")
    u = V[:, eig_index]
    # fix the eigenvector sign so the output does not depend on LAPACK's choice
    k = np.argmax(np.abs(u))
    u = u * np.sign(u[k])
    cbar = (n - 2) / 2 ** (n - 1)
    xbar = (cbar / lam) ** (1.0 / n) * u
    return classify(model, np.vstack([xbar, -xbar]), method="closed_form")


def _lm_step(H: np.ndarray, g: np.ndarray, mu: float) -> np.ndarray:
    h, V = np.linalg.eigh(H)
    c = V.T @ g
    return -V @ (h * c / (h * h + mu))


def newton_solve(model: CurvatureModel, m: int, initial, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> CriticalPointReport:
    """Regularized Newton iteration for grad F = 0.

    Each step solves (H^2 + mu I) s = -H g, i.e. Gauss-Newton on |g|^2/2
    with a Levenberg damping mu that shrinks after accepted steps and grows
    after rejected ones.  Raises ConvergenceError with a reason tag
    ("max_iter", "stagnation" or "collision") on failure.
    """
    x = as_configuration(model, initial).copy()
    if x.shape[0] != m:
        raise DomainError(f"initial configuration has {x.shape[0]} points, expected m={m}")
    shape = x.shape
    g = grad_F(model, x).ravel()
    gn = np.linalg.norm(g)
    scale = 1.0 + np.abs(model.hessK1).max()
    mu = 1e-3 * scale**2
    slow = 0
    for it in range(1, max_iter + 1):
        if gn <= tol:
            return classify(model, x, method="newton", iterations=it - 1)
        H = hess_F(model, x)
        accepted = False
        while not accepted:
            s = _lm_step(H, g, mu).reshape(shape)
            trial = x + s
            diffs = trial[:, None, :] - trial[None, :, :]
            dist = np.sqrt((diffs**2).sum(-1))
            np.fill_diagonal(dist, np.inf)
            if m > 1 and dist.min() <= COLLISION_TOL * max(1.0, np.abs(trial).max()):
                raise ConvergenceError("step drove two points together", reason="collision", grad_norm=gn, iterations=it)
            gt = grad_F(model, trial).ravel()
            gtn = np.linalg.norm(gt)
            if np.isfinite(gtn) and gtn < gn:
                accepted = True
                slow = slow + 1 if gtn > (1 - 1e-4) * gn else 0
                x, g, gn = trial, gt, gtn
                mu = max(mu / 10.0, 1e-14 * scale**2)
            else:
                mu *= 10.0
                if mu > 1e14 * scale**2:
                    raise ConvergenceError("damping exhausted without decrease", reason="stagnation", grad_norm=gn, iterations=it)
        if slow >= 20:
            raise ConvergenceError("gradient norm stopped decreasing", reason="stagnation", grad_norm=gn, iterations=it)
    if gn <= tol:
        return classify(model, x, method="newton", iterations=max_iter)
    raise ConvergenceError(f"no convergence in {max_iter} iterations", reason="max_iter", grad_norm=gn, iterations=max_iter)


def ring_radius(model: CurvatureModel) -> float:
    w = np.linalg.eigvalsh(model.sym_hess)
    lam = w[-1] if w[-1] > 0 else np.abs(w).max()
    return ((model.n - 2) / 2 ** (model.n - 1) / lam) ** (1.0 / model.n)


def ring_seeds(model: CurvatureModel, m: int, n_seeds: int, seed: int) -> list:
    """Ring ansatz in the top eigenplane; seed 0 is the bare ring, the rest are perturbed."""
    w, V = np.linalg.eigh(model.sym_hess)
    e1, e2 = V[:, -1], V[:, -2]
    R = ring_radius(model)
    children = np.random.SeedSequence(seed).spawn(n_seeds)
    seeds = []
    for k, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        phase = 0.0 if k == 0 else rng.uniform(0, 2 * np.pi)
        theta = phase + 2 * np.pi * np.arange(m) / m
        ring = R * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
        if k > 0:
            ring = ring * np.exp(rng.normal(0, 0.3)) + rng.normal(0, 0.3 * R, size=ring.shape)
        seeds.append(ring)
    return seeds


def _try_solve(model, m, x0, tol, max_iter):
    try:
        return newton_solve(model, m, x0, tol=tol, max_iter=max_iter)
    except (ConvergenceError, DomainError):
        return None


def config_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Relative distance between two configurations, minimized over point permutations."""
    cost = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum()) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-300))


def deduplicate(reports: list, rel_tol: float = DEDUP_TOL) -> list:
    """Keep the first report of every permutation class, in input order."""
    kept = []
    for r in reports:
        if all(config_distance(r.cfg, k.cfg) > rel_tol for k in kept):
            kept.append(r)
    return kept


def _sort_key(r: CriticalPointReport):
    # canonical point order inside the key makes the lexicographic tie-break permutation invariant
    pts = sorted(map(tuple, np.round(r.cfg, 12)))
    return (round(r.value, 10),) + tuple(v for p in pts for v in p)


def deflated_search(model: CurvatureModel, m: int, n_seeds: int = 100, seed: int = 0, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER, workers: int = 1, include_closed_form: bool = True) -> list:
    """Multistart Newton from ring-ansatz seeds, deduplicated up to point permutations.

    Results do not depend on ``workers``: each seed is solved independently
    and deduplication walks the results in seed order.
    """
    if m < 1 or n_seeds < 0:
        raise DomainError("need m >= 1 and n_seeds >= 0")
    found = []
    if include_closed_form and m == 2:
        w = np.linalg.eigvalsh(model.sym_hess)
        if w[-1] > 0:
            found.append(closed_form_m2(model, -1))
    seeds = ring_seeds(model, m, n_seeds, seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda x0: _try_solve(model, m, x0, tol, max_iter), seeds))
    else:
        results = [_try_solve(model, m, x0, tol, max_iter) for x0 in seeds]
    found.extend(r for r in results if r is not None)
    return sorted(deduplicate(found), key=_sort_key)
