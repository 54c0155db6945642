"""Change of variables (alpha, lambda, x) <-> (beta, Lambda, xi) around a critical point of F.

    beta_i    = 1 - alpha_i^(4/(n-2)) K(x_i)
    1/lambda_i = kappa * eps * (1 + Lambda_i),   kappa = c4 K(z) / (c3 dK/dnu(z))
    x_i       = z + gamma * eps^((n-2)/n) * (xibar_i + xi_i)

with gamma the positive root of the confinement/repulsion balance
c5 gamma / K(z) = c2 kappa^(n-2) / gamma^(n-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bubbles import Bubble, BubbleEnsemble, check_M_eps
from .chart import ChartModel
from .constants import UniversalConstants, compute_constants
from .critical_points import CriticalPointReport
from .errors import DomainError, RegimeError
from .hamiltonian import CurvatureModel, hess_F


@dataclass
class ReducedVariables:
    betas: np.ndarray
    Lambdas: np.ndarray
    xis: np.ndarray
    gamma: float = float("nan")

    @classmethod
    def zero(cls, m: int, dim: int, gamma: float = float("nan")) -> "ReducedVariables":
        return cls(np.zeros(m), np.zeros(m), np.zeros((m, dim)), gamma)

    def to_dict(self) -> dict:
        return {"betas": self.betas.tolist(), "Lambdas": self.Lambdas.tolist(),
                "xis": self.xis.tolist(), "gamma": self.gamma}


def balance_ratio(model: CurvatureModel, constants: UniversalConstants) -> float:
    """kappa = c4 K(z) / (c3 dK/dnu(z)), the rescaled 1/(lambda eps) at balance."""
    if model.dK_dnu <= 0:
        raise RegimeError(f"dK/dnu(z) = {model.dK_dnu:.6g}: the construction needs a positive normal derivative")
    kappa = constants.c4 * model.K_z / (constants.c3 * model.dK_dnu)
    if not kappa > 0:
        raise RegimeError(f"c4 K(z) / (c3 dK/dnu) = {kappa:.6g} is not positive; no admissible lambda")
    return kappa


def solve_gamma(model: CurvatureModel, constants: UniversalConstants) -> float:
    kappa = balance_ratio(model, constants)
    n = model.n
    c = constants
    gamma = (c.c2 * model.K_z / c.c5 * kappa ** (n - 2)) ** (1.0 / n)
    lhs = c.c5 * gamma / model.K_z
    rhs = c.c2 / gamma ** (n - 1) * kappa ** (n - 2)
    if abs(lhs - rhs) > 1e-12 * abs(lhs):
        raise RegimeError(f"gamma balance residual {abs(lhs - rhs) / lhs:.3g} exceeds 1e-12")
    return float(gamma)


def gamma_residual(model: CurvatureModel, constants: UniversalConstants, gamma: float) -> float:
    """Relative mismatch of the two sides of the gamma balance."""
    n = model.n
    c = constants
    kappa = balance_ratio(model, constants)
    lhs = c.c5 * gamma / model.K_z
    rhs = c.c2 / gamma ** (n - 1) * kappa ** (n - 2)
    return abs(lhs - rhs) / abs(lhs)


def assemble(model: CurvatureModel, crit, eps: float, perturbation: ReducedVariables = None,
             constants: UniversalConstants = None, chart: ChartModel = None,
             C: float = 10.0, mu: float = 0.5, check: bool = True) -> BubbleEnsemble:
    """Bubble ensemble for the critical point ``crit`` at subcritical parameter ``eps``.

    ``crit`` is a CriticalPointReport or an (m, n-1) array.  K(x_i) is the
    chart model evaluated on the boundary.  With ``check`` the ensemble is
    tested against M_eps and a RegimeError carrying the membership report
    is raised on violation.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    constants = constants or compute_constants(model.n)
    chart = chart or ChartModel(model)
    xibar = np.asarray(crit.cfg if isinstance(crit, CriticalPointReport) else crit, dtype=float)
    m, dim = xibar.shape
    if dim != model.dim:
        raise DomainError(f"critical point has tangential dimension {dim}, model has {model.dim}")
    n = model.n
    gamma = solve_gamma(model, constants)
    kappa = balance_ratio(model, constants)
    pert = perturbation or ReducedVariables.zero(m, dim)
    if pert.xis.shape != (m, dim) or pert.betas.shape != (m,) or pert.Lambdas.shape != (m,):
        raise DomainError("perturbation shapes do not match the configuration")
    if np.any(pert.Lambdas <= -1) or np.any(pert.betas >= 1):
        raise DomainError("perturbation outside the domain of the change of variables (Lambda > -1, beta < 1)")

    scale = gamma * eps ** ((n - 2) / n)
    bubbles, alphas = [], []
    for i in range(m):
        xt = scale * (xibar[i] + pert.xis[i])
        lam = 1.0 / (kappa * eps * (1.0 + pert.Lambdas[i]))
        bubbles.append(Bubble.on_boundary(xt, lam))
        alphas.append(((1.0 - pert.betas[i]) / chart.K_boundary(xt)) ** ((n - 2) / 4))
    ens = BubbleEnsemble(eps=eps, bubbles=bubbles, alphas=np.array(alphas), z=np.zeros(n))
    if check:
        report = check_M_eps(ens, C=C, mu=mu, model=chart)
        if not report.ok:
            err = RegimeError(f"assembled ensemble leaves M_eps at eps={eps:g}: "
                              + "; ".join(f"{v.constraint} {v.index} margin {v.margin:.3g}" for v in report.violations))
            err.report = report
            raise err
    return ens


def read_back(model: CurvatureModel, ensemble: BubbleEnsemble, crit, constants: UniversalConstants = None,
              chart: ChartModel = None) -> ReducedVariables:
    """Inverse of ``assemble``: recover (beta, Lambda, xi) from an ensemble."""
    constants = constants or compute_constants(model.n)
    chart = chart or ChartModel(model)
    xibar = np.asarray(crit.cfg if isinstance(crit, CriticalPointReport) else crit, dtype=float)
    n = model.n
    eps = ensemble.eps
    gamma = solve_gamma(model, constants)
    kappa = balance_ratio(model, constants)
    scale = gamma * eps ** ((n - 2) / n)
    betas, Lambdas, xis = [], [], []
    for i, (a, b) in enumerate(zip(ensemble.alphas, ensemble.bubbles)):
        xt = b.tangential - ensemble.z[:-1]
        betas.append(1.0 - a ** (4 / (n - 2)) * chart.K_boundary(xt))
        Lambdas.append(1.0 / (b.lam * kappa * eps) - 1.0)
        xis.append(xt / scale - xibar[i])
    return ReducedVariables(np.array(betas), np.array(Lambdas), np.array(xis), gamma)


@dataclass
class ReducedResiduals:
    beta: np.ndarray
    Lambda: np.ndarray
    xi: np.ndarray

    def to_dict(self) -> dict:
        return {"beta": self.beta.tolist(), "Lambda": self.Lambda.tolist(), "xi": self.xi.tolist()}


def reduced_residuals(model: CurvatureModel, constants: UniversalConstants, ensemble: BubbleEnsemble, crit,
                      chart: ChartModel = None, include_Lambda_coupling: bool = False) -> ReducedResiduals:
    """Leading-order left-hand sides of the reduced system.

    The xi residual is the linearization D^2F(xibar)(xi, .) with the
    prefactor -(eps^((n-2)/n) / K(z)^((n-2)/4)) (c5 gamma / K(z)).  With
    ``include_Lambda_coupling`` the (n-2)^2/2 sum_j (Lambda_i + Lambda_j)
    (xibar_j - xibar_i)/|xibar_j - xibar_i|^n correction is added inside the
    braces.
    """
    n = model.n
    p = constants.p
    xibar = np.asarray(crit.cfg if isinstance(crit, CriticalPointReport) else crit, dtype=float)
    rv = read_back(model, ensemble, xibar, constants, chart)
    alphas = ensemble.alphas
    K = model.K_z
    beta_res = alphas * constants.S_n * rv.betas
    Lambda_res = -alphas**p * constants.c4 * K * ensemble.eps * rv.Lambdas
    m, dim = xibar.shape
    lin = (hess_F(model, xibar) @ rv.xis.ravel()).reshape(m, dim)
    if include_Lambda_coupling:
        for i in range(m):
            for j in range(m):
                if i != j:
                    d = xibar[j] - xibar[i]
                    lin[i] += (n - 2) ** 2 / 2 * (rv.Lambdas[i] + rv.Lambdas[j]) * d / np.linalg.norm(d) ** n
    pref = -(ensemble.eps ** ((n - 2) / n) / K ** ((n - 2) / 4)) * (constants.c5 * rv.gamma / K)
    return ReducedResiduals(beta_res, Lambda_res, pref * lin)
