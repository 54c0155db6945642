"""Power-law fits of residuals against eps, with Monte Carlo error propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError


@dataclass
class ExponentFit:
    exponent: float
    stderr: float
    ci_low: float
    ci_high: float
    prefactor: float
    n_points: int
    log_power: int
    sign_consistent: bool
    resolved: bool

    def within(self, target: float, tol: float) -> bool:
        return bool(np.isfinite(self.exponent) and abs(self.exponent - target) <= tol)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def fit_exponent(eps, residuals, stderrs=None, log_power: int = 0, confidence: float = 0.95) -> ExponentFit:
    """Fit |residual| ~ A eps^k |ln eps|^log_power by weighted least squares in log space.

    Standard errors of the residuals become weights through
    sigma(log|r|) = se / |r|.  The interval on k combines those weights with
    a Student-t quantile.  ``sign_consistent`` is False when the residual
    changes sign across the series (no single power law describes it);
    ``resolved`` is False when some residual is within two standard errors
    of zero.
    """
    eps = np.asarray(eps, float)
    r = np.asarray(residuals, float)
    if eps.ndim != 1 or r.shape[0] != eps.size:
        raise DomainError("eps and residuals must be matching 1-D series")
    if eps.size < 2:
        raise DomainError("need at least two points to fit an exponent")
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise DomainError("eps values must lie in (0, 1)")
    if r.ndim == 1:
        mag = np.abs(r)
        signs = np.sign(r)
        sign_consistent = bool(np.all(signs == signs[0]) and signs[0] != 0)
    else:
        mag = np.linalg.norm(r, axis=1)
        # vectors: consistent when every residual points into the same half-space as the first
        sign_consistent = bool(np.all(r @ r[0] > 0))
    se = np.zeros_like(mag) if stderrs is None else np.asarray(stderrs, float)
    if se.ndim > 1:
        se = np.linalg.norm(se, axis=1)
    if np.any(mag == 0):
        return ExponentFit(float("nan"), float("nan"), float("nan"), float("nan"), float("nan"),
                           eps.size, log_power, sign_consistent, False)
    resolved = bool(np.all(mag > 2 * se))
    x = np.log(eps)
    y = np.log(mag) - log_power * np.log(np.abs(np.log(eps)))
    sig = np.where(se > 0, se / mag, 0.0)
    # floor keeps a noiseless series (se = 0) well posed; it reflects float rounding, not Monte Carlo error
    sig = np.maximum(sig, 1e-12)
    w = 1.0 / sig**2
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    beta = cov @ (X.T @ (w * y))
    k_se = float(np.sqrt(cov[1, 1]))
    dof = max(eps.size - 2, 1)
    q = stats.t.ppf(0.5 + confidence / 2, dof)
    return ExponentFit(exponent=float(beta[1]), stderr=k_se, ci_low=float(beta[1] - q * k_se),
                       ci_high=float(beta[1] + q * k_se), prefactor=float(np.exp(beta[0])),
                       n_points=int(eps.size), log_power=log_power,
                       sign_consistent=sign_consistent, resolved=resolved)
