"""The reduced Hamiltonian F on (R^(n-1))^m and its derivatives.

A configuration is an array of shape (m, n-1): row i is the tangential
position xi_i.  The curvature data enter only through the symmetric matrix
``hessK1`` (the tangential Hessian of K at the concentration point).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

COLLISION_TOL = 1e-12


@dataclass(frozen=True)
class CurvatureModel:
    """Local data of K near the concentration point z on the boundary.

    ``dK_dnu`` is the outward normal derivative of K at z; the construction
    needs it positive.  ``hessK1`` is the Hessian of the restriction of K to
    the boundary sphere, in the tangential coordinates of the chart.
    """

    n: int
    K_z: float
    dK_dnu: float
    hessK1: np.ndarray = field(repr=False)
    degeneracy_tol: float = 1e-10

    def __post_init__(self):
        n = self.n
        if int(n) != n or n < 5:
            raise DomainError(f"dimension n={n}: need an integer n >= 5")
        H = np.array(self.hessK1, dtype=float)
        if H.shape != (n - 1, n - 1):
            raise DomainError(f"hessK1 must have shape ({n - 1}, {n - 1}), got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise DomainError("hessK1 has non-finite entries")
        if np.abs(H - H.T).max() > 1e-12 * max(1.0, np.abs(H).max()):
            raise DomainError("hessK1 must be symmetric")
        smin = np.linalg.svd(H, compute_uv=False).min()
        if smin <= self.degeneracy_tol:
            raise DomainError(f"hessK1 is degenerate (smallest singular value {smin:.3g})")
        if not (np.isfinite(self.K_z) and self.K_z > 0):
            raise DomainError("K_z must be a positive finite number")
        if not np.isfinite(self.dK_dnu):
            raise DomainError("dK_dnu must be finite")
        H.setflags(write=False)
        object.__setattr__(self, "hessK1", H)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "K_z", float(self.K_z))
        object.__setattr__(self, "dK_dnu", float(self.dK_dnu))

    @property
    def sym_hess(self) -> np.ndarray:
        """Symmetric part of hessK1, the exact Hessian of the quadratic term."""
        return 0.5 * (self.hessK1 + self.hessK1.T)

    @property
    def dim(self) -> int:
        """Tangential dimension n - 1."""
        return self.n - 1

    def to_dict(self) -> dict:
        return {"n": self.n, "K_z": self.K_z, "dK_dnu": self.dK_dnu, "hessK1": self.hessK1.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "CurvatureModel":
        missing = {"n", "K_z", "dK_dnu", "hessK1"} - set(data)
        if missing:
            raise DomainError(f"curvature model is missing keys: {sorted(missing)}")
        return cls(n=data["n"], K_z=data["K_z"], dK_dnu=data["dK_dnu"], hessK1=np.asarray(data["hessK1"], float))

    @classmethod
    def from_json(cls, path) -> "CurvatureModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def as_configuration(model: CurvatureModel, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[1] != model.dim:
        raise DomainError(f"configuration must have shape (m, {model.dim}), got {xi.shape}")
    if xi.shape[0] < 1:
        raise DomainError("configuration needs at least one point")
    if not np.all(np.isfinite(xi)):
        raise DomainError("configuration has non-finite entries")
    return xi


def _differences(xi: np.ndarray, check: bool = True):
    d = xi[:, None, :] - xi[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    m = xi.shape[0]
    off = ~np.eye(m, dtype=bool)
    if check and m > 1 and r[off].min() <= COLLISION_TOL * max(1.0, np.abs(xi).max()):
        raise DomainError("coincident points in configuration")
    np.fill_diagonal(r, np.inf)
    return d, r


def eval_F(model: CurvatureModel, xi) -> float:
    """F(xi) = 1/2 sum <H xi_i, xi_i> + sum_{i<j} |xi_i - xi_j|^(2-n)."""
    xi = as_configuration(model, xi)
    _, r = _differences(xi)
    quad = 0.5 * np.einsum("ik,kl,il->", xi, model.hessK1, xi)
    pair = 0.5 * np.sum(r ** (2.0 - model.n))
    return float(quad + pair)


def grad_F(model: CurvatureModel, xi) -> np.ndarray:
    xi = as_configuration(model, xi)
    n = model.n
    d, r = _differences(xi)
    force = np.sum(d * (r ** (-float(n)))[:, :, None], axis=1)
    return xi @ model.sym_hess - (n - 2) * force


def pair_hessian_block(n: int, d: np.ndarray) -> np.ndarray:
    """Hessian of |d|^(2-n) with respect to d."""
    r2 = d @ d
    r = np.sqrt(r2)
    return (n - 2) * (n * np.outer(d, d) / r ** (n + 2) - np.eye(d.size) / r**n)


def hess_F(model: CurvatureModel, xi) -> np.ndarray:
    """Full (m(n-1)) x (m(n-1)) Hessian, blocks ordered point by point."""
    xi = as_configuration(model, xi)
    _differences(xi)
    m, k = xi.shape
    n = model.n
    Hs = np.zeros((m * k, m * k))
    for i in range(m):
        Hs[i * k:(i + 1) * k, i * k:(i + 1) * k] += model.sym_hess
    for i in range(m):
        for j in range(i + 1, m):
            P = pair_hessian_block(n, xi[i] - xi[j])
            si, sj = slice(i * k, (i + 1) * k), slice(j * k, (j + 1) * k)
            Hs[si, si] += P
            Hs[sj, sj] += P
            Hs[si, sj] -= P
            Hs[sj, si] -= P
    return Hs


def morse_index(hessian: np.ndarray, rel_tol: float = 1e-9):
    """(index, nullity) of a symmetric matrix with a relative zero threshold."""
    w = np.linalg.eigvalsh(hessian)
    thresh = rel_tol * max(1.0, np.abs(w).max())
    return int(np.sum(w < -thresh)), int(np.sum(np.abs(w) <= thresh))


def _split_terms(model: CurvatureModel, direction: np.ndarray):
    quad = float(np.einsum("ik,kl,il->", direction, model.hessK1, direction))
    _, r = _differences(direction)
    pair = 0.5 * float(np.sum(r ** (2.0 - model.n)))
    return quad, pair


def radial_form(model: CurvatureModel, direction, r):
    """Value and r-derivative of r -> F(r * Lambda) for a unit direction Lambda.

    ``r`` may be an array; F(r Lambda) = r^2 Q/2 + r^(2-n) P, so the
    derivative is r Q - (n-2) r^(1-n) P.
    """
    lam = as_configuration(model, direction)
    norm = np.linalg.norm(lam)
    if not np.isclose(norm, 1.0, rtol=1e-10):
        raise DomainError(f"direction must have unit Frobenius norm, got {norm}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radii must be positive")
    Q, P = _split_terms(model, lam)
    n = model.n
    value = 0.5 * Q * r**2 + P * r ** (2.0 - n)
    deriv = Q * r - (n - 2) * P * r ** (1.0 - n)
    return value, deriv
