"""Boundary bubbles, their interaction eps_ij and the neighbourhood M_eps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chart import ChartModel
from .errors import DomainError
from .hamiltonian import CurvatureModel


def c0_of(n: int) -> float:
    return (n * (n - 2)) ** ((n - 2) / 4)


@dataclass(frozen=True)
class Bubble:
    center: np.ndarray
    lam: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).ravel()
        if c.size < 2:
            raise DomainError("bubble center must live in R^n with n >= 2")
        if c[-1] != 0.0:
            raise DomainError("bubble center must lie on the boundary x_n = 0")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise DomainError("bubble concentration lambda must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.center.size

    @property
    def tangential(self) -> np.ndarray:
        return self.center[:-1]

    @classmethod
    def on_boundary(cls, xt, lam: float) -> "Bubble":
        return cls(np.append(np.asarray(xt, float), 0.0), lam)


def eval_bubble(b: Bubble, x) -> np.ndarray:
    """c0 lam^((n-2)/2) / (1 + lam^2 |x - a|^2)^((n-2)/2) for points of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    n = b.n
    d = x - b.center
    r2 = np.einsum("...i,...i->...", d, d)
    beta = (n - 2) / 2
    return c0_of(n) * b.lam**beta / (1.0 + b.lam**2 * r2) ** beta


def bubble_gradient(b: Bubble, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = b.n
    d = x - b.center
    rho = 1.0 + b.lam**2 * np.einsum("...i,...i->...", d, d)
    return -(n - 2) * b.lam**2 * (eval_bubble(b, x) / rho)[..., None] * d


def eps_ij(bi: Bubble, bj: Bubble) -> float:
    n = bi.n
    d = bi.center - bj.center
    q = bi.lam / bj.lam + bj.lam / bi.lam + bi.lam * bj.lam * float(d @ d)
    return q ** ((2 - n) / 2)


def d_eps_ij_dx(bi: Bubble, bj: Bubble) -> np.ndarray:
    """Tangential gradient of eps_ij with respect to the center of bubble i."""
    n = bi.n
    e = eps_ij(bi, bj)
    return (n - 2) * e ** (n / (n - 2)) * bi.lam * bj.lam * (bj.tangential - bi.tangential)


@dataclass
class BubbleEnsemble:
    eps: float
    bubbles: list
    alphas: np.ndarray
    z: np.ndarray = field(default=None)

    def __post_init__(self):
        if not (self.eps > 0):
            raise DomainError("eps must be positive")
        if len(self.bubbles) == 0:
            raise DomainError("an ensemble needs at least one bubble")
        self.alphas = np.asarray(self.alphas, dtype=float).ravel()
        if self.alphas.size != len(self.bubbles) or np.any(self.alphas <= 0):
            raise DomainError("one positive alpha per bubble required")
        n = self.bubbles[0].n
        if any(b.n != n for b in self.bubbles):
            raise DomainError("bubbles of mixed dimension")
        self.z = np.zeros(n) if self.z is None else np.asarray(self.z, float)

    @property
    def n(self) -> int:
        return self.bubbles[0].n

    @property
    def m(self) -> int:
        return len(self.bubbles)

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.bubbles])

    @property
    def lams(self) -> np.ndarray:
        return np.array([b.lam for b in self.bubbles])

    def u(self, x) -> np.ndarray:
        """The approximate solution sum_j alpha_j delta_j."""
        return sum(a * eval_bubble(b, x) for a, b in zip(self.alphas, self.bubbles))

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "z": self.z.tolist(),
            "alphas": self.alphas.tolist(),
            "bubbles": [{"center": b.center.tolist(), "lambda": b.lam} for b in self.bubbles],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BubbleEnsemble":
        return cls(
            eps=float(d["eps"]),
            bubbles=[Bubble(np.asarray(b["center"], float), float(b["lambda"])) for b in d["bubbles"]],
            alphas=np.asarray(d["alphas"], float),
            z=np.asarray(d.get("z"), float) if d.get("z") is not None else None,
        )


@dataclass
class Constraint:
    constraint: str
    index: tuple
    value: float
    lower: float
    upper: float
    strict: bool = False

    @property
    def margin(self) -> float:
        """Signed distance to the nearest bound; negative when violated."""
        return min(self.value - self.lower, self.upper - self.value)

    def to_dict(self) -> dict:
        return {"constraint": self.constraint, "index": list(self.index), "value": self.value,
                "lower": self.lower, "upper": self.upper, "margin": self.margin}

    @property
    def satisfied(self) -> bool:
        return self.margin > 0 if self.strict else self.margin >= 0


@dataclass
class MembershipReport:
    ok: bool
    checks: list
    C: float
    mu: float

    @property
    def violations(self) -> list:
        return [c for c in self.checks if not c.satisfied]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "C": self.C, "mu": self.mu,
                "checks": [c.to_dict() for c in self.checks],
                "violations": [c.to_dict() for c in self.violations]}


def check_M_eps(ensemble: BubbleEnsemble, C: float = 10.0, mu: float = 0.5, model=None) -> MembershipReport:
    """Evaluate every inequality defining M_eps and report them with margins.

    ``model`` is a CurvatureModel or ChartModel used for K(x_i); without it
    the amplitude constraint is skipped.
    """
    eps = ensemble.eps
    n = ensemble.n
    checks = []
    chart = ChartModel(model) if isinstance(model, CurvatureModel) else model
    if chart is not None:
        band = eps * math.log(eps) ** 2
        for i, (a, b) in enumerate(zip(ensemble.alphas, ensemble.bubbles)):
            v = a ** (4 / (n - 2)) * chart.K_boundary(b.tangential) - 1.0
            checks.append(Constraint("|alpha^(4/(n-2)) K(x) - 1| < eps ln^2 eps", (i,), v, -band, band, strict=True))
    for i, b in enumerate(ensemble.bubbles):
        checks.append(Constraint("C^-1 eps <= lambda^-1 <= C eps", (i,), 1.0 / b.lam, eps / C, C * eps))
        checks.append(Constraint("|x - z| <= mu", (i,), float(np.linalg.norm(b.center - ensemble.z)), -np.inf, mu))
    sep = eps ** ((n - 2) / n)
    for i in range(ensemble.m):
        for j in range(i + 1, ensemble.m):
            d = float(np.linalg.norm(ensemble.bubbles[i].center - ensemble.bubbles[j].center))
            checks.append(Constraint("C^-1 eps^((n-2)/n) <= |x_i - x_j| <= C eps^((n-2)/n)", (i, j), d, sep / C, C * sep))
    ok = all(c.satisfied for c in checks)
    return MembershipReport(ok=ok, checks=checks, C=C, mu=mu)
