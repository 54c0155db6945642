"""Universal constants of the boundary-bubble gradient expansion.

Every constant is a moment of the standard bubble profile ``(1 + |x|^2)^(-a)``
over R^n or the half-space R^n_+.  ``compute_constants`` evaluates them by
adaptive quadrature of the radial reduction; ``closed_form_constants``
evaluates the same integrals through Beta/digamma identities.  The two
routes share nothing but the angular factors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

FIELDS = ("S_n", "c2", "c3", "c4", "c5")


@dataclass(frozen=True)
class UniversalConstants:
    n: int
    c0: float
    p: float
    S_n: float
    c2: float
    c3: float
    c4: float
    c5: float
    cbar: float

    def __post_init__(self):
        if self.n < 5:
            raise DomainError(f"dimension n={self.n}: the construction requires n >= 5")

    @property
    def c0_power(self) -> float:
        """c0^(2n/(n-2)) = c0^(p+1) = (n(n-2))^(n/2)."""
        return (self.n * (self.n - 2)) ** (self.n / 2)

    def to_dict(self) -> dict:
        return asdict(self)

    def rel_diff(self, other: "UniversalConstants") -> dict:
        out = {}
        for name in ("c0", "p", "cbar") + FIELDS:
            a, b = getattr(self, name), getattr(other, name)
            out[name] = abs(a - b) / max(abs(a), abs(b), 1e-300)
        return out


def _check_n(n) -> int:
    if int(n) != n or n < 5:
        raise DomainError(f"dimension n={n}: the construction requires an integer n >= 5")
    return int(n)


def sphere_area(k: int) -> float:
    """Surface area of the unit sphere S^k in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def hemisphere_normal_moment(n: int) -> float:
    """Integral of omega_n over the upper unit hemisphere of S^(n-1).

    Projecting the hemisphere onto the equatorial disk turns this into the
    volume of the unit ball in R^(n-1), i.e. area(S^(n-2)) / (n-1).
    """
    return sphere_area(n - 2) / (n - 1)


def _prefactors(n: int):
    c0 = (n * (n - 2)) ** ((n - 2) / 4)
    p = (n + 2) / (n - 2)
    cbar = (n - 2) / 2 ** (n - 1)
    return c0, p, cbar, (n * (n - 2)) ** (n / 2)


def _radial_quad(f, rel_tol: float) -> float:
    """Integrate f(r) over [0, inf) through r = t/(1-t)."""

    def g(t):
        if t >= 1.0:
            return 0.0
        s = 1.0 - t
        return f(t / s) / (s * s)

    val, err, info = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=500, full_output=True)[:3]
    if abs(err) > 10 * rel_tol * abs(val) + 1e-300:
        raise QuadratureError(f"radial quadrature did not reach rel tol {rel_tol}: estimate {val}, error {err}")
    return val


def compute_constants(n: int, rel_tol: float = 1e-10) -> UniversalConstants:
    """Constants by adaptive radial quadrature."""
    n = _check_n(n)
    c0, p, cbar, cp = _prefactors(n)
    area = sphere_area(n - 1)
    half_moment = hemisphere_normal_moment(n)

    def q(f):
        return _radial_quad(f, rel_tol)

    S_n = cp * 0.5 * area * q(lambda r: r ** (n - 1) / (1 + r * r) ** n)
    c2 = 0.5 * cp * area * q(lambda r: r ** (n - 1) / (1 + r * r) ** ((n + 2) / 2))
    c3 = (n - 2) * cp * half_moment * q(lambda r: r**n * (r * r - 1) / (1 + r * r) ** (n + 1))
    c4 = cp * (n - 2) ** 2 / 8 * area * q(
        lambda r: r ** (n - 1) * (r * r - 1) * math.log1p(r * r) / (1 + r * r) ** (n + 1)
    )
    c5 = cp * (n - 2) / n * area * q(lambda r: r ** (n + 1) / (1 + r * r) ** (n + 1))
    return UniversalConstants(n=n, c0=c0, p=p, S_n=S_n, c2=c2, c3=c3, c4=c4, c5=c5, cbar=cbar)


def _half_beta(k: float, a: float) -> float:
    # int_0^inf r^k (1+r^2)^(-a) dr
    x = (k + 1) / 2
    return 0.5 * special.beta(x, a - x)


def _half_beta_log(k: float, a: float) -> float:
    # int_0^inf r^k ln(1+r^2) (1+r^2)^(-a) dr = -d/da of _half_beta
    x = (k + 1) / 2
    y = a - x
    return 0.5 * special.beta(x, y) * (special.digamma(a) - special.digamma(y))


def closed_form_constants(n: int) -> UniversalConstants:
    """Same constants from Gamma/Beta identities (no quadrature)."""
    n = _check_n(n)
    c0, p, cbar, cp = _prefactors(n)
    area = sphere_area(n - 1)
    half_moment = hemisphere_normal_moment(n)

    S_n = cp * 0.5 * math.pi ** (n / 2) * math.gamma(n / 2) / math.gamma(n)
    c2 = 0.5 * cp * area * _half_beta(n - 1, (n + 2) / 2)
    c3 = (n - 2) * cp * half_moment * (_half_beta(n + 2, n + 1) - _half_beta(n, n + 1))
    c4 = cp * (n - 2) ** 2 / 8 * area * (_half_beta_log(n + 1, n + 1) - _half_beta_log(n - 1, n + 1))
    c5 = cp * (n - 2) / n * area * _half_beta(n + 1, n + 1)
    return UniversalConstants(n=n, c0=c0, p=p, S_n=S_n, c2=c2, c3=c3, c4=c4, c5=c5, cbar=cbar)


def constants_report(n: int) -> dict:
    """Both routes side by side, as emitted by the ``constants`` command."""
    quad = compute_constants(n)
    closed = closed_form_constants(n)
    diffs = quad.rel_diff(closed)
    return {
        "n": quad.n,
        "cbar": quad.cbar,
        "quadrature": quad.to_dict(),
        "closed_form": closed.to_dict(),
        "rel_diff": diffs,
        "max_rel_diff": max(diffs.values()),
        "signs": {"c3": int(np.sign(quad.c3)), "c4": int(np.sign(quad.c4))},
    }
