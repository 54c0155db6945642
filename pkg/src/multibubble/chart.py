"""Half-space chart model of K around the concentration point.

In the chart z sits at the origin, the boundary is {x_n = 0} and the domain
is {x_n > 0}.  K is represented by

    K~(x) = K_z + s_nu * dK_dnu * x_n + 1/2 <s_T * hessK1 x', x'>

The two scale factors account for the stereographic chart.  Lengths in the
chart are half of those on the sphere near z, and the chart's inward normal
is opposite to the outward normal of the half-sphere, which gives
s_nu = -2.  The tangential factor s_T = 2 is the one for which the
self-interaction integral reproduces the c5 * hessK1 x / lambda term with
the stated c5.  ``calibrate_conventions`` in ``expansion`` re-derives both
factors from the numerics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import CurvatureModel

NORMAL_SCALE = -2.0
TANGENTIAL_SCALE = 2.0
NORMAL_CANDIDATES = (-2.0, -1.0, 1.0, 2.0)
TANGENTIAL_CANDIDATES = (1.0, 2.0)


@dataclass(frozen=True)
class ChartModel:
    model: CurvatureModel
    normal_scale: float = NORMAL_SCALE
    tangential_scale: float = TANGENTIAL_SCALE

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def kappa_nu(self) -> float:
        """dK~/dx_n at the origin."""
        return self.normal_scale * self.model.dK_dnu

    def K(self, x) -> np.ndarray:
        """K~ at points of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        xt = x[..., :-1]
        quad = np.einsum("...i,ij,...j->...", xt, self.model.hessK1, xt)
        return self.model.K_z + self.kappa_nu * x[..., -1] + 0.5 * self.tangential_scale * quad

    def K_boundary(self, xt) -> float:
        """K~ at a boundary point given by its tangential coordinates."""
        xt = np.asarray(xt, dtype=float)
        return float(self.model.K_z + 0.5 * self.tangential_scale * xt @ self.model.hessK1 @ xt)

    def grad_K1(self, xt) -> np.ndarray:
        """Tangential gradient of K on the boundary sphere, hessK1 x'."""
        return self.model.hessK1 @ np.asarray(xt, dtype=float)
