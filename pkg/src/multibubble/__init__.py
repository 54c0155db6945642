"""Boundary multi-bubble configurations for the prescribed scalar curvature problem on half-spheres.

Universal constants, the reduced Hamiltonian F and its critical points,
assembly of bubble clusters and numerical checks of the gradient
expansions.
"""

from .bubbles import Bubble, BubbleEnsemble, check_M_eps, d_eps_ij_dx, eps_ij, eval_bubble
from .chart import ChartModel
from .constants import UniversalConstants, closed_form_constants, compute_constants
from .critical_points import CriticalPointReport, closed_form_m2, deflated_search, newton_solve
from .errors import ConvergenceError, DomainError, NumericalError, QuadratureError, RegimeError
from .expansion import (
    PairingReport,
    analytic_pairing_alpha,
    analytic_pairing_lambda,
    analytic_pairing_x,
    calibrate_conventions,
    delta_eps_factor,
    energy_near_point,
    numeric_pairing,
    pair_inner_product,
)
from .hamiltonian import CurvatureModel, eval_F, grad_F, hess_F, radial_form
from .montecarlo import IntegratorSpec
from .reduction import ReducedVariables, assemble, reduced_residuals, solve_gamma

__version__ = "0.1.0"
