"""Exact formal series and high-precision splitting measurements for the
leapfrog-discretized logistic equation y' = 1 - y^2."""

from .errors import SeplabError
from .numeric import PrecisionContext, d_from_eps, eps_from_d, eps_series_coeffs, pi_const
from .poly import UPoly, apply_D, norm_n, tau_basis, to_tau, from_tau
from .series import DSeries, FormalSolution, compute_formal_solution, residual_of_equation
from .alpha import build_derived_series, extract_alpha_coeffs, alpha_estimate, compute_alpha_table
from .splitting import MapParams, Point2, SplittingLab, vertical_splitting

__version__ = "0.1.0"
