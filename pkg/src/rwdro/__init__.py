"""Regularized Wasserstein distributionally robust optimization on finite grids."""
from .costs import CostSpec, ReferenceCoupling, build_reference, calibrate_sigma, cost, expected_cost
from .dual import DualSolution, ProblemSpec, dual_value_cost_reg, inner_sup, primal_lp_unreg, solve_cost_reg
from .entropic import (EntropicSolution, RegParams, entropic_dual_value, lambda_bar, recover_primal,
                       solve_entropic, verify_duality)
from .errors import ConfigError, InfeasibleError, SizeError
from .measures import Coupling, DiscreteMeasure, Grid, expectation, kl_divergence, load_empirical, marginal
from .phi import PhiSpec, phi_conjugate, phi_dual_objective, solve_phi_dual

__version__ = "0.1.0"
