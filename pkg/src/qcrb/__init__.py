"""Quantum Cramer-Rao-type bounds for qubit and Gaussian shift models.

The package computes the SLD, RLD, Holevo and separable-measurement bounds
on weighted estimation error, and verifies them at desk scale: exact
combinatorics of the total-spin measurement on n qubit copies, seeded
Monte Carlo of the collective covariant estimator, and finite-j residuals
of the spin-to-Gaussian approximation.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundsReport,
    HolevoProgram,
    full_model_report,
    full_qubit_program,
    gaussian_report,
    holevo_full_qubit,
    holevo_numeric,
    holevo_submodel,
    optimal_mse_fisher,
    quasi_cr_qubit,
    rld_bound,
    sld_bound,
    submodel_program,
    submodel_report,
)
from .collective import (
    asymptotic_predictions,
    exact_bures_risk,
    exact_euclidean_risk,
    fisher_decomposition,
    fisher_pnr,
    origin_cov_fisher,
    p_nr,
    predict_general_cov,
    simulate_covariant,
    theta3_hat,
)
from .gaussian import (
    gaussian_rld_bound,
    gaussian_truncated,
    simulate_gaussian,
    squeezed_params,
)
from .qubit import bloch_state, fisher_pair, sld_set, submodel_tangent
from .report import SimReport
from .spin import (
    angular_density,
    coherent_vec,
    f_closed,
    limit_report,
    moment_matrices,
    rho_jp,
    sample_angles,
    spin_ops,
)

__all__ = [
    "BoundsReport",
    "HolevoProgram",
    "SimReport",
    "__version__",
    "angular_density",
    "asymptotic_predictions",
    "bloch_state",
    "coherent_vec",
    "exact_bures_risk",
    "exact_euclidean_risk",
    "f_closed",
    "fisher_decomposition",
    "fisher_pair",
    "fisher_pnr",
    "full_model_report",
    "full_qubit_program",
    "gaussian_report",
    "gaussian_rld_bound",
    "gaussian_truncated",
    "holevo_full_qubit",
    "holevo_numeric",
    "holevo_submodel",
    "limit_report",
    "moment_matrices",
    "optimal_mse_fisher",
    "origin_cov_fisher",
    "p_nr",
    "predict_general_cov",
    "quasi_cr_qubit",
    "rho_jp",
    "rld_bound",
    "sample_angles",
    "simulate_covariant",
    "simulate_gaussian",
    "sld_bound",
    "sld_set",
    "spin_ops",
    "squeezed_params",
    "submodel_program",
    "submodel_report",
    "submodel_tangent",
    "theta3_hat",
]
