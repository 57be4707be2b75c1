"""Maximum likelihood for the Fisher model on SO(3) via the holonomic gradient method."""

__version__ = "0.1.0"

from .engine import LogCState, eval_C, eval_logC, hgm_transport
from .mle import MLEResult, OptimConfig, fit, grad_loglik, hess_loglik, loglik
from .ode import IntegratorConfig
from .oracle import C_quad, QuadratureGrid, ctilde_deriv, log_ctilde
from .rotations import (SufficientStats, fisher_sample, haar_sample, reconstruct_theta,
                        sample_mean, signed_svd)

__all__ = [
    "C_quad", "IntegratorConfig", "LogCState", "MLEResult", "OptimConfig",
    "QuadratureGrid", "SufficientStats", "ctilde_deriv", "eval_C", "eval_logC",
    "fisher_sample", "fit", "grad_loglik", "haar_sample", "hess_loglik",
    "hgm_transport", "log_ctilde", "loglik", "reconstruct_theta", "sample_mean",
    "signed_svd",
]
