"""Biased SNIS gradient estimators for alpha-divergence variational inference."""

from .estimators import KINDS, EstimationFailure, EstimatorKind, GradientEstimate, estimate, weight_spectrum
from .numeric import RandomStream, chivi_weights, ess, log_sum_exp, snis_weights, standard_normals
from .oracles import DivergenceKind, divergence, kl_inclusive_up_to_const, moment_match, optimal_scale
from .targets import GaussianTarget, LogisticRegression, gaussian_schedule, load_libsvm
from .variational import VariationalParams, gradient_kernels, log_density, sample

__version__ = "0.1.0"
