"""Estimation of latent-variable signal tensors with spectral methods."""
from .errors import ArgumentError, Dtf1Error, NumericalError
from .estimators import RankRule, TuckerFactorization, approx_lse, dse, hooi, hosvd, select_rank_cv
from .generators import LatentModel, NoiseSpec, add_noise, generate_signal, noise_sigma_for_level
from .tensor import fold, frobenius_norm, infinity_norm, mse, multilinear_multiply, unfold

__version__ = "0.1.0"
