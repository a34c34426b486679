"""Spectral statistics of random regular graphs in the dense regime."""
from .errors import (ConfigError, DomainError, InfeasibleError, NumericalError, RegspecError,
                     ResourceGuardError, SwitchInfeasibleError)
from .graph import RegularGraph, SwitchMove
from .kernels import BACKEND
from .sampler import SamplerConfig, SwitchSampler, enumerate_all, sample_uniform
from .spectral import GreenEvaluator, SpectralDomain, full_spectrum, q_param, semicircle_m

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "DomainError", "GreenEvaluator", "InfeasibleError",
    "NumericalError", "RegspecError", "RegularGraph", "ResourceGuardError", "SamplerConfig",
    "SpectralDomain", "SwitchInfeasibleError", "SwitchMove", "SwitchSampler", "enumerate_all",
    "full_spectrum", "q_param", "sample_uniform", "semicircle_m", "__version__",
]
