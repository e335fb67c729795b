"""Generalized Struve function and its images under Marichev-Saigo-Maeda fractional operators."""
from .errors import (ConvergenceError, DivergenceError, DomainError, MsmError, NonConvergence, PoleError,
                     SamplingExhausted, SliceError, StepError, TransformError, ValidityError)
from .gamma_core import gamma, gamma_ratio, log_gamma, pochhammer, reciprocal_gamma
from .image_formulas import eval_image, lemma_bundle, power_image, theorem_image, validity
from .msm_operators import (Integrand, MsmParams, msm_derivative_left, msm_derivative_right, msm_integral_left,
                            msm_integral_right)
from .series_engine import (FoxWrightSpec, StruveParams, appell_f3, fox_wright, gauss_2f1, hypergeometric_pfq,
                            struve_generalized)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "FoxWrightSpec",
    "Integrand",
    "MsmError",
    "MsmParams",
    "NonConvergence",
    "PoleError",
    "SamplingExhausted",
    "SliceError",
    "StepError",
    "StruveParams",
    "TransformError",
    "ValidityError",
    "appell_f3",
    "eval_image",
    "fox_wright",
    "gamma",
    "gamma_ratio",
    "gauss_2f1",
    "hypergeometric_pfq",
    "lemma_bundle",
    "log_gamma",
    "msm_derivative_left",
    "msm_derivative_right",
    "msm_integral_left",
    "msm_integral_right",
    "pochhammer",
    "power_image",
    "reciprocal_gamma",
    "struve_generalized",
    "theorem_image",
    "validity",
]
