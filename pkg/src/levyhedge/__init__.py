"""Locally risk-minimizing and delta hedging strategies for exponential
Levy models, with Fourier/FFT evaluation, model-independent error bounds,
Monte Carlo cross-validation, and quote calibration."""

from .levy_core import (
    AccuracyError,
    AssumptionError,
    DensityMeasure,
    DivergenceError,
    LevyIntegrabilityError,
    LevyMeasure,
    LevyModel,
    MmmModel,
    StripError,
    ZeroMeasure,
    c2_split,
    compute_mu_s,
    mmm_cumulant,
    mmm_cumulant_quad,
    to_mmm,
)
from .models import (
    MertonParams,
    VgParams,
    merton_c2_minus,
    merton_cumulant_mmm,
    merton_model,
    merton_nu_density,
    vg_cumulant_mmm,
    vg_from_kappa,
    vg_model,
    vg_nu_density,
    vg_to_kappa,
)
from .fourier import (
    CharFn,
    ConditionIntegral,
    FourierConfig,
    FourierResult,
    call_price,
    char_fn,
    i1,
    i2,
    tail_lower,
    tail_upper,
    theorem4_condition_integral,
    transform,
)

__version__ = "0.1.0"
