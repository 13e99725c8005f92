"""Generalized Hill estimators of the extreme value index and their limit laws."""
from .exceptions import ConstructionError, DegenerateError, DomainError, GenHillError, RangeError

__version__ = "0.1.0"

from .series import NormalizingConstants, ZetaValue, normalizers, partial_zeta, power_sum, s_sum, zeta
from .estimators import (
    EstimatorReport,
    Sample,
    default_k,
    dehaan_resnick,
    half_family,
    hill,
    lo,
    pickands,
    studentize,
    sweep,
    t_tau,
)
from .limitlaw import (
    LimitLawSample,
    LimitLawSpec,
    cf_psi_infinity,
    cumulant,
    moments,
    sample_limit_law,
    sample_limit_law_mixture,
    sample_v_star,
)
from .models import (
    TailModel,
    check_conditions,
    gumbel_weibull_model,
    hall_model,
    model_from_spec,
    pareto_model,
)
from .api import (
    DeHaanResnickEstimator,
    GeneralizedHillEstimator,
    HalfFamilyEstimator,
    HillEstimator,
    LoEstimator,
    PickandsEstimator,
)
