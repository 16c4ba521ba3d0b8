"""Causal effect estimators for binary treatments and outcomes."""

from .adjusted import (
    NuisanceModels,
    PropensityModel,
    bootstrap_se,
    dr_ate,
    fit_nuisance,
    fit_outcome_models,
    fit_propensity,
    ipw_ate,
    psm_ate,
    tmle_ate,
)
from .adjustment import minimal_adjustment_search, weighted_smd
from .core import METHODS, CausalData, EffectEstimate, two_sided_p
from .counterfactual import CounterfactualReport, counterfactual_report, lower_median
from .factual import (
    AdequacyVerdict,
    ContingencySummary,
    FdrResult,
    adequacy_check,
    bh_fdr,
    contingency,
    diff_in_means,
)
from .logistic import LogisticFit, SeparationWarning, fit_logistic
from .sensitivity import ConsistencyVerdict, SensitivityReport, consistency_check, e_value, sensitivity

__all__ = [
    "METHODS",
    "CausalData",
    "EffectEstimate",
    "two_sided_p",
    "ContingencySummary",
    "AdequacyVerdict",
    "FdrResult",
    "contingency",
    "adequacy_check",
    "diff_in_means",
    "bh_fdr",
    "LogisticFit",
    "SeparationWarning",
    "fit_logistic",
    "NuisanceModels",
    "PropensityModel",
    "fit_propensity",
    "fit_outcome_models",
    "fit_nuisance",
    "bootstrap_se",
    "psm_ate",
    "ipw_ate",
    "dr_ate",
    "tmle_ate",
    "CounterfactualReport",
    "counterfactual_report",
    "lower_median",
    "SensitivityReport",
    "ConsistencyVerdict",
    "e_value",
    "sensitivity",
    "consistency_check",
    "weighted_smd",
    "minimal_adjustment_search",
]
