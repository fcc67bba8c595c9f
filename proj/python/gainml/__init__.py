"""Upgrade gain quantification with adaptive kernel regression."""

from ._core import (
    GainmlError,
    KernelModel,
    candidate_covariates,
    exit_code_for,
    fit,
    percentile_interval,
    period1,
    period2,
    synth,
    variables_from_names,
)

__all__ = [
    "GainmlError",
    "KernelModel",
    "candidate_covariates",
    "exit_code_for",
    "fit",
    "percentile_interval",
    "period1",
    "period2",
    "synth",
    "variables_from_names",
]
