"""Selective multi-class classification with group-wise error rate control.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    PspError,
    argmax_preclassify,
    classwise_power,
    epsp_run,
    gmm_posterior,
    group_fdp,
    informative_sets,
    overall_power,
    psp_run,
    run_experiment,
    select_subjects,
    SoftmaxModel,
    train_softmax,
    validate_partition,
)

__all__ = [
    "PspError",
    "argmax_preclassify",
    "classwise_power",
    "epsp_run",
    "gmm_posterior",
    "group_fdp",
    "informative_sets",
    "overall_power",
    "psp_run",
    "run_experiment",
    "select_subjects",
    "SoftmaxModel",
    "train_softmax",
    "validate_partition",
]

__version__ = "0.1.0"
