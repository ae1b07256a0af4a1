"""Criteria, splits and experiment harnesses.

The harnesses live in :mod:`omnivqa.evaluation.harness`.
"""

from .criteria import (EvalReport, Logistic4Params, evaluate, fit_logistic4, logistic4, plcc,
                       rmse, srocc)
from .splits import grouped_shuffle_split, read_split_file, repeat_seed, write_split_file

__all__ = [
    "EvalReport",
    "Logistic4Params",
    "evaluate",
    "fit_logistic4",
    "grouped_shuffle_split",
    "logistic4",
    "plcc",
    "read_split_file",
    "repeat_seed",
    "rmse",
    "srocc",
    "write_split_file",
]
