"""Enrollment store and lifecycle, plus the command-line driver."""

from .service import (
    ConfusionCounts,
    LeakageReport,
    attack_report,
    authenticate,
    breach_dump,
    build_scheme,
    enroll,
    eval_accuracy,
    fit_public_readout,
    leakage_report,
    make_eval_pairs,
    new_store,
    reconstruct,
)
from .store import StoreFile, load_store, loads_store

__all__ = [
    "ConfusionCounts",
    "LeakageReport",
    "StoreFile",
    "attack_report",
    "authenticate",
    "breach_dump",
    "build_scheme",
    "enroll",
    "eval_accuracy",
    "fit_public_readout",
    "leakage_report",
    "load_store",
    "loads_store",
    "make_eval_pairs",
    "new_store",
    "reconstruct",
]
