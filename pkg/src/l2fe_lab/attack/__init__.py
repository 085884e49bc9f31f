"""Breach-time attacks: surrogate recovery, linear readout, metrics and security games."""

from .game import (
    FeGameResult,
    GameResult,
    GameView,
    PipeAdversary,
    center_guesser,
    far_adversary,
    noisy_oracle,
    oracle_adversary,
    reduction_adversary,
    reproduction_failure_rate,
    run_fe_game,
    run_ideal_primitive_game,
    same_ball_pairs,
)
from .metrics import (
    FACENET_THRESHOLD,
    AttackReport,
    attack_asr,
    cosine_rows,
    leakage_cosine,
    permuted_leakage,
    random_guess_asr,
)
from .readout import ReadoutModel, fit_ridge, linear_readout_fit
from .surrogate import Surrogate, l2fe_features, mrp_surrogate, pipe_surrogate, pseudo_inverse, surrogate_vector

__all__ = [
    "FACENET_THRESHOLD",
    "AttackReport",
    "FeGameResult",
    "GameResult",
    "GameView",
    "PipeAdversary",
    "ReadoutModel",
    "Surrogate",
    "attack_asr",
    "center_guesser",
    "cosine_rows",
    "far_adversary",
    "fit_ridge",
    "l2fe_features",
    "leakage_cosine",
    "linear_readout_fit",
    "mrp_surrogate",
    "noisy_oracle",
    "oracle_adversary",
    "permuted_leakage",
    "pipe_surrogate",
    "pseudo_inverse",
    "random_guess_asr",
    "reduction_adversary",
    "reproduction_failure_rate",
    "run_fe_game",
    "run_ideal_primitive_game",
    "same_ball_pairs",
    "surrogate_vector",
]
