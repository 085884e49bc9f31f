"""Monte-Carlo harness for the ideal-primitive game and the FE distinguishing game.

Every trial ``i`` draws its randomness from ``SeedSequence([seed, i])`` so
trials are independent and results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from ..core import BallDistributionSpec, draw_from, l2_distance, sample_ball
from ..errors import InvalidParameter
from .readout import ReadoutModel
from .surrogate import surrogate_vector

STREAMS = 4  # sample, gen, adversary, uniform output


@dataclass(frozen=True)
class GameResult:
    wins_full: int
    wins_baseline: int
    trials: int
    advantage: float

    @property
    def rate_full(self) -> float:
        return self.wins_full / self.trials

    @property
    def rate_baseline(self) -> float:
        return self.wins_baseline / self.trials

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rate_full"] = self.rate_full
        d["rate_baseline"] = self.rate_baseline
        return d


@dataclass(frozen=True, eq=False)
class GameView:
    """What an adversary sees in one trial.

    ``record`` is the payload with its protected output stripped, ``output``
    is that output (``None`` for the baseline).  ``oracle_input`` is only set
    for harness sanity checks that deliberately cheat.
    """

    record: Any
    output: Any
    distribution: BallDistributionSpec
    rng: np.random.Generator
    scheme: Any = None
    oracle_input: np.ndarray | None = None

    def full_payload(self):
        if self.output is None:
            return self.record
        return self.scheme.with_output(self.record, self.output)


Adversary = Callable[[GameView], np.ndarray]


def trial_streams(seed: int, i: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence([int(seed), int(i)]).spawn(STREAMS)]


# --------------------------------------------------------------------------
# adversaries


def center_guesser(view: GameView) -> np.ndarray:
    """Baseline: the center of the most probable ball (all equal, so the first)."""
    return view.distribution.centers[0].copy()


def oracle_adversary(view: GameView) -> np.ndarray:
    if view.oracle_input is None:
        raise InvalidParameter("oracle adversary needs oracle_input")
    return view.oracle_input.copy()


def noisy_oracle(noise_norm: float) -> Adversary:
    """Returns the true input plus a uniformly oriented offset of norm ``noise_norm``."""

    def adversary(view: GameView) -> np.ndarray:
        x = oracle_adversary(view)
        d = view.rng.standard_normal(x.shape[0])
        return x + noise_norm * d / np.linalg.norm(d)

    return adversary


def far_adversary(view: GameView) -> np.ndarray:
    return np.full(view.distribution.dim, 10.0 * view.distribution.bound)


class PipeAdversary:
    """Surrogate recovery, optional linear readout, then snap to the nearest known center.

    Without the protected output (baseline view) an MRP record carries no
    ``y`` and the adversary falls back to the center guess.
    """

    def __init__(self, readout: ReadoutModel | None = None, snap: bool = True):
        self.readout = readout
        self.snap = snap

    def estimate(self, view: GameView) -> np.ndarray | None:
        try:
            s = surrogate_vector(view.full_payload())
        except Exception:
            return None
        return self.readout.predict(s) if self.readout is not None else s

    def __call__(self, view: GameView) -> np.ndarray:
        est = self.estimate(view)
        if est is None:
            return center_guesser(view)
        C = view.distribution.centers
        if not self.snap:
            return est
        if est.shape[0] != C.shape[1]:
            raise InvalidParameter("estimate dimension differs from the distribution")
        return C[int(np.argmin(np.linalg.norm(C - est, axis=1)))].copy()


# --------------------------------------------------------------------------
# ideal-primitive game


def run_ideal_primitive_game(
    scheme,
    distribution: BallDistributionSpec,
    adversary: Adversary,
    t: float,
    trials: int,
    seed: int,
    baseline: Adversary = center_guesser,
    cheat: bool = False,
) -> GameResult:
    """Empirical ``Pr[full wins] - Pr[baseline wins]``; a win is ``||x - x'|| <= t``.

    Both adversaries face the same ``x`` and helper in each trial.  ``cheat``
    passes ``x`` through ``oracle_input`` (sanity checks only).
    """
    if trials < 1:
        raise InvalidParameter("trials must be positive")
    wins_full = wins_base = 0
    for i in range(trials):
        r_sample, r_gen, r_adv, _ = trial_streams(seed, i)
        _, x = draw_from(distribution, r_sample)
        payload = scheme.gen(x, r_gen)
        helper = scheme.with_output(payload, None)
        oracle = x if cheat else None
        full = GameView(helper, scheme.output_of(payload), distribution, r_adv, scheme, oracle)
        base = GameView(helper, None, distribution, trial_streams(seed, i)[2], scheme, oracle)
        wins_full += l2_distance(x, adversary(full)) <= t
        wins_base += l2_distance(x, baseline(base)) <= t
    return GameResult(int(wins_full), int(wins_base), trials, (wins_full - wins_base) / trials)


# --------------------------------------------------------------------------
# FE distinguishing game and the reduction


def reduction_adversary(inner: Adversary, scheme) -> Callable[[GameView], int]:
    """``x' := inner(r, p); r' := Rep(x', p)``; answer 1 iff ``r' == r``."""

    def adversary(view: GameView) -> int:
        guess = inner(view)
        try:
            r_prime = scheme.rep(guess, view.record)
        except Exception:
            return 0
        return int(scheme.verify(scheme.with_output(view.record, view.output), r_prime))

    return adversary


@dataclass(frozen=True)
class FeGameResult:
    ones_real: int
    ones_uniform: int
    trials: int
    advantage: float

    def to_dict(self) -> dict:
        return asdict(self)


def run_fe_game(
    scheme,
    distribution: BallDistributionSpec,
    adversary: Callable[[GameView], int],
    trials: int,
    seed: int,
    cheat: bool = False,
) -> FeGameResult:
    """Both branches per trial at matched randomness: real ``r`` vs uniform ``r``.

    The adversary stream is re-derived for each branch so the inner guess is
    identical whenever it does not look at ``r``.
    """
    if trials < 1:
        raise InvalidParameter("trials must be positive")
    ones_real = ones_unif = 0
    for i in range(trials):
        r_sample, r_gen, _, r_unif = trial_streams(seed, i)
        _, x = draw_from(distribution, r_sample)
        payload = scheme.gen(x, r_gen)
        helper = scheme.with_output(payload, None)
        oracle = x if cheat else None
        real = GameView(helper, scheme.output_of(payload), distribution, trial_streams(seed, i)[2], scheme, oracle)
        unif = GameView(helper, scheme.random_output(payload, r_unif), distribution, trial_streams(seed, i)[2], scheme, oracle)
        ones_real += adversary(real)
        ones_unif += adversary(unif)
    return FeGameResult(int(ones_real), int(ones_unif), trials, (ones_real - ones_unif) / trials)


def reproduction_failure_rate(
    scheme,
    distribution: BallDistributionSpec,
    perturb: Adversary,
    trials: int,
    seed: int,
) -> float:
    """``delta-hat``: fraction of trials where ``Rep(perturb(x), p)`` misses ``r``.

    Uses the same per-trial streams as the games above, so at a matched seed
    the perturbations coincide with the ones the games saw.
    """
    fails = 0
    for i in range(trials):
        r_sample, r_gen, r_adv, _ = trial_streams(seed, i)
        _, x = draw_from(distribution, r_sample)
        payload = scheme.gen(x, r_gen)
        view = GameView(scheme.with_output(payload, None), scheme.output_of(payload), distribution, r_adv, scheme, x)
        fails += not scheme.verify(payload, scheme.rep(perturb(view), payload))
    return fails / trials


def same_ball_pairs(distribution: BallDistributionSpec, n: int, rng: np.random.Generator):
    """``n`` pairs ``(x, x')`` drawn independently from the same random ball."""
    out = []
    for _ in range(n):
        i = int(rng.integers(distribution.beta))
        pts = sample_ball(distribution.centers[i], distribution.radius, rng, 2)
        out.append((pts[0], pts[1]))
    return out
