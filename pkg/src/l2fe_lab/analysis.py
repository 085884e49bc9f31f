"""Entropy and parameter bounds for the union-of-balls input model.

All logarithms are base 2 and every quantity is carried in the log domain;
``(m/2)!`` is evaluated through ``lgamma``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

from .core import is_prime
from .errors import InfeasibleBoost, InvalidParameter

log = logging.getLogger(__name__)

LN2 = math.log(2.0)


def _log2_factorial(n: float) -> float:
    return math.lgamma(n + 1.0) / LN2


def log2_ball_volume(epsilon: float, m: int) -> float:
    """``log2 vol(B_m(eps)) = (m/2) log2 pi - log2((m/2)!) + m log2 eps``."""
    return (m / 2) * math.log2(math.pi) - _log2_factorial(m / 2) + m * math.log2(epsilon)


def ball_union_volume_log2(beta: float, epsilon: float, m: int) -> float:
    if m < 2 or m % 2:
        raise InvalidParameter(f"m must be even and >= 2, got {m}")
    if beta < 1 or not epsilon > 0:
        raise InvalidParameter("need beta >= 1 and epsilon > 0")
    return math.log2(beta) + log2_ball_volume(epsilon, m)


def min_entropy_uniform(beta: float, epsilon: float, m: int) -> float:
    """Min-entropy (bits) of the uniform distribution on the union of balls."""
    return ball_union_volume_log2(beta, epsilon, m)


def gamma_bound(h: float, m: int, alpha: float, R: float) -> float:
    """Average min-entropy of ``b`` given ``(A, Ab + x)``: ``h + m log2(alpha) - m log2(2R+1)``."""
    if not alpha > 1:
        raise InvalidParameter("alpha must exceed 1")
    if R < 1:
        raise InvalidParameter("R must be at least 1")
    return h + m * math.log2(alpha) - m * math.log2(2 * R + 1)


def extractable_bits(gamma: float, eps_fe: float) -> int:
    if not 0 < eps_fe < 1:
        raise InvalidParameter("eps_fe must lie in (0, 1)")
    if math.isinf(gamma) and gamma < 0:
        return 0
    return max(0, math.floor(gamma - 2 * math.log2(1 / eps_fe) + 2))


def min_radius(m: int, l: int, q: float, alpha: float) -> float:
    """Smallest admissible bound ``R = alpha sqrt(m / 2 pi e) q^(1 - l/m)``."""
    return alpha * math.sqrt(m / (2 * math.pi * math.e)) * q ** (1 - l / m)


@dataclass(frozen=True)
class SecurityParams:
    m: int
    l: int
    q: int
    R: float
    alpha: float
    eps_fe: float
    beta: float
    epsilon: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise InvalidParameter("alpha must exceed 1")
        if not 0 < self.eps_fe < 1:
            raise InvalidParameter("eps_fe must lie in (0, 1)")
        if not self.l < self.m:
            raise InvalidParameter("need l < m")
        if self.m % 2:
            raise InvalidParameter("m must be even")
        if not is_prime(self.q):
            raise InvalidParameter(f"q = {self.q} is not prime")
        if self.beta < 1:
            raise InvalidParameter("beta must be at least 1")
        if self.epsilon < 0:
            raise InvalidParameter("epsilon must be non-negative")


@dataclass(frozen=True)
class EntropyReport:
    log2_volume: float
    h: float
    gamma: float
    kappa_max: int
    r_min: float
    radius_ok: bool
    packing_ok: bool
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def certify_params(p: SecurityParams) -> EntropyReport:
    if p.epsilon == 0:
        log_vol = -math.inf
    else:
        log_vol = ball_union_volume_log2(p.beta, p.epsilon, p.m)
    h = log_vol
    gamma = gamma_bound(h, p.m, p.alpha, p.R) if math.isfinite(h) else -math.inf
    kappa = extractable_bits(gamma, p.eps_fe)
    r_min = min_radius(p.m, p.l, p.q, p.alpha)
    radius_ok = p.R >= r_min
    # necessary condition: beta disjoint eps-balls fit inside [-R, R]^m
    packing_ok = p.epsilon <= p.R and log_vol <= p.m * math.log2(2 * p.R)
    feasible = radius_ok and packing_ok and kappa > 0
    return EntropyReport(
        log2_volume=log_vol,
        h=h,
        gamma=gamma,
        kappa_max=kappa,
        r_min=r_min,
        radius_ok=radius_ok,
        packing_ok=packing_ok,
        feasible=feasible,
    )


def check_output_bits(out_bits: int, report: EntropyReport) -> bool:
    """Warn (not fail) when ``out_bits`` exceeds the synthetic-model extractable length."""
    if out_bits > report.kappa_max:
        log.warning("output length %d bits exceeds the extractable bound %d under the C_eps model", out_bits, report.kappa_max)
        return False
    return True


def majority_success(n: int, p: float) -> float:
    """``Pr[Binomial(n, p) > n/2]`` by exact summation (log-space terms)."""
    lp, lq = math.log(p), math.log1p(-p)
    total = 0.0
    for k in range(n // 2 + 1, n + 1):
        total += math.exp(
            math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + k * lp + (n - k) * lq
        )
    return min(total, 1.0)


def majority_votes_needed(p_single: float, delta: float, max_n: int = 100_001) -> int:
    """Smallest odd ``n`` with majority-vote success at least ``1 - delta``."""
    if p_single <= 0.5:
        raise InfeasibleBoost("majority voting needs single-sample accuracy above 1/2")
    if not p_single < 1:
        return 1
    if not 0 < delta < 0.5:
        raise InvalidParameter("delta must lie in (0, 1/2)")
    for n in range(1, max_n + 1, 2):
        if majority_success(n, p_single) >= 1 - delta:
            return n
    raise InfeasibleBoost(f"no n <= {max_n} reaches 1 - delta = {1 - delta}")


def quantization_mismatch_rate(epsilon: float, m: int, step: float) -> float:
    """First-order chance that two draws from one ``epsilon``-ball quantize differently.

    Two independent uniform points of an ``m``-ball of radius ``epsilon`` sit
    about ``epsilon sqrt(2)`` apart with ``E|d_i| ~ sqrt(2) epsilon sqrt(2/(pi m))``
    per coordinate, and coordinate ``i`` crosses a cell boundary with
    probability ``|d_i| / step``.  Summing gives ``epsilon sqrt(4m/pi) / step``.
    """
    return epsilon * math.sqrt(4 * m / math.pi) / step


def calibrated_radius(m: int, step: float, mismatch: float = 0.01) -> float:
    """Ball radius at which same-ball pairs quantize differently with rate ``mismatch``."""
    if not 0 < mismatch < 1:
        raise InvalidParameter("mismatch must lie in (0, 1)")
    return mismatch * step / math.sqrt(4 * m / math.pi)
