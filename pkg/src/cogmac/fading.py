"""Fading and interference extension.

Here the receiver never switches off. Its bad state (what used to be
S_R = 0) is modelled as extra noise power ``i_sq`` rather than silence, and the
joint state law is the same table as the switch model with S_R = 0 read as
the bad state. Transmissions with at least one transmitter on happen either
in the good state (probability ``p_nonfading`` = pa + pb + pc) or in the bad
state (``p_fading`` = pd + pe + pf - p_nonfading).

The module also provides the threshold water-filling rule for a discrete
joint distribution of channel power gains, where only the stronger user
transmits in each state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError
from .prob_model import EventProbs, ModelParams

__all__ = [
    "FadingParams",
    "FadingSumRate",
    "GainDistribution",
    "WaterfillResult",
    "fading_sum_rate",
    "fading_objective",
    "fading_vs_switch_gap",
    "waterfill_threshold",
]

LAMBDA_BRACKET = (1e-12, 1e6)


@dataclass(frozen=True)
class FadingParams:
    base: ModelParams
    p_nonfading: float
    p_fading: float

    @classmethod
    def from_params(cls, params: ModelParams, events: EventProbs | None = None) -> FadingParams:
        ev = events if events is not None else params.events()
        p_nf = ev.effective
        p_f = ev.pd + ev.pe + ev.pf - p_nf
        if p_f < -1e-12:
            raise DomainError("p_fading", f"negative bad-state probability {p_f:.3g}")
        return cls(params, p_nf, max(p_f, 0.0))

    @property
    def i_sq(self) -> float:
        return self.base.i_sq

    @property
    def total_power(self) -> float:
        return self.base.p1_avg + self.base.p2_avg


@dataclass(frozen=True)
class FadingSumRate:
    rate: float
    power_good: float
    power_bad: float


def fading_objective(fp: FadingParams, power_bad: float) -> float:
    """Sum rate when ``power_bad`` of the pooled budget is spent in the bad state."""
    power_good = fp.total_power - power_bad
    rate = 0.0
    if fp.p_nonfading > 0:
        rate += fp.p_nonfading * math.log2(1.0 + power_good / fp.p_nonfading)
    if fp.p_fading > 0:
        rate += fp.p_fading * math.log2(1.0 + power_bad / (fp.i_sq * fp.p_fading))
    return rate


def fading_sum_rate(fp: FadingParams) -> FadingSumRate:
    """Maximal sum rate with the receiver always on.

    The pooled budget P1 + P2 is split between the good and bad receiver
    states so their water levels match; the bad state gets nothing when its
    noise is large enough.
    """
    a, b = fp.p_nonfading, fp.p_fading
    total = fp.total_power
    if a + b <= 0:
        return FadingSumRate(0.0, 0.0, 0.0)
    if b <= 0:
        power_bad = 0.0
    elif a <= 0:
        power_bad = total
    else:
        power_bad = max(0.0, (total * b - (fp.i_sq - 1.0) * a * b) / (a + b))
    return FadingSumRate(fading_objective(fp, power_bad), total - power_bad, power_bad)


def fading_vs_switch_gap(fp: FadingParams) -> float:
    """Rate gained by keeping the receiver on in the bad state (bits, >= 0)."""
    # The switch model spends the whole pooled budget in the good state.
    switch = fading_objective(fp, 0.0)
    gap = fading_sum_rate(fp).rate - switch
    if gap < -1e-12:
        raise ArithmeticError(f"fading sum rate below switch-model sum rate by {-gap:.3g}")
    return max(gap, 0.0)


@dataclass(frozen=True)
class GainDistribution:
    """Finite joint law of normalized channel power gains (h1, h2)."""

    h1: np.ndarray
    h2: np.ndarray
    prob: np.ndarray

    def __post_init__(self) -> None:
        h1, h2, prob = (np.array(x, dtype=float).ravel() for x in (self.h1, self.h2, self.prob))
        if not (h1.shape == h2.shape == prob.shape):
            raise DomainError("gains", "h1, h2 and prob must have the same length")
        if np.any(h1 < 0) or np.any(h2 < 0):
            raise DomainError("gains", "channel gains must be >= 0")
        if np.any(prob < 0) or abs(math.fsum(prob) - 1.0) > 1e-12:
            raise DomainError("prob", "probabilities must be >= 0 and sum to 1")
        for name, arr in (("h1", h1), ("h2", h2), ("prob", prob)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def marginal(self, user: int) -> dict[float, float]:
        gains = self.h1 if user == 1 else self.h2
        law: dict[float, float] = {}
        for g, p in zip(gains, self.prob):
            law[float(g)] = law.get(float(g), 0.0) + float(p)
        return {g: p for g, p in sorted(law.items()) if p > 0}


@dataclass(frozen=True)
class WaterfillResult:
    power1: np.ndarray
    power2: np.ndarray
    lambdas: tuple[float, float]
    lambda_defined: bool
    residual: float

    def sum_rate(self, gains: GainDistribution) -> float:
        snr = gains.h1 * self.power1 + gains.h2 * self.power2
        return float(np.sum(gains.prob * np.log2(1.0 + snr)))


def _threshold_powers(gains: GainDistribution, lam: float) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        inv1 = np.where(gains.h1 > 0, 1.0 / np.where(gains.h1 > 0, gains.h1, 1.0), np.inf)
        inv2 = np.where(gains.h2 > 0, 1.0 / np.where(gains.h2 > 0, gains.h2, 1.0), np.inf)
    level = 1.0 / (2.0 * lam)
    p1 = np.where(gains.h1 >= gains.h2, np.maximum(level - inv1, 0.0), 0.0)
    p2 = np.where(gains.h2 >= gains.h1, np.maximum(level - inv2, 0.0), 0.0)
    return p1, p2


def waterfill_threshold(gains: GainDistribution, p1: float, p2: float, tol: float = 1e-10) -> WaterfillResult:
    """Sum-rate-optimal powers when only the stronger user transmits.

    Both users share one multiplier ``lambda`` (identical gain marginals and
    budgets), found by log-scale bisection on user 1's average-power
    constraint. Ties h1 = h2 let both users transmit.

    Raises
    ------
    DomainError
        If the gain marginals differ, the budgets differ, or user 2's
        constraint cannot be met with the common multiplier.
    BracketError
        If the bisection bracket does not enclose the budget.
    """
    if p1 < 0 or p2 < 0:
        raise DomainError("power", "average powers must be >= 0")
    m1, m2 = gains.marginal(1), gains.marginal(2)
    if m1.keys() != m2.keys() or any(abs(m1[g] - m2[g]) > 1e-12 for g in m1):
        raise DomainError("gains", "h1 and h2 must be identically distributed for a common multiplier")
    if abs(p1 - p2) > 1e-12 * max(1.0, p1, p2):
        raise DomainError("power", "equal average-power budgets are required for a common multiplier")

    zeros = np.zeros_like(gains.prob)
    if not np.any((gains.h1 > 0) & (gains.prob > 0)) or p1 == 0:
        return WaterfillResult(zeros, zeros.copy(), (math.nan, math.nan), False, 0.0)

    def used(lam: float) -> float:
        pw1, _ = _threshold_powers(gains, lam)
        return float(np.sum(gains.prob * pw1))

    lo, hi = LAMBDA_BRACKET
    if not (used(lo) >= p1 >= used(hi)):
        raise BracketError(f"multiplier bracket {LAMBDA_BRACKET} does not enclose budget {p1}")
    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(400):
        mid = 0.5 * (log_lo + log_hi)
        if used(math.exp(mid)) > p1:
            log_lo = mid
        else:
            log_hi = mid
        lam = math.exp(0.5 * (log_lo + log_hi))
        if abs(used(lam) - p1) <= tol or log_hi - log_lo < 1e-15:
            break
    lam = math.exp(0.5 * (log_lo + log_hi))
    pw1, pw2 = _threshold_powers(gains, lam)
    res1 = abs(float(np.sum(gains.prob * pw1)) - p1)
    res2 = abs(float(np.sum(gains.prob * pw2)) - p2)
    if res2 > 1e-9:
        raise DomainError("gains", f"user 2 budget misses by {res2:.3g}; joint gain law is not exchangeable")
    return WaterfillResult(pw1, pw2, (lam, lam), True, max(res1, res2))
