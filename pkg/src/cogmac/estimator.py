"""Monte-Carlo evaluation of the achievable-rate functionals for Gaussian inputs.

Inputs are circularly-symmetric complex Gaussian, so a point-to-point link
of SNR P carries log2(1 + P) bits. The receiver sees

    Y = (S_T1 X1 + S_T2 X2 + Z) S_R

and knows S_R but not the transmitter switches. With S_R = 0 the output is
zero and carries nothing, so every mutual information is
P(S_R = 1) times its value conditional on S_R = 1. Conditional on S_R = 1
the output law is a Gaussian mixture over the transmitter switch pattern;
mixture densities are evaluated exactly and entropies are averaged over
samples (no kernel estimation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .bounds import outer1_region, outer2_region
from .errors import DomainError
from .geometry import support
from .prob_model import JointStateDist, ModelParams

__all__ = [
    "GaussianStrategy",
    "MIEstimate",
    "CausalRates",
    "SandwichReport",
    "ConvergenceCheck",
    "estimate_causal_rates",
    "estimate_state_penalty",
    "sandwich_check",
    "convergence_check",
    "DEFAULT_SEED",
    "MIN_SAMPLES",
]

DEFAULT_SEED = 20120417
MIN_SAMPLES = 10_000
CHUNK = 1 << 15
LN2 = math.log(2.0)


@dataclass(frozen=True)
class GaussianStrategy:
    """Input variances per transmitter and own switch state.

    ``variances[i] = (var_when_off, var_when_on)`` for transmitter i (0-based).
    Only the on-state variance reaches the receiver; the off-state variance
    matters only for the dependence between input and switch.
    """

    variances: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self) -> None:
        v = tuple(tuple(float(x) for x in pair) for pair in self.variances)
        if len(v) != 2 or any(len(pair) != 2 for pair in v):
            raise DomainError("variances", "expected ((v1_off, v1_on), (v2_off, v2_on))")
        if any(x < 0 or not math.isfinite(x) for pair in v for x in pair):
            raise DomainError("variances", "variances must be finite and >= 0")
        object.__setattr__(self, "variances", v)

    @classmethod
    def state_independent(cls, v1: float, v2: float) -> GaussianStrategy:
        return cls(((v1, v1), (v2, v2)))

    @classmethod
    def full_power(cls, joint: JointStateDist, p1: float, p2: float) -> GaussianStrategy:
        """State-independent variances that exhaust the gated budgets E[|X|^2 S_T] = P."""
        q1, q2 = joint.marginal_on(0), joint.marginal_on(1)
        v1 = p1 / q1 if q1 > 0 else 0.0
        v2 = p2 / q2 if q2 > 0 else 0.0
        return cls.state_independent(v1, v2)

    @property
    def is_state_independent(self) -> bool:
        return all(off == on for off, on in self.variances)

    def on_variance(self, user: int) -> float:
        return self.variances[user][1]

    def check_power(self, joint: JointStateDist, p1: float, p2: float, tol: float = 1e-9) -> None:
        for user, budget in ((0, p1), (1, p2)):
            used = self.on_variance(user) * joint.marginal_on(user)
            if used > budget + tol:
                raise DomainError(
                    f"variance{user + 1}", f"gated power {used:.6g} exceeds budget {budget:.6g}"
                )


@dataclass(frozen=True)
class MIEstimate:
    value: float
    std_err: float
    n_samples: int
    seed: int | None

    @property
    def plausible(self) -> bool:
        return self.value >= -3.0 * self.std_err


@dataclass(frozen=True)
class CausalRates:
    r1: MIEstimate
    r2: MIEstimate
    sum: MIEstimate
    independence_violation: bool


@dataclass(frozen=True)
class SandwichReport:
    params: ModelParams
    rates: CausalRates
    outer1_sum: float
    outer2_sum: float
    margin_outer1: float
    margin_outer2: float
    passed: bool
    seed: int
    messages: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ConvergenceCheck:
    value_n: float
    value_2n: float
    shift: float
    std_err: float
    ok: bool


def _streams(seed: int, n: int):
    """Yield (generator, size) pairs for fixed-size chunks spawned from ``seed``."""
    n_chunks = -(-n // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for k, child in enumerate(children):
        size = min(CHUNK, n - k * CHUNK)
        yield np.random.default_rng(child), size


def _cn(rng: np.random.Generator, var, size: int) -> np.ndarray:
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _log_cn(y: np.ndarray, mean, var) -> np.ndarray:
    """log density of CN(mean, var) at y (nats); broadcasting over components."""
    return -np.log(np.pi * var) - np.abs(y - mean) ** 2 / var


def _transmitters_independent(joint: JointStateDist) -> bool:
    law = joint.normalized().sum(axis=2)
    outer = np.outer(law.sum(axis=1), law.sum(axis=0))
    return bool(np.all(np.abs(law - outer) <= 1e-12))


def _zero(n: int, seed: int | None) -> MIEstimate:
    return MIEstimate(0.0, 0.0, n, seed)


def _summarize(samples: np.ndarray, scale: float, n: int, seed: int) -> MIEstimate:
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1)) if len(samples) > 1 else 0.0
    return MIEstimate(scale * mean, scale * std / math.sqrt(len(samples)), n, seed)


def estimate_causal_rates(
    joint: JointStateDist,
    strategy: GaussianStrategy,
    n_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> CausalRates:
    """Estimate I(X1; Y,S_R | X2), I(X2; Y,S_R | X1) and I(X1,X2; Y,S_R).

    The inputs may not depend on the switch states, since in the causal
    setting coding is done directly on the input alphabet. Results carry an
    independence-violation flag when the transmitter switches are dependent;
    the functionals are still evaluated.
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError("n_samples", f"must be >= {MIN_SAMPLES}, got {n_samples}")
    if not strategy.is_state_independent:
        raise DomainError("strategy", "causal inputs must use state-independent variances")
    violation = not _transmitters_independent(joint)
    cells = joint.normalized()
    p_r = float(cells[:, :, 1].sum())
    if p_r <= 0:
        z = _zero(n_samples, seed)
        return CausalRates(z, z, z, violation)

    # Mixture components: transmitter switch pairs with positive mass given S_R = 1.
    pairs = [(s1, s2) for s1 in (0, 1) for s2 in (0, 1) if cells[s1, s2, 1] > 0]
    weights = np.array([cells[s1, s2, 1] for s1, s2 in pairs]) / p_r
    s1c = np.array([p[0] for p in pairs], dtype=float)
    s2c = np.array([p[1] for p in pairs], dtype=float)
    v1, v2 = strategy.on_variance(0), strategy.on_variance(1)
    logw = np.log(weights)

    i_sum, i_1, i_2 = [], [], []
    for rng, size in _streams(seed, n_samples):
        k = rng.choice(len(pairs), size=size, p=weights)
        x1 = _cn(rng, v1, size)
        x2 = _cn(rng, v2, size)
        z = _cn(rng, 1.0, size)
        y = s1c[k] * x1 + s2c[k] * x2 + z
        yc, x1c, x2c = y[:, None], x1[:, None], x2[:, None]
        log_full = logsumexp(logw + _log_cn(yc, s1c * x1c + s2c * x2c, 1.0), axis=1)
        log_given2 = logsumexp(logw + _log_cn(yc, s2c * x2c, 1.0 + s1c * v1), axis=1)
        log_given1 = logsumexp(logw + _log_cn(yc, s1c * x1c, 1.0 + s2c * v2), axis=1)
        log_out = logsumexp(logw + _log_cn(yc, 0.0, 1.0 + s1c * v1 + s2c * v2), axis=1)
        i_sum.append((log_full - log_out) / LN2)
        i_1.append((log_full - log_given2) / LN2)
        i_2.append((log_full - log_given1) / LN2)

    return CausalRates(
        r1=_summarize(np.concatenate(i_1), p_r, n_samples, seed),
        r2=_summarize(np.concatenate(i_2), p_r, n_samples, seed),
        sum=_summarize(np.concatenate(i_sum), p_r, n_samples, seed),
        independence_violation=violation,
    )


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    mask = (p > 0) & (p < 1)
    q = p[mask]
    out[mask] = -(q * np.log2(q) + (1 - q) * np.log2(1 - q))
    return out


def estimate_state_penalty(
    joint: JointStateDist,
    strategy: GaussianStrategy,
    user: int = 0,
    n_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> MIEstimate:
    """Estimate I(X_i; S_Ti) for an input whose variance depends on its switch.

    Computed as H(S) - E[H(S | X)] with the exact posterior of the switch
    given the input. A zero variance is a point mass at the origin, so a
    silent off state reveals the switch completely.
    """
    if user not in (0, 1):
        raise DomainError("user", f"must be 0 or 1, got {user!r}")
    if n_samples < MIN_SAMPLES:
        raise DomainError("n_samples", f"must be >= {MIN_SAMPLES}, got {n_samples}")
    v_off, v_on = strategy.variances[user]
    q = joint.marginal_on(user)
    if v_off == v_on or q in (0.0, 1.0):
        return _zero(n_samples, seed)
    h_prior = float(_binary_entropy(np.array([q]))[0])
    if v_off == 0.0 or v_on == 0.0:
        # The silent state is identified exactly by X = 0.
        return MIEstimate(h_prior, 0.0, n_samples, seed)

    post_h = []
    for rng, size in _streams(seed, n_samples):
        s = rng.random(size) < q
        x = _cn(rng, np.where(s, v_on, v_off), size)
        log_on = math.log(q) + _log_cn(x, 0.0, v_on)
        log_off = math.log(1.0 - q) + _log_cn(x, 0.0, v_off)
        posterior = np.exp(log_on - np.logaddexp(log_on, log_off))
        post_h.append(_binary_entropy(posterior))
    h = np.concatenate(post_h)
    est = _summarize(h_prior - h, 1.0, n_samples, seed)
    return est


def sandwich_check(
    params: ModelParams,
    strategy: GaussianStrategy | None = None,
    n_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
    resolution: int = 201,
) -> SandwichReport:
    """Check the causal sum-rate estimate against both outer bounds.

    Passes when the estimate is at most each outer bound's sum-rate support
    plus three standard errors. Margins are bound + 3 sigma - estimate.
    """
    joint = params.joint()
    if strategy is None:
        strategy = GaussianStrategy.full_power(joint, params.p1_avg, params.p2_avg)
    strategy.check_power(joint, params.p1_avg, params.p2_avg)
    rates = estimate_causal_rates(joint, strategy, n_samples, seed)
    o1 = support(outer1_region(params, resolution), (1.0, 1.0))
    o2 = support(outer2_region(params, resolution), (1.0, 1.0))
    slack = 3.0 * rates.sum.std_err
    m1 = o1 + slack - rates.sum.value
    m2 = o2 + slack - rates.sum.value
    messages = []
    if m1 < 0:
        messages.append(f"sum estimate exceeds outer bound 1 by {-m1:.3g} bits (seed {seed})")
    if m2 < 0:
        messages.append(f"sum estimate exceeds outer bound 2 by {-m2:.3g} bits (seed {seed})")
    if rates.independence_violation:
        messages.append("transmitter switches are dependent; causal achievability needs independence")
    return SandwichReport(params, rates, o1, o2, m1, m2, m1 >= 0 and m2 >= 0, seed, tuple(messages))


def convergence_check(
    joint: JointStateDist,
    strategy: GaussianStrategy,
    n_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> ConvergenceCheck:
    """Compare the sum estimate at n and 2n samples; flag shifts beyond 5 sigma."""
    a = estimate_causal_rates(joint, strategy, n_samples, seed).sum
    b = estimate_causal_rates(joint, strategy, 2 * n_samples, seed + 1).sum
    sigma = math.hypot(a.std_err, b.std_err)
    shift = abs(a.value - b.value)
    return ConvergenceCheck(a.value, b.value, shift, sigma, shift <= 5.0 * sigma + 1e-15)
