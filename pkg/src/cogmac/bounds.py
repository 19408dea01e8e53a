"""Outer and inner bounds on the two-user capacity region, and sum-rate allocation.

* Outer bound 1 assumes every node knows all three switch states, so each
  transmitter can split its average power between the event where it is the
  only active user (a or b) and the event where both are active (c).
* Outer bound 2 assumes only the receiver knows all states. A transmitter
  cannot tell events apart and uses one power whenever its switch is on,
  spread over events d/f (user 1) or e/f (user 2); only the receiver-on
  portions a, b, c carry rate.
* The inner bound subtracts from outer bound 2 the rate a genie would need to
  tell the receiver the transmitter states, capped by the dwell-time rate
  1/N per link.

Rates are in bits per channel use; events of zero probability carry zero
rate and zero power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, NoTransmissionError
from .geometry import PentagonConstraints, RatePair, RateRegion, hull_union, pentagon
from .prob_model import EventProbs, ModelParams, conditional_entropies, event_probs

__all__ = [
    "PowerAllocation",
    "GapSpec",
    "OracleResult",
    "DEFAULT_RESOLUTION",
    "outer1_constraints",
    "outer2_constraints",
    "outer1_region",
    "outer2_region",
    "inner_region",
    "gap_spec",
    "optimal_allocation",
    "sum_rate_objective",
    "max_sum_rate",
    "oracle_max_sum_rate",
]

DEFAULT_RESOLUTION = 201
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Per-event powers for outer bound 1 and common powers for outer bound 2."""

    p1a: float = 0.0
    p2b: float = 0.0
    p1c: float = 0.0
    p2c: float = 0.0
    p1df: float = 0.0
    p2ef: float = 0.0
    fallback: bool = False

    def outer1_feasible(self, ev: EventProbs, p1: float, p2: float, tol: float = FEAS_TOL) -> bool:
        return ev.pa * self.p1a + ev.pc * self.p1c <= p1 + tol and ev.pb * self.p2b + ev.pc * self.p2c <= p2 + tol

    def outer2_feasible(self, ev: EventProbs, p1: float, p2: float, tol: float = FEAS_TOL) -> bool:
        ok1 = ev.pd + ev.pf == 0 or self.p1df <= p1 / (ev.pd + ev.pf) + tol
        ok2 = ev.pe + ev.pf == 0 or self.p2ef <= p2 / (ev.pe + ev.pf) + tol
        return ok1 and ok2


@dataclass(frozen=True)
class GapSpec:
    d_r1: float
    d_r2: float
    d_sum: float


@dataclass(frozen=True)
class OracleResult:
    value: float
    allocation: PowerAllocation


def _term(p: float, power) -> np.ndarray | float:
    """p * log2(1 + power) with the p = 0 limit taken as exactly zero."""
    if p <= 0:
        return np.zeros_like(np.asarray(power, dtype=float)) if np.ndim(power) else 0.0
    return p * np.log2(1.0 + power)


def _events(params: ModelParams, events: EventProbs | None) -> EventProbs:
    return events if events is not None else params.events()


def outer1_constraints(ev: EventProbs, alloc: PowerAllocation) -> PentagonConstraints:
    ra = _term(ev.pa, alloc.p1a)
    rb = _term(ev.pb, alloc.p2b)
    c1 = ra + _term(ev.pc, alloc.p1c)
    c2 = rb + _term(ev.pc, alloc.p2c)
    c12 = ra + rb + _term(ev.pc, alloc.p1c + alloc.p2c)
    return PentagonConstraints.clipped(c1, c2, c12)


def outer2_constraints(ev: EventProbs, p1df: float, p2ef: float) -> PentagonConstraints:
    r1 = _term(ev.pa, p1df)
    r2 = _term(ev.pb, p2ef)
    c1 = r1 + _term(ev.pc, p1df)
    c2 = r2 + _term(ev.pc, p2ef)
    c12 = r1 + r2 + _term(ev.pc, p1df + p2ef)
    return PentagonConstraints.clipped(c1, c2, c12)


def _split_grid(resolution: int, extra: list[float]) -> np.ndarray:
    grid = np.linspace(0.0, 1.0, resolution)
    extra = [x for x in extra if 0.0 <= x <= 1.0 and math.isfinite(x)]
    return np.unique(np.concatenate([grid, extra]))


def _split_powers(theta: np.ndarray, p_alone: float, p_both: float, budget: float) -> tuple[np.ndarray, np.ndarray]:
    """Powers in the solo and shared events when a fraction theta of the budget goes solo."""
    if p_alone <= 0 and p_both <= 0:
        return np.zeros(1), np.zeros(1)
    if p_alone <= 0:
        return np.zeros(1), np.array([budget / p_both])
    if p_both <= 0:
        return np.array([budget / p_alone]), np.zeros(1)
    return theta * budget / p_alone, (1.0 - theta) * budget / p_both


def outer1_region(
    params: ModelParams,
    resolution: int = DEFAULT_RESOLUTION,
    *,
    events: EventProbs | None = None,
) -> RateRegion:
    """Outer bound 1 as the hull of pentagons over a grid of power splits.

    Each transmitter's budget is split between its solo event and the shared
    event on ``resolution`` evenly spaced fractions. The grid is augmented with
    the equal-power split (whose pentagon dominates outer bound 2) and the
    sum-rate-optimal split, so both are represented exactly.
    """
    if resolution < 2:
        raise DomainError("resolution", f"must be >= 2, got {resolution}")
    ev = _events(params, events)
    if ev.effective <= 0:
        return RateRegion((RatePair(0.0, 0.0),), "outer1")
    p1, p2 = params.p1_avg, params.p2_avg
    best = optimal_allocation(params, events=ev)
    extra1, extra2 = [], []
    if p1 > 0 and ev.pa > 0 and ev.pc > 0:
        extra1 += [ev.pa / (ev.pa + ev.pc), ev.pa * best.p1a / p1]
    if p2 > 0 and ev.pb > 0 and ev.pc > 0:
        extra2 += [ev.pb / (ev.pb + ev.pc), ev.pb * best.p2b / p2]
    x1a, x1c = _split_powers(_split_grid(resolution, extra1), ev.pa, ev.pc, p1)
    x2b, x2c = _split_powers(_split_grid(resolution, extra2), ev.pb, ev.pc, p2)

    ra = _term(ev.pa, x1a)[:, None]
    rb = _term(ev.pb, x2b)[None, :]
    c1 = ra + _term(ev.pc, x1c)[:, None]
    c2 = rb + _term(ev.pc, x2c)[None, :]
    c12 = ra + rb + _term(ev.pc, x1c[:, None] + x2c[None, :])
    c1, c2, c12 = np.broadcast_arrays(c1, c2, c12)
    return hull_union(np.stack([c1, c2, c12], axis=-1), "outer1")


def _outer2_max_powers(ev: EventProbs, p1: float, p2: float) -> tuple[float, float]:
    m1 = p1 / (ev.pd + ev.pf) if ev.pd + ev.pf > 0 else 0.0
    m2 = p2 / (ev.pe + ev.pf) if ev.pe + ev.pf > 0 else 0.0
    return m1, m2


def outer2_region(
    params: ModelParams,
    resolution: int = DEFAULT_RESOLUTION,
    *,
    events: EventProbs | None = None,
) -> RateRegion:
    """Outer bound 2 as the hull of pentagons over the feasible common powers.

    All three constraints grow with both powers, so the hull is in fact the
    pentagon at maximal powers; the sweep is kept so the construction mirrors
    outer bound 1.
    """
    if resolution < 2:
        raise DomainError("resolution", f"must be >= 2, got {resolution}")
    ev = _events(params, events)
    if ev.effective <= 0:
        return RateRegion((RatePair(0.0, 0.0),), "outer2")
    m1, m2 = _outer2_max_powers(ev, params.p1_avg, params.p2_avg)
    grid = np.linspace(0.0, 1.0, resolution)
    x1 = (grid * m1)[:, None]
    x2 = (grid * m2)[None, :]
    r1 = _term(ev.pa, x1)
    r2 = _term(ev.pb, x2)
    c1 = r1 + _term(ev.pc, x1)
    c2 = r2 + _term(ev.pc, x2)
    c12 = r1 + r2 + _term(ev.pc, x1 + x2)
    c1, c2, c12 = np.broadcast_arrays(c1, c2, c12)
    return hull_union(np.stack([c1, c2, c12], axis=-1), "outer2")


def gap_spec(params: ModelParams) -> GapSpec:
    """Worst-case genie gaps: p * min(conditional entropy, k / N)."""
    joint = params.joint()
    ev = event_probs(joint)
    h = conditional_entropies(joint)
    n = float(params.dwell_n)
    return GapSpec(
        d_r1=ev.pa * min(h.h_t1_given_r, 1.0 / n),
        d_r2=ev.pb * min(h.h_t2_given_r, 1.0 / n),
        d_sum=ev.pc * min(h.h_t12_given_r, 2.0 / n),
    )


def inner_region(params: ModelParams) -> RateRegion:
    """Genie inner bound: the outer-bound-2 pentagon with the rate gaps removed."""
    ev = params.events()
    if ev.effective <= 0:
        return RateRegion((RatePair(0.0, 0.0),), "inner")
    m1, m2 = _outer2_max_powers(ev, params.p1_avg, params.p2_avg)
    c = outer2_constraints(ev, m1, m2)
    gap = gap_spec(params)
    shifted = PentagonConstraints.clipped(c.c1 - gap.d_r1, c.c2 - gap.d_r2, max(0.0, c.c12 - gap.d_sum))
    return pentagon(shifted, "inner")


def sum_rate_objective(ev: EventProbs, alloc: PowerAllocation) -> float:
    """Sum rate of outer bound 1 at a given per-event allocation."""
    return float(
        _term(ev.pa, alloc.p1a) + _term(ev.pb, alloc.p2b) + _term(ev.pc, alloc.p1c + alloc.p2c)
    )


def optimal_allocation(params: ModelParams, *, events: EventProbs | None = None) -> PowerAllocation:
    """Sum-rate-optimal per-event powers under the average-power budgets.

    The interior solution pools all power at a common water level
    (P1 + P2) / (pa + pb + pc). When that would need negative power in the
    shared event from one user, that user spends everything in its solo
    event and the other user water-fills its budget over its solo and the
    shared event.

    Raises
    ------
    NoTransmissionError
        If pa + pb + pc = 0.
    """
    ev = _events(params, events)
    p1, p2 = params.p1_avg, params.p2_avg
    pa, pb, pc = ev.pa, ev.pb, ev.pc
    total = pa + pb + pc
    if total <= 0:
        raise NoTransmissionError("no event has the receiver and a transmitter on")

    def solo(budget: float, p: float) -> float:
        return budget / p if p > 0 else 0.0

    if pc <= 0:
        return PowerAllocation(p1a=solo(p1, pa), p2b=solo(p2, pb))

    level = (p1 + p2) / total
    mass1 = p1 - pa * level  # user 1 power mass into the shared event
    mass2 = p2 - pb * level
    fallback = False
    if mass1 < 0:
        fallback = True
        mass1 = 0.0
        mass2 = pc * p2 / (pb + pc)
    elif mass2 < 0:
        fallback = True
        mass2 = 0.0
        mass1 = pc * p1 / (pa + pc)
    return PowerAllocation(
        p1a=solo(p1 - mass1, pa),
        p2b=solo(p2 - mass2, pb),
        p1c=mass1 / pc,
        p2c=mass2 / pc,
        fallback=fallback,
    )


def max_sum_rate(params: ModelParams, *, events: EventProbs | None = None) -> float:
    """Closed-form maximal sum rate (pa+pb+pc) log2(1 + (P1+P2)/(pa+pb+pc)).

    This is exact whenever the pooled allocation is interior, which always
    holds for the symmetric (mu, rho) model with equal budgets.
    """
    ev = _events(params, events)
    total = ev.effective
    if total <= 0:
        return 0.0
    return total * math.log2(1.0 + (params.p1_avg + params.p2_avg) / total)


def oracle_max_sum_rate(
    params: ModelParams,
    grid: int = 41,
    refine_iters: int = 200,
    *,
    events: EventProbs | None = None,
) -> OracleResult:
    """Brute-force maximization of the outer-bound-1 sum rate.

    Exhaustive search over the solo-event powers (p1a, p2b) with both budgets
    saturated, followed by cyclic coordinate ascent with bounded scalar
    searches. Independent of the closed form.
    """
    if grid < 11:
        raise DomainError("grid", f"must be >= 11, got {grid}")
    ev = _events(params, events)
    p1, p2 = params.p1_avg, params.p2_avg
    pa, pb, pc = ev.pa, ev.pb, ev.pc

    def shared(budget: float, p_solo: float, x: float) -> float:
        return max(budget - p_solo * x, 0.0) / pc if pc > 0 else 0.0

    def allocation(x1: float, x2: float) -> PowerAllocation:
        return PowerAllocation(p1a=x1, p2b=x2, p1c=shared(p1, pa, x1), p2c=shared(p2, pb, x2))

    def objective(x1: float, x2: float) -> float:
        return sum_rate_objective(ev, allocation(x1, x2))

    # A solo power is a free variable only when both of the user's events have mass.
    hi1 = p1 / pa if pa > 0 else 0.0
    hi2 = p2 / pb if pb > 0 else 0.0
    free1 = pa > 0 and pc > 0
    free2 = pb > 0 and pc > 0
    axis1 = np.linspace(0.0, hi1, grid) if free1 else np.array([hi1])
    axis2 = np.linspace(0.0, hi2, grid) if free2 else np.array([hi2])

    best_val, best = -math.inf, (float(axis1[0]), float(axis2[0]))
    for x1 in axis1:
        for x2 in axis2:
            val = objective(float(x1), float(x2))
            if val > best_val:
                best_val, best = val, (float(x1), float(x2))

    x1, x2 = best
    for _ in range(refine_iters):
        prev = best_val
        if free1:
            res = minimize_scalar(
                lambda t: -objective(t, x2), bounds=(0.0, hi1), method="bounded", options={"xatol": 1e-13}
            )
            if -res.fun >= best_val:
                x1, best_val = float(res.x), -float(res.fun)
        if free2:
            res = minimize_scalar(
                lambda t: -objective(x1, t), bounds=(0.0, hi2), method="bounded", options={"xatol": 1e-13}
            )
            if -res.fun >= best_val:
                x2, best_val = float(res.x), -float(res.fun)
        if best_val - prev <= 1e-16:
            break
    # Boundary values are not reached by bounded search; compare them directly.
    for cand in ((0.0, x2), (hi1, x2), (x1, 0.0), (x1, hi2)):
        if (cand[0] == x1 or free1) and (cand[1] == x2 or free2):
            val = objective(*cand)
            if val > best_val:
                best_val, (x1, x2) = val, cand
    alloc = allocation(x1, x2)
    if pa <= 0:
        alloc = PowerAllocation(p1a=0.0, p2b=alloc.p2b, p1c=alloc.p1c, p2c=alloc.p2c)
    if pb <= 0:
        alloc = PowerAllocation(p1a=alloc.p1a, p2b=0.0, p1c=alloc.p1c, p2c=alloc.p2c)
    return OracleResult(best_val, alloc)
