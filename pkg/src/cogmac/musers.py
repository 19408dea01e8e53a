"""m-transmitter generalization of the switch bounds.

Transmitter states are encoded as integers: bit ``i`` of a state index is the
switch of user ``i`` (user numbering starts at 0 internally). A model holds
the joint law as an array ``joint[state, s_r]`` of shape ``(2**m, 2)``.
Subsets of users are bit masks in the same encoding.

Every subset bound has the form

    R(M) <= sum over states s with S_R = 1 of p(s, S_R=1) * log2(1 + sum_{i in M, i on in s} P_i^s)

which is a normalized, monotone, submodular set function of M. Sums over
states are taken over sorted terms so the result does not depend on user
labelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, DomainError
from .prob_model import JointStateDist

__all__ = [
    "MAX_USERS",
    "MUserModel",
    "SubsetRateBound",
    "SumRateSolution",
    "muser_outer1_sum_bounds",
    "muser_outer2_sum_bounds",
    "muser_max_sum_rate",
    "muser_inner_gap",
    "is_polymatroid",
]

MAX_USERS = 16
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class MUserModel:
    m: int
    joint: np.ndarray
    powers: np.ndarray

    def __post_init__(self) -> None:
        if not (1 <= int(self.m) <= MAX_USERS):
            raise DomainError("m", f"must lie in [1, {MAX_USERS}], got {self.m!r}")
        joint = np.array(self.joint, dtype=float).reshape(2**self.m, 2)
        powers = np.array(self.powers, dtype=float).ravel()
        if powers.shape != (self.m,):
            raise DomainError("powers", f"expected {self.m} power budgets, got {powers.shape[0]}")
        if np.any(powers < 0) or not np.all(np.isfinite(powers)):
            raise DomainError("powers", "power budgets must be finite and >= 0")
        if np.any(joint < -1e-12) or abs(math.fsum(joint.ravel()) - 1.0) > 1e-12:
            raise DomainError("joint", "joint law must be non-negative and sum to 1")
        joint = np.clip(joint, 0.0, None)
        joint.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def iid(cls, m: int, mu: float, powers=1.0) -> MUserModel:
        """All m + 1 switches independent, each off with probability ``mu``."""
        if not 0.0 <= mu <= 1.0:
            raise DomainError("mu", f"must lie in [0, 1], got {mu!r}")
        on = _active_matrix(m).sum(axis=1)
        p_t = (1.0 - mu) ** on * mu ** (m - on)
        joint = np.stack([p_t * mu, p_t * (1.0 - mu)], axis=1)
        return cls(m, joint, np.broadcast_to(np.asarray(powers, dtype=float), (m,)))

    @classmethod
    def from_two_user(cls, joint: JointStateDist, p1: float, p2: float) -> MUserModel:
        cells = joint.cells
        arr = np.empty((4, 2))
        for state in range(4):
            s1, s2 = state & 1, (state >> 1) & 1
            arr[state] = cells[s1, s2, :]
        return cls(2, arr, [p1, p2])

    @property
    def n_states(self) -> int:
        return 2**self.m

    @property
    def active(self) -> np.ndarray:
        return _active_matrix(self.m)

    @property
    def p_on(self) -> np.ndarray:
        """p(state, S_R = 1) for every transmitter state."""
        return self.joint[:, 1]

    @property
    def p_state(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def permuted(self, perm) -> MUserModel:
        """Relabel users: new user ``k`` is old user ``perm[k]``."""
        perm = list(perm)
        idx = np.array([_permute_mask(s, perm) for s in range(self.n_states)])
        joint = np.empty_like(self.joint)
        joint[idx] = self.joint
        return MUserModel(self.m, joint, self.powers[perm])


@dataclass(frozen=True)
class SubsetRateBound:
    mask: int
    bound: float


@dataclass(frozen=True)
class SumRateSolution:
    value: float
    allocation: np.ndarray
    kkt_residual: float
    iterations: int


def _active_matrix(m: int) -> np.ndarray:
    states = np.arange(2**m)[:, None]
    return ((states >> np.arange(m)[None, :]) & 1).astype(bool)


def _permute_mask(mask: int, perm: list[int]) -> int:
    """Image of an old-label mask under the relabelling new k <- old perm[k]."""
    out = 0
    for new, old in enumerate(perm):
        if mask >> old & 1:
            out |= 1 << new
    return out


def _subset_sums(weights: np.ndarray) -> np.ndarray:
    """For each row, sums of weights over all 2**m column subsets (bit-mask order)."""
    n, m = weights.shape
    out = np.zeros((n, 2**m))
    for i in range(m):
        width = 1 << i
        out[:, width : 2 * width] = out[:, :width] + weights[:, i : i + 1]
    return out


def _bounds_from_powers(model: MUserModel, powers: np.ndarray) -> list[SubsetRateBound]:
    p = model.p_on
    rows = p > 0
    sums = _subset_sums(np.where(model.active, powers, 0.0)[rows])
    terms = p[rows, None] * np.log2(1.0 + sums)
    values = np.sort(terms, axis=0).sum(axis=0)
    return [SubsetRateBound(mask, float(v)) for mask, v in enumerate(values)]


def _outer1_power_used(model: MUserModel, allocation: np.ndarray) -> np.ndarray:
    used = np.where(model.active, allocation, 0.0) * model.p_on[:, None]
    return np.sort(used, axis=0).sum(axis=0)


def muser_outer1_sum_bounds(model: MUserModel, allocation) -> list[SubsetRateBound]:
    """Subset-rate bounds of outer bound 1 at a per-(state, user) allocation.

    ``allocation[state, i]`` is user i's power in that state with S_R = 1;
    entries for users that are off in the state are ignored.

    Raises
    ------
    ConstraintError
        If some user's expected power over receiver-on states exceeds its budget.
    """
    alloc = np.asarray(allocation, dtype=float).reshape(model.n_states, model.m)
    if np.any(alloc < 0):
        raise DomainError("allocation", "powers must be >= 0")
    slack = model.powers - _outer1_power_used(model, alloc)
    for i, s in enumerate(slack):
        if s < -FEAS_TOL:
            raise ConstraintError(i, float(s))
    return _bounds_from_powers(model, alloc)


def muser_outer2_sum_bounds(model: MUserModel, powers) -> list[SubsetRateBound]:
    """Subset-rate bounds of outer bound 2 with state-independent user powers.

    The budget applies whenever a user's own switch is on: P_i * P(S_Ti = 1) <= P_i_avg.
    """
    pw = np.asarray(powers, dtype=float).ravel()
    if pw.shape != (model.m,) or np.any(pw < 0):
        raise DomainError("powers", f"expected {model.m} non-negative powers")
    p_user_on = (model.active * model.p_state[:, None]).sum(axis=0)
    slack = model.powers - pw * p_user_on
    for i, s in enumerate(slack):
        if s < -FEAS_TOL:
            raise ConstraintError(i, float(s))
    return _bounds_from_powers(model, np.broadcast_to(pw, (model.n_states, model.m)))


def max_outer2_powers(model: MUserModel) -> np.ndarray:
    p_user_on = (model.active * model.p_state[:, None]).sum(axis=0)
    return np.where(p_user_on > 0, model.powers / np.where(p_user_on > 0, p_user_on, 1.0), 0.0)


def _waterfill(weights: np.ndarray, floors: np.ndarray, budget: float) -> np.ndarray:
    """Solve sum_s (weights_s * W - floors_s)^+ = budget for W and return the fills."""
    if budget <= 0 or weights.size == 0:
        return np.zeros_like(weights)
    order = np.argsort(floors / weights, kind="stable")
    w, f = weights[order], floors[order]
    thresholds = f / w
    cw, cf = np.cumsum(w), np.cumsum(f)
    level = (budget + cf[-1]) / cw[-1]
    for k in range(len(w)):
        cand = (budget + cf[k]) / cw[k]
        if k == len(w) - 1 or cand <= thresholds[k + 1]:
            level = cand
            break
    fill = np.zeros_like(weights)
    fill[order] = np.maximum(w * level - f, 0.0)
    return fill


def _kkt_residual(model: MUserModel, mass: np.ndarray) -> float:
    """Complementarity residual of the sum-rate program in power-mass variables."""
    p = model.p_on
    total = mass.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        marginal = np.where(p > 0, p / (p + total), 0.0)
    worst = 0.0
    for i in range(model.m):
        states = model.active[:, i] & (p > 0)
        if model.powers[i] <= 0 or not states.any():
            continue
        lam = marginal[states].max()
        gap = lam - marginal[states]
        worst = max(worst, float(np.max(np.minimum(mass[states, i], gap))))
        worst = max(worst, abs(float(mass[states, i].sum()) - model.powers[i]))
    return worst


def muser_max_sum_rate(model: MUserModel, tol: float = 1e-10, max_iter: int = 100_000) -> SumRateSolution:
    """Maximize the full-set outer-bound-1 sum rate by iterative water-filling.

    Each user in turn water-fills its whole budget over the receiver-on
    states where it is active, treating the other users' power as a floor.
    Iterates until the KKT complementarity residual drops below ``tol``.
    The returned allocation is per-state power (not power mass).
    """
    p = model.p_on
    m = model.m
    mass = np.zeros((model.n_states, m))
    usable = [np.flatnonzero(model.active[:, i] & (p > 0)) for i in range(m)]
    if all(len(u) == 0 or model.powers[i] == 0 for i, u in enumerate(usable)):
        return SumRateSolution(0.0, np.zeros_like(mass), 0.0, 0)
    residual = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        for i in range(m):
            states = usable[i]
            if len(states) == 0:
                continue
            others = mass[states].sum(axis=1) - mass[states, i]
            mass[states, i] = _waterfill(p[states], p[states] + others, float(model.powers[i]))
        residual = _kkt_residual(model, mass)
        if residual <= tol:
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        alloc = np.where(p[:, None] > 0, mass / np.where(p > 0, p, 1.0)[:, None], 0.0)
    full = _bounds_from_powers(model, alloc)[-1].bound
    return SumRateSolution(full, alloc, residual, it)


def _conditional_entropy_bits(law: np.ndarray) -> float:
    """H(X | S_R) for ``law[x, s_r]`` (bits)."""
    def h(p):
        p = p[p > 0]
        return float(-np.sum(p * np.log2(p)))

    return max(h(law.ravel()) - h(law.sum(axis=0)), 0.0)


def muser_inner_gap(model: MUserModel, subset: int, dwell_n: float) -> float:
    """Genie gap for subset M: p(only M on, S_R=1) * min(H(S_T(M) | S_R), |M| / N)."""
    if not 0 <= subset < model.n_states:
        raise DomainError("subset", f"mask {subset} out of range for m={model.m}")
    if dwell_n < 1:
        raise DomainError("dwell_n", f"must be >= 1, got {dwell_n!r}")
    size = bin(subset).count("1")
    if size == 0:
        return 0.0
    members = [i for i in range(model.m) if subset >> i & 1]
    # Marginal law of the subset's switch pattern jointly with S_R.
    pattern = np.zeros(model.n_states, dtype=int)
    for k, i in enumerate(members):
        pattern |= model.active[:, i].astype(int) << k
    law = np.zeros((2**size, 2))
    np.add.at(law, pattern, model.joint)
    h = _conditional_entropy_bits(law)
    return float(model.p_on[subset]) * min(h, size / float(dwell_n))


def is_polymatroid(bounds: list[SubsetRateBound], tol: float = 1e-9) -> bool:
    """Normalized, monotone and submodular within ``tol``."""
    f = np.array([b.bound for b in sorted(bounds, key=lambda b: b.mask)])
    n = len(f)
    m = n.bit_length() - 1
    if abs(f[0]) > tol:
        return False
    for mask in range(n):
        for i in range(m):
            bit = 1 << i
            if mask & bit:
                continue
            gain = f[mask | bit] - f[mask]
            if gain < -tol:
                return False
            for j in range(i + 1, m):
                other = 1 << j
                if mask & other:
                    continue
                # Diminishing returns: adding i helps no more once j is present.
                if f[mask | bit | other] - f[mask | other] > gain + tol:
                    return False
    return True
