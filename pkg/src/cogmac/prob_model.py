"""Joint law of the three binary switch states and quantities derived from it.

The switches are S_T1, S_T2 (transmitters) and S_R (receiver); a switch is on
(1) when no primary user is sensed nearby. Under the symmetric model every
switch is off with probability ``mu`` and every pair has Pearson correlation
``rho``. The law is exchangeable, so a cell only depends on how many switches
are on:

    ===========  ===============
    switches on  cell probability
    ===========  ===============
    0            p0
    1            p1
    2            p2
    3            p3
    ===========  ===============

Two table modes are provided. ``verbatim`` evaluates the published closed
forms for p0..p3 literally; those do not sum to one for intermediate ``rho``
and the shortfall is kept in ``normalization_defect``. ``consistent`` keeps
p2 and p3 and re-derives p1 and p0 from the marginal and total-probability
constraints, which makes the table a proper distribution with the requested
marginals and correlations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InfeasibleCorrelationError

__all__ = [
    "TableMode",
    "ModelParams",
    "JointStateDist",
    "EventProbs",
    "ConditionalEntropies",
    "Correlation",
    "build_joint",
    "event_probs",
    "p_mu_rho",
    "dp_dmu",
    "dp_drho",
    "conditional_entropies",
    "pairwise_correlation",
    "STATES",
]

NEG_TOL = 1e-12
RENORM_TOL = 1e-9

# (s_t1, s_t2, s_r) in lexicographic order; cell arrays are indexed the same way.
STATES: tuple[tuple[int, int, int], ...] = tuple(itertools.product((0, 1), repeat=3))


class TableMode(str, Enum):
    VERBATIM = "verbatim"
    CONSISTENT = "consistent"


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise DomainError(name, f"must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the symmetric switch model.

    Powers are linear SNRs relative to unit noise variance. ``dwell_n`` is
    the mean number of slots between primary-user state changes and
    ``i_sq`` the noise power in the bad receiver state of the fading model.
    """

    mu: float
    rho: float
    p1_avg: float = 1.0
    p2_avg: float = 1.0
    dwell_n: float = 100
    i_sq: float = 10.0
    table_mode: TableMode = TableMode.CONSISTENT

    def __post_init__(self) -> None:
        _check_unit("mu", self.mu)
        _check_unit("rho", self.rho)
        for name in ("p1_avg", "p2_avg"):
            value = getattr(self, name)
            if not value >= 0 or math.isinf(value):
                raise DomainError(name, f"must be a finite value >= 0, got {value!r}")
        if not self.dwell_n >= 1 or math.isinf(self.dwell_n):
            raise DomainError("dwell_n", f"must be a finite value >= 1, got {self.dwell_n!r}")
        if not self.i_sq >= 1 or math.isinf(self.i_sq):
            raise DomainError("i_sq", f"must be a finite value >= 1, got {self.i_sq!r}")
        object.__setattr__(self, "table_mode", TableMode(self.table_mode))

    def joint(self) -> JointStateDist:
        return build_joint(self.mu, self.rho, self.table_mode)

    def events(self) -> EventProbs:
        return event_probs(self.joint())


@dataclass(frozen=True)
class JointStateDist:
    """Eight-cell joint law of (S_T1, S_T2, S_R).

    ``cells`` is a read-only array of shape (2, 2, 2) indexed as
    ``cells[s_t1, s_t2, s_r]``. Tiny negative rounding residue is clamped
    to zero on construction.
    """

    cells: np.ndarray
    mode: TableMode = TableMode.CONSISTENT
    normalization_defect: float = field(init=False)

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=float).reshape(2, 2, 2)
        if np.any(cells < -NEG_TOL) or not np.all(np.isfinite(cells)):
            raise DomainError("cells", "joint probabilities must be finite and >= 0")
        cells = np.clip(cells, 0.0, None)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "mode", TableMode(self.mode))
        object.__setattr__(self, "normalization_defect", abs(1.0 - math.fsum(cells.ravel())))

    def __getitem__(self, state: tuple[int, int, int]) -> float:
        return float(self.cells[state])

    def normalized(self) -> np.ndarray:
        total = math.fsum(self.cells.ravel())
        if total <= 0:
            raise DomainError("cells", "joint law has zero total mass")
        return self.cells / total

    def marginal_on(self, axis: int) -> float:
        """P(switch ``axis`` = 1) of the normalized law (0=T1, 1=T2, 2=R)."""
        cells = self.normalized()
        return float(np.take(cells, 1, axis=axis).sum())


@dataclass(frozen=True)
class EventProbs:
    """Probabilities of the six switch events.

    a, b, c: receiver on and only T1 / only T2 / both transmitters on.
    d, e, f: only T1 / only T2 / both on, whatever the receiver does.
    """

    pa: float
    pb: float
    pc: float
    pd: float
    pe: float
    pf: float

    def __post_init__(self) -> None:
        for name in ("pa", "pb", "pc", "pd", "pe", "pf"):
            value = getattr(self, name)
            if not (-NEG_TOL <= value <= 1.0 + NEG_TOL):
                raise DomainError(name, f"must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, min(max(float(value), 0.0), 1.0))

    @property
    def effective(self) -> float:
        """pa + pb + pc, the mass of events where some transmission is heard."""
        return self.pa + self.pb + self.pc


class ConditionalEntropies(NamedTuple):
    h_t1_given_r: float
    h_t2_given_r: float
    h_t12_given_r: float
    renormalized: bool


class Correlation(NamedTuple):
    value: float
    degenerate: bool


def _shared_terms(mu: float, rho: float) -> tuple[float, float, float]:
    # q = P(two given switches both on) = (1-mu)^2 + rho*mu*(1-mu)
    q = (1.0 - mu) ** 2 + rho * (mu - mu * mu)
    p2 = (1.0 - rho) * mu * q
    p3 = q * (1.0 - mu + mu * rho)
    return q, p2, p3


def _layout(p0: float, p1: float, p2: float, p3: float) -> np.ndarray:
    by_count = (p0, p1, p2, p3)
    cells = np.empty((2, 2, 2))
    for state in STATES:
        cells[state] = by_count[sum(state)]
    return cells


def build_joint(mu: float, rho: float, table_mode: TableMode | str = TableMode.CONSISTENT) -> JointStateDist:
    """Build the joint switch law for occupation ``mu`` and correlation ``rho``.

    Raises
    ------
    DomainError
        If ``mu`` or ``rho`` is outside [0, 1].
    InfeasibleCorrelationError
        If consistent mode produces a cell below -1e-12.
    """
    _check_unit("mu", mu)
    _check_unit("rho", rho)
    mode = TableMode(table_mode)
    q, p2, p3 = _shared_terms(mu, rho)
    if mode is TableMode.VERBATIM:
        p0 = mu * (mu * mu + rho * (1.0 - mu * mu))
        p1 = (1.0 - rho * rho) * (1.0 - mu) * mu * mu
    else:
        p1 = (1.0 - mu) - q - p2
        p0 = 1.0 - 3.0 * p1 - 3.0 * p2 - p3
        for name, value in (("p0", p0), ("p1", p1)):
            if value < -NEG_TOL:
                raise InfeasibleCorrelationError(
                    name, f"cell probability {value:.3g} < 0 at mu={mu}, rho={rho}"
                )
    return JointStateDist(_layout(p0, p1, p2, p3), mode)


def event_probs(joint: JointStateDist) -> EventProbs:
    c = joint.cells
    return EventProbs(
        pa=float(c[1, 0, 1]),
        pb=float(c[0, 1, 1]),
        pc=float(c[1, 1, 1]),
        pd=float(c[1, 0, 0] + c[1, 0, 1]),
        pe=float(c[0, 1, 0] + c[0, 1, 1]),
        pf=float(c[1, 1, 0] + c[1, 1, 1]),
    )


def p_mu_rho(mu: float, rho: float) -> float:
    """Effective transmission probability pa + pb + pc under the symmetric model."""
    _check_unit("mu", mu)
    _check_unit("rho", rho)
    return (1.0 + mu - mu * rho) * ((1.0 - mu) ** 2 + rho * (mu - mu * mu))


def dp_dmu(mu: float, rho: float) -> float:
    return mu * (1.0 - rho) ** 2 * (3.0 * mu - 2.0) - 1.0


def dp_drho(mu: float, rho: float) -> float:
    return 2.0 * mu * mu * (1.0 - rho) * (1.0 - mu)


def _entropy_bits(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    return float(-np.sum(p * np.log2(p)))


def conditional_entropies(joint: JointStateDist) -> ConditionalEntropies:
    """H(S_T1|S_R), H(S_T2|S_R) and H(S_T1,S_T2|S_R) in bits.

    A verbatim table with a normalization defect above 1e-9 is renormalized
    first and the result is flagged.
    """
    renorm = joint.normalization_defect > RENORM_TOL
    cells = joint.normalized()
    h_r = _entropy_bits(cells.sum(axis=(0, 1)))
    h_t1_r = _entropy_bits(cells.sum(axis=1).ravel())
    h_t2_r = _entropy_bits(cells.sum(axis=0).ravel())
    h_all = _entropy_bits(cells.ravel())
    return ConditionalEntropies(
        max(h_t1_r - h_r, 0.0), max(h_t2_r - h_r, 0.0), max(h_all - h_r, 0.0), renorm
    )


_PAIRS = {
    ("t1", "t2"): (0, 1),
    ("t1", "r"): (0, 2),
    ("t2", "r"): (1, 2),
}


def pairwise_correlation(joint: JointStateDist, pair: tuple[str, str] = ("t1", "t2")) -> Correlation:
    """Pearson correlation of two switches; ``pair`` picks from t1, t2, r.

    When either switch is deterministic the correlation is undefined and
    ``Correlation(0.0, degenerate=True)`` is returned.
    """
    key = tuple(pair)
    if key not in _PAIRS:
        key = key[::-1]
    if key not in _PAIRS:
        raise DomainError("pair", f"unknown switch pair {pair!r}")
    i, j = _PAIRS[key]
    cells = joint.normalized()
    other = ({0, 1, 2} - {i, j}).pop()
    pair_law = cells.sum(axis=other)
    pi = float(pair_law[1, :].sum())
    pj = float(pair_law[:, 1].sum())
    var = pi * (1.0 - pi) * pj * (1.0 - pj)
    if var <= 1e-300:
        return Correlation(0.0, True)
    cov = float(pair_law[1, 1]) - pi * pj
    return Correlation(cov / math.sqrt(var), False)
