"""Two-user rate regions stored as concave Pareto frontiers.

A region is the down-closed convex set in the non-negative quadrant lying
under a polyline that starts on the R2 axis at ``(0, r2_max)`` and ends on
the R1 axis at ``(r1_max, 0)``. Along the polyline r1 is non-decreasing and
r2 non-increasing, consecutive vertices are distinct and no vertex is
collinear with its neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError

__all__ = [
    "RatePair",
    "PentagonConstraints",
    "RateRegion",
    "Containment",
    "pentagon",
    "hull_union",
    "frontier_from_points",
    "support",
    "contains",
    "hausdorff",
]

GEOM_TOL = 1e-12


class RatePair(NamedTuple):
    r1: float
    r2: float


@dataclass(frozen=True)
class PentagonConstraints:
    """R1 <= c1, R2 <= c2, R1 + R2 <= c12 (bits per channel use)."""

    c1: float
    c2: float
    c12: float

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "c12"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < -GEOM_TOL:
                raise DomainError(name, f"must be finite and >= 0, got {value!r}")
        if self.c12 < max(self.c1, self.c2) - 1e-9 or self.c12 > self.c1 + self.c2 + 1e-9:
            raise DomainError(
                "c12", f"must lie in [max(c1, c2), c1 + c2], got {self.c12!r} for c1={self.c1!r}, c2={self.c2!r}"
            )

    @classmethod
    def clipped(cls, c1: float, c2: float, c12: float) -> PentagonConstraints:
        """Clamp negatives to zero and force c12 into [max(c1, c2), c1 + c2]."""
        c1, c2 = max(c1, 0.0), max(c2, 0.0)
        c12 = min(max(c12, c1, c2), c1 + c2)
        return cls(c1, c2, c12)


@dataclass(frozen=True)
class RateRegion:
    vertices: tuple[RatePair, ...]
    label: str = ""

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def r1_max(self) -> float:
        return self.vertices[-1].r1

    @property
    def r2_max(self) -> float:
        return self.vertices[0].r2

    def relabel(self, label: str) -> RateRegion:
        return RateRegion(self.vertices, label)


class Containment(NamedTuple):
    holds: bool
    max_violation: float
    witness: RatePair | None
    violating: tuple[RatePair, ...]


def _cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def frontier_from_points(points: np.ndarray | Iterable[Sequence[float]], label: str = "") -> RateRegion:
    """Pareto frontier of the convex hull of the down-closure of ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        raise DomainError("points", "at least one rate pair is required")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points", "rate pairs must be finite")
    if np.any(pts < -GEOM_TOL):
        raise DomainError("points", "rates must be >= 0")
    pts = np.clip(pts, 0.0, None)
    r1_max = float(pts[:, 0].max())
    r2_max = float(pts[:, 1].max())
    if r1_max == 0.0 and r2_max == 0.0:
        return RateRegion((RatePair(0.0, 0.0),), label)

    # Staircase filter: scan by r1 descending (r2 descending on ties) and keep
    # points that beat every r2 seen so far. Only these can be hull vertices.
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    ordered = pts[order]
    running = np.maximum.accumulate(ordered[:, 1])
    keep = np.ones(len(ordered), dtype=bool)
    keep[1:] = ordered[1:, 1] > running[:-1]
    stair = ordered[keep][::-1]

    candidates = [(0.0, r2_max)]
    candidates.extend((float(x), float(y)) for x, y in stair)
    candidates.append((r1_max, 0.0))

    hull: list[tuple[float, float]] = []
    for p in candidates:
        if hull and hull[-1] == p:
            continue
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= -GEOM_TOL:
            hull.pop()
        hull.append(p)
    return RateRegion(tuple(RatePair(*p) for p in hull), label)


def pentagon(c: PentagonConstraints, label: str = "") -> RateRegion:
    """Region of a two-user MAC at fixed powers."""
    return frontier_from_points(_pentagon_vertices(c.c1, c.c2, c.c12), label)


def _pentagon_vertices(c1, c2, c12) -> np.ndarray:
    c1, c2, c12 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (c1, c2, c12)))
    c12 = np.minimum(np.maximum(c12, np.maximum(c1, c2)), c1 + c2)
    zeros = np.zeros_like(c1)
    verts = np.stack(
        [
            np.stack([zeros, c2], axis=-1),
            np.stack([c12 - c2, c2], axis=-1),
            np.stack([c1, c12 - c1], axis=-1),
            np.stack([c1, zeros], axis=-1),
        ],
        axis=-2,
    )
    return verts.reshape(-1, 2)


def hull_union(pentagons: Sequence[PentagonConstraints] | np.ndarray, label: str = "") -> RateRegion:
    """Convex hull of the union of pentagons.

    ``pentagons`` is either a sequence of :class:`PentagonConstraints` or an
    array whose last axis holds ``(c1, c2, c12)``; the array form is what the
    bound sweeps use.
    """
    if isinstance(pentagons, np.ndarray):
        arr = pentagons.reshape(-1, 3)
    else:
        arr = np.array([(p.c1, p.c2, p.c12) for p in pentagons], dtype=float).reshape(-1, 3)
    if arr.shape[0] == 0:
        raise DomainError("pentagons", "cannot take the hull of an empty list")
    return frontier_from_points(_pentagon_vertices(arr[:, 0], arr[:, 1], arr[:, 2]), label)


def support(region: RateRegion, direction: tuple[float, float] = (1.0, 1.0)) -> float:
    """Support value max(w1*r1 + w2*r2) over the region."""
    w1, w2 = direction
    if not (math.isfinite(w1) and math.isfinite(w2)):
        raise DomainError("direction", "weights must be finite")
    if w1 < 0 or w2 < 0:
        raise DomainError("direction", "weights must be non-negative")
    if w1 == 0 and w2 == 0:
        raise DomainError("direction", "zero direction has no support value")
    v = region.as_array()
    return float(np.max(w1 * v[:, 0] + w2 * v[:, 1]))


def _halfplanes(region: RateRegion) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normals and offsets describing the region (quadrant implicit)."""
    v = region.as_array()
    normals = [(1.0, 0.0), (0.0, 1.0)]
    offsets = [float(v[:, 0].max()), float(v[:, 1].max())]
    for (x0, y0), (x1, y1) in zip(v[:-1], v[1:]):
        n = np.array([y0 - y1, x1 - x0])
        length = float(np.hypot(*n))
        if length == 0.0:
            continue
        n /= length
        normals.append((float(n[0]), float(n[1])))
        offsets.append(float(n[0] * x0 + n[1] * y0))
    return np.array(normals), np.array(offsets)


def contains(outer: RateRegion, inner: RateRegion, tol: float = 1e-9) -> Containment:
    """Check that every vertex of ``inner`` lies in ``outer`` within ``tol``.

    Violations are Euclidean distances past a supporting half-plane.
    """
    normals, offsets = _halfplanes(outer)
    pts = inner.as_array()
    slack = pts @ normals.T - offsets
    worst_per_vertex = slack.max(axis=1)
    idx = int(np.argmax(worst_per_vertex))
    max_violation = max(float(worst_per_vertex[idx]), 0.0)
    violating = tuple(RatePair(*map(float, pts[i])) for i in np.flatnonzero(worst_per_vertex > tol))
    witness = RatePair(*map(float, pts[idx])) if max_violation > 0 else None
    return Containment(max_violation <= tol, max_violation, witness, violating)


def _distance_to_polyline(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    if len(verts) == 1:
        return np.hypot(*(points - verts[0]).T)
    a = verts[:-1]
    d = verts[1:] - a
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0, 1.0, dd)
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pij,ij->pi", rel, d) / dd, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * d[None, :, :]
    return np.sqrt(((points[:, None, :] - closest) ** 2).sum(axis=-1)).min(axis=1)


def _directed_hausdorff(a: np.ndarray, b: np.ndarray, samples: int = 32) -> float:
    if len(a) == 1:
        return float(_distance_to_polyline(a, b)[0])
    best = float(_distance_to_polyline(a, b).max())
    t = np.linspace(0.0, 1.0, samples)
    for p0, p1 in zip(a[:-1], a[1:]):
        seg = p0 + t[:, None] * (p1 - p0)
        dist = _distance_to_polyline(seg, b)
        k = int(np.argmax(dist))
        best = max(best, float(dist[k]))
        lo, hi = t[max(k - 1, 0)], t[min(k + 1, samples - 1)]
        if hi > lo:
            res = minimize_scalar(
                lambda s: -float(_distance_to_polyline((p0 + s * (p1 - p0))[None, :], b)[0]),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = max(best, -float(res.fun))
    return best


def hausdorff(a: RateRegion, b: RateRegion) -> float:
    """Symmetric Hausdorff distance between two frontiers (bits)."""
    if a.vertices == b.vertices:
        return 0.0
    va, vb = a.as_array(), b.as_array()
    return max(_directed_hausdorff(va, vb), _directed_hausdorff(vb, va))
