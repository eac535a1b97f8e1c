"""Closed-curve construction and geometry utilities.

Builds a simple closed tour through a point set (spanning-tree traversal
refined by 2-opt swaps) and provides the shared curve operations the rest of
the pipeline leans on: arc-length resampling, smoothing by Gaussian
convolution, length, and crossing detection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d


@dataclass
class Curve:
    """Closed polyline in R^2 or R^3; the last point connects back to the first."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] not in (2, 3):
            raise ValueError("curve points must be an (M, d) array with d in {2, 3}")
        if self.points.shape[0] < 3:
            raise ValueError("a closed curve needs at least 3 points")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("curve coordinates must be finite")

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_json_dict(self) -> dict:
        return {"dimension": self.dimension, "points": self.points.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Curve":
        pts = np.asarray(data["points"], dtype=np.float64)
        if int(data.get("dimension", pts.shape[1])) != pts.shape[1]:
            raise ValueError("curve JSON dimension field disagrees with points")
        return cls(points=pts)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path) -> "Curve":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def curve_length(curve) -> float:
    """Total polyline length including the closing segment."""
    pts = curve.points if isinstance(curve, Curve) else np.asarray(curve, float)
    diffs = np.diff(np.vstack([pts, pts[:1]]), axis=0)
    return float(np.sum(np.linalg.norm(diffs, axis=1)))


def _prim_mst(points: np.ndarray) -> list[list[int]]:
    """Adjacency lists of a Euclidean minimum spanning tree (Prim, O(n^2))."""
    n = len(points)
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=int)
    adj: list[list[int]] = [[] for _ in range(n)]
    current = 0
    in_tree[0] = True
    for _ in range(n - 1):
        d = np.linalg.norm(points - points[current], axis=1)
        better = (~in_tree) & (d < best_dist)
        best_dist[better] = d[better]
        best_from[better] = current
        best_dist[in_tree] = np.inf
        nxt = int(np.argmin(best_dist))
        adj[nxt].append(int(best_from[nxt]))
        adj[int(best_from[nxt])].append(nxt)
        in_tree[nxt] = True
        best_dist[nxt] = np.inf
        current = nxt
    return adj


def mst_tour(pattern) -> Curve:
    """Closed tour through a point set via depth-first spanning-tree order.

    Visiting points in preorder of the minimum spanning tree yields a tour no
    longer than twice the tree weight, a classic 2-approximation that 2-opt
    then cleans up.
    """
    points = np.asarray(pattern, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("pattern must be an (n, d) array")
    if len(np.unique(points, axis=0)) < 3:
        raise ValueError("need at least 3 distinct points for a tour")
    adj = _prim_mst(points)
    order = []
    seen = np.zeros(len(points), dtype=bool)
    stack = [0]
    while stack:
        node = stack.pop()
        if seen[node]:
            continue
        seen[node] = True
        order.append(node)
        for nb in sorted(adj[node], reverse=True):
            if not seen[nb]:
                stack.append(nb)
    return Curve(points=points[order])


def two_opt(curve: Curve, tol: float = 1e-12) -> Curve:
    """Improve a closed 2D tour by segment reversals until none helps.

    Sweeps pairs (i, j) in lexicographic order; whenever replacing edges
    (i, i+1) and (j, j+1) with (i, j) and (i+1, j+1) strictly shortens the
    tour (beyond ``tol``), the stretch between i+1 and j is reversed.  Stops
    after a full sweep without an improving swap, which also removes every
    proper self-crossing for points in general position.
    """
    if curve.dimension != 2:
        raise ValueError("two_opt operates on 2D tours")
    pts = curve.points.copy()
    m = len(pts)
    improved = True
    while improved:
        improved = False
        for i in range(m - 2):
            j_hi = m - 1 if i > 0 else m - 2
            js = np.arange(i + 2, j_hi + 1)
            if len(js) == 0:
                continue
            a, b = pts[i], pts[i + 1]
            c = pts[js]
            d = pts[(js + 1) % m]
            gain = (
                np.linalg.norm(c - a, axis=1)
                + np.linalg.norm(d - b, axis=1)
                - np.linalg.norm(b - a)
                - np.linalg.norm(d - c, axis=1)
            )
            hits = np.nonzero(gain < -tol)[0]
            if len(hits):
                j = int(js[hits[0]])
                pts[i + 1 : j + 1] = pts[i + 1 : j + 1][::-1]
                improved = True
    return Curve(points=pts)


def resample_closed(curve: Curve, n: int) -> Curve:
    """Resample a closed curve to n points equally spaced by arc length.

    The first output point coincides with the curve's first vertex.
    """
    if n < 3:
        raise ValueError("need at least 3 resampled points")
    pts = curve.points
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    keep = seg > 0
    if not np.any(keep):
        raise ValueError("cannot resample a zero-length curve")
    anchors = np.vstack([closed[:-1][keep], closed[-1:]])
    cum = np.concatenate([[0.0], np.cumsum(seg[keep])])
    total = cum[-1]
    targets = np.arange(n) * (total / n)
    out = np.column_stack(
        [np.interp(targets, cum, anchors[:, k]) for k in range(pts.shape[1])]
    )
    return Curve(points=out)


def curvature_flow(curve: Curve, sigma: float = 1.0) -> Curve:
    """One smoothing step: arc-length resample, then circular Gaussian blur.

    With index spacing proportional to arc length, convolving each coordinate
    with a Gaussian approximates a step of curve-shortening evolution, which
    keeps simple curves simple while rounding them off.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rs = resample_closed(curve, len(curve))
    radius = max(int(np.ceil(4.0 * sigma)), 1)
    k = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (k / sigma) ** 2)
    kernel /= kernel.sum()
    smoothed = np.column_stack(
        [
            convolve1d(rs.points[:, c], kernel, mode="wrap")
            for c in range(rs.dimension)
        ]
    )
    return Curve(points=smoothed)


def has_self_crossing(curve: Curve) -> bool:
    """True iff two non-adjacent segments of the closed 2D loop properly cross."""
    if curve.dimension != 2:
        raise ValueError("crossing test is for 2D curves")
    pts = curve.points
    m = len(pts)
    starts = pts
    ends = pts[(np.arange(m) + 1) % m]

    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (
            a[..., 1] - o[..., 1]
        ) * (b[..., 0] - o[..., 0])

    for i in range(m - 2):
        j_hi = m - 1 if i > 0 else m - 2
        js = np.arange(i + 2, j_hi + 1)
        if len(js) == 0:
            continue
        p1, p2 = starts[i], ends[i]
        q1, q2 = starts[js], ends[js]
        d1 = cross(q1, q2, p1[None, :])
        d2 = cross(q1, q2, p2[None, :])
        d3 = cross(p1[None, :], p2[None, :], q1)
        d4 = cross(p1[None, :], p2[None, :], q2)
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return True
    return False
