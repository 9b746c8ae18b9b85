"""2D geometry primitives shared by the simulator, expert, and renderer.

Conventions: world axes are x-east / y-north, headings are radians
counter-clockwise from +x and normalized to (-pi, pi].
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.fmod(a + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    return r - math.pi


def unit(angle: float) -> tuple[float, float]:
    return (math.cos(angle), math.sin(angle))


class Polyline:
    """Piecewise-linear curve with arclength parametrization."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ValueError("polyline needs at least two 2-d points")
        self.points = pts
        vecs = pts[1:] - pts[:-1]
        self.seg_lens = np.hypot(vecs[:, 0], vecs[:, 1])
        if np.any(self.seg_lens <= 0):
            raise ValueError("polyline has zero-length segment")
        self.seg_dirs = vecs / self.seg_lens[:, None]
        self.cum = np.concatenate([[0.0], np.cumsum(self.seg_lens)])
        self.length = float(self.cum[-1])

    def _locate(self, s: float) -> tuple[int, float]:
        """Segment index and local offset for arclength s (clamped)."""
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(max(i, 0), len(self.seg_lens) - 1)
        return i, s - self.cum[i]

    def point_at(self, s: float) -> tuple[float, float]:
        i, t = self._locate(s)
        p = self.points[i] + self.seg_dirs[i] * t
        return (float(p[0]), float(p[1]))

    def tangent_at(self, s: float) -> tuple[float, float]:
        i, _ = self._locate(s)
        d = self.seg_dirs[i]
        return (float(d[0]), float(d[1]))

    def heading_at(self, s: float) -> float:
        dx, dy = self.tangent_at(s)
        return math.atan2(dy, dx)

    def project(self, x: float, y: float) -> tuple[float, float, float]:
        """Project a point onto the curve.

        Returns (s, lateral, distance): arclength of the foot point,
        signed lateral offset (positive = left of travel direction),
        and absolute distance to the curve.
        """
        p = np.array([x, y])
        rel = p - self.points[:-1]
        t = rel[:, 0] * self.seg_dirs[:, 0] + rel[:, 1] * self.seg_dirs[:, 1]
        t = np.clip(t, 0.0, self.seg_lens)
        feet = self.points[:-1] + self.seg_dirs * t[:, None]
        d2 = (p[0] - feet[:, 0]) ** 2 + (p[1] - feet[:, 1]) ** 2
        i = int(np.argmin(d2))
        s = float(self.cum[i] + t[i])
        dist = float(math.sqrt(d2[i]))
        # sign: cross(direction, p - foot) > 0 means the point is left
        cross = self.seg_dirs[i, 0] * (p[1] - feet[i, 1]) - self.seg_dirs[i, 1] * (p[0] - feet[i, 0])
        lateral = dist if cross >= 0 else -dist
        return s, lateral, dist

    def offset(self, d: float) -> "Polyline":
        """Parallel curve shifted by d to the left (negative = right)."""
        n = len(self.points)
        out = np.empty_like(self.points)
        normals = np.stack([-self.seg_dirs[:, 1], self.seg_dirs[:, 0]], axis=1)
        out[0] = self.points[0] + d * normals[0]
        out[-1] = self.points[-1] + d * normals[-1]
        for i in range(1, n - 1):
            avg = normals[i - 1] + normals[i]
            norm = math.hypot(avg[0], avg[1])
            if norm < 1e-9:
                avg = normals[i]
                norm = 1.0
            avg = avg / norm
            # miter correction keeps the offset distance at sharp joints
            cos_half = avg[0] * normals[i][0] + avg[1] * normals[i][1]
            scale = 1.0 / max(cos_half, 0.2)
            out[i] = self.points[i] + d * scale * avg
        return Polyline(out)

    def segments(self):
        for i in range(len(self.seg_lens)):
            yield self.points[i], self.points[i + 1]


def arc_points(cx: float, cy: float, radius: float, a0: float, a1: float, spacing: float = 1.5):
    """Sample a circular arc from angle a0 to a1 (signed sweep)."""
    sweep = a1 - a0
    n = max(2, int(math.ceil(abs(sweep) * radius / spacing)) + 1)
    return [
        (cx + radius * math.cos(a0 + sweep * i / (n - 1)),
         cy + radius * math.sin(a0 + sweep * i / (n - 1)))
        for i in range(n)
    ]


def rect_corners(cx: float, cy: float, heading: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise."""
    fx, fy = math.cos(heading), math.sin(heading)
    lx, ly = -fy, fx
    hl, hw = length / 2.0, width / 2.0
    return np.array(
        [
            [cx + fx * hl + lx * hw, cy + fy * hl + ly * hw],
            [cx - fx * hl + lx * hw, cy - fy * hl + ly * hw],
            [cx - fx * hl - lx * hw, cy - fy * hl - ly * hw],
            [cx + fx * hl - lx * hw, cy + fy * hl - ly * hw],
        ]
    )


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Inclusive segment intersection (touching counts)."""
    d1 = _orient(q1[0], q1[1], q2[0], q2[1], p1[0], p1[1])
    d2 = _orient(q1[0], q1[1], q2[0], q2[1], p2[0], p2[1])
    d3 = _orient(p1[0], p1[1], p2[0], p2[1], q1[0], q1[1])
    d4 = _orient(p1[0], p1[1], p2[0], p2[1], q2[0], q2[1])
    if ((d1 > 0) != (d2 > 0) or d1 == 0 or d2 == 0) and ((d3 > 0) != (d4 > 0) or d3 == 0 or d4 == 0):
        # handle collinear/touching cases with bounding-box overlap
        if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
            return (
                min(p1[0], p2[0]) <= max(q1[0], q2[0])
                and min(q1[0], q2[0]) <= max(p1[0], p2[0])
                and min(p1[1], p2[1]) <= max(q1[1], q2[1])
                and min(q1[1], q2[1]) <= max(p1[1], p2[1])
            )
        return True
    return False


def point_in_convex(px: float, py: float, corners: np.ndarray) -> bool:
    """Point-in-convex-polygon test, boundary inclusive (CCW corners)."""
    n = len(corners)
    for i in range(n):
        a = corners[i]
        b = corners[(i + 1) % n]
        if _orient(a[0], a[1], b[0], b[1], px, py) < 0:
            return False
    return True


def rect_segment_intersects(corners: np.ndarray, q1, q2) -> bool:
    """Does a segment touch or cross an oriented rectangle?"""
    if point_in_convex(q1[0], q1[1], corners) or point_in_convex(q2[0], q2[1], corners):
        return True
    n = len(corners)
    for i in range(n):
        if segments_intersect(corners[i], corners[(i + 1) % n], q1, q2):
            return True
    return False


def rects_overlap(c1: np.ndarray, c2: np.ndarray) -> bool:
    """Separating-axis test for two oriented rectangles (touch counts)."""
    for corners in (c1, c2):
        for i in range(2):
            a = corners[i]
            b = corners[i + 1]
            ax, ay = b[0] - a[0], b[1] - a[1]
            norm = math.hypot(ax, ay)
            if norm == 0:
                continue
            ax, ay = ax / norm, ay / norm
            p1 = c1 @ np.array([ax, ay])
            p2 = c2 @ np.array([ax, ay])
            if p1.max() < p2.min() or p2.max() < p1.min():
                return False
    return True
