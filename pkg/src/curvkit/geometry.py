"""Planar primitives: points, triples, lines, angles and Menger curvature.

Points are plain Python ``complex`` numbers (``z.real``, ``z.imag``).
Most routines come in two flavours: a scalar one taking a :class:`Triple`
and an ``*_array`` one broadcasting over numpy complex arrays, which the
scans and acceptance checks use. Both share the same arithmetic so that
witnesses found by the vectorised path re-evaluate identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, InvalidTriple

PlanePoint = complex

# absolute collinearity threshold, relative to diameter squared
COLLINEAR_TOL = 1e-14


def as_point(p) -> complex:
    """Coerce a complex, a real or an ``(x, y)`` pair to a finite complex."""
    if isinstance(p, (tuple, list, np.ndarray)) and len(p) == 2:
        z = complex(float(p[0]), float(p[1]))
    else:
        z = complex(p)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidTriple(f"non-finite point {z!r}")
    return z


@dataclass(frozen=True)
class Triple:
    """An ordered triple of pairwise distinct plane points."""

    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, as_point(getattr(self, name)))
        if self.a == self.b or self.b == self.c or self.a == self.c:
            raise InvalidTriple(f"coincident points in {self.points}")

    @classmethod
    def of(cls, *pts) -> "Triple":
        if len(pts) == 1:
            pts = tuple(pts[0])
        if len(pts) == 6:
            pts = (complex(pts[0], pts[1]), complex(pts[2], pts[3]), complex(pts[4], pts[5]))
        if len(pts) != 3:
            raise InvalidTriple(f"expected 3 points, got {len(pts)}")
        return cls(*pts)

    @property
    def points(self) -> tuple[complex, complex, complex]:
        return (self.a, self.b, self.c)

    def sides(self) -> tuple[float, float, float]:
        return (abs(self.a - self.b), abs(self.b - self.c), abs(self.a - self.c))

    def diameter(self) -> float:
        return max(self.sides())

    def translated(self, w: complex) -> "Triple":
        return Triple(self.a + w, self.b + w, self.c + w)

    def scaled(self, lam: float) -> "Triple":
        return Triple(self.a * lam, self.b * lam, self.c * lam)

    def as_lists(self) -> list[list[float]]:
        return [[z.real, z.imag] for z in self.points]


@dataclass(frozen=True)
class Line:
    """A line given by its direction angle in ``[0, pi)`` and one of its points."""

    angle: float
    anchor: complex = 0j

    def __post_init__(self):
        a = math.fmod(float(self.angle), math.pi)
        if a < 0:
            a += math.pi
        if a >= math.pi:
            a = 0.0
        object.__setattr__(self, "angle", a)
        object.__setattr__(self, "anchor", complex(self.anchor))

    @property
    def direction(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))


HORIZONTAL = Line(0.0)
VERTICAL = Line(math.pi / 2)


# ---------------------------------------------------------------------------
# vectorised helpers


def canonical_order(z1, z2, z3):
    """Sort three complex arrays elementwise by ``(real, imag)``.

    Symmetric functionals are evaluated on the sorted triple so that the
    result does not depend on the argument order, bit for bit.
    """

    def swap(p, q):
        less = (q.real < p.real) | ((q.real == p.real) & (q.imag < p.imag))
        return np.where(less, q, p), np.where(less, p, q)

    z1, z2, z3 = (np.asarray(z, dtype=complex) for z in (z1, z2, z3))
    z1, z2 = swap(z1, z2)
    z2, z3 = swap(z2, z3)
    z1, z2 = swap(z1, z2)
    return z1, z2, z3


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def menger_curvature_array(z1, z2, z3):
    """Menger curvature ``4 * area / (product of sides)`` for complex arrays.

    Coincident points give ``nan``; collinear triples give exactly 0.
    """
    z1, z2, z3 = canonical_order(z1, z2, z3)
    d12, d23, d13 = np.abs(z1 - z2), np.abs(z2 - z3), np.abs(z1 - z3)
    cross = np.abs(_cross(z2 - z1, z3 - z1))
    diam = np.maximum(np.maximum(d12, d23), d13)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 2.0 * cross / (d12 * d23 * d13)
    c = np.where(cross <= COLLINEAR_TOL * diam * diam, 0.0, c)
    return np.where((d12 == 0) | (d23 == 0) | (d13 == 0), np.nan, c)


def line_angle_array(p, q):
    """Direction angle in ``[0, pi)`` of the line through ``p`` and ``q``."""
    d = np.asarray(q, dtype=complex) - np.asarray(p, dtype=complex)
    a = np.arctan2(d.imag, d.real)
    a = np.where(a < 0, a + np.pi, a)
    return np.where(a >= np.pi, 0.0, a)


def theta_v_array(angle):
    """Angle in ``[0, pi/2]`` between lines of the given direction and the vertical."""
    return np.abs(np.asarray(angle, dtype=float) - np.pi / 2)


def theta_v_sum_array(z1, z2, z3):
    return (
        theta_v_array(line_angle_array(z1, z2))
        + theta_v_array(line_angle_array(z2, z3))
        + theta_v_array(line_angle_array(z1, z3))
    )


def side_ratio_array(z1, z2, z3):
    """Largest over smallest side length."""
    d = np.stack([np.abs(z1 - z2), np.abs(z2 - z3), np.abs(z1 - z3)])
    return d.max(axis=0) / d.min(axis=0)


def diameter_array(z1, z2, z3):
    return np.maximum(np.maximum(np.abs(z1 - z2), np.abs(z2 - z3)), np.abs(z1 - z3))


# ---------------------------------------------------------------------------
# scalar API


def _check(t: Triple) -> Triple:
    if not isinstance(t, Triple):
        t = Triple.of(t)
    return t


def circumradius(t: Triple) -> float:
    """Radius of the circle through the three points; ``inf`` if collinear."""
    c = menger_curvature(t)
    return math.inf if c == 0.0 else 1.0 / c


def menger_curvature(t: Triple) -> float:
    t = _check(t)
    return float(menger_curvature_array(t.a, t.b, t.c))


def line_through(p, q) -> Line:
    p, q = as_point(p), as_point(q)
    if p == q:
        raise CoincidentPoints(f"cannot draw a line through {p} twice")
    return Line(float(line_angle_array(p, q)), p)


def theta_v(line: Line) -> float:
    return abs(line.angle - math.pi / 2)


def angle_between(l1: Line, l2: Line) -> float:
    """Smallest angle in ``[0, pi/2]`` between two lines."""
    d = abs(l1.angle - l2.angle)
    return min(d, math.pi - d)


def smallest_angle_at(t: Triple) -> float:
    """Angle between the lines from the first vertex to the other two."""
    t = _check(t)
    return angle_between(line_through(t.a, t.b), line_through(t.a, t.c))


def in_comparable_class(t: Triple, tau: float) -> bool:
    """True iff every ratio of two side lengths is at most ``tau``."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    t = _check(t)
    s = t.sides()
    return max(s) / min(s) <= tau


def theta_v_sum(t: Triple) -> float:
    t = _check(t)
    return float(theta_v_sum_array(t.a, t.b, t.c))


def delta_conditions(t: Triple, alpha0: float) -> tuple[bool, bool]:
    """Flags for ``sum theta_V >= alpha0`` and ``sum theta_V <= 3*pi/2 - alpha0``.

    The sum runs over the three side lines of the triangle.
    """
    if not 0 < alpha0 < math.pi / 2:
        raise ValueError("alpha0 must lie in (0, pi/2)")
    s = theta_v_sum(t)
    return s >= alpha0, s <= 1.5 * math.pi - alpha0


def dist_point_line(p, line: Line) -> float:
    p = as_point(p)
    d = line.direction
    w = p - line.anchor
    return abs(d.real * w.imag - d.imag * w.real)
