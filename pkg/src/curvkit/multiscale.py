"""Dyadic cubes on discrete measures, Jones beta numbers and packing ratios.

Cubes are half-open dyadic squares of side ``2**-j`` on a grid shifted by
a fixed offset, so each generation partitions the support and generations
nest exactly.  For a cube ``Q`` of side ``l`` the beta numbers are

    beta_q(Q) = inf_L ( (1/l) * sum_{x in window} w(x) (dist(x, L) / l)^q )^(1/q)

with the window the closed square of side ``eta1 * l`` concentric with
``Q`` (``q = inf``: the largest ``dist / l``).  Ball versions use the
window ``B(x, 2r)`` and normalise by ``r``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import EmptyMeasure, EmptyWindow, ZeroMassRoot
from .geometry import Line
from .measures import DiscreteMeasure

ANGLE_GRID = 512
ANGLE_TOL = 1e-12
PAIR_SEARCH_LIMIT = 200
DEFAULT_ETA1 = 6.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DyadicCube:
    j: int
    jx: int
    jy: int
    members: np.ndarray
    mass: float
    offset: complex = 0j

    @property
    def side(self) -> float:
        return 2.0 ** -self.j

    @property
    def centre(self) -> complex:
        s = self.side
        return complex((self.jx + 0.5) * s, (self.jy + 0.5) * s) - self.offset

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.j, self.jx, self.jy)

    def contains(self, other: "DyadicCube") -> bool:
        """Grid containment; both cubes must come from the same lattice."""
        if other.j < self.j:
            return False
        shift = other.j - self.j
        return (other.jx >> shift) == self.jx and (other.jy >> shift) == self.jy


@dataclass(frozen=True)
class BetaReport:
    q: float
    value: float
    best_line: Line
    window: dict = field(default_factory=dict)


def grid_offset(seed: Optional[int]) -> complex:
    if seed is None:
        return 0j
    u = np.random.default_rng(seed).uniform(0.0, 1.0, 2)
    return complex(u[0], u[1])


def build_lattice(mu: DiscreteMeasure, j_min: int, j_max: int,
                  offset: Optional[complex] = None, seed: Optional[int] = 0) -> list[DyadicCube]:
    """Non-empty dyadic cubes of generations ``j_min..j_max``.

    The grid is translated by ``offset``, or by a seeded uniform draw from
    ``[0, 1)^2`` when ``offset`` is None.
    """
    if mu is None or len(mu) == 0:
        raise EmptyMeasure("no atoms")
    if j_min > j_max:
        raise ValueError(f"j_min {j_min} > j_max {j_max}")
    off = complex(offset) if offset is not None else grid_offset(seed)
    q = mu.points + off
    cubes = []
    for j in range(j_min, j_max + 1):
        scale = 2.0 ** j
        ix = np.floor(q.real * scale).astype(np.int64)
        iy = np.floor(q.imag * scale).astype(np.int64)
        keys = np.stack([ix, iy], axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(uniq) + 1))
        for c, (kx, ky) in enumerate(uniq):
            members = order[bounds[c]:bounds[c + 1]]
            cubes.append(DyadicCube(j, int(kx), int(ky), members,
                                    float(mu.weights[members].sum()), off))
    return cubes


def lattice_properties(mu: DiscreteMeasure, cubes: list[DyadicCube]) -> dict:
    """Partition and nesting checks plus the spread of ``diam(Q)/l(Q)`` and ``mu(Q)/l(Q)``."""
    by_gen: dict[int, list[DyadicCube]] = {}
    for c in cubes:
        by_gen.setdefault(c.j, []).append(c)
    partition = True
    for gen in by_gen.values():
        idx = np.concatenate([c.members for c in gen])
        partition &= idx.size == len(mu) and np.unique(idx).size == len(mu)
        for c in gen:
            s = c.side
            qp = mu.points[c.members] + c.offset
            inside = ((qp.real >= c.jx * s) & (qp.real < (c.jx + 1) * s)
                      & (qp.imag >= c.jy * s) & (qp.imag < (c.jy + 1) * s))
            partition &= bool(inside.all())
    nesting = True
    gens = sorted(by_gen)
    for lo, hi in zip(gens, gens[1:]):
        parents = {c.key[1:]: set(c.members.tolist()) for c in by_gen[lo]}
        for c in by_gen[hi]:
            parent = parents.get((c.jx >> (hi - lo), c.jy >> (hi - lo)))
            nesting &= parent is not None and set(c.members.tolist()) <= parent
    diam_ratio, mass_ratio = [], []
    for c in cubes:
        pts = mu.points[c.members]
        d = float(np.abs(pts[:, None] - pts[None, :]).max()) if pts.size < 512 else math.nan
        diam_ratio.append(d / c.side)
        mass_ratio.append(c.mass / c.side)
    return {
        "partition": bool(partition),
        "nesting": bool(nesting),
        "diam_over_side": (float(np.nanmin(diam_ratio)), float(np.nanmax(diam_ratio))),
        "mass_over_side": (float(min(mass_ratio)), float(max(mass_ratio))),
    }


# ---------------------------------------------------------------------------
# line fitting


def _normal(theta):
    # unit normal of direction theta, as complex numbers
    return -np.sin(theta) + 1j * np.cos(theta)


def _project(pts, theta):
    n = _normal(theta)
    return np.real(np.conj(n)[..., None] * pts) if np.ndim(theta) else np.real(np.conj(n) * pts)


def _weighted_median(s, w):
    """Lower weighted median along the last axis."""
    order = np.argsort(s, axis=-1, kind="stable")
    ss = np.take_along_axis(s, order, axis=-1)
    cw = np.cumsum(w[order], axis=-1)
    k = np.argmax(cw >= 0.5 * cw[..., -1:], axis=-1)
    return np.take_along_axis(ss, k[..., None], axis=-1)[..., 0]


def _offset_and_cost(pts, w, theta, q):
    s = _project(pts, theta)
    if q == 1:
        off = _weighted_median(s, w)
        return off, np.sum(w * np.abs(s - off[..., None]), axis=-1)
    if q == 2:
        off = np.sum(w * s, axis=-1) / w.sum()
        return off, np.sum(w * (s - off[..., None]) ** 2, axis=-1)
    off = 0.5 * (s.max(axis=-1) + s.min(axis=-1))
    return off, 0.5 * (s.max(axis=-1) - s.min(axis=-1))


def _golden(f, lo, hi, tol=ANGLE_TOL):
    a, b = lo, hi
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def search_line(pts, w, q, grid: int = ANGLE_GRID):
    """Angle grid plus golden-section refinement; the offset is exact per angle.

    Returns ``(theta, offset, cost)`` where cost is the weighted sum of
    ``dist`` (``q = 1``), of ``dist^2`` (``q = 2``) or the largest ``dist``.
    """
    thetas = np.arange(grid) * (math.pi / grid)
    _, costs = _offset_and_cost(pts, w, thetas, q)
    i = int(np.argmin(costs))
    step = math.pi / grid
    theta, _ = _golden(lambda t: float(_offset_and_cost(pts, w, np.array([t]), q)[1][0]),
                       thetas[i] - step, thetas[i] + step)
    off, cost = _offset_and_cost(pts, w, np.array([theta]), q)
    if costs[i] < cost[0]:
        theta = thetas[i]
    theta %= math.pi
    off, cost = _offset_and_cost(pts, w, np.array([theta]), q)
    return float(theta), float(off[0]), float(cost[0])


def principal_axis(pts, w):
    """Direction of the weighted least-squares line (largest principal axis)."""
    mean = np.sum(w * pts) / w.sum()
    d = pts - mean
    sxx = np.sum(w * d.real ** 2)
    syy = np.sum(w * d.imag ** 2)
    sxy = np.sum(w * d.real * d.imag)
    return 0.5 * math.atan2(2.0 * sxy, sxx - syy)


def _candidate_angles(pts, q):
    """Exact candidate directions: pair lines for ``q = 1``, hull edges for ``q = inf``."""
    n = pts.size
    if q == 1 and n <= PAIR_SEARCH_LIMIT:
        i, j = np.triu_indices(n, 1)
        d = pts[j] - pts[i]
        return np.arctan2(d.imag, d.real)
    if q == math.inf and n >= 3:
        xy = np.column_stack([pts.real, pts.imag])
        try:
            v = xy[ConvexHull(xy).vertices]
        except QhullError:
            v = xy
        e = np.roll(v, -1, axis=0) - v
        return np.arctan2(e[:, 1], e[:, 0])
    if n == 2:
        d = pts[1] - pts[0]
        return np.array([math.atan2(d.imag, d.real)])
    return np.empty(0)


def fit_line(pts, w, q, method: str = "auto"):
    """Best line for the q-cost; returns ``(theta, offset, cost)``.

    ``method="search"`` runs only the angle search.  ``"auto"`` also tries
    exact candidates: the principal axis (closed form for ``q = 2``), all
    lines through two atoms for small ``q = 1`` windows, and hull edge
    directions for ``q = inf``; the cheapest wins.
    """
    pts = np.asarray(pts, dtype=complex)
    w = np.asarray(w, dtype=float)
    if pts.size == 1:
        return 0.0, float(_project(pts, 0.0)[0]), 0.0
    if q == 2 and method == "auto":
        # reduce first: the offset's sign depends on the normal's orientation
        theta = principal_axis(pts, w) % math.pi
        off, cost = _offset_and_cost(pts, w, np.array([theta]), 2)
        return theta, float(off[0]), float(cost[0])
    best = search_line(pts, w, q)
    if method == "search":
        return best
    cand = np.concatenate([[principal_axis(pts, w)], _candidate_angles(pts, q)]) % math.pi
    chunk = max(1, 4_000_000 // max(pts.size, 1))
    for s in range(0, cand.size, chunk):
        th = cand[s:s + chunk]
        off, cost = _offset_and_cost(pts, w, th, q)
        k = int(np.argmin(cost))
        if cost[k] < best[2]:
            best = (float(th[k]), float(off[k]), float(cost[k]))
    return best


def _beta_value(cost, q, norm):
    if q == 1:
        return cost / norm / norm
    if q == 2:
        return math.sqrt(max(cost, 0.0) / norm ** 3)
    return cost / norm


def _line(theta, off):
    return Line(theta, complex(off * _normal(theta)))


def cube_window(mu: DiscreteMeasure, cube: DyadicCube, eta1: float = DEFAULT_ETA1) -> np.ndarray:
    """Indices of atoms in the closed square of side ``eta1 * l(Q)`` around ``Q``."""
    half = 0.5 * eta1 * cube.side
    d = mu.points - cube.centre
    return np.flatnonzero((np.abs(d.real) <= half) & (np.abs(d.imag) <= half))


def _q(q) -> float:
    q = float(q)
    if q not in (1.0, 2.0, math.inf):
        raise ValueError(f"q must be 1, 2 or inf, got {q}")
    return q


def beta_cube(mu: DiscreteMeasure, cube: DyadicCube, q=1, eta1: float = DEFAULT_ETA1,
              method: str = "auto") -> BetaReport:
    q = _q(q)
    if not eta1 > 4:
        raise ValueError("eta1 must exceed 4")
    idx = cube_window(mu, cube, eta1)
    if idx.size == 0:
        raise EmptyWindow(f"no atoms in the window of cube {cube.key}")
    theta, off, cost = fit_line(mu.points[idx], mu.weights[idx], q, method)
    return BetaReport(q, _beta_value(cost, q, cube.side), _line(theta, off),
                      {"kind": "cube", "j": cube.j, "jx": cube.jx, "jy": cube.jy,
                       "eta1": eta1, "atoms": int(idx.size),
                       "mass": float(mu.weights[idx].sum())})


def beta_ball(mu: DiscreteMeasure, x, r: float, q=1, method: str = "auto") -> BetaReport:
    q = _q(q)
    if not r > 0:
        raise ValueError("radius must be positive")
    x = complex(x)
    idx = np.flatnonzero(np.abs(mu.points - x) <= 2.0 * r)
    if idx.size == 0:
        raise EmptyWindow(f"no atoms in B({x}, {2 * r})")
    theta, off, cost = fit_line(mu.points[idx], mu.weights[idx], q, method)
    return BetaReport(q, _beta_value(cost, q, r), _line(theta, off),
                      {"kind": "ball", "centre": [x.real, x.imag], "r": r,
                       "atoms": int(idx.size), "mass": float(mu.weights[idx].sum())})


@dataclass
class Classification:
    bad: list
    good: list
    records: list


def classify_cubes(mu: DiscreteMeasure, cubes: list[DyadicCube], eps: float,
                   eta1: float = DEFAULT_ETA1) -> Classification:
    """Split cubes by ``beta_1(Q) >= eps`` (bad) versus the rest (good)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    bad, good, records = [], [], []
    for c in cubes:
        b1 = beta_cube(mu, c, 1, eta1).value
        b2 = beta_cube(mu, c, 2, eta1).value
        is_bad = b1 >= eps
        (bad if is_bad else good).append(c)
        records.append({"j": c.j, "jx": c.jx, "jy": c.jy, "mass": c.mass,
                        "beta1": b1, "beta2": b2, "bad": bool(is_bad)})
    return Classification(bad, good, records)


def packing_ratio(mu: DiscreteMeasure, family: list[DyadicCube], root: DyadicCube) -> float:
    """``sum of mu(Q) over Q in family inside root``, divided by ``mu(root)``."""
    if not root.mass > 0:
        raise ZeroMassRoot(f"cube {root.key} carries no mass")
    total = [c.mass for c in family if root.contains(c)]
    return float(math.fsum(total)) / root.mass


def records_to_json(records: list[dict]) -> str:
    return json.dumps(records, indent=1)
