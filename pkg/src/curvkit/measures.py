"""Finite weighted point sets standing in for planar measures.

All ball evaluations use closed balls ``|y - z| <= r``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import (
    BadCount,
    DegenerateSupport,
    DuplicatePoint,
    EmptyInput,
    LevelTooLarge,
    NonpositiveWeight,
)

MAX_CANTOR_LEVEL = 10
RADIUS_RATIO = 2.0 ** 0.25


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``points[i]`` (complex) carrying mass ``weights[i] > 0``."""

    points: np.ndarray
    weights: np.ndarray
    total_mass: float = field(init=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=complex).reshape(-1)
        w = np.ascontiguousarray(self.weights, dtype=float).reshape(-1)
        if pts.size == 0:
            raise EmptyInput("a measure needs at least one atom")
        if pts.shape != w.shape:
            raise ValueError(f"{pts.size} points but {w.size} weights")
        if not (np.all(np.isfinite(pts.real)) and np.all(np.isfinite(pts.imag))):
            raise ValueError("non-finite atom")
        if not np.all(w > 0):
            raise NonpositiveWeight(f"weight {w[~(w > 0)][0]} is not positive")
        if np.unique(pts).size != pts.size:
            raise DuplicatePoint("atoms must be distinct")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total_mass", float(np.sum(w)))

    def __len__(self) -> int:
        return self.points.size

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.points.real, self.points.imag])

    def tree(self) -> cKDTree:
        return cKDTree(self.xy)

    def min_gap(self) -> float:
        """Smallest distance between two distinct atoms (``inf`` for one atom)."""
        if len(self) < 2:
            return math.inf
        d, _ = self.tree().query(self.xy, k=2)
        return float(d[:, 1].min())

    def diameter(self) -> float:
        xy = self.xy
        if len(self) > 64:
            try:
                xy = xy[ConvexHull(xy).vertices]
            except QhullError:
                # collinear support: extreme points along the principal axis
                centred = xy - xy.mean(axis=0)
                axis = np.linalg.svd(centred, full_matrices=False)[2][0]
                proj = centred @ axis
                xy = xy[[int(proj.argmin()), int(proj.argmax())]]
        z = xy[:, 0] + 1j * xy[:, 1]
        return float(np.abs(z[:, None] - z[None, :]).max())

    def ball_mass(self, z: complex, r: float) -> float:
        return float(self.weights[np.abs(self.points - complex(z)) <= r].sum())

    def restrict_to_disc(self, z: complex, r: float) -> "DiscreteMeasure":
        keep = np.abs(self.points - complex(z)) <= r
        return DiscreteMeasure(self.points[keep], self.weights[keep])

    def to_rows(self) -> list[tuple[float, float, float]]:
        return [(p.real, p.imag, w) for p, w in zip(self.points.tolist(), self.weights.tolist())]


def from_csv(rows: Iterable) -> DiscreteMeasure:
    """Measure from ``(re, im, weight)`` rows."""
    rows = [tuple(float(v) for v in r) for r in rows]
    if not rows:
        raise EmptyInput("no atoms given")
    for r in rows:
        if len(r) != 3:
            raise ValueError(f"expected re,im,weight, got {r}")
        if not r[2] > 0:
            raise NonpositiveWeight(f"atom {r[:2]} has weight {r[2]}")
    arr = np.array(rows)
    return DiscreteMeasure(arr[:, 0] + 1j * arr[:, 1], arr[:, 2])


def read_csv(path) -> DiscreteMeasure:
    """Read ``re,im,weight`` lines; blank lines and ``#`` lines are skipped."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
                continue
            rows.append(rec)
    return from_csv(rows)


def write_csv(mu: DiscreteMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# re,im,weight\n")
        csv.writer(fh).writerows((repr(a), repr(b), repr(c)) for a, b, c in mu.to_rows())


def gen_segment(count: int) -> DiscreteMeasure:
    """``count`` equally spaced atoms on ``[0, 1]``, each of mass ``1/count``."""
    if count < 2:
        raise BadCount(f"need count >= 2, got {count}")
    return DiscreteMeasure(np.linspace(0.0, 1.0, count) + 0j, np.full(count, 1.0 / count))


def gen_lipschitz_graph(count: int, slope: float, seed: int) -> DiscreteMeasure:
    """Atoms on the graph of a random piecewise linear function over ``[0, 1]``.

    Consecutive atoms are joined with slopes drawn uniformly in
    ``[-slope, slope]``, so every secant slope is bounded by ``slope``.  Each
    atom gets the mean length of its adjacent pieces (the single adjacent
    piece at the ends), rescaled so the total mass is the graph's arc length.
    With ``slope = 0`` this is exactly :func:`gen_segment`.
    """
    if count < 2:
        raise BadCount(f"need count >= 2, got {count}")
    if slope < 0:
        raise ValueError("slope must be non-negative")
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, count)
    slopes = rng.uniform(-slope, slope, count - 1)
    y = np.concatenate([[0.0], np.cumsum(slopes * np.diff(x))])
    pieces = np.hypot(np.diff(x), np.diff(y))
    local = np.empty(count)
    local[0], local[-1] = pieces[0], pieces[-1]
    local[1:-1] = 0.5 * (pieces[:-1] + pieces[1:])
    weights = local / local.sum() * pieces.sum()
    if slope == 0:
        weights = np.full(count, 1.0 / count)
    return DiscreteMeasure(x + 1j * y, weights)


def gen_four_corner_cantor(level: int) -> DiscreteMeasure:
    """Centres of the ``4**level`` squares of the corner quarter Cantor construction.

    Each generation keeps the four corner squares of side ``1/4`` of every
    square; atoms carry mass ``4**-level``.
    """
    if level < 0:
        raise BadCount(f"level must be >= 0, got {level}")
    if level > MAX_CANTOR_LEVEL:
        raise LevelTooLarge(f"level {level} exceeds {MAX_CANTOR_LEVEL}")
    corners = np.zeros(1, dtype=complex)  # lower-left corners
    side = 1.0
    for _ in range(level):
        side /= 4.0
        offsets = np.array([0.0, 3 * side, 3j * side, 3 * side + 3j * side])
        corners = (corners[:, None] + offsets[None, :]).reshape(-1)
    centres = corners + 0.5 * side * (1 + 1j)
    return DiscreteMeasure(centres, np.full(centres.size, 4.0 ** -level))


def parse_generator(desc: str) -> DiscreteMeasure:
    """``segment:COUNT``, ``cantor4:LEVEL`` or ``lip:COUNT:SLOPE:SEED``."""
    parts = desc.split(":")
    try:
        if parts[0] == "segment" and len(parts) == 2:
            return gen_segment(int(parts[1]))
        if parts[0] == "cantor4" and len(parts) == 2:
            return gen_four_corner_cantor(int(parts[1]))
        if parts[0] == "lip" and len(parts) == 4:
            return gen_lipschitz_graph(int(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError as exc:
        if isinstance(exc, (BadCount, LevelTooLarge)):
            raise
        raise BadCount(f"malformed generator {desc!r}: {exc}") from None
    raise BadCount(f"unknown generator {desc!r}")


GENERATOR_PREFIXES = ("segment:", "cantor4:", "lip:")


def load_measure(source: str) -> DiscreteMeasure:
    """Generator descriptor or path to a CSV atom file."""
    if source.startswith(GENERATOR_PREFIXES):
        return parse_generator(source)
    return read_csv(Path(source))


@dataclass(frozen=True)
class RegularityReport:
    growth_constant: float
    ad_lower: float
    ad_upper: float
    probe_count: int
    r_min: float
    r_max: float
    # the admissible radius range collapsed to a single radius
    flagged: bool = False


def radius_grid(mu: DiscreteMeasure) -> np.ndarray:
    """Geometric radii with ratio ``2**(1/4)`` from twice the minimum gap to the diameter."""
    lo, hi = 2.0 * mu.min_gap(), mu.diameter()
    if lo >= hi:
        return np.array([hi])
    k = int(math.floor(math.log(hi / lo) / math.log(RADIUS_RATIO) + 1e-12))
    return lo * RADIUS_RATIO ** np.arange(k + 1)


def regularity(mu: DiscreteMeasure, probes: int = 1000, seed: int = 0) -> RegularityReport:
    """Probe ``mu(B(z, r)) / r`` at seeded support points and grid radii."""
    if probes < 1:
        raise ValueError("probes must be >= 1")
    if len(mu) < 2:
        raise DegenerateSupport("regularity needs at least two atoms")
    rng = np.random.default_rng(seed)
    radii = radius_grid(mu)
    idx = rng.integers(0, len(mu), probes)
    r = radii[rng.integers(0, radii.size, probes)]
    tree = mu.tree()
    # pad the kd-tree radius, then apply the exact closed-ball test
    hits = tree.query_ball_point(mu.xy[idx], r * (1 + 1e-9))
    mass = np.empty(probes)
    for i, h in enumerate(hits):
        h = np.asarray(h, dtype=int)
        mass[i] = mu.weights[h[np.abs(mu.points[h] - mu.points[idx[i]]) <= r[i]]].sum()
    ratio = mass / r
    return RegularityReport(
        growth_constant=float(ratio.max()),
        ad_lower=float(ratio.min()),
        ad_upper=float(ratio.max()),
        probe_count=probes,
        r_min=float(radii[0]),
        r_max=float(radii[-1]),
        flagged=radii.size == 1,
    )
