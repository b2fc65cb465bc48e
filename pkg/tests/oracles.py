"""Independent reference computations used to freeze expected values.

Everything here is written from the definitions, with exact rationals or
brute-force enumeration, and shares no code with the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def frac_point(z):
    z = complex(z)
    return Fraction(z.real), Fraction(z.imag)


def kappa_frac(m, x, y):
    """``x^(2m-1) / (x^2 + y^2)^m`` exactly."""
    return x ** (2 * m - 1) / (x * x + y * y) ** m


def perm_frac(kernel, z1, z2, z3):
    """``K(z1-z2)K(z1-z3) + K(z2-z1)K(z2-z3) + K(z3-z1)K(z3-z2)`` with a rational kernel."""
    p = [frac_point(z) for z in (z1, z2, z3)]

    def k(i, j):
        return kernel(p[i][0] - p[j][0], p[i][1] - p[j][1])

    return k(0, 1) * k(0, 2) + k(1, 0) * k(1, 2) + k(2, 0) * k(2, 1)


def kappa_perm(m, z1, z2, z3):
    return perm_frac(lambda x, y: kappa_frac(m, x, y), z1, z2, z3)


def combo_perm(n, N, t, z1, z2, z3):
    t = Fraction(t)
    return perm_frac(lambda x, y: kappa_frac(N, x, y) + t * kappa_frac(n, x, y), z1, z2, z3)


def curvature_sq_frac(z1, z2, z3):
    """``c^2 = 4 cross^2 / (|a|^2 |b|^2 |c|^2)`` from ``c = 4 Area / (|a||b||c|)``."""
    (x1, y1), (x2, y2), (x3, y3) = (frac_point(z) for z in (z1, z2, z3))
    cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
    d12 = (x1 - x2) ** 2 + (y1 - y2) ** 2
    d13 = (x1 - x3) ** 2 + (y1 - y3) ** 2
    d23 = (x2 - x3) ** 2 + (y2 - y3) ** 2
    return 4 * cross * cross / (d12 * d13 * d23)


def circumradius_heron(z1, z2, z3):
    a, b, c = abs(z1 - z2), abs(z2 - z3), abs(z1 - z3)
    s = (a + b + c) / 2
    area_sq = s * (s - a) * (s - b) * (s - c)
    if area_sq <= 0:
        return math.inf
    return a * b * c / (4 * math.sqrt(area_sq))


def triple_sum_loops(kernel, points, weights, eps, cauchy=False):
    """Sum over ordered triples of distinct atoms with all gaps ``>= eps``."""
    total = 0.0
    n = len(points)
    for i, j, k in itertools.permutations(range(n), 3):
        zi, zj, zk = points[i], points[j], points[k]
        if min(abs(zi - zj), abs(zi - zk), abs(zj - zk)) < eps:
            continue
        if cauchy:
            val = float(curvature_sq_frac(zi, zj, zk))
        else:
            val = (kernel(zi - zj) * kernel(zi - zk) + kernel(zj - zi) * kernel(zj - zk)
                   + kernel(zk - zi) * kernel(zk - zj))
        total += val * weights[i] * weights[j] * weights[k]
    return total


def t1_norm_loops(kernel, points, weights, eps):
    total = 0.0
    for i, z in enumerate(points):
        s = sum(kernel(z - y) * w for y, w in zip(points, weights) if abs(z - y) >= eps)
        total += abs(s) ** 2 * weights[i]
    return total


def kappa_float(m):
    return lambda z: z.real ** (2 * m - 1) / abs(z) ** (2 * m)


def l1_line_pairs(pts, w):
    """Best weighted L1 line: the optimum passes through two of the points."""
    best = math.inf
    for i, j in itertools.combinations(range(len(pts)), 2):
        d = pts[j] - pts[i]
        nrm = np.array([-d[1], d[0]]) / math.hypot(*d)
        best = min(best, float(np.sum(w * np.abs((pts - pts[i]) @ nrm))))
    return best


def l2_line_eig(pts, w):
    """Best weighted L2 line cost: smallest eigenvalue of the weighted scatter."""
    c = (w[:, None] * pts).sum(axis=0) / w.sum()
    d = pts - c
    scatter = (w[:, None, None] * d[:, :, None] * d[:, None, :]).sum(axis=0)
    return float(np.linalg.eigvalsh(scatter)[0])


def lp_line_grid(pts, w, q, grid=20000):
    """Dense angle grid; offset by brute force over projected candidates."""
    best = math.inf
    for th in np.linspace(0, math.pi, grid, endpoint=False):
        nrm = np.array([-math.sin(th), math.cos(th)])
        s = pts @ nrm
        if q == 2:
            off = float(np.sum(w * s) / np.sum(w))
            best = min(best, float(np.sum(w * (s - off) ** 2)))
        else:
            # cost at every candidate offset s_k from prefix sums of the sorted projections
            order = np.argsort(s)
            ss, ww = s[order], w[order]
            cw, cws = np.cumsum(ww), np.cumsum(ww * ss)
            cost = ss * cw - cws + (cws[-1] - cws) - ss * (cw[-1] - cw)
            best = min(best, float(cost.min()))
    return best


def ball_masses(points, weights, centre, radii):
    d = np.abs(points - centre)
    return np.array([weights[d <= r].sum() for r in radii])
