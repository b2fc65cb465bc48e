"""Permutations of real kernels over triples and the inequalities between them.

For a real kernel ``K`` the permutation of a triple is

    p_K(z1, z2, z3) = K(z1-z2) K(z1-z3) + K(z2-z1) K(z2-z3) + K(z3-z1) K(z3-z2)

and for ``1/z`` the six-term sum over all orderings equals the squared
Menger curvature.  Besides the floating point evaluations this module keeps
an exact path (``h_term``/``g_poly`` over ``fractions.Fraction``) so the
polynomial identity behind ``p_kappa2 <= 2 p_kappa1`` can be certified
rather than sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations as _orderings
from math import comb
from typing import NamedTuple, Optional

import numpy as np

from .errors import BadPair, InvalidTriple, WrongVariant
from .geometry import (
    Triple,
    canonical_order,
    diameter_array,
    menger_curvature,
    side_ratio_array,
    theta_v_sum_array,
)
from .kernels import Cauchy, Combo, Kappa, KernelSpec, real_kernel_array

IMAG_RESIDUE_TOL = 1e-10


# ---------------------------------------------------------------------------
# floating point evaluation


def permutation_array(spec: KernelSpec, z1, z2, z3):
    """``p_K`` over broadcast complex arrays (real kernels only)."""
    if isinstance(spec, Cauchy):
        raise WrongVariant("use cauchy_permutation_array for the Cauchy kernel")
    z1, z2, z3 = canonical_order(z1, z2, z3)
    k12 = real_kernel_array(spec, z1 - z2)
    k13 = real_kernel_array(spec, z1 - z3)
    k23 = real_kernel_array(spec, z2 - z3)
    # antisymmetry is exact, so K(z2-z1) = -k12 etc.
    return k12 * k13 - k12 * k23 + k13 * k23


def frac_pair(z) -> tuple[Fraction, Fraction]:
    z = complex(z)
    return Fraction(z.real), Fraction(z.imag)


def _kappa_exact(m: int, x: Fraction, y: Fraction) -> Fraction:
    return x ** (2 * m - 1) / (x * x + y * y) ** m


def _kernel_exact(spec: KernelSpec, x: Fraction, y: Fraction) -> Fraction:
    if isinstance(spec, Kappa):
        return _kappa_exact(spec.m, x, y)
    if isinstance(spec, Combo):
        return _kappa_exact(spec.N, x, y) + Fraction(spec.t) * _kappa_exact(spec.n, x, y)
    raise WrongVariant("exact evaluation needs a real kernel")


def permutation_exact(spec: KernelSpec, z1, z2, z3) -> Fraction:
    """``p_K`` of the triple of binary floats, in exact rational arithmetic."""
    pts = [frac_pair(z) for z in (z1, z2, z3)]
    if len(set(pts)) < 3:
        raise InvalidTriple("coincident points")
    (x1, y1), (x2, y2), (x3, y3) = pts
    k12 = _kernel_exact(spec, x1 - x2, y1 - y2)
    k13 = _kernel_exact(spec, x1 - x3, y1 - y3)
    k23 = _kernel_exact(spec, x2 - x3, y2 - y3)
    return k12 * k13 - k12 * k23 + k13 * k23


def permutation_array_accurate(spec: KernelSpec, z1, z2, z3, rel: float = 1e-6):
    """Like :func:`permutation_array` but correctly rounded where it matters.

    Entries whose value is below ``rel`` times the sum of the absolute
    terms (cancellation, typically near-collinear triples) are recomputed
    exactly with :func:`permutation_exact`.
    """
    shape = np.broadcast(z1, z2, z3).shape
    z1, z2, z3 = (np.atleast_1d(z) for z in np.broadcast_arrays(*canonical_order(z1, z2, z3)))
    k12 = real_kernel_array(spec, z1 - z2)
    k13 = real_kernel_array(spec, z1 - z3)
    k23 = real_kernel_array(spec, z2 - z3)
    p = k12 * k13 - k12 * k23 + k13 * k23
    size = np.abs(k12 * k13) + np.abs(k12 * k23) + np.abs(k13 * k23)
    bad = np.abs(p) <= rel * size
    if np.any(bad):
        p = np.array(p, dtype=float, copy=True)
        for i in zip(*np.nonzero(bad)):
            if size[i] == 0 or np.isnan(size[i]):
                continue
            p[i] = float(permutation_exact(spec, z1[i], z2[i], z3[i]))
    return p.reshape(shape)


def cauchy_permutation_array(z1, z2, z3, check: bool = True):
    """Six-term sum of ``1 / ((z_s2 - z_s1) * conj(z_s3 - z_s1))``, real part.

    The imaginary part vanishes analytically; with ``check`` it is compared
    against ``1e-10`` times the larger of ``diam**-2`` and the term size.
    """
    z = canonical_order(z1, z2, z3)
    total = 0j
    size = 0.0
    for s1, s2, s3 in _orderings(range(3)):
        term = 1.0 / ((z[s2] - z[s1]) * np.conj(z[s3] - z[s1]))
        total = total + term
        size = np.maximum(size, np.abs(term))
    if check:
        diam = diameter_array(*z)
        bound = IMAG_RESIDUE_TOL * np.maximum(diam ** -2.0, size)
        if np.any(np.abs(np.imag(total)) > bound):
            raise ArithmeticError("imaginary residue of the curvature sum too large")
    return np.real(total)


def _triple(t) -> Triple:
    return t if isinstance(t, Triple) else Triple.of(t)


def permutation(spec: KernelSpec, t: Triple) -> float:
    t = _triple(t)
    return float(permutation_array(spec, t.a, t.b, t.c))


def cauchy_permutation(t: Triple) -> float:
    t = _triple(t)
    return float(cauchy_permutation_array(t.a, t.b, t.c))


def sharp_upper_gap_array(z1, z2, z3):
    return 2.0 * permutation_array(Kappa(1), z1, z2, z3) - permutation_array(Kappa(2), z1, z2, z3)


def sharp_upper_gap(t: Triple) -> float:
    """``2 p_kappa1 - p_kappa2``, never negative beyond rounding."""
    t = _triple(t)
    return float(sharp_upper_gap_array(t.a, t.b, t.c))


def horizontality_array(z1, z2, z3):
    """Product over the three sides of ``Re(side) / |side|``."""
    out = 1.0
    for d in (z1 - z2, z1 - z3, z2 - z3):
        out = out * (np.real(d) / np.abs(d))
    return out


def sharp_lower_gap_array(z1, z2, z3):
    m = horizontality_array(*canonical_order(z1, z2, z3))
    return permutation_array(Kappa(2), z1, z2, z3) - 2.0 * m * m * permutation_array(Kappa(1), z1, z2, z3)


def sharp_lower_gap(t: Triple) -> float:
    """``p_kappa2 - 2 M^2 p_kappa1`` with ``M`` the horizontality product."""
    t = _triple(t)
    return float(sharp_lower_gap_array(t.a, t.b, t.c))


# ---------------------------------------------------------------------------
# the representation of p_kappa_m(0, u, v) and the exact path


def _xy(p):
    if isinstance(p, (tuple, list)):
        return p[0], p[1]
    p = complex(p)
    return p.real, p.imag


def _h_parts(k: int, u, v):
    x, y = _xy(u)
    a, b = _xy(v)
    odd, even = 2 * k - 1, 2 * k
    return ((a * x) ** odd * (y - b) ** even, (x * (x - a)) ** odd * b ** even,
            (a * (a - x)) ** odd * y ** even)


def h_term(k: int, u, v):
    """``(ax)^(2k-1)(y-b)^(2k) + (x(x-a))^(2k-1) b^(2k) + (a(a-x))^(2k-1) y^(2k)``.

    ``u = (x, y)`` and ``v = (a, b)`` may be complex numbers or pairs; pairs
    of ``Fraction`` keep the arithmetic exact.
    """
    return sum(_h_parts(k, u, v))


def representation_value(m: int, u, v, rel: float = 1e-6) -> float:
    """``p_kappa_m(0, u, v)`` through its sum of non-negative ``h_k`` terms.

    The parts of each ``h_k`` can have either sign; when the float sum is
    below ``rel`` times the sum of their magnitudes it is redone exactly.
    """
    u, v = complex(u), complex(v)
    if u == 0 or v == 0 or u == v:
        raise InvalidTriple("0, u, v must be pairwise distinct")
    x, a = u.real, v.real
    den = (abs(u) ** 2 * abs(v) ** 2 * abs(u - v) ** 2) ** m
    pref = (a * x * (x - a)) ** 2
    total = size = 0.0
    for k in range(1, m + 1):
        parts = _h_parts(k, u, v)
        c = comb(m, k) * pref ** (m - k)
        total += c * sum(parts)
        size += c * sum(abs(q) for q in parts)
    if abs(total) > rel * size:
        return total / den
    fu, fv = frac_pair(u), frac_pair(v)
    fx, fa = fu[0], fv[0]
    fpref = (fa * fx * (fx - fa)) ** 2
    exact = sum(comb(m, k) * fpref ** (m - k) * h_term(k, fu, fv) for k in range(1, m + 1))
    fden = ((fu[0] ** 2 + fu[1] ** 2) * (fv[0] ** 2 + fv[1] ** 2)
            * ((fu[0] - fv[0]) ** 2 + (fu[1] - fv[1]) ** 2)) ** m
    return float(exact / fden)


def g_poly(x, y, a, b):
    """The polynomial whose sign decides ``2 p_kappa1 >= p_kappa2``.

    ``2 (x^2 a^2 (y-b)^2 + (x^2 b^2 + a^2 y^2)(x-a)^2) h_1 - h_2`` with
    ``u = (x, y)``, ``v = (a, b)``.  Pass ``Fraction`` for exact results.
    """
    u, v = (x, y), (a, b)
    bracket = x * x * a * a * (y - b) ** 2 + (x * x * b * b + a * a * y * y) * (x - a) ** 2
    return 2 * bracket * h_term(1, u, v) - h_term(2, u, v)


def g_poly_factored(x, y, a, b):
    """Closed factorisation of :func:`g_poly`, casewise in ``a`` and ``b``."""
    if a == 0:
        return x ** 6 * b ** 4
    if b == 0:
        return a ** 4 * y ** 4 * (x * x - a * x + a * a)
    alpha, beta = Fraction(x) / Fraction(a), Fraction(y) / Fraction(b)
    return Fraction(a) ** 6 * Fraction(b) ** 4 * ((alpha - Fraction(1, 2)) ** 2 + Fraction(3, 4)) * (alpha - beta) ** 4


def gamma_family_value(m: int, gamma: float) -> float:
    """Closed form of ``p_kappa_m(0, -gamma + i, gamma + i)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g2 = gamma * gamma
    s = g2 + 1.0
    return g2 ** (m - 1) * (s ** m - g2 ** m) / s ** (2 * m)


def gamma_family_ratio(n: int, N: int, gamma: float) -> float:
    """``p_kappa_N / p_kappa_n`` on the gamma family.

    With ``x = gamma^2 / (gamma^2 + 1)`` one has
    ``p_kappa_m = x^(m-1) (1 - x^m) / (gamma^2 + 1)``, so the ratio is
    ``x^(N-n) * sum_{j<N} x^j / sum_{j<n} x^j``; the geometric sums avoid
    the cancellation in ``1 - x^m`` for large gamma.
    """
    _check_pair(n, N)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g2 = gamma * gamma
    x = g2 / (g2 + 1.0)
    return x ** (N - n) * sum(x ** j for j in range(N)) / sum(x ** j for j in range(n))


# ---------------------------------------------------------------------------
# parameter regions


class Interval(NamedTuple):
    """Open interval ``(lo, hi)``."""

    lo: float
    hi: float

    def __contains__(self, t) -> bool:
        return self.lo < t < self.hi


@dataclass(frozen=True)
class TRegion:
    """``{0} u R \\ (excluded_lo, excluded_hi)``: values of t with non-negative permutations."""

    n: int
    N: int
    excluded_lo: float
    excluded_hi: float
    sigma: Optional[float] = None
    includes_zero: bool = True

    def __contains__(self, t) -> bool:
        if self.includes_zero and t == 0:
            return True
        return not (self.excluded_lo < t < self.excluded_hi)

    @property
    def excluded(self) -> Interval:
        return Interval(self.excluded_lo, self.excluded_hi)


def _check_pair(n: int, N: int):
    if n < 1 or N < 1 or int(n) != n or int(N) != N:
        raise BadPair(f"orders must be positive integers, got ({n}, {N})")
    if n > N:
        raise BadPair(f"need n <= N, got ({n}, {N})")


def sigma(n: int, N: int) -> float:
    """``3 + (N/n - 2) sqrt(N - 2n)``, defined for ``N >= 2n``."""
    _check_pair(n, N)
    if N < 2 * n:
        raise BadPair(f"sigma needs N >= 2n, got ({n}, {N})")
    return 3.0 + (N / n - 2.0) * math.sqrt(N - 2 * n)


def omega_region(n: int, N: int) -> Interval:
    """The interval ``(-N/n, 0)`` on which the permutations of ``kappa_N + t kappa_n`` change sign."""
    _check_pair(n, N)
    return Interval(-N / n, 0.0)


def omega_big_region(n: int, N: int) -> TRegion:
    """Values of ``t`` for which ``kappa_N + t kappa_n`` has non-negative permutations.

    ``n == N`` is routed through the ``N <= 2n`` formula.
    """
    _check_pair(n, N)
    q = N / n
    if N <= 2 * n:
        return TRegion(n, N, -0.5 * (3.0 + math.sqrt(9.0 - 4.0 * q)), 2.0 - q,
                       sigma=sigma(n, N) if N == 2 * n else None)
    s = sigma(n, N)
    return TRegion(n, N, -0.5 * (s + math.sqrt(s * s - 4.0 * q)), s - 3.0, sigma=s)


def endpoint_ts(n: int, N: int) -> list[tuple[str, float]]:
    """Boundary values of the excluded interval, labelled by branch.

    ``upper``/``lower`` come from the ``n < N <= 2n`` formula and
    ``upper_sigma``/``lower_sigma`` from the ``N >= 2n`` one; at ``N = 2n``
    all four are returned and coincide pairwise.
    """
    _check_pair(n, N)
    q = N / n
    out = []
    if N <= 2 * n:
        out.append(("upper", 2.0 - q))
        out.append(("lower", -0.5 * (3.0 + math.sqrt(9.0 - 4.0 * q))))
    if N >= 2 * n:
        s = sigma(n, N)
        out.append(("upper_sigma", s - 3.0))
        out.append(("lower_sigma", -0.5 * (s + math.sqrt(s * s - 4.0 * q))))
    return out


def default_clause(spec: KernelSpec) -> str:
    """``"ii"`` (both angle conditions) for lower endpoints, ``"i"`` otherwise."""
    if isinstance(spec, Combo):
        for label, t in endpoint_ts(spec.n, spec.N):
            if label.startswith("lower") and math.isclose(spec.t, t, rel_tol=1e-12, abs_tol=1e-12):
                return "ii"
    return "i"


def admissible_array(z1, z2, z3, alpha0: float, tau: float, clause: str):
    """Mask of triples with comparable sides and the clause's angle conditions."""
    if clause not in ("i", "ii"):
        raise ValueError(f"clause must be 'i' or 'ii', got {clause!r}")
    ok = side_ratio_array(z1, z2, z3) <= tau
    s = theta_v_sum_array(z1, z2, z3)
    ok &= s >= alpha0
    if clause == "ii":
        ok &= s <= 1.5 * math.pi - alpha0
    return ok


def constrained_ratio(spec: KernelSpec, t: Triple, alpha0: float, tau: float,
                      clause: Optional[str] = None) -> Optional[float]:
    """``p_K(t) / c(t)^2`` for admissible triples, ``None`` when rejected.

    A triple is rejected if its sides are not ``tau``-comparable, if it
    fails the angle conditions of ``clause`` (default from
    :func:`default_clause`), or if it is collinear.
    """
    if not 0 < alpha0 < math.pi / 2:
        raise ValueError("alpha0 must lie in (0, pi/2)")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    t = _triple(t)
    clause = clause or default_clause(spec)
    if not bool(admissible_array(t.a, t.b, t.c, alpha0, tau, clause)):
        return None
    c = menger_curvature(t)
    if c == 0.0:
        return None
    return permutation(spec, t) / (c * c)
