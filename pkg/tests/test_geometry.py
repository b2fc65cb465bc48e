import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvkit.errors import CoincidentPoints, InvalidTriple
from curvkit.geometry import (
    HORIZONTAL,
    VERTICAL,
    Line,
    Triple,
    canonical_order,
    circumradius,
    delta_conditions,
    dist_point_line,
    in_comparable_class,
    line_through,
    menger_curvature,
    menger_curvature_array,
    smallest_angle_at,
    theta_v,
    theta_v_sum,
)
from oracles import circumradius_heron, curvature_sq_frac
from strategies import fat_triples, points, triples

EQUILATERAL = Triple(0, 1, complex(0.5, math.sqrt(3) / 2))


class TestTriple:
    def test_coincident_rejected(self):
        with pytest.raises(InvalidTriple):
            Triple(0, 1, 0)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidTriple):
            Triple(0, 1, complex(math.nan, 0))

    def test_of_accepts_six_floats(self):
        assert Triple.of(0, 0, -1, 1, 1, 1) == Triple(0, -1 + 1j, 1 + 1j)

    def test_of_accepts_pairs(self):
        assert Triple.of((0, 0), (1, 0), (0, 1)).points == (0j, 1 + 0j, 1j)


class TestCircumradius:
    def test_collinear_is_infinite(self):
        assert circumradius(Triple(0, 1, 2)) == math.inf

    def test_right_angle(self):
        assert circumradius(Triple(0, 1, 1j)) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)

    def test_equilateral(self):
        assert circumradius(EQUILATERAL) == pytest.approx(1 / math.sqrt(3), rel=1e-14)

    @given(fat_triples())
    def test_matches_heron(self, t):
        assert circumradius(t) == pytest.approx(circumradius_heron(*t.points), rel=1e-7)


class TestCurvature:
    def test_collinear_zero(self):
        assert menger_curvature(Triple(0, 1, 2)) == 0.0

    def test_right_angle(self):
        assert menger_curvature(Triple(0, 1, 1j)) == pytest.approx(math.sqrt(2), rel=1e-15)

    @given(triples(), st.floats(min_value=1e-3, max_value=1e3))
    def test_homogeneity(self, t, lam):
        assert menger_curvature(t.scaled(lam)) == pytest.approx(menger_curvature(t) / lam, rel=1e-9, abs=1e-300)

    @given(triples(), points)
    def test_translation_invariance(self, t, w):
        c = menger_curvature(t)
        assert menger_curvature(t.translated(w)) == pytest.approx(c, rel=1e-6, abs=1e-9 / t.diameter())

    @given(triples())
    def test_order_invariance_is_exact(self, t):
        a, b, c = t.points
        vals = {menger_curvature(Triple(*p)) for p in [(a, b, c), (b, c, a), (c, a, b), (b, a, c), (a, c, b), (c, b, a)]}
        assert len(vals) == 1

    @given(fat_triples())
    def test_matches_exact_rational(self, t):
        assert menger_curvature(t) ** 2 == pytest.approx(float(curvature_sq_frac(*t.points)), rel=1e-9)

    def test_array_coincident_is_nan(self):
        v = menger_curvature_array(np.array([0j]), np.array([0j]), np.array([1j]))
        assert np.isnan(v[0])

    def test_canonical_order_sorts(self):
        z = canonical_order(np.array([1j]), np.array([0j]), np.array([-1 + 5j]))
        assert [complex(x[0]) for x in z] == [-1 + 5j, 0j, 1j]


class TestLines:
    @pytest.mark.parametrize("q, angle", [(1, 0.0), (1j, math.pi / 2), (1 + 1j, math.pi / 4)])
    def test_line_angle(self, q, angle):
        assert line_through(0, q).angle == pytest.approx(angle, abs=1e-15)

    def test_angle_normalized(self):
        assert line_through(0, -1).angle == 0.0
        assert Line(math.pi).angle == 0.0
        assert Line(-math.pi / 4).angle == pytest.approx(3 * math.pi / 4)

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            line_through(1j, 1j)

    def test_theta_v(self):
        assert theta_v(VERTICAL) == 0.0
        assert theta_v(HORIZONTAL) == pytest.approx(math.pi / 2)
        assert theta_v(Line(math.pi / 4)) == pytest.approx(math.pi / 4)

    @given(st.floats(min_value=-10, max_value=10))
    def test_theta_v_range(self, a):
        assert 0 <= theta_v(Line(a)) <= math.pi / 2

    def test_dist_point_line(self):
        assert dist_point_line(3, HORIZONTAL) == 0.0
        assert dist_point_line(1j, HORIZONTAL) == 1.0
        assert dist_point_line(1 + 2j, VERTICAL) == pytest.approx(1.0)


class TestAngles:
    @pytest.mark.parametrize("t, angle", [
        (Triple(0, 1, 2), 0.0),
        (Triple(0, 1, 1j), math.pi / 2),
        (Triple(0, 1, 1 + 1j), math.pi / 4),
    ])
    def test_smallest_angle_at(self, t, angle):
        assert smallest_angle_at(t) == pytest.approx(angle, abs=1e-15)

    def test_comparable_class(self):
        assert in_comparable_class(EQUILATERAL, 1 + 1e-12)
        assert not in_comparable_class(Triple(0, 1, 10), 2)

    @given(triples())
    def test_comparable_boundary_inclusive(self, t):
        s = t.sides()
        assert in_comparable_class(t, max(s) / min(s))

    def test_tau_below_one(self):
        with pytest.raises(ValueError):
            in_comparable_class(EQUILATERAL, 0.5)

    def test_delta_near_vertical(self):
        t = Triple(0, 1e-3 + 1j, -1e-3 + 2j)
        assert delta_conditions(t, math.pi / 8) == (False, True)

    def test_delta_near_horizontal(self):
        t = Triple(0, 1 + 1e-3j, 2 - 1e-3j)
        assert delta_conditions(t, math.pi / 8) == (True, False)

    def test_delta_right_triangle(self):
        t = Triple(0, 1, 1 + 1j)
        assert theta_v_sum(t) == pytest.approx(3 * math.pi / 4)
        assert delta_conditions(t, math.pi / 8) == (True, True)

    @pytest.mark.parametrize("alpha0", [0.0, math.pi / 2, -1.0])
    def test_delta_alpha_range(self, alpha0):
        with pytest.raises(ValueError):
            delta_conditions(EQUILATERAL, alpha0)
