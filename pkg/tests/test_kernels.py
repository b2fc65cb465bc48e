import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from curvkit.errors import BadPair, WrongVariant, ZeroArgument
from curvkit.kernels import (
    Cauchy,
    Combo,
    Kappa,
    cz_size_ratio,
    eval_cauchy,
    eval_real,
    format_kernel,
    ipow,
    k_t,
    kappa_array,
    parse_kernel,
)
from oracles import kappa_frac
from strategies import points

nonzero = points.filter(lambda z: abs(z) > 1e-6)
orders = st.integers(min_value=1, max_value=6)
real_specs = st.one_of(
    st.builds(Kappa, orders),
    st.builds(lambda n, d, t: Combo(n, n + d, t), orders, st.integers(0, 4),
              st.floats(min_value=-5, max_value=5)),
)


class TestVariants:
    def test_kappa_order(self):
        with pytest.raises(BadPair):
            Kappa(0)

    def test_combo_order(self):
        with pytest.raises(BadPair):
            Combo(2, 1, 0.0)

    def test_k_t_is_combo(self):
        assert k_t(-1.5) == Combo(1, 2, -1.5)

    @pytest.mark.parametrize("text", ["kappa:3", "combo:1:2:-1.5", "cauchy", "combo:2:3:0.1"])
    def test_text_round_trip(self, text):
        spec = parse_kernel(text)
        assert parse_kernel(format_kernel(spec)) == spec

    @pytest.mark.parametrize("text", ["kappa", "kappa:x", "combo:1:2", "combo:2:1:0", "sinc"])
    def test_text_rejects(self, text):
        with pytest.raises(BadPair):
            parse_kernel(text)


class TestEvaluation:
    def test_kappa1_values(self):
        assert eval_real(Kappa(1), 1) == 1.0
        assert eval_real(Kappa(1), 1j) == 0.0

    def test_combo_hand_value(self):
        assert eval_real(Combo(1, 2, -1.0), 1 + 1j) == pytest.approx(-0.25, abs=1e-16)

    def test_cauchy_values(self):
        assert eval_cauchy(1) == 1
        assert eval_cauchy(1j) == -1j
        assert eval_cauchy(1 + 1j) == pytest.approx((1 - 1j) / 2)

    def test_zero_argument(self):
        with pytest.raises(ZeroArgument):
            eval_real(Kappa(2), 0)
        with pytest.raises(ZeroArgument):
            eval_cauchy(0)

    def test_wrong_variant(self):
        with pytest.raises(WrongVariant):
            eval_real(Cauchy(), 1)

    def test_ipow(self):
        x = np.array([1.5, -2.0, 0.3])
        for k in range(12):
            np.testing.assert_allclose(ipow(x, k), x ** k, rtol=1e-14)

    @given(orders, nonzero)
    def test_kappa_matches_rational(self, m, z):
        exact = kappa_frac(m, Fraction(z.real), Fraction(z.imag))
        assert eval_real(Kappa(m), z) == pytest.approx(float(exact), rel=1e-12, abs=1e-300)

    def test_kappa1_is_real_part_of_cauchy(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=100) + 1j * rng.normal(size=100)
        np.testing.assert_allclose(kappa_array(1, z), (1 / z).real, rtol=1e-13)


class TestSymmetries:
    @given(real_specs, nonzero)
    def test_odd(self, spec, z):
        assert eval_real(spec, -z) == -eval_real(spec, z)

    @given(real_specs, nonzero)
    def test_conjugation(self, spec, z):
        assert eval_real(spec, z.conjugate()) == eval_real(spec, z)

    @given(real_specs, nonzero, st.floats(min_value=1e-3, max_value=1e3))
    def test_homogeneous_degree_minus_one(self, spec, z, lam):
        v = eval_real(spec, z)
        assert eval_real(spec, lam * z) == pytest.approx(v / lam, rel=1e-9, abs=1e-12 / abs(lam * z))

    @given(real_specs, nonzero)
    def test_vanishes_on_imaginary_axis(self, spec, z):
        assert eval_real(spec, 1j * z.imag if z.imag else 1j) == 0.0


class TestSizeRatio:
    def test_kappa1_near_one(self):
        r = cz_size_ratio(Kappa(1), 100_000, seed=3)
        assert 1 - 1e-6 <= r <= 1 + 1e-12

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_kappa_bounded_by_one(self, m):
        assert cz_size_ratio(Kappa(m), 20_000) <= 1 + 1e-12

    @pytest.mark.parametrize("t", [-2.0, -1.0, 0.5, 3.0])
    def test_combo_bounded(self, t):
        assert cz_size_ratio(k_t(t), 20_000) <= 1 + abs(t) + 1e-12

    def test_cauchy_exactly_one(self):
        assert cz_size_ratio(Cauchy(), 1000) == pytest.approx(1.0, rel=1e-14)

    def test_seeded(self):
        assert cz_size_ratio(k_t(-1.0), 1000, seed=9) == cz_size_ratio(k_t(-1.0), 1000, seed=9)
