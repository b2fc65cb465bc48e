import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvkit.errors import (
    BadCount,
    DegenerateSupport,
    DuplicatePoint,
    EmptyInput,
    LevelTooLarge,
    NonpositiveWeight,
)
from curvkit.measures import (
    DiscreteMeasure,
    from_csv,
    gen_four_corner_cantor,
    gen_lipschitz_graph,
    gen_segment,
    load_measure,
    radius_grid,
    read_csv,
    regularity,
    write_csv,
)
from oracles import ball_masses


def full_ratios(mu):
    """mu(B(z, r)) / r for every atom z and every grid radius r."""
    radii = radius_grid(mu)
    return np.concatenate([ball_masses(mu.points, mu.weights, z, radii) / radii for z in mu.points])


class TestConstruction:
    def test_single_atom(self):
        mu = from_csv([(0, 0, 1)])
        assert len(mu) == 1 and mu.total_mass == 1.0

    def test_two_atoms(self):
        assert from_csv([(0, 0, 1), (1, 0, 1)]).total_mass == 2.0

    def test_zero_weight(self):
        with pytest.raises(NonpositiveWeight):
            from_csv([(0, 0, 1), (1, 0, 0)])

    def test_duplicate(self):
        with pytest.raises(DuplicatePoint):
            from_csv([(0, 0, 1), (0, 0, 2)])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            from_csv([])

    def test_arrays_read_only(self):
        mu = gen_segment(3)
        with pytest.raises(ValueError):
            mu.weights[0] = 5.0

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(1e-3, 10)),
                    min_size=1, max_size=40, unique_by=lambda r: (r[0], r[1])))
    def test_total_mass(self, rows):
        mu = from_csv(rows)
        assert mu.total_mass == pytest.approx(math.fsum(r[2] for r in rows), rel=1e-12)

    def test_csv_round_trip(self, tmp_path):
        mu = gen_lipschitz_graph(30, 0.4, 2)
        path = tmp_path / "m.csv"
        write_csv(mu, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.points, mu.points)
        np.testing.assert_array_equal(back.weights, mu.weights)

    def test_csv_skips_comments_and_blanks(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# header\n\n0,0,1\n1,0,2\n")
        assert read_csv(path).total_mass == 3.0

    def test_diameter_collinear_large(self):
        assert gen_segment(500).diameter() == pytest.approx(1.0, rel=1e-15)

    def test_min_gap(self):
        assert gen_segment(101).min_gap() == pytest.approx(0.01, rel=1e-12)

    @given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
    def test_restriction_monotone(self, r1, r2):
        # centred on an atom so the restriction is never empty
        mu = gen_four_corner_cantor(2)
        lo, hi = sorted((r1, r2))
        z = mu.points[5]
        a = mu.restrict_to_disc(z, lo).total_mass
        b = mu.restrict_to_disc(z, hi).total_mass
        assert a <= b


class TestGenerators:
    def test_segment_two(self):
        mu = gen_segment(2)
        assert list(mu.points) == [0, 1] and list(mu.weights) == [0.5, 0.5]

    @pytest.mark.parametrize("count", [2, 7, 101, 1000])
    def test_segment_mass(self, count):
        assert gen_segment(count).total_mass == pytest.approx(1.0, rel=1e-12)

    def test_segment_spacing(self):
        np.testing.assert_allclose(np.diff(gen_segment(101).points.real), 0.01, rtol=1e-12)

    def test_bad_count(self):
        with pytest.raises(BadCount):
            gen_segment(1)

    def test_lipschitz_zero_slope_is_segment(self):
        a, b = gen_lipschitz_graph(50, 0.0, 1), gen_segment(50)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.weights, b.weights)

    @given(st.integers(2, 300), st.floats(0, 3), st.integers(0, 2 ** 32))
    @settings(max_examples=30)
    def test_lipschitz_secants(self, count, slope, seed):
        mu = gen_lipschitz_graph(count, slope, seed)
        z = mu.points
        dx = z.real[None, :] - z.real[:, None]
        dy = z.imag[None, :] - z.imag[:, None]
        off = ~np.eye(count, dtype=bool)
        assert np.all(np.abs(dy[off]) <= slope * np.abs(dx[off]) * (1 + 1e-12) + 1e-15)

    def test_lipschitz_deterministic(self):
        a, b = gen_lipschitz_graph(100, 0.3, 11), gen_lipschitz_graph(100, 0.3, 11)
        assert a.points.tobytes() == b.points.tobytes() and a.weights.tobytes() == b.weights.tobytes()

    def test_lipschitz_mass_is_arc_length(self):
        mu = gen_lipschitz_graph(200, 0.5, 4)
        assert mu.total_mass == pytest.approx(np.sum(np.abs(np.diff(mu.points))), rel=1e-12)

    def test_cantor_level0(self):
        mu = gen_four_corner_cantor(0)
        assert list(mu.points) == [0.5 + 0.5j] and list(mu.weights) == [1.0]

    def test_cantor_level1(self):
        mu = gen_four_corner_cantor(1)
        assert sorted(mu.points, key=lambda z: (z.real, z.imag)) == [0.125 + 0.125j, 0.125 + 0.875j,
                                                                    0.875 + 0.125j, 0.875 + 0.875j]
        assert set(mu.weights) == {0.25}

    @pytest.mark.parametrize("level", range(6))
    def test_cantor_mass(self, level):
        assert gen_four_corner_cantor(level).total_mass == pytest.approx(1.0, rel=1e-12)

    def test_cantor_too_deep(self):
        with pytest.raises(LevelTooLarge):
            gen_four_corner_cantor(11)

    @pytest.mark.parametrize("desc, count", [("segment:10", 10), ("cantor4:2", 16), ("lip:40:0.2:3", 40)])
    def test_descriptors(self, desc, count):
        assert len(load_measure(desc)) == count

    @pytest.mark.parametrize("desc", ["segment:1", "segment:x", "lip:10:0.2"])
    def test_bad_descriptors(self, desc):
        with pytest.raises(BadCount):
            load_measure(desc)


class TestRegularity:
    def test_segment_matches_enumeration(self):
        mu = gen_segment(1001)
        rep = regularity(mu, probes=1000, seed=0)
        full = full_ratios(mu)
        assert rep.probe_count == 1000
        assert full.min() - 1e-12 <= rep.ad_lower <= rep.ad_upper <= full.max() + 1e-12
        assert rep.growth_constant == rep.ad_upper
        # small radii see 2k+1 atoms at radius k gaps, so the discrete value exceeds 2
        assert 1.8 <= rep.growth_constant <= 2.5

    def test_growth_bounded_on_curves(self):
        assert regularity(gen_segment(1000), 1000).growth_constant <= 3
        assert regularity(gen_lipschitz_graph(1000, 0.2, 5), 1000).growth_constant <= 3

    def test_cantor_lower_bound_stable(self):
        lows = [regularity(gen_four_corner_cantor(lv), 1000, seed=1).ad_lower for lv in (3, 4, 5, 6)]
        assert min(lows) > 0.2
        assert max(lows) / min(lows) < 1.5

    def test_two_point_cluster_flagged(self):
        rep = regularity(from_csv([(0, 0, 1), (1e-3, 0, 1)]), 10)
        assert rep.flagged
        assert rep.ad_lower <= rep.ad_upper

    def test_single_atom(self):
        with pytest.raises(DegenerateSupport):
            regularity(from_csv([(0, 0, 1)]))

    def test_seeded(self):
        mu = gen_lipschitz_graph(300, 0.3, 2)
        assert regularity(mu, 200, seed=4) == regularity(mu, 200, seed=4)

    def test_radius_grid_range(self):
        mu = gen_segment(101)
        r = radius_grid(mu)
        assert r[0] == pytest.approx(2 * mu.min_gap())
        assert r[-1] <= mu.diameter() * (1 + 1e-12)
        np.testing.assert_allclose(r[1:] / r[:-1], 2 ** 0.25, rtol=1e-12)
