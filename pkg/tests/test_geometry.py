import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lhvout.errors import LhvOutError
from lhvout.geometry import (NONLOCALITY_THRESHOLD, final_visibility, hemisphere_radius, hull_facets, in_hull,
                             shrinking_factors, sphere_radius, spot_check_radius)
from lhvout.quantum import MeasurementSet, double_set, hemisphere_grid

PHI = (1 + 5 ** 0.5) / 2
TETRA = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / 3 ** 0.5
CUBE = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]) / 3 ** 0.5
OCTA = np.vstack([np.eye(3), -np.eye(3)])
ICOSA = np.array([p for s1 in (-1, 1) for s2 in (-1, 1)
                  for p in ([0, s1, s2 * PHI], [s1, s2 * PHI, 0], [s2 * PHI, 0, s1])], dtype=float)
ICOSA /= np.linalg.norm(ICOSA, axis=1, keepdims=True)
# inradius / circumradius of the regular icosahedron
ICOSA_RATIO = PHI ** 2 / (3 ** 0.5 * (1 + PHI ** 2) ** 0.5)

directions = st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=6, max_size=14).map(
    lambda v: np.array(v)).filter(lambda v: np.linalg.norm(v, axis=1).min() > 0.1)


class TestFacets:
    @pytest.mark.parametrize("method", ["qhull", "brute"])
    def test_counts(self, method):
        assert len(hull_facets(TETRA, method=method)) == 4
        assert len(hull_facets(CUBE, method=method)) == 6
        octa = hull_facets(OCTA, method=method)
        assert len(octa) == 8
        assert all(abs(f.offset - 3 ** -0.5) < 1e-12 for f in octa)

    def test_facets_support_all_points(self):
        g = hemisphere_grid(3, 7)
        for f in hull_facets(g, include_origin=True):
            assert abs(np.linalg.norm(f.normal) - 1) < 1e-9
            assert (g.vectors @ np.array(f.normal)).max() <= f.offset + 1e-9

    def test_methods_agree(self):
        g = hemisphere_grid(3, 8, offsets=0.25)
        q = hull_facets(g, include_origin=True)
        b = hull_facets(g, include_origin=True, method="brute")
        assert len(q) == len(b)
        assert hemisphere_radius(g) == pytest.approx(hemisphere_radius(g, method="brute"), abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(LhvOutError):
            hull_facets(np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]))

    def test_unknown_method(self):
        with pytest.raises(LhvOutError):
            hull_facets(CUBE, method="magic")


class TestSphere:
    def test_octahedron(self):
        assert sphere_radius(OCTA) == pytest.approx(3 ** -0.5, abs=1e-12)

    @pytest.mark.parametrize("method", ["qhull", "brute"])
    def test_icosahedron(self, method):
        r = sphere_radius(ICOSA, method=method)
        assert r == pytest.approx(ICOSA_RATIO, abs=1e-12)
        assert abs(r - 0.7947) < 1e-3

    def test_doubling_keeps_symmetric_hull(self):
        assert sphere_radius(double_set(MeasurementSet(ICOSA))) == pytest.approx(sphere_radius(ICOSA), abs=1e-12)

    def test_origin_outside(self):
        with pytest.raises(LhvOutError):
            sphere_radius(hemisphere_grid(2))


class TestHemisphere:
    def test_half_octahedron(self):
        pts = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]])
        assert hemisphere_radius(pts) == pytest.approx(3 ** -0.5, abs=1e-12)

    def test_pole_and_dense_equator(self):
        ring = hemisphere_grid(1, 400)
        r = hemisphere_radius(ring)
        assert 0.5 < r < 1
        # facets through pole-equator edges cut the 45-degree direction at cos(pi/4) * ...
        assert r == pytest.approx(2 ** -0.5, abs=1e-3)

    def test_replicated_grid(self):
        r = hemisphere_radius(hemisphere_grid(10, 40, offsets=0))
        assert 0.9938 <= r <= 0.9939

    def test_below_equator(self):
        with pytest.raises(LhvOutError):
            hemisphere_radius(np.array([[0, 0, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]]))

    @settings(max_examples=25)
    @given(st.integers(1, 4), st.integers(3, 9), st.floats(0, 1))
    def test_sphere_le_hemisphere_le_doubled(self, K, n, off):
        g = hemisphere_grid(K, n, off)
        h = hemisphere_radius(g)
        d = sphere_radius(double_set(g))
        assert d >= h - 1e-12
        full = MeasurementSet(np.vstack([g.vectors, [[0, 0, -1]]]))
        try:
            s = sphere_radius(full)
        except LhvOutError:
            return
        assert s <= hemisphere_radius(g) + 1e-12 or s <= h + 1e-12

    @settings(max_examples=25)
    @given(directions, st.lists(st.floats(-1, 1), min_size=3, max_size=3))
    def test_adding_points_never_shrinks(self, pts, extra):
        pts = np.vstack([pts, -pts])
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        try:
            r = sphere_radius(pts)
        except LhvOutError:
            return
        e = np.array(extra)
        if np.linalg.norm(e) < 0.1:
            return
        more = np.vstack([pts, e / np.linalg.norm(e)])
        assert sphere_radius(more) >= r - 1e-12


class TestSpotChecks:
    def test_radius_passes_and_larger_fails(self):
        g = hemisphere_grid(3, 12)
        r = hemisphere_radius(g)
        assert spot_check_radius(g, r, 600, upper=True, include_origin=True) == 0
        assert spot_check_radius(g, r * 1.02, 600, upper=True, include_origin=True) > 0

    def test_in_hull(self):
        assert in_hull(CUBE, [0, 0, 0.5])
        assert not in_hull(CUBE, [0, 0, 0.6])
        assert in_hull(hemisphere_grid(2), [0.3, 0, 0.05], include_origin=True)


class TestVisibility:
    def test_printed_value(self):
        eta = np.cos(np.pi / 40) ** 2
        c = final_visibility(0.7071, 0.00019999656135527604, eta, eta)
        assert abs(c.v_final - 0.6982815667392431) <= 1e-12
        assert c.v_final > NONLOCALITY_THRESHOLD

    def test_identity(self):
        assert final_visibility(0.42, 0, 1, 1).v_final == 0.42

    def test_no_epsilon(self):
        eta = np.cos(np.pi / 40) ** 2
        assert final_visibility(0.7071, 0, eta, eta).v_final == pytest.approx(0.7071 * np.cos(np.pi / 40) ** 4,
                                                                           abs=1e-15)

    @pytest.mark.parametrize("args", [(-0.1, 0, 1, 1), (0.5, -1e-3, 1, 1), (0.5, 0, 1.1, 1), (0.5, 0, 1, -0.2)])
    def test_invalid(self, args):
        with pytest.raises(LhvOutError):
            final_visibility(*args)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_product_invariant(self, v, eps, ea, eb):
        c = final_visibility(v, eps, ea, eb)
        assert c.v_final == pytest.approx(c.nu * c.eta_A * c.eta_B * c.v_model, abs=1e-12)
        assert 0 <= c.v_final <= 1


class TestShrinkingFactors:
    def test_alice_doubling_rejected(self):
        g = hemisphere_grid(2)
        with pytest.raises(LhvOutError):
            shrinking_factors(g, g, double_alice=True)

    def test_local_mode_allows_alice_doubling(self):
        g = hemisphere_grid(2)
        ea, eb = shrinking_factors(g, g, alice_region="sphere", double_alice=True, communicating=False)
        assert ea == pytest.approx(eb)

    def test_bob_doubled_beats_hemisphere(self):
        g = hemisphere_grid(3, 8)
        ea, eb = shrinking_factors(g, g)
        assert eb >= ea - 1e-12
