import numpy as np
import pytest
from hypothesis import given, strategies as st

from lhvout.behaviour import CorrelatorTable, is_nonsignalling, to_correlators
from lhvout.errors import InvariantError, LhvOutError
from lhvout.geometry import hemisphere_radius
from lhvout.quantum import (CorrelatorState, MeasurementSet, double_set, hemisphere_grid, pr_box,
                            pr_box_model, read_measurements, state_behaviour, werner_state,
                            write_measurements)

unit = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3)


class TestWerner:
    @pytest.mark.parametrize("v", [0.0, 1.0, 0.7071])
    def test_correlation_matrix(self, v):
        assert np.array_equal(werner_state(v).T, -v * np.eye(3))

    @pytest.mark.parametrize("v", [-0.1, 1.01])
    def test_range(self, v):
        with pytest.raises(LhvOutError):
            werner_state(v)

    def test_state_invariant(self):
        with pytest.raises(InvariantError):
            CorrelatorState(np.diag([1.2, 0, 0]))


class TestStateBehaviour:
    def test_aligned_axes(self):
        x = MeasurementSet([[1, 0, 0]])
        c = state_behaviour(werner_state(0.7071), x, x)
        assert c.correlators[0, 0] == pytest.approx(-0.7071, abs=1e-15)
        assert np.all(c.alice == 0) and np.all(c.bob == 0)

    def test_orthogonal(self):
        c = state_behaviour(werner_state(1.0), MeasurementSet([[1, 0, 0]]), MeasurementSet([[0, 1, 0]]))
        assert c.correlators[0, 0] == 0

    def test_zero_visibility(self):
        A = hemisphere_grid(3)
        assert np.all(state_behaviour(werner_state(0.0), A, A).correlators == 0)

    def test_empty_set(self):
        with pytest.raises(LhvOutError):
            state_behaviour(werner_state(0.5), MeasurementSet(np.zeros((0, 3))), hemisphere_grid(1))

    @given(unit, unit, st.lists(st.floats(-1, 1), min_size=9, max_size=9))
    def test_bounded_by_singular_value(self, u, w, entries):
        T = np.array(entries).reshape(3, 3)
        T = T / max(1.0, np.linalg.svd(T, compute_uv=False).max())
        A, B = MeasurementSet.normalized([u]), MeasurementSet.normalized([w])
        c = state_behaviour(CorrelatorState(T), A, B)
        assert abs(c.correlators[0, 0]) <= np.linalg.svd(T, compute_uv=False).max() + 1e-12
        CorrelatorTable(c.alice, c.bob, c.correlators)


class TestPrBox:
    def test_entries(self):
        t = pr_box().table
        assert t[0, 0, 0, 0] == 0.5
        assert t[1, 1, 0, 1] == 0.5
        assert t[0, 0, 0, 1] == 0.0

    def test_nonsignalling_and_chsh_value(self):
        ok, viol = is_nonsignalling(pr_box())
        assert ok and viol == 0
        c = to_correlators(pr_box())
        assert np.sum(np.array([[1, 1], [1, -1]]) * c.correlators) == 4

    def test_model_matches_stated_strategies(self):
        # strategy r: a = x xor r, b = (a xor r)(y xor 1) xor r
        model = pr_box_model()
        for r in range(2):
            for x in range(2):
                assert model.a[r, x] == x ^ r
            for a in range(2):
                for y in range(2):
                    assert model.b[r, a, y] == ((a ^ r) * (y ^ 1)) ^ r


class TestHemisphereGrid:
    def test_pole_always_present(self):
        assert [0, 0, 1] in hemisphere_grid(1).vectors.tolist()

    @given(st.integers(1, 12), st.integers(1, 30), st.floats(0, 1))
    def test_upper_and_unit(self, K, n, off):
        g = hemisphere_grid(K, n, off)
        assert len(g) == 1 + K * n
        assert g.vectors[:, 2].min() >= 0
        assert np.allclose(np.linalg.norm(g.vectors, axis=1), 1, atol=1e-12)

    def test_twenty_rings_of_twenty(self):
        g = hemisphere_grid(20, 20)
        assert len(g) == 401
        r = hemisphere_radius(g)
        assert 0.95 < r < 1  # strictly inside; much coarser azimuthally than the replicated set

    def test_per_ring_counts(self):
        assert len(hemisphere_grid(4, [6, 12, 15, 16], offsets=0)) == 50

    def test_equator_is_exact(self):
        g = hemisphere_grid(5, 8)
        assert np.sum(g.vectors[:, 2] == 0) == 8


class TestDoubleSet:
    def test_single(self):
        d = double_set(MeasurementSet([[0, 0, 1]]))
        assert d.vectors.tolist() == [[0, 0, 1], [0, 0, -1]]

    def test_symmetric_unchanged(self):
        s = MeasurementSet(np.vstack([np.eye(3), -np.eye(3)]))
        assert len(double_set(s)) == 6

    def test_hemisphere_set(self):
        g = hemisphere_grid(10, 40, offsets=0)
        d = double_set(g)
        # equator antipodes already belong to the ring, everything else is new
        assert len(d) == 2 * 401 - 40
        assert len(d) <= 802


def test_measurement_files(tmp_path):
    g = hemisphere_grid(3)
    path = tmp_path / "m.txt"
    write_measurements(g, path)
    assert np.array_equal(read_measurements(path).vectors, g.vectors)
    with pytest.raises(InvariantError):
        read_measurements("1 1 0\n")
    assert np.allclose(read_measurements("1 1 0\n", normalize=True).vectors, [[2 ** -0.5, 2 ** -0.5, 0]])
    with pytest.raises(LhvOutError):
        read_measurements("1 0\n")
