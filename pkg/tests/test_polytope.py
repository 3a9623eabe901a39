import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lhvout.behaviour import Behaviour, Scenario, random_nonsignalling, uniform
from lhvout.errors import CapExceededError, InvariantError, LhvOutError
from lhvout.polytope import (LHV, OUT, LhvStrategy, Model, OutStrategy, best_response, enumerate_vertices,
                             membership, mixture_table, normalize_inequality, read_model, strategy_behaviour,
                             vertex_arrays, vertex_count, write_model)
from lhvout.quantum import pr_box

CHSH_S = Scenario(2, 2)


def pr_family():
    """The eight PR boxes p = 1/2 [a xor b = xy xor al x xor be y xor ga]."""
    for al, be, ga in itertools.product(range(2), repeat=3):
        t = np.zeros((2, 2, 2, 2))
        for x, y, a in itertools.product(range(2), repeat=3):
            t[x, y, a, a ^ (x * y) ^ (al * x) ^ (be * y) ^ ga] = 0.5
        yield Behaviour(CHSH_S, t)


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_vertices(CHSH_S, LHV)) == 16
        assert len(enumerate_vertices(CHSH_S, OUT)) == 64
        assert len(enumerate_vertices(Scenario(1, 1), LHV)) == 4

    def test_count_formula_general(self):
        s = Scenario(2, 1, 3, 2)
        assert vertex_count(s, LHV) == 9 * 2
        assert vertex_count(s, OUT) == 9 * 2 ** 3
        assert len(enumerate_vertices(s, OUT)) == 72

    def test_lexicographic_and_unique(self):
        verts = enumerate_vertices(CHSH_S, OUT)
        keys = [(v.a_assign, v.b_assign) for v in verts]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            vertex_arrays(Scenario(10, 10), OUT, cap=1000)


class TestStrategyBehaviour:
    def test_lhv_all_zero(self):
        b = strategy_behaviour(LhvStrategy((0, 0), (0, 0)), CHSH_S)
        assert np.all(b.table[:, :, 0, 0] == 1)

    def test_out_copying_bob(self):
        st_ = OutStrategy((0, 1), ((0, 0), (1, 1)))  # Bob answers the announced outcome
        t = strategy_behaviour(st_, CHSH_S).table
        for x, y in itertools.product(range(2), repeat=2):
            nz = np.argwhere(t[x, y] > 0)
            assert nz.tolist() == [[x, x]]

    def test_pr_strategies_mix_to_pr_box(self):
        total = np.zeros((2, 2, 2, 2))
        for lam in range(2):
            a = tuple(x ^ lam for x in range(2))
            b = tuple(tuple(((o ^ lam) * (y ^ 1)) ^ lam for y in range(2)) for o in range(2))
            total += 0.5 * strategy_behaviour(OutStrategy(a, b), CHSH_S).table
        assert np.array_equal(total, pr_box().table)


class TestMembership:
    def test_pr_box_not_local(self):
        res = membership(pr_box(), LHV)
        assert not res.member
        ineq, offset, scale = normalize_inequality(res.inequality, res.polytope_bound, bound_to=2.0)
        assert (res.polytope_bound - offset) / scale == pytest.approx(2.0)
        assert (res.behaviour_value - offset) / scale == pytest.approx(4.0, abs=1e-9)

    def test_pr_box_out_member(self):
        res = membership(pr_box(), OUT)
        assert res.member
        assert np.abs(mixture_table(res.model) - pr_box().table).max() <= 1e-9

    @pytest.mark.parametrize("kind", [LHV, OUT])
    def test_uniform(self, kind):
        assert membership(uniform(Scenario(2, 3)), kind).member

    def test_inequality_separates(self):
        res = membership(pr_box(), LHV)
        a, b = vertex_arrays(CHSH_S, LHV)
        best = max(np.sum(res.inequality * strategy_behaviour(LhvStrategy(tuple(x), tuple(y)), CHSH_S).table)
                   for x, y in zip(a, b))
        assert best == pytest.approx(res.polytope_bound, abs=1e-12)
        assert res.behaviour_value > res.polytope_bound + 1e-9

    def test_every_chsh_ns_vertex_is_out(self):
        deterministic = [strategy_behaviour(v, CHSH_S) for v in enumerate_vertices(CHSH_S, LHV)]
        boxes = list(pr_family())
        assert len(boxes) == 8 and len(deterministic) == 16
        for b in deterministic + boxes:
            assert membership(b, OUT).member
        assert not any(membership(b, LHV).member for b in boxes)

    @settings(max_examples=25)
    @given(st.integers(0, 10 ** 6))
    def test_lhv_member_implies_out_member(self, seed):
        b = random_nonsignalling(Scenario(2, 2), seed)
        if membership(b, LHV).member:
            assert membership(b, OUT).member

    def test_lhv_vertices_inside_out(self):
        for v in enumerate_vertices(CHSH_S, LHV):
            b = strategy_behaviour(v, CHSH_S)
            res = membership(b, OUT)
            assert res.member and np.abs(mixture_table(res.model) - b.table).max() <= 1e-9

    @pytest.mark.parametrize("kind", [LHV, OUT])
    def test_column_generation_agrees(self, kind):
        for seed in range(6):
            b = random_nonsignalling(Scenario(3, 2), seed)
            full = membership(b, kind)
            cg = membership(b, kind, full_limit=1)
            assert full.member == cg.member
            if cg.member:
                assert np.abs(mixture_table(cg.model) - b.table).max() <= 1e-9
            else:
                assert cg.behaviour_value > cg.polytope_bound

    def test_best_response_matches_enumeration(self):
        rng = np.random.default_rng(3)
        s = Scenario(2, 2, 3, 2)
        for kind in (LHV, OUT):
            c = rng.standard_normal(s.shape)
            value, _, _ = best_response(c, kind)
            a, b = vertex_arrays(s, kind)
            strat = LhvStrategy if kind == LHV else OutStrategy
            brute = max(np.sum(c * strategy_behaviour(
                strat(tuple(x), tuple(y) if kind == LHV else tuple(map(tuple, y))), s).table)
                for x, y in zip(a.tolist(), b.tolist()))
            assert value == pytest.approx(brute, abs=1e-12)


class TestModel:
    def test_weight_sum(self):
        with pytest.raises(InvariantError):
            Model.from_signs([0.5, 0.4], [[1], [1]], [[1], [-1]])

    def test_bad_sign(self):
        with pytest.raises(InvariantError, match="Invalid element"):
            Model.from_signs([1.0], [[0]], [[1]])

    def test_file_round_trip(self, tmp_path):
        res = membership(pr_box(), OUT)
        path = tmp_path / "m.txt"
        write_model(res.model, path)
        back = read_model(path)
        assert back.kind == OUT
        assert np.array_equal(back.a, res.model.a) and np.array_equal(back.b, res.model.b)
        assert np.array_equal(back.weights, res.model.weights)

    def test_lhv_file(self, tmp_path):
        m = Model.from_signs([0.25, 0.75], [[1, -1], [-1, -1]], [[1, 1], [-1, 1]])
        write_model(m, tmp_path / "l.txt")
        text = (tmp_path / "l.txt").read_text()
        assert text.startswith("LHV-MODEL 1\nmx 2 my 2 L 2\nWEIGHTS\n")
        assert "\nB\n" in text
        back = read_model(tmp_path / "l.txt")
        assert back.kind == LHV and np.array_equal(mixture_table(back), mixture_table(m))

    def test_general_outcomes_file(self, tmp_path):
        s = Scenario(2, 1, 3, 2)
        a, b = vertex_arrays(s, OUT)
        m = Model(OUT, s, [0.5, 0.5], a[[3, 40]], b[[3, 40]])
        write_model(m, tmp_path / "g.txt")
        assert "A-IDX" in (tmp_path / "g.txt").read_text()
        back = read_model(tmp_path / "g.txt")
        assert np.array_equal(mixture_table(back), mixture_table(m))

    def test_missing_section(self):
        with pytest.raises(LhvOutError):
            read_model("LHVOUT-MODEL 1\nmx 1 my 1 L 1\nWEIGHTS\n1\nA\n+1\nBPLUS\n+1\n")
