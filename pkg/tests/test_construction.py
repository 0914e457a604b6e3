import math
import random
from decimal import Decimal

import pytest

from hypergt.construction import (
    BuilderConfig,
    _greedy_exact,
    build_greedy,
    build_randomized,
    build_selector,
    cover_instance,
    eval_selector_bound,
    eval_two_stage_bound,
    exact_delta,
    selector_width,
)
from hypergt.errors import ConstructionError, ParameterError, WorkBudgetExceeded
from hypergt.hypergraph import Hypergraph, augment, distinct_s_sets, pool_for
from hypergt.selectors import TestMatrix, count_identity_rows, is_selector

from oracles import brute_delta, decimal_selector_bound, decimal_two_stage_bound

DISJOINT = Hypergraph(4, ((1, 2), (3, 4)))
PATH3 = Hypergraph(4, ((1, 2), (2, 3), (3, 4)))


def aug(h, chi):
    return augment(h, pool_for(h, chi))


def close(value, exact):
    return abs(Decimal(value) - exact) <= Decimal("1e-12") * exact


class TestBounds:
    def test_selector_example(self):
        report = eval_selector_bound(6, 2, 1, 3, 1, 4)
        exact, alpha = decimal_selector_bound(6, 2, 1, 3, 1, 4)
        assert close(report.t_bound, exact) and close(report.alpha, alpha)
        assert report.branches[0] < report.branches[1]
        assert round(report.t_bound, 6) == 73.147441
        assert round(report.alpha, 4) == 32.6194  # 12e
        assert report.ceiling == 74

    def test_selector_example_small_e(self):
        report = eval_selector_bound(8, 2, 1, 3, 2, 2)
        exact, alpha = decimal_selector_bound(8, 2, 1, 3, 2, 2)
        assert close(report.t_bound, exact)
        assert report.alpha == pytest.approx(2 * math.e)
        assert report.binomial == 3
        assert round(report.t_bound, 6) == 41.228283

    def test_two_stage_example(self):
        # beta's first branch is e * 3 * 2 = 6e here
        report = eval_two_stage_bound(6, 2, 1, 1, 3)
        exact, beta = decimal_two_stage_bound(6, 2, 1, 1, 3)
        assert close(report.t_bound, exact)
        assert report.alpha == pytest.approx(6 * math.e)
        assert report.additive == 2
        assert round(report.t_bound, 6) == 63.842425

    @pytest.mark.parametrize("n, d, q, chi, E", [(6, 2, 1, 1, 4), (10, 3, 2, 2, 7), (20, 4, 3, 5, 30)])
    def test_m_one_collapses(self, n, d, q, chi, E):
        report = eval_selector_bound(n, d, q, 1, chi, E)
        assert report.binomial == 1
        assert report.coefficient == pytest.approx(2 * math.e)
        assert report.t_bound == pytest.approx(2 * math.e * (1 + math.log(report.alpha)), rel=1e-12)

    def test_monotone_in_edge_count(self):
        values = [eval_selector_bound(12, 3, 2, 3, 2, size).t_bound for size in range(3, 40)]
        assert values == sorted(values)

    @pytest.mark.parametrize("args", [(6, 2, 0, 3, 1, 4), (6, 2, 4, 3, 1, 4), (6, 2, 1, 0, 1, 4),
                                      (6, 2, 1, 4, 1, 4), (2, 2, 1, 1, 1, 4), (6, 2, 1, 1, 0, 4)])
    def test_selector_preconditions(self, args):
        with pytest.raises(ParameterError):
            eval_selector_bound(*args)

    def test_two_stage_needs_chi(self):
        with pytest.raises(ParameterError):
            eval_two_stage_bound(6, 2, 1, 0, 3)

    def test_report_text(self):
        text = eval_selector_bound(6, 2, 1, 3, 1, 4).to_text()
        fields = dict(line.split("=", 1) for line in text.splitlines())
        assert fields["kind"] == "selector"
        assert fields["t_bound_ceil"] == "74"
        assert "alpha" in fields and "beta" not in fields
        assert "beta" in eval_two_stage_bound(6, 2, 1, 1, 3).to_text()


class TestCoverInstance:
    def test_disjoint(self):
        inst = cover_instance(aug(DISJOINT, 2), 1, 3, 2)
        assert (inst.weight, inst.universe_size, inst.k) == (1, 4, 4)
        assert inst.target_sets == ((1, 2, 3, 4),)
        assert inst.x_size == 4 and inst.min_b == 2

    def test_width_counts_used_dummies(self):
        ah = aug(PATH3, 2)
        assert selector_width(ah, 1, 2) == 5
        assert cover_instance(ah, 1, 2, 2).universe_size == 5

    def test_delta(self):
        inst = cover_instance(aug(PATH3, 2), 2, 3, 2)
        delta = exact_delta(inst)
        assert delta == brute_delta(inst.universe_size, inst.weight, inst.target_sets, 3)
        assert delta <= inst.delta_bound


class TestGreedy:
    def test_example(self):
        m = build_greedy(aug(DISJOINT, 2), 1, 3, 2)
        assert (m.t, m.width) == (3, 4)
        assert all(bin(r).count("1") == 1 for r in m.rows)
        assert len(count_identity_rows(m, (1, 2, 3, 4))) == 3
        assert m.t <= eval_selector_bound(4, 2, 1, 3, 2, 2).ceiling

    def test_common_vector_one_row(self):
        h = Hypergraph(2, ((1,), (2,)))
        m = build_greedy(aug(h, 1), 1, 1, 1)
        assert m.t == 1

    def test_deterministic(self):
        h = Hypergraph(7, ((1, 2, 3), (3, 4, 5), (5, 6, 7), (1, 4, 7)))
        ah = aug(h, 2)
        assert build_greedy(ah, 2, 3, 2) == build_greedy(ah, 2, 3, 2)

    def test_tie_break_prefers_smallest_support(self):
        m = build_greedy(aug(DISJOINT, 2), 1, 3, 2)
        assert m.rows == (0b0001, 0b0010, 0b0100)

    def test_chunked_scan_matches_full_table(self):
        h = Hypergraph(8, ((1, 2, 3), (3, 4, 5), (5, 6, 7), (1, 7, 8), (2, 4, 6)))
        inst = cover_instance(aug(h, 2), 2, 4, 2)
        assert _greedy_exact(inst, table_limit=37) == _greedy_exact(inst)

    def test_lovasz_and_closed_form(self):
        rng = random.Random(5)
        for _ in range(15):
            n = rng.randint(5, 9)
            d = rng.randint(1, 3)
            edges = {tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, d)))) for _ in range(5)}
            h = Hypergraph(n, tuple(edges))
            if h.size < 2:
                continue
            chi, q = rng.randint(1, 2), rng.randint(1, min(2, h.size - 1))
            ah = aug(h, chi)
            mm = rng.randint(1, h.d + chi)
            m = build_greedy(ah, q, mm, chi)
            inst = cover_instance(ah, q, mm, chi)
            assert m.t <= inst.lovasz_bound(exact_delta(inst))
            assert m.t <= eval_selector_bound(m.width, h.d, q, mm, chi, h.size).ceiling

    def test_budget(self):
        ah = aug(PATH3, 2)
        with pytest.raises(WorkBudgetExceeded):
            build_greedy(ah, 1, 3, 2, budget=2, exact_only=True)

    def test_sampled_variant_verifies(self):
        h = Hypergraph(9, ((1, 2, 3), (4, 5, 6), (7, 8, 9), (1, 5, 9), (3, 5, 7)))
        ah = aug(h, 2)
        m = build_greedy(ah, 2, 4, 2, budget=10, sample_pool=64, seed=3)
        assert is_selector(m, ah, 2, 4, 2).holds
        assert m == build_greedy(ah, 2, 4, 2, budget=10, sample_pool=64, seed=3)

    def test_mm_zero(self):
        assert build_greedy(aug(DISJOINT, 2), 1, 0, 2).t == 0


class TestRandomized:
    def test_example(self):
        ah = aug(DISJOINT, 2)
        m = build_randomized(ah, 1, 3, 2, seed=1)
        assert is_selector(m, ah, 1, 3, 2).holds
        assert m == build_randomized(ah, 1, 3, 2, seed=1)

    def test_mm_zero(self):
        m = build_randomized(aug(DISJOINT, 2), 1, 0, 2, seed=1)
        assert m.t == 0 and m.width == 4

    def test_retry_cap(self, monkeypatch):
        # start from one row and never grow: four unit rows are out of reach
        from hypergt import construction

        monkeypatch.setattr(construction, "eval_selector_bound",
                            lambda *args: type("Stub", (), {"ceiling": 1})())
        with pytest.raises(ConstructionError) as info:
            build_randomized(aug(DISJOINT, 2), 1, 4, 2, seed=0, growth=1.0, retry_cap=3)
        assert info.value.witness.found < info.value.witness.required


def test_build_selector_dispatch():
    ah = aug(DISJOINT, 2)
    assert build_selector(ah, 1, 3, 2) == build_greedy(ah, 1, 3, 2)
    assert build_selector(ah, 1, 3, 2, BuilderConfig("randomized", seed=1)) == build_randomized(ah, 1, 3, 2, 1)
    with pytest.raises(ParameterError):
        BuilderConfig("exhaustive")


def test_distinct_targets_are_s_sets():
    ah = aug(PATH3, 2)
    assert cover_instance(ah, 2, 2, 2).target_sets == tuple(distinct_s_sets(ah, 2, 2))
    assert isinstance(build_greedy(ah, 2, 2, 2), TestMatrix)
