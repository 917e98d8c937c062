import math

import numpy as np
import pytest

from rtr_shuffle import montecarlo as mc
from rtr_shuffle.coupling import DEFAULT, INF, STRICT, SpecialPair, run_coupled, last_good_time
from rtr_shuffle.deck import Shuffle, identity
from rtr_shuffle.rng import make_rng
from rtr_shuffle.tv_exact import adjacent_curve, d_curve


def test_wilson_interval():
    est = mc.wilson(30, 100)
    assert est.lo <= est.point <= est.hi
    assert est.point == 0.3
    zero = mc.wilson(0, 50)
    assert zero.lo == 0.0 and zero.hi > 0.0
    one = mc.wilson(50, 50)
    assert one.hi == 1.0 and one.lo < 1.0


def test_wilson_coverage_meta():
    rng = make_rng(99)
    hits = 0
    reps, size, p = 1000, 200, 0.3
    for _ in range(reps):
        est = mc.wilson(int(rng.binomial(size, p)), size)
        hits += est.lo <= p <= est.hi
    assert 0.925 <= hits / reps <= 0.975


@pytest.mark.parametrize("n", [5, 10])
def test_queue_only_T_matches_deck_runs(n):
    a, b = mc.draw_paths(0, n, 4 * n, 0, 2048)
    for v in (DEFAULT, STRICT):
        T = mc.queue_last_good_times(a, b, n, mc.PAIR, v)
        for r in range(0, 2048, 1):
            path = [Shuffle(int(p), int(q)) for p, q in zip(a[r], b[r])]
            deck_T = run_coupled(identity(n), mc.PAIR, path, v).T
            assert (deck_T if deck_T != INF else -1) == T[r]


@pytest.mark.slow
@pytest.mark.parametrize("n", [5, 10])
def test_queue_only_T_matches_deck_runs_10k(n):
    k = 4 * n
    mismatches = 0
    for block in range(5):
        a, b = mc.draw_paths(1, n, k, block, 2000)
        T = mc.queue_last_good_times(a, b, n)
        for r in range(2000):
            path = [Shuffle(int(p), int(q)) for p, q in zip(a[r], b[r])]
            lg = last_good_time(path, mc.PAIR)
            mismatches += (lg if lg != INF else -1) != T[r]
    assert mismatches == 0


def test_T_tail_at_k1_is_one():
    assert mc.estimate_T_tail(6, 1, 500, seed=3).point == 1.0


def test_T_tail_seeds_overlap():
    e1 = mc.estimate_T_tail(20, 80, 20000, seed=1)
    e2 = mc.estimate_T_tail(20, 80, 20000, seed=2)
    assert e1.lo <= e2.hi and e2.lo <= e1.hi
    assert e1.successes != e2.successes or e1.point == e2.point


def test_reproducible_across_worker_counts():
    one = mc.estimate_noncoalescence(5, 10, 5000, seed=7, threads=1)
    two = mc.estimate_noncoalescence(5, 10, 5000, seed=7, threads=2)
    assert one.to_json() == two.to_json()
    t1 = mc.estimate_T_tail(12, 30, 9000, seed=7, threads=1)
    t3 = mc.estimate_T_tail(12, 30, 9000, seed=7, threads=3)
    assert t1 == t3


def test_ci_width_shrinks_like_root_two():
    small = mc.estimate_T_tail(10, 30, 20000, seed=5)
    big = mc.estimate_T_tail(10, 30, 40000, seed=5)
    ratio = (small.hi - small.lo) / (big.hi - big.lo)
    assert ratio == pytest.approx(math.sqrt(2), rel=0.1)


def test_noncoalescence_amended_vs_strict():
    am = mc.estimate_noncoalescence(4, 32, 5000, seed=0)
    assert am.fail_given_t_lt_k == 0 and am.ij_move_at_T == 0
    st = mc.estimate_noncoalescence(4, 12, 5000, seed=0, variant=STRICT)
    assert st.fail_given_t_lt_k > 0
    assert st.ij_move_at_T >= st.fail_given_t_lt_k
    assert st.conditional is not None and st.conditional.point > 0


def test_undefined_conditional():
    res = mc.estimate_noncoalescence(5, 0, 100)
    assert res.conditional is None and res.overall.point == 1.0
    assert res.to_json()["conditional_given_T_lt_k"] == "undefined"
    assert mc.estimate_noncoalescence(5, 1, 200).conditional is None


def test_coupling_dominates_exact_adjacent_tv():
    exact = adjacent_curve(5, 20)
    for t in (5, 10, 20):
        est = mc.estimate_noncoalescence(5, t, 10000, seed=2).overall
        assert est.point + 3 * est.se >= exact[t]


def test_curve_rows():
    rows = mc.coupling_bound_curve(5, [0, 5, 10, 20], 10000, seed=4)
    assert rows[0].empirical == 4.0 and rows[0].analytic == 4.0
    for r in rows:
        assert r.analytic == pytest.approx(4 * math.exp(-0.6526 * r.k / 5))
    ests = [r.estimate for r in rows]
    for x, y in zip(ests, ests[1:]):
        assert y.point <= x.point + 3 * (x.se + y.se)
    d = d_curve(5, 20)
    for r in rows:
        assert r.empirical + 4 * 3 * r.estimate.se >= d[r.k]


def test_queue_stats_rows():
    rows = mc.queue_transition_stats(10, 200000, seed=1, max_l=5)
    assert [r.l for r in rows] == [1, 2, 3, 4, 5]
    assert rows[0].q == pytest.approx(0.1) and rows[2].p == pytest.approx(0.18)
    for r in rows:
        assert abs(r.z_q) <= 4 and abs(r.z_p) <= 4 and abs(r.z_reset) <= 4
    lit = mc.queue_transition_stats(10, 200000, seed=1, membership="literal", max_l=2)
    assert lit[1].q_hat < rows[1].q_hat


def test_queue_counts_are_reproducible():
    a = mc.queue_transition_counts(10, 50000, seed=3)
    b = mc.queue_transition_counts(10, 50000, seed=3, chunk=777)
    assert a.keys() == b.keys()
    assert all(np.array_equal(a[l], b[l]) for l in a)
