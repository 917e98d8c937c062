import math
from collections import Counter
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtr_shuffle.deck import (
    Shuffle, apply_path, apply_shuffle, final_deck, format_deck, format_path, identity, parse_deck,
    parse_path, parse_shuffle, random_path, random_shuffle, rank, swap_cards, transpose_relabel, unrank,
)
from rtr_shuffle.errors import UsageError
from rtr_shuffle.rng import make_rng


def decks(max_n=7):
    return st.integers(1, max_n).flatmap(lambda n: st.permutations(list(range(1, n + 1)))).map(tuple)


@pytest.mark.parametrize("deck, move, expected", [
    ((1, 2, 3), Shuffle(1, 3), (2, 3, 1)),
    ((1, 2, 3), Shuffle(2, 2), (2, 1, 3)),
    ((1, 3, 4, 2), Shuffle(1, 2), (3, 4, 2, 1)),
])
def test_apply_shuffle_examples(deck, move, expected):
    assert apply_shuffle(deck, move) == expected


def test_apply_shuffle_rejects_bad_labels():
    with pytest.raises(UsageError):
        apply_shuffle((1, 2, 3), Shuffle(4, 1))
    with pytest.raises(UsageError):
        final_deck((1, 2, 3), [Shuffle(1, 0)])


def test_apply_path_examples():
    traj = apply_path((1, 3, 4, 2), [Shuffle(1, 1), Shuffle(1, 4), Shuffle(2, 3)])
    assert traj == [(1, 3, 4, 2), (1, 3, 4, 2), (3, 4, 1, 2), (3, 2, 4, 1)]
    assert apply_path((2, 1, 3), []) == [(2, 1, 3)]
    assert apply_path((1, 2), [Shuffle(1, 2)])[-1] == (2, 1)


@given(decks(), st.data())
def test_shuffle_keeps_a_deck_and_order_of_others(deck, data):
    n = len(deck)
    a = data.draw(st.integers(1, n))
    b = data.draw(st.integers(1, n))
    out = apply_shuffle(deck, Shuffle(a, b))
    assert sorted(out) == sorted(deck)
    assert [c for c in out if c != a] == [c for c in deck if c != a]
    if a == b:
        assert out[0] == a
    else:
        assert out[out.index(b) + 1] == a


@given(decks(), st.data())
def test_final_deck_matches_trajectory(deck, data):
    n = len(deck)
    path = data.draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)).map(lambda t: Shuffle(*t)), max_size=12))
    assert final_deck(deck, path) == apply_path(deck, path)[-1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kernel_is_doubly_stochastic(n):
    hits = Counter()
    for d in permutations(range(1, n + 1)):
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                hits[apply_shuffle(d, Shuffle(a, b))] += 1
    assert len(hits) == math.factorial(n)
    assert set(hits.values()) == {n * n}


def test_random_shuffle_single_card():
    rng = make_rng(3)
    assert {random_shuffle(rng, 1) for _ in range(20)} == {Shuffle(1, 1)}


def test_random_shuffle_is_uniform():
    rng = make_rng(11)
    draws = 10**6
    counts = Counter(random_shuffle(rng, 5) for _ in range(draws))
    se = math.sqrt(0.04 * 0.96 / draws)
    assert len(counts) == 25
    assert all(abs(c / draws - 0.04) <= 4 * se for c in counts.values())


def test_random_stream_is_deterministic():
    a = [random_shuffle(make_rng(7), 9) for _ in range(3)]
    r1, r2 = make_rng(7), make_rng(7)
    assert [random_shuffle(r1, 9) for _ in range(50)] == [random_shuffle(r2, 9) for _ in range(50)]
    assert random_path(make_rng(5, 1), 6, 10) == random_path(make_rng(5, 1), 6, 10)
    assert random_path(make_rng(5, 1), 6, 10) != random_path(make_rng(5, 2), 6, 10)
    assert a[0] == a[1]


@pytest.mark.parametrize("s, expected", [
    (Shuffle(1, 4), Shuffle(2, 4)),
    (Shuffle(1, 2), Shuffle(2, 1)),
    (Shuffle(3, 3), Shuffle(3, 3)),
])
def test_transpose_relabel(s, expected):
    assert transpose_relabel(s, 1, 2) == expected


def test_swap_cards():
    assert swap_cards((1, 2, 3), 1, 2) == (2, 1, 3)
    assert swap_cards((1, 3, 4, 2), 1, 2) == (2, 3, 4, 1)
    assert swap_cards(swap_cards((4, 1, 3, 2), 4, 2), 4, 2) == (4, 1, 3, 2)


@given(decks(), st.data())
def test_relabelled_move_commutes_with_swap(deck, data):
    n = len(deck)
    if n < 2:
        return
    i, j = data.draw(st.sampled_from([(p, q) for p in range(1, n + 1) for q in range(1, n + 1) if p != q]))
    s = Shuffle(data.draw(st.integers(1, n)), data.draw(st.integers(1, n)))
    lhs = apply_shuffle(swap_cards(deck, i, j), transpose_relabel(s, i, j))
    assert lhs == swap_cards(apply_shuffle(deck, s), i, j)


def test_rank_examples():
    assert rank((1, 2, 3)) == 0
    assert rank((2, 1, 3)) == 2
    assert unrank(5, 3) == (3, 2, 1)
    with pytest.raises(UsageError):
        unrank(6, 3)


@pytest.mark.parametrize("n", range(1, 6))
def test_rank_is_lexicographic_bijection(n):
    orders = list(permutations(range(1, n + 1)))  # already lexicographic
    assert [rank(o) for o in orders] == list(range(len(orders)))
    assert [unrank(r, n) for r in range(len(orders))] == orders


@given(st.integers(6, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, math.factorial(n) - 1))))
def test_rank_unrank_roundtrip(nr):
    n, r = nr
    assert rank(unrank(r, n)) == r


def test_text_formats():
    assert format_deck((3, 1, 4, 2)) == "3,1,4,2"
    assert parse_deck("3,1,4,2") == (3, 1, 4, 2)
    assert parse_shuffle("2>5") == Shuffle(2, 5)
    path = (Shuffle(1, 1), Shuffle(1, 4), Shuffle(2, 3))
    assert format_path(path) == "1>1;1>4;2>3"
    assert parse_path(format_path(path)) == path
    assert parse_path("") == ()
    with pytest.raises(UsageError):
        parse_deck("1,1,2")
    with pytest.raises(UsageError):
        parse_shuffle("12")


def test_identity():
    assert identity(4) == (1, 2, 3, 4)
