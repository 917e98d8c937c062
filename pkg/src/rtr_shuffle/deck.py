"""Decks, insertion shuffles and shuffle paths.

A deck is a tuple of card labels ``1..n`` read left to right.  A shuffle
``Shuffle(a, b)`` removes card ``a`` and reinserts it immediately to the right
of card ``b``; ``Shuffle(a, a)`` puts card ``a`` in the leftmost position.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import UsageError

Deck = tuple[int, ...]


class Shuffle(NamedTuple):
    a: int
    b: int

    def __str__(self) -> str:
        return f"{self.a}>{self.b}"


ShufflePath = tuple[Shuffle, ...]


def identity(n: int) -> Deck:
    return tuple(range(1, n + 1))


def check_deck(deck: Sequence[int]) -> Deck:
    deck = tuple(int(c) for c in deck)
    if sorted(deck) != list(range(1, len(deck) + 1)):
        raise UsageError(f"not a deck of labels 1..{len(deck)}: {deck}")
    return deck


def check_shuffle(s: Shuffle, n: int) -> None:
    if not (1 <= s.a <= n and 1 <= s.b <= n):
        raise UsageError(f"shuffle {s} invalid for a deck of {n} cards")


def apply_shuffle(deck: Deck, s: Shuffle) -> Deck:
    """Return ``deck`` after the insertion move ``s``."""
    a, b = s
    n = len(deck)
    check_shuffle(s, n)
    rest = [c for c in deck if c != a]
    if a == b:
        return (a, *rest)
    k = rest.index(b) + 1
    return (*rest[:k], a, *rest[k:])


def apply_path(deck: Deck, path: Sequence[Shuffle]) -> list[Deck]:
    """Trajectory ``[x_0, x_1, ..., x_k]`` of ``deck`` under ``path``."""
    traj = [tuple(deck)]
    for s in path:
        traj.append(apply_shuffle(traj[-1], s))
    return traj


def final_deck(deck: Deck, path: Sequence[Shuffle]) -> Deck:
    """End point of :func:`apply_path` without storing the trajectory."""
    cur = list(deck)
    n = len(cur)
    for a, b in path:
        if not (1 <= a <= n and 1 <= b <= n):
            raise UsageError(f"shuffle {a}>{b} invalid for a deck of {n} cards")
        cur.remove(a)
        if a == b:
            cur.insert(0, a)
        else:
            cur.insert(cur.index(b) + 1, a)
    return tuple(cur)


def random_shuffle(rng: np.random.Generator, n: int) -> Shuffle:
    """Uniform draw from the ``n**2`` shuffles."""
    if n < 1:
        raise UsageError("n must be >= 1")
    a, b = rng.integers(1, n + 1, size=2)
    return Shuffle(int(a), int(b))


def random_path(rng: np.random.Generator, n: int, k: int) -> ShufflePath:
    ab = rng.integers(1, n + 1, size=(k, 2))
    return tuple(Shuffle(int(a), int(b)) for a, b in ab)


def transpose_relabel(s: Shuffle, i: int, j: int) -> Shuffle:
    """Swap the roles of cards ``i`` and ``j`` in ``s``."""
    swap = {i: j, j: i}
    return Shuffle(swap.get(s.a, s.a), swap.get(s.b, s.b))


def swap_cards(deck: Deck, i: int, j: int) -> Deck:
    if i == j:
        raise UsageError("swap_cards needs two distinct cards")
    swap = {i: j, j: i}
    return tuple(swap.get(c, c) for c in deck)


def position(deck: Deck, card: int) -> int:
    """1-based position of ``card`` (the permutation value at ``card``)."""
    return deck.index(card) + 1


def rank(deck: Sequence[int]) -> int:
    """Lexicographic index of ``deck`` among all orders of its cards."""
    deck = check_deck(deck)
    n = len(deck)
    r = 0
    remaining = list(range(1, n + 1))
    for idx, c in enumerate(deck):
        k = remaining.index(c)
        r += k * math.factorial(n - 1 - idx)
        remaining.pop(k)
    return r


def unrank(r: int, n: int) -> Deck:
    if not 0 <= r < math.factorial(n):
        raise UsageError(f"rank {r} out of range for n={n}")
    remaining = list(range(1, n + 1))
    out = []
    for idx in range(n - 1, -1, -1):
        k, r = divmod(r, math.factorial(idx))
        out.append(remaining.pop(k))
    return tuple(out)


# text formats: "3,1,4,2", "1>3", "1>1;1>4;2>3"

def format_deck(deck: Deck) -> str:
    return ",".join(str(c) for c in deck)


def parse_deck(text: str) -> Deck:
    try:
        return check_deck(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad deck {text!r}: {exc}") from None


def parse_shuffle(text: str) -> Shuffle:
    try:
        a, b = text.split(">")
        return Shuffle(int(a), int(b))
    except ValueError:
        raise UsageError(f"bad shuffle {text!r}; expected 'a>b'") from None


def format_path(path: Sequence[Shuffle]) -> str:
    return ";".join(str(s) for s in path)


def parse_path(text: str) -> ShufflePath:
    if not text.strip():
        return ()
    return tuple(parse_shuffle(tok) for tok in text.split(";"))
