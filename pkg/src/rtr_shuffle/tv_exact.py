"""Exact evolution of the shuffle's law over all n! decks (small n only).

Decks are indexed by their lexicographic rank.  The one-step operator is
stored as a table ``dest[r, s]`` giving the rank reached from rank ``r`` by
shuffle number ``s`` (``s = (a-1)*n + (b-1)``), so a step is one weighted
``bincount``.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from itertools import permutations

import numpy as np

from .deck import Deck, identity, rank, swap_cards
from .errors import ResourceError, UsageError

MAX_N = 8


def _guard(n: int, allow_large: bool) -> None:
    if n < 1:
        raise UsageError("n must be >= 1")
    if n > MAX_N:
        if not allow_large:
            raise ResourceError(f"n={n} exceeds the exact-evolution cap of {MAX_N}")
        warnings.warn(f"exact evolution at n={n} needs {math.factorial(n) * n * n} table entries")


def all_decks(n: int) -> np.ndarray:
    """``(n!, n)`` array of decks in rank order."""
    return np.array(list(permutations(range(1, n + 1))), dtype=np.int64).reshape(-1, n)


def rank_rows(decks: np.ndarray) -> np.ndarray:
    """Vectorised :func:`~rtr_shuffle.deck.rank` over the rows of ``decks``."""
    m, n = decks.shape
    out = np.zeros(m, dtype=np.int64)
    for p in range(n):
        smaller_later = (decks[:, p + 1:] < decks[:, p:p + 1]).sum(axis=1)
        out += smaller_later * math.factorial(n - 1 - p)
    return out


@lru_cache(maxsize=4)
def transition_table(n: int, allow_large: bool = False) -> np.ndarray:
    _guard(n, allow_large)
    decks = all_decks(n)
    m = decks.shape[0]
    pos = np.argsort(decks, axis=1)  # pos[r, c-1] = 0-based position of card c
    base_keys = np.tile(2 * np.arange(n), (m, 1))
    rows = np.arange(m)[:, None]
    dest = np.empty((m, n * n), dtype=np.int64)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            keys = base_keys.copy()
            pa = pos[:, a - 1]
            # card a sorts just after card b, or ahead of everything
            keys[np.arange(m), pa] = -1 if a == b else 2 * pos[:, b - 1] + 1
            order = np.argsort(keys, axis=1, kind="stable")
            dest[:, (a - 1) * n + (b - 1)] = rank_rows(decks[rows, order])
    dest.setflags(write=False)
    return dest


def point_mass(deck: Deck) -> np.ndarray:
    n = len(deck)
    w = np.zeros(math.factorial(n))
    w[rank(deck)] = 1.0
    return w


def uniform(n: int) -> np.ndarray:
    return np.full(math.factorial(n), 1.0 / math.factorial(n))


def _n_of(weights: np.ndarray) -> int:
    size = len(weights)
    n = 1
    while math.factorial(n) < size:
        n += 1
    if math.factorial(n) != size:
        raise UsageError(f"vector length {size} is not a factorial")
    return n


def evolve(weights: np.ndarray, steps: int, allow_large: bool = False) -> np.ndarray:
    """Push a law on decks forward ``steps`` shuffles."""
    weights = np.asarray(weights, dtype=float)
    if steps == 0:
        return weights.copy()
    n = _n_of(weights)
    dest = transition_table(n, allow_large)
    flat = dest.ravel()
    w = weights
    for _ in range(steps):
        w = np.bincount(flat, weights=np.repeat(w, n * n), minlength=len(w)) / (n * n)
    return w


def tv(mu: np.ndarray, nu: np.ndarray) -> float:
    """Total variation distance, half the l1 gap, with exact summation."""
    mu, nu = np.asarray(mu, dtype=float), np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise UsageError("distributions live on different spaces")
    return 0.5 * math.fsum(np.abs(mu - nu).tolist())


def mass(weights: np.ndarray) -> float:
    return math.fsum(np.asarray(weights, dtype=float).tolist())


def d_curve(n: int, t_max: int, start: Deck | None = None) -> list[float]:
    """Distance to uniform at ``t = 0..t_max`` from ``start`` (identity by default).

    The walk commutes with relabelling the cards, so any start gives the same
    curve as the worst case.
    """
    w = point_mass(identity(n) if start is None else start)
    u = uniform(n)
    out = [tv(w, u)]
    for _ in range(t_max):
        w = evolve(w, 1)
        out.append(tv(w, u))
    return out


def d_exact(n: int, t: int) -> float:
    return d_curve(n, t)[-1]


def adjacent_curve(n: int, t_max: int, i: int = 1, j: int = 2, start: Deck | None = None) -> list[float]:
    """Distance between the laws from ``start`` and from ``start`` with cards ``i, j`` swapped.

    ``start`` defaults to the identity.  The curve depends on where the two
    cards sit, not on their labels.
    """
    if n < 2:
        raise UsageError("adjacent decks need n >= 2")
    x = identity(n) if start is None else start
    w, w2 = point_mass(x), point_mass(swap_cards(x, i, j))
    out = [tv(w, w2)]
    for _ in range(t_max):
        w, w2 = evolve(w, 1), evolve(w2, 1)
        out.append(tv(w, w2))
    return out


def adjacent_tv_exact(n: int, t: int, i: int = 1, j: int = 2, start: Deck | None = None) -> float:
    return adjacent_curve(n, t, i, j, start)[-1]


def mixing_time_exact(n: int, eps: float, t_cap: int = 100_000) -> int:
    """Least ``t`` with ``d(t) <= eps``."""
    if not 0 < eps < 1:
        raise UsageError("eps must lie in (0, 1)")
    _guard(n, False)
    w, u = point_mass(identity(n)), uniform(n)
    for t in range(t_cap + 1):
        if tv(w, u) <= eps:
            return t
        w = evolve(w, 1)
    raise UsageError(f"d(t) still above {eps} at t={t_cap}")
