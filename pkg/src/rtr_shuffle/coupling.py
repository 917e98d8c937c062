"""Non-Markovian coupling of two insertion-shuffle walks from adjacent decks.

For a special pair ``(i, j)`` a k-path drives a queue of cards whose
positions differ between the coupled decks.  The last *good time* ``T`` of
the path decides which prefix gets its ``i``/``j`` labels exchanged by
:func:`theta`; the second deck runs on the exchanged path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .deck import Deck, Shuffle, ShufflePath, final_deck, format_deck, swap_cards, transpose_relabel
from .errors import UsageError

INF = math.inf


@dataclass(frozen=True)
class SpecialPair:
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise UsageError("special pair needs i != j")


@dataclass(frozen=True)
class CouplingVariant:
    """Resolution of the two ambiguous points of the construction.

    ``good_time_rule='amended'`` refuses a good time whose move is
    ``Shuffle(i, j)`` or ``Shuffle(j, i)``.  ``queue_membership='self_exclusive'``
    tests ``b in Q - {a}`` instead of ``b in Q`` when growing the queue.
    """

    good_time_rule: Literal["strict", "amended"] = "amended"
    queue_membership: Literal["literal", "self_exclusive"] = "self_exclusive"

    def __post_init__(self):
        if self.good_time_rule not in ("strict", "amended"):
            raise UsageError(f"unknown good-time rule {self.good_time_rule!r}")
        if self.queue_membership not in ("literal", "self_exclusive"):
            raise UsageError(f"unknown queue membership {self.queue_membership!r}")


DEFAULT = CouplingVariant()
STRICT = CouplingVariant("strict", "self_exclusive")


@dataclass
class CoupledOutcome:
    T: float  # int, or INF
    coalesced: bool
    x_final: Deck
    x_prime_final: Deck
    good_times: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "T": "inf" if self.T == INF else int(self.T),
            "coalesced": self.coalesced,
            "good_times": list(self.good_times),
            "x_final": format_deck(self.x_final),
            "x_prime_final": format_deck(self.x_prime_final),
        }


def queue_step(Q: frozenset, s: Shuffle, pair: SpecialPair, v: CouplingVariant = DEFAULT) -> frozenset:
    a, b = s
    if a == pair.j:
        return frozenset((pair.i,))
    if a == pair.i:
        return frozenset((pair.j,))
    if v.queue_membership == "literal":
        grows = b in Q
    else:
        grows = b != a and b in Q
    return Q | {a} if grows else Q - {a}


def queue_trajectory(path: Sequence[Shuffle], pair: SpecialPair, v: CouplingVariant = DEFAULT) -> list[frozenset]:
    traj = [frozenset()]
    for s in path:
        traj.append(queue_step(traj[-1], s, pair, v))
    return traj


def good_times(path: Sequence[Shuffle], pair: SpecialPair, v: CouplingVariant = DEFAULT) -> list[int]:
    """Good times of ``path`` (1-based), in increasing order."""
    i, j = pair.i, pair.j
    self_excl = v.queue_membership == "self_exclusive"
    amended = v.good_time_rule == "amended"
    out = []
    Q: set = set()
    prev_t = 0  # time of the last i-or-j move, 0 if none yet
    prev_card = 0
    prev_eligible = False
    for t, (a, b) in enumerate(path, start=1):
        if a == i or a == j:
            # Q currently holds Q_{t-1}
            if prev_t and prev_eligible and len(Q) == 1 and a != prev_card:
                out.append(prev_t)
            prev_t, prev_card = t, a
            prev_eligible = not (amended and b in (i, j) and b != a)
            Q = {j} if a == i else {i}
        elif b in Q and (b != a or not self_excl):
            Q.add(a)
        else:
            Q.discard(a)
    return out


def last_good_time(path: Sequence[Shuffle], pair: SpecialPair, v: CouplingVariant = DEFAULT) -> float:
    """Largest good time, or ``INF``; a finite value is always ``< len(path)``."""
    gt = good_times(path, pair, v)
    return gt[-1] if gt else INF


def _relabel_prefix(path: Sequence[Shuffle], T: float, pair: SpecialPair) -> ShufflePath:
    stop = len(path) if T == INF else int(T) - 1
    return tuple(
        transpose_relabel(s, pair.i, pair.j) if t < stop else s for t, s in enumerate(path)
    )


def theta(path: Sequence[Shuffle], pair: SpecialPair, v: CouplingVariant = DEFAULT) -> ShufflePath:
    """Exchange ``i`` and ``j`` in every move strictly before the last good time.

    With no good time the whole path is relabelled.  ``theta`` is an involution
    and preserves the last good time.
    """
    return _relabel_prefix(path, last_good_time(path, pair, v), pair)


def run_coupled(x: Deck, pair: SpecialPair, path: Sequence[Shuffle], v: CouplingVariant = DEFAULT) -> CoupledOutcome:
    """Run ``x`` along ``path`` and ``(i j) x`` along ``theta(path)``."""
    gt = good_times(path, pair, v)
    T = gt[-1] if gt else INF
    xf = final_deck(x, path)
    xpf = final_deck(swap_cards(x, pair.i, pair.j), _relabel_prefix(path, T, pair))
    return CoupledOutcome(T=T, coalesced=xf == xpf, x_final=xf, x_prime_final=xpf, good_times=gt)
