"""Seeded Monte Carlo estimators for the coupling.

Trajectories are grouped in fixed blocks of ``BLOCK`` paths.  Block ``b`` of a
run with master seed ``s`` draws its moves from substream ``(n, k, b)`` of
``s``, so trajectory ``idx`` always sees the same path (block ``idx // BLOCK``,
row ``idx % BLOCK``) however the blocks are scheduled.  Workers only return
integer counts, which are summed at the end.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .coupling import DEFAULT, INF, CouplingVariant, SpecialPair, run_coupled
from .chains import CONSTANTS, p_rate, q_rate
from .deck import Shuffle, identity
from .errors import UsageError
from .rng import make_rng

BLOCK = 2048
Z95 = 1.959963984540054
PAIR = SpecialPair(1, 2)


@dataclass
class EstimateWithCI:
    point: float
    lo: float
    hi: float
    samples: int
    successes: int
    method: str = "wilson"

    @property
    def se(self) -> float:
        """Plug-in binomial standard error."""
        if self.samples == 0:
            return math.nan
        return math.sqrt(self.point * (1 - self.point) / self.samples)

    def to_json(self) -> dict:
        return {"point": self.point, "ci": [self.lo, self.hi], "samples": self.samples,
                "successes": self.successes, "se": self.se, "method": self.method}


def wilson(successes: int, samples: int, z: float = Z95) -> EstimateWithCI:
    """Wilson score interval for a Bernoulli mean."""
    if samples <= 0:
        raise UsageError("need at least one sample")
    p = successes / samples
    denom = 1 + z * z / samples
    centre = (p + z * z / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / denom
    return EstimateWithCI(p, max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half)), samples, successes)


def draw_paths(seed: int, n: int, k: int, block: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Moves of one block as ``(a, b)`` arrays of shape ``(size, k)``."""
    rng = make_rng(seed, n, k, block)
    ab = rng.integers(1, n + 1, size=(size, k, 2))
    return ab[:, :, 0], ab[:, :, 1]


def _blocks(samples: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK, samples - b * BLOCK)) for b in range(math.ceil(samples / BLOCK))]


def _run_blocks(fn: Callable, samples: int, threads: int) -> np.ndarray:
    blocks = _blocks(samples)
    if threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, blocks))
    else:
        parts = [fn(blk) for blk in blocks]
    return np.sum(parts, axis=0, dtype=np.int64)


def queue_last_good_times(a: np.ndarray, b: np.ndarray, n: int, pair: SpecialPair = PAIR,
                          v: CouplingVariant = DEFAULT) -> np.ndarray:
    """Last good time of each row path from the queue process alone; ``-1`` means none."""
    rows, k = a.shape
    i, j = pair.i, pair.j
    self_excl = v.queue_membership == "self_exclusive"
    amended = v.good_time_rule == "amended"
    Q = np.zeros((rows, n + 1), dtype=bool)
    size = np.zeros(rows, dtype=np.int64)
    prev_t = np.zeros(rows, dtype=np.int64)
    prev_card = np.zeros(rows, dtype=np.int64)
    eligible = np.zeros(rows, dtype=bool)
    T = np.full(rows, -1, dtype=np.int64)
    idx = np.arange(rows)
    for t in range(1, k + 1):
        at, bt = a[:, t - 1], b[:, t - 1]
        special = (at == i) | (at == j)
        good = special & (prev_t > 0) & eligible & (size == 1) & (at != prev_card)
        T = np.where(good, prev_t, T)
        # ordinary moves
        grows = Q[idx, bt] & ~special
        if self_excl:
            grows &= bt != at
        was_in = Q[idx, at] & ~special
        Q[idx, at] = np.where(special, Q[idx, at], grows)
        size += grows.astype(np.int64) - was_in.astype(np.int64)
        # resets
        if special.any():
            sp = idx[special]
            Q[sp] = False
            Q[sp, np.where(at[sp] == i, j, i)] = True
            size[sp] = 1
            prev_t[sp] = t
            prev_card[sp] = at[sp]
            bs = bt[sp]
            eligible[sp] = ~(amended & ((bs == i) | (bs == j)) & (bs != at[sp]))
    return T


def _tail_block(blk, seed, n, k, v):
    block, size = blk
    a, b = draw_paths(seed, n, k, block, size)
    T = queue_last_good_times(a, b, n, PAIR, v)
    return np.array([np.count_nonzero(T < 0)])


def estimate_T_tail(n: int, k: int, samples: int, seed: int = 0, variant: CouplingVariant = DEFAULT,
                    threads: int = 1) -> EstimateWithCI:
    """Fraction of uniform k-paths whose last good time is ``inf`` (equivalently ``>= k``)."""
    if n < 3:
        raise UsageError("n must be >= 3")
    counts = _run_blocks(partial(_tail_block, seed=seed, n=n, k=k, v=variant), samples, threads)
    return wilson(int(counts[0]), samples)


@dataclass
class Noncoalescence:
    overall: EstimateWithCI
    conditional: EstimateWithCI | None  # None when T < k was never observed
    t_lt_k: int
    fail_given_t_lt_k: int
    ij_move_at_T: int  # trials with T < k whose time-T move is i>j or j>i

    def to_json(self) -> dict:
        return {
            "overall": self.overall.to_json(),
            "conditional_given_T_lt_k": "undefined" if self.conditional is None else self.conditional.to_json(),
            "T_lt_k": self.t_lt_k,
            "failures_given_T_lt_k": self.fail_given_t_lt_k,
            "ij_move_at_T": self.ij_move_at_T,
        }


def _coupled_block(blk, seed, n, k, v):
    block, size = blk
    a, b = draw_paths(seed, n, k, block, size)
    x = identity(n)
    fail = t_lt = fail_lt = ij_at_T = 0
    for r in range(size):
        path = [Shuffle(int(p), int(q)) for p, q in zip(a[r].tolist(), b[r].tolist())]
        out = run_coupled(x, PAIR, path, v)
        if not out.coalesced:
            fail += 1
        if out.T != INF:
            t_lt += 1
            fail_lt += not out.coalesced
            m = path[int(out.T) - 1]
            ij_at_T += {m.a, m.b} == {PAIR.i, PAIR.j}
    return np.array([fail, t_lt, fail_lt, ij_at_T])


def estimate_noncoalescence(n: int, k: int, samples: int, seed: int = 0,
                            variant: CouplingVariant = DEFAULT, threads: int = 1) -> Noncoalescence:
    """``P(x_k != x'_k)`` and ``P(x_k != x'_k | T < k)`` from full deck runs.

    Starts from the identity deck and its copy with cards 1 and 2 exchanged.
    """
    if n < 3:
        raise UsageError("n must be >= 3")
    if k == 0:
        return Noncoalescence(wilson(samples, samples), None, 0, 0, 0)
    fn = partial(_coupled_block, seed=seed, n=n, k=k, v=variant)
    fail, t_lt, fail_lt, ij_at_T = (int(c) for c in _run_blocks(fn, samples, threads))
    cond = wilson(fail_lt, t_lt) if t_lt else None
    return Noncoalescence(wilson(fail, samples), cond, t_lt, fail_lt, ij_at_T)


@dataclass
class QueueRateRow:
    l: int
    visits: int
    q_hat: float
    q: float
    p_hat: float
    p: float
    reset_hat: float
    reset: float
    z_q: float
    z_p: float
    z_reset: float


def _z(hat: float, theory: float, visits: int) -> float:
    se = math.sqrt(theory * (1 - theory) / visits) if visits else math.nan
    return (hat - theory) / se if se and se > 0 else (0.0 if hat == theory else math.inf)


def queue_transition_counts(n: int, steps: int, seed: int = 0, membership: str = "self_exclusive",
                            pair: SpecialPair = PAIR, chunk: int = 1 << 16) -> dict[int, np.ndarray]:
    """Tally queue-size moves along one long uniform shuffle stream.

    Returns ``{l: [visits, down, up, special, absorb]}`` where ``down``/``up``
    count ordinary size changes, ``special`` counts i-or-j moves and
    ``absorb`` counts moves of the queued special card from a singleton.
    """
    i, j = pair.i, pair.j
    self_excl = membership == "self_exclusive"
    rng = make_rng(seed, n, steps)
    Q: set = set()
    counts: dict[int, np.ndarray] = {}
    done = 0
    while done < steps:
        m = min(chunk, steps - done)
        ab = rng.integers(1, n + 1, size=(m, 2)).tolist()
        done += m
        for a, b in ab:
            l = len(Q)
            if l:
                row = counts.get(l)
                if row is None:
                    row = counts[l] = np.zeros(5, dtype=np.int64)
                row[0] += 1
            if a == i or a == j:
                if l:
                    row[3] += 1
                    if l == 1 and a in Q:
                        row[4] += 1
                Q = {j} if a == i else {i}
            elif b in Q and (b != a or not self_excl):
                if a not in Q:
                    Q.add(a)
                    row[2] += 1
            elif a in Q:
                Q.discard(a)
                row[1] += 1
    return counts


def queue_transition_stats(n: int, steps: int, seed: int = 0, membership: str = "self_exclusive",
                           max_l: int | None = None) -> list[QueueRateRow]:
    """Empirical against displayed size-change rates, one row per queue size.

    ``q_hat(1)`` is the rate at which the queued special card moves (the
    absorbing event); ``q_hat(2)`` counts every move from size 2 to size 1,
    resets included; for ``l >= 3`` resets are reported separately.
    """
    if n < 9:
        raise UsageError("queue statistics need n >= 9")
    counts = queue_transition_counts(n, steps, seed, membership)
    rows = []
    for l in sorted(counts):
        if max_l is not None and l > max_l:
            break
        visits, down, up, special, absorb = (int(c) for c in counts[l])
        if l == 1:
            qh = absorb / visits
        elif l == 2:
            qh = (down + special) / visits
        else:
            qh = down / visits
        ph, rh = up / visits, special / visits
        q, p, r = q_rate(l, n), max(p_rate(l, n), 0.0), 2 / n
        rows.append(QueueRateRow(l, visits, qh, q, ph, p, rh, r,
                                 _z(qh, q, visits), _z(ph, p, visits), _z(rh, r, visits)))
    return rows


@dataclass
class CurveRow:
    k: int
    empirical: float  # (n - 1) * P(x_k != x'_k)
    analytic: float  # (n - 1) * exp(-a k / n)
    estimate: EstimateWithCI = field(repr=False)


def coupling_bound_curve(n: int, k_list: Sequence[int], samples: int, seed: int = 0,
                         variant: CouplingVariant = DEFAULT, threads: int = 1) -> list[CurveRow]:
    """Path-coupling bound on the distance to uniform, measured and analytic."""
    rows = []
    for k in k_list:
        est = estimate_noncoalescence(n, k, samples, seed, variant, threads).overall
        rows.append(CurveRow(k, (n - 1) * est.point, (n - 1) * math.exp(-CONSTANTS.a * k / n), est))
    return rows


