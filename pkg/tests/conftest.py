import math
from itertools import permutations

import numpy as np
import pytest

from rtr_shuffle.deck import Shuffle, apply_shuffle


def brute_kernel(n):
    """Dense n! x n! transition matrix built by applying every shuffle to every deck."""
    decks = list(permutations(range(1, n + 1)))
    index = {d: r for r, d in enumerate(decks)}
    P = np.zeros((len(decks), len(decks)))
    for r, d in enumerate(decks):
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                P[r, index[apply_shuffle(d, Shuffle(a, b))]] += 1
    return P / n**2, decks, index


@pytest.fixture(scope="session")
def kernels():
    return {n: brute_kernel(n) for n in range(2, 6)}
