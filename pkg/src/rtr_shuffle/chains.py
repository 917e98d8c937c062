"""The queue-size chain Y, its 9-state truncation, and their spectra.

States of the truncated chain are ordered ``[0, 1, ..., 7, inf]``; index 8
holds ``inf``.  State 0 is absorbing (a good time has been certified) and the
walk starts at ``inf`` (no i-or-j move yet).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .errors import NumericalError, UsageError

INF = math.inf
STATE_LABELS = ["0", "1", "2", "3", "4", "5", "6", "7", "inf"]
INF_INDEX = 8
TRUNCATION = 8


@dataclass(frozen=True)
class BoundConstants:
    a: float = 0.6526
    c_mix: float = 1.5324
    truncation_level: int = TRUNCATION
    shift: float = 1 / 16
    cs_factor: float = math.sqrt(8)


CONSTANTS = BoundConstants()


def q_rate(l: int, n: int) -> float:
    """Probability that a queue of size ``l`` shrinks by one (or absorbs, for l=1)."""
    if l < 1:
        raise UsageError("queue size must be >= 1")
    if l == 1:
        return 1 / n
    if l == 2:
        return (3 * n - 1) / n**2
    return (l - 1) * (n - l + 1) / n**2


def p_rate(l: int, n: int) -> float:
    """Probability that a queue of size ``l`` grows by one."""
    if l < 1:
        raise UsageError("queue size must be >= 1")
    if l == 1:
        return (n - 2) / n**2
    if l == 2:
        return (2 * n - 6) / n**2
    return l * (n - l - 1) / n**2


def y_transition(s: float, n: int) -> dict:
    """Law of the next Y state from ``s`` as ``{state: prob}``."""
    if s == 0:
        return {0: 1.0}
    if s == INF:
        return {1: 2 / n, INF: (n - 2) / n}
    l = int(s)
    out = {l - 1: q_rate(l, n), l + 1: p_rate(l, n)}
    reset = 2 / n if l >= 3 else 0.0
    if reset:
        out[1] = reset
    out[l] = 1.0 - out[l - 1] - out[l + 1] - reset
    return out


def y_step(s: float, rng: np.random.Generator, n: int) -> float:
    """One transition of Y from state ``s`` (``INF`` allowed)."""
    if n < 3:
        raise UsageError("Y needs n >= 3")
    u = rng.random()
    acc = 0.0
    law = y_transition(s, n)
    for state, prob in law.items():
        acc += prob
        if u < acc:
            return state
    return s


def simulate_y(n: int, t_max: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Run ``samples`` copies of Y for ``t_max`` steps.

    Returns an int array of shape ``(t_max + 1, samples)``; ``-1`` codes ``inf``.
    """
    if n < 3:
        raise UsageError("Y needs n >= 3")
    y = np.full(samples, -1, dtype=np.int64)
    out = np.empty((t_max + 1, samples), dtype=np.int64)
    out[0] = y
    ls = np.arange(n + 1)
    q = np.array([0.0] + [q_rate(l, n) for l in ls[1:]])
    p = np.array([0.0] + [max(p_rate(l, n), 0.0) for l in ls[1:]])
    r = np.where(ls >= 3, 2 / n, 0.0)
    for t in range(1, t_max + 1):
        u = rng.random(samples)
        fin = y > 0
        l = np.where(fin, y, 0)
        down = fin & (u < q[l])
        up = fin & ~down & (u < q[l] + p[l])
        reset = fin & ~down & ~up & (u < q[l] + p[l] + r[l])
        enter = (y == -1) & (u < 2 / n)
        y = np.where(down, y - 1, y)
        y = np.where(up, y + 1, y)
        y = np.where(reset | enter, 1, y)
        out[t] = y
    return out


def _check_n(n: int) -> None:
    if n < 9:
        raise UsageError("the truncated chain needs n >= 9")


def build_Ktilde(n: int) -> np.ndarray:
    """9x9 transition matrix of the truncated chain (size 8 rerouted to inf)."""
    _check_n(n)
    K = np.zeros((9, 9))
    K[0, 0] = 1.0
    K[INF_INDEX, 1] = 2 / n
    K[INF_INDEX, INF_INDEX] = (n - 2) / n
    for l in range(1, 8):
        for s, prob in y_transition(l, n).items():
            K[l, INF_INDEX if s == TRUNCATION else s] += prob
    return K


def scaled_generator(n: int) -> np.ndarray:
    """``n * (Ktilde_n - I)``."""
    return n * (build_Ktilde(n) - np.eye(9))


def build_C() -> np.ndarray:
    """Entrywise limit of :func:`scaled_generator` as ``n`` grows."""
    return np.array(
        [
            [0, 0, 0, 0, 0, 0, 0, 0, 0],
            [1, -2, 1, 0, 0, 0, 0, 0, 0],
            [0, 3, -5, 2, 0, 0, 0, 0, 0],
            [0, 2, 2, -7, 3, 0, 0, 0, 0],
            [0, 2, 0, 3, -9, 4, 0, 0, 0],
            [0, 2, 0, 0, 4, -11, 5, 0, 0],
            [0, 2, 0, 0, 0, 5, -13, 6, 0],
            [0, 2, 0, 0, 0, 0, 6, -15, 7],
            [0, 2, 0, 0, 0, 0, 0, 0, -2],
        ],
        dtype=float,
    )


def verify_limit(n: int) -> float:
    """Largest entrywise gap between ``n * B_n`` and ``C``."""
    return float(np.max(np.abs(scaled_generator(n) - build_C())))


@dataclass
class EigenReport:
    value: float
    kind: str  # "stochastic" or "generator"
    method: str
    iterations: int
    residual: float
    cross_check: float
    shift: float

    @property
    def agreement(self) -> float:
        return abs(self.value - self.cross_check)

    def to_json(self) -> dict:
        return {
            "lambda": self.value,
            "kind": self.kind,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "cross_check": self.cross_check,
            "agreement": self.agreement,
            "shift": self.shift,
        }


def perron_root(A: np.ndarray, tol: float = 1e-12, max_iter: int = 10**6) -> tuple[float, np.ndarray, int]:
    """Perron root of a nonnegative irreducible matrix by power iteration.

    Stops once successive Rayleigh quotients move by less than ``tol``.
    """
    A = np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise UsageError("power iteration needs a nonnegative matrix")
    x = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    rho = float(x @ A @ x)
    for it in range(1, max_iter + 1):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, it
        x = y / norm
        new = float(x @ A @ x)
        if abs(new - rho) < tol:
            return new, x, it
        rho = new
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


def rightmost_real_root(M: np.ndarray) -> float:
    """Largest real root of det(xI - M), from the exact characteristic polynomial."""
    size = M.shape[0]
    R = sympy.Matrix(size, size, lambda r, c: sympy.Rational(Fraction(float(M[r, c]))))
    x = sympy.Symbol("x")
    poly = sympy.Poly(R.charpoly(x).as_expr(), x)
    intervals = poly.intervals(eps=sympy.Rational(1, 10**15))
    lo, hi = max(intervals, key=lambda iv: iv[0][1])[0]
    return float((lo + hi) / 2)


def _absorbing_block(M: np.ndarray) -> tuple[np.ndarray, str]:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise UsageError("need a square matrix of size >= 2")
    rows = M.sum(axis=1)
    if np.allclose(rows, 1.0, atol=1e-10) and np.all(M >= -1e-15):
        kind = "stochastic"
        e0 = np.zeros(M.shape[0])
        e0[0] = 1.0
        absorbing = np.allclose(M[0], e0, atol=1e-15)
    elif np.allclose(rows, 0.0, atol=1e-9):
        kind = "generator"
        absorbing = np.allclose(M[0], 0.0, atol=1e-15)
    else:
        raise UsageError("matrix is neither stochastic nor a generator")
    if not absorbing:
        raise UsageError("state 0 is not absorbing")
    return M[1:, 1:], kind


def eigen_report(M: np.ndarray, tol: float = 1e-12, max_iter: int = 10**6) -> EigenReport:
    """Second largest eigenvalue of an absorbing chain (stochastic or generator form).

    Deletes the absorbing first row and column and works with the generator
    block ``G``.  The Perron root ``r`` of ``I + G / s`` is found by power
    iteration and mapped back as ``s * (r - 1)``; for a generator the shift is
    ``s = 16`` unless a diagonal entry would go negative.  The result is checked
    against the rightmost real root of the characteristic polynomial of ``G``.
    """
    block, kind = _absorbing_block(M)
    G = block - np.eye(block.shape[0]) if kind == "stochastic" else block
    worst = float(np.max(-np.diag(G)))
    if kind == "generator":
        s = max(16.0, worst * 16 / 15)
    else:
        s = worst * 16 / 15 if worst > 0 else 1.0
    J = np.eye(G.shape[0]) + G / s
    if np.min(np.diag(J)) < 1 / 16 - 1e-12 or np.any(J < -1e-15):
        raise UsageError("shifted block is not nonnegative")
    J = np.clip(J, 0.0, None)
    r, vec, iters = perron_root(J, tol=tol, max_iter=max_iter)
    mu = s * (r - 1)
    residual = float(np.linalg.norm(G @ vec - mu * vec, ord=np.inf))
    check = rightmost_real_root(G)
    value = mu + 1 if kind == "stochastic" else mu
    check = check + 1 if kind == "stochastic" else check
    return EigenReport(
        value=value, kind=kind, method="power+poly", iterations=iters,
        residual=residual, cross_check=check, shift=1 / s,
    )


def second_largest_eigenvalue(M: np.ndarray) -> float:
    """Value of :func:`eigen_report`; raises if the two methods disagree beyond 1e-8."""
    rep = eigen_report(M)
    if rep.agreement > 1e-8:
        raise NumericalError(f"power iteration and polynomial root disagree by {rep.agreement:.3e}")
    return rep.value


def ytilde_distribution(n: int, t: int) -> np.ndarray:
    """Exact law of the truncated chain after ``t`` steps from ``inf``."""
    K = build_Ktilde(n)
    v = np.zeros(9)
    v[INF_INDEX] = 1.0
    for _ in range(t):
        v = v @ K
    return v


def ytilde_path(n: int, t_max: int) -> np.ndarray:
    """Rows are the exact laws at ``t = 0..t_max``."""
    K = build_Ktilde(n)
    out = np.zeros((t_max + 1, 9))
    out[0, INF_INDEX] = 1.0
    for t in range(1, t_max + 1):
        out[t] = out[t - 1] @ K
    return out


def restricted_l2(dist: np.ndarray) -> float:
    """l2 norm of the non-absorbed part of a 9-state law."""
    return float(np.sqrt(np.sum(dist[1:] ** 2)))


@dataclass
class L2Diagnostic:
    n: int
    k_max: int
    lam: float
    sup_ratio: float
    argmax_k: int
    cauchy_schwarz_ok: bool


def l2_diagnostic(n: int, k_max: int = 1000) -> L2Diagnostic:
    """Measure ``||law_k restricted|| / lambda^k`` and the sqrt(8) step for k <= k_max."""
    lam = second_largest_eigenvalue(build_Ktilde(n))
    laws = ytilde_path(n, k_max)
    sup, arg, cs_ok = 0.0, 0, True
    for k in range(1, k_max + 1):
        norm = restricted_l2(laws[k])
        ratio = norm / lam**k
        if ratio > sup:
            sup, arg = ratio, k
        alive = math.fsum(laws[k][1:])
        if alive > CONSTANTS.cs_factor * norm * (1 + 1e-12):
            cs_ok = False
    return L2Diagnostic(n, k_max, lam, sup, arg, cs_ok)


@dataclass
class DominanceReport:
    n: int
    t_grid: list[int]
    samples: int
    seed: int
    worst_violation: float  # max of P(Y_t > m) - P(Ytilde_t > m); <= 0 means dominated
    worst_z: float  # the same gap in standard errors
    worst_at: tuple[int, int]  # (t, m)
    absorbed_ok: bool  # P(Y_t = 0) >= P(Ytilde_t = 0) - 3 SE on the grid
    mass_error: float

    def passed(self, z: float = 3.0) -> bool:
        return self.worst_z <= z and self.absorbed_ok

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t_grid": self.t_grid,
            "samples": self.samples,
            "seed": self.seed,
            "worst_violation": self.worst_violation,
            "worst_z": self.worst_z,
            "worst_at": list(self.worst_at),
            "absorbed_ok": self.absorbed_ok,
            "mass_error": self.mass_error,
            "passed": self.passed(),
        }


def project(y: np.ndarray) -> np.ndarray:
    """Map Y values (``-1`` = inf) onto truncated-chain indices; sizes >= 8 join inf."""
    return np.where((y < 0) | (y >= TRUNCATION), INF_INDEX, y)


def dominance_check(n: int, t_max: int, samples: int, seed: int = 0, step: int = 10) -> DominanceReport:
    """Compare Monte Carlo tails of Y with the exact tails of the truncated chain.

    Checks ``P(Y_t > m) <= P(Ytilde_t > m)`` for ``m = 0..7`` on the grid
    ``t = 0, step, 2*step, ..., t_max``.
    """
    from .rng import make_rng

    _check_n(n)
    grid = list(range(0, t_max + 1, step))
    if grid[-1] != t_max:
        grid.append(t_max)
    ys = simulate_y(n, t_max, samples, make_rng(seed, 0))
    exact = ytilde_path(n, t_max)
    mass_error = float(np.max(np.abs(exact.sum(axis=1) - 1.0)))
    worst, worst_z, worst_at = -math.inf, -math.inf, (0, 0)
    absorbed_ok = True
    for t in grid:
        counts = np.bincount(project(ys[t]), minlength=9)
        emp = counts / samples
        for m in range(8):
            pe = float(emp[m + 1:].sum())
            px = float(exact[t][m + 1:].sum())
            gap = pe - px
            se = math.sqrt(max(pe * (1 - pe), px * (1 - px)) / samples)
            z = gap / se if se > 0 else (0.0 if abs(gap) < 1e-12 else math.copysign(math.inf, gap))
            if z > worst_z or (z == worst_z and gap > worst):
                worst, worst_z, worst_at = gap, z, (t, m)
        # m = 0 read from the absorbed side
        pa, pax = float(emp[0]), float(exact[t][0])
        se0 = math.sqrt(max(pa * (1 - pa), pax * (1 - pax)) / samples)
        if pa < pax - 3 * se0 - 1e-12:
            absorbed_ok = False
    return DominanceReport(n, grid, samples, seed, worst, worst_z, worst_at, absorbed_ok, mass_error)


def survival_bound(n: int, k: float, a: float | None = None) -> float:
    """Asymptotic tail bound ``exp(-a k / n)`` on ``P(T >= k)``."""
    if n < 2:
        raise UsageError("n must be >= 2")
    a = CONSTANTS.a if a is None else a
    return math.exp(-a * k / n)


def path_coupling_bound(n: int, t: float, a: float | None = None) -> float:
    """``(n - 1) exp(-a t / n)``, the bound on the distance to uniform after t steps."""
    return (n - 1) * survival_bound(n, t, a)


def mixing_bound(n: int, eps: float, a: float | None = None) -> int:
    """Least integer ``t`` with ``(n - 1) exp(-a t / n) <= eps``."""
    if not 0 < eps < 1:
        raise UsageError("eps must lie in (0, 1)")
    if n < 1:
        raise UsageError("n must be >= 1")
    a = CONSTANTS.a if a is None else a
    if n - 1 <= eps:
        return 0
    t = max(0, math.ceil(n / a * math.log((n - 1) / eps)))
    while t > 0 and path_coupling_bound(n, t - 1, a) <= eps:
        t -= 1
    while path_coupling_bound(n, t, a) > eps:
        t += 1
    return t
