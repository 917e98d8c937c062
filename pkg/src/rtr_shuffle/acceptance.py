"""Acceptance checks, shared by the test suite and ``rtr-shuffle verify``.

Each check returns a :class:`Criterion`; ``quick=True`` cuts Monte Carlo
sample counts tenfold.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from . import chains, coupling, montecarlo, tv_exact
from .chains import CONSTANTS, BoundConstants
from .coupling import DEFAULT, STRICT, CouplingVariant, SpecialPair
from .deck import Shuffle, random_path, unrank
from .rng import make_rng


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.name} ({self.seconds:.2f}s)"


def _timed(number: int, name: str, limit: float | None, fn: Callable[[], tuple[bool, dict]]) -> Criterion:
    start = time.perf_counter()
    ok, details = fn()
    secs = time.perf_counter() - start
    if limit is not None:
        details["time_limit_s"] = limit
        ok = ok and secs < limit
    return Criterion(number, name, bool(ok), secs, details)


def _scale(samples: int, quick: bool) -> int:
    return samples // 10 if quick else samples


def eigenvalue_reproduction(consts: BoundConstants = CONSTANTS) -> Criterion:
    def run():
        rep = chains.eigen_report(chains.build_C())
        ok = rep.value < -consts.a and rep.agreement <= 1e-8
        return ok, {"lambda_C": rep.value, "cross_check": rep.cross_check,
                    "agreement": rep.agreement, "threshold": -consts.a}
    return _timed(1, "second largest eigenvalue of C below -a, two methods agree", 1.0, run)


def constant_consistency(consts: BoundConstants = CONSTANTS) -> Criterion:
    def run():
        lam = chains.second_largest_eigenvalue(chains.build_C())
        checks = {
            "lambda_below_minus_a": lam < -consts.a,
            "inverse_rate_below_c_mix": 1 / abs(lam) < consts.c_mix,
            "c_mix_times_a_above_one": consts.c_mix * consts.a > 1,
        }
        return all(checks.values()), {"lambda_C": lam, "inverse_rate": 1 / abs(lam), **checks}
    return _timed(2, "1/|lambda(C)| < c_mix consistency", None, run)


def generator_convergence() -> Criterion:
    def run():
        lam_c = chains.second_largest_eigenvalue(chains.build_C())
        ns = [100, 1000, 10000]
        errs = [chains.verify_limit(n) for n in ns]
        gaps = [abs(chains.second_largest_eigenvalue(chains.scaled_generator(n)) - lam_c) for n in ns]
        ok = (all(e <= 100 / n for e, n in zip(errs, ns))
              and all(x > y for x, y in zip(errs, errs[1:]))
              and all(x > y for x, y in zip(gaps, gaps[1:])))
        return ok, {"n": ns, "limit_error": errs, "eigen_gap": gaps}
    return _timed(3, "n*B_n converges to C and its eigenvalue to lambda(C)", 1.0, run)


def exact_tv_oracle() -> Criterion:
    def run():
        d21 = tv_exact.d_exact(2, 1)
        d31 = tv_exact.d_exact(3, 1)
        a31 = tv_exact.adjacent_tv_exact(3, 1)
        curve = tv_exact.d_curve(5, 100)
        monotone = all(y <= x + 1e-15 for x, y in zip(curve, curve[1:]))
        rng = make_rng(0, 4)
        ref = tv_exact.d_curve(4, 20)
        spread = 0.0
        for _ in range(5):
            start = unrank(int(rng.integers(24)), 4)
            other = tv_exact.d_curve(4, 20, start)
            spread = max(spread, max(abs(x - y) for x, y in zip(ref, other)))
        checks = {
            "d_2_1": abs(d21) <= 1e-12,
            "d_3_1": abs(d31 - 5 / 18) <= 1e-12,
            "adjacent_3_1": abs(a31 - 1 / 3) <= 1e-12,
            "d_5_nonincreasing": monotone,
            "start_invariance_n4": spread <= 1e-12,
        }
        return all(checks.values()), {**checks, "start_spread": spread}
    return _timed(4, "exact TV oracle values and symmetries", 60.0, run)


def coupling_validity(quick: bool = False, seed: int = 0, threads: int = 1) -> Criterion:
    def run():
        samples = _scale(10**5, quick)
        exact = tv_exact.adjacent_curve(5, 20)
        rows, ok = [], True
        for t in (5, 10, 20):
            est = montecarlo.estimate_noncoalescence(5, t, samples, seed, DEFAULT, threads).overall
            good = est.point + 3 * est.se >= exact[t]
            ok &= good
            rows.append({"t": t, "p_hat": est.point, "se": est.se, "exact_tv": exact[t], "ok": good})
        return ok, {"samples": samples, "rows": rows}
    return _timed(5, "coupling non-coalescence bounds exact adjacent TV at n=5", 300.0, run)


def bijection_suite(quick: bool = False, seed: int = 0) -> Criterion:
    def run():
        paths = _scale(10**4, quick)
        failures = 0
        for n, v in product((4, 8, 16), (DEFAULT, STRICT)):
            pair = SpecialPair(1, 2)
            rng = make_rng(seed, 6, n, v.good_time_rule == "strict")
            for _ in range(paths):
                p = random_path(rng, n, 5 * n)
                th = coupling.theta(p, pair, v)
                if coupling.theta(th, pair, v) != p or coupling.last_good_time(th, pair, v) != coupling.last_good_time(p, pair, v):
                    failures += 1
        exhaustive = {}
        moves = [Shuffle(a, b) for a in range(1, 4) for b in range(1, 4)]
        for v in (DEFAULT, STRICT):
            for k in range(0, 4):
                space = list(product(moves, repeat=k))
                image = {coupling.theta(p, SpecialPair(1, 2), v) for p in space}
                exhaustive[f"{v.good_time_rule}_k{k}"] = len(image) == len(space) == 9**k and image == set(space)
        return failures == 0 and all(exhaustive.values()), {"random_paths_per_config": paths,
                                                            "failures": failures, "exhaustive": exhaustive}
    return _timed(6, "theta is an involution preserving T; bijective at n=3", 300.0, run)


def lemma3_desk_scale(quick: bool = False, seed: int = 0, threads: int = 1) -> Criterion:
    def run():
        samples = _scale(10**5, quick)
        details, ok = {"samples": samples}, True
        for n in (4, 8):
            res = montecarlo.estimate_noncoalescence(n, 8 * n, samples, seed, DEFAULT, threads)
            ok &= res.fail_given_t_lt_k == 0
            details[f"amended_n{n}"] = res.to_json()
        strict = montecarlo.estimate_noncoalescence(4, 12, samples, seed, STRICT, threads)
        ok &= strict.fail_given_t_lt_k > 0
        details["strict_n4_k12"] = strict.to_json()
        witness = coupling.run_coupled((1, 3, 4, 2), SpecialPair(1, 2),
                                       [Shuffle(1, 2), Shuffle(2, 3), Shuffle(3, 3)], STRICT)
        ok &= witness.T == 1 and not witness.coalesced
        details["hand_traced_witness"] = witness.to_json()
        return ok, details
    return _timed(7, "T < k forces coalescence (amended); strict rule has counterexamples", 600.0, run)


def queue_rate_identification(quick: bool = False, seed: int = 0) -> Criterion:
    def run():
        n, steps = 10, _scale(10**6, quick)
        rows = montecarlo.queue_transition_stats(n, steps, seed, max_l=5)
        within = all(abs(r.z_q) <= 4 and abs(r.z_p) <= 4 for r in rows) and len(rows) == 5
        r2 = rows[1]
        literal = (3 * n - 2) / n**2
        se2 = math.sqrt(r2.q * (1 - r2.q) / r2.visits)
        z_literal = (r2.q_hat - literal) / se2
        expected_z = (r2.q - literal) / se2
        return within and abs(z_literal) > 10, {
            "steps": steps, "within_4_se": within, "z_from_literal": z_literal,
            "expected_z_from_literal": expected_z,
            "rows": [{"l": r.l, "visits": r.visits, "q_hat": r.q_hat, "q": r.q, "z_q": r.z_q,
                      "p_hat": r.p_hat, "p": r.p, "z_p": r.z_p} for r in rows],
        }
    return _timed(8, "queue size rates match q(l), p(l); literal membership rejected", 60.0, run)


def lemma4_tail(quick: bool = False, seed: int = 0, threads: int = 1) -> Criterion:
    def run():
        n, k = 50, 392
        est = montecarlo.estimate_T_tail(n, k, _scale(10**5, quick), seed, DEFAULT, threads)
        lam = chains.second_largest_eigenvalue(chains.build_Ktilde(n))
        bound = CONSTANTS.cs_factor * lam**k
        asym = chains.survival_bound(n, k)
        return est.point <= bound + 3 * est.se, {
            "p_hat": est.point, "se": est.se, "ci": [est.lo, est.hi], "lambda_Ktilde": lam,
            "finite_n_bound": bound, "asymptotic_bound": asym, "ratio_to_asymptotic": est.point / asym,
            "exact_Ytilde_alive": 1 - chains.ytilde_distribution(n, k)[0],
        }
    return _timed(9, "P(T >= k) under the finite-n spectral bound at n=50", 300.0, run)


def dominance(quick: bool = False, seed: int = 0) -> Criterion:
    def run():
        rep = chains.dominance_check(20, 200, _scale(10**5, quick), seed)
        laws = chains.ytilde_path(20, 10**4)
        mass_err = max(abs(math.fsum(row.tolist()) - 1.0) for row in laws)
        return rep.passed() and mass_err <= 1e-12, {**rep.to_json(), "mass_error_t_le_1e4": mass_err}
    return _timed(10, "Y is stochastically dominated by the truncated chain", 120.0, run)


def bound_calculator() -> Criterion:
    def run():
        n, eps = 52, 0.25
        t = chains.mixing_bound(n, eps)
        value = chains.path_coupling_bound(n, t)
        closed = (n - 1) * math.exp(-0.6526 * t / n)
        before = (n - 1) * math.exp(-0.6526 * (t - 1) / n)
        ok = t == 424 and abs(value - closed) <= 1e-9 and value <= eps < before
        return ok, {"t_star": t, "analytic_bound_at_t_star": value, "closed_form": closed}
    return _timed(11, "mixing_bound(52, 0.25) = 424", None, run)


def run_all(quick: bool = False, seed: int = 0, threads: int = 1,
            consts: BoundConstants = CONSTANTS, echo: Callable[[str], None] | None = None) -> list[Criterion]:
    jobs = [
        lambda: eigenvalue_reproduction(consts),
        lambda: constant_consistency(consts),
        generator_convergence,
        exact_tv_oracle,
        lambda: coupling_validity(quick, seed, threads),
        lambda: bijection_suite(quick, seed),
        lambda: lemma3_desk_scale(quick, seed, threads),
        lambda: queue_rate_identification(quick, seed),
        lambda: lemma4_tail(quick, seed, threads),
        lambda: dominance(quick, seed),
        bound_calculator,
    ]
    out = []
    for job in jobs:
        c = job()
        out.append(c)
        if echo:
            echo(c.line())
    return out
