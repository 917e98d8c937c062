"""Acceptance criteria, one test each; run with ``pytest -s`` to see the status lines."""

from dataclasses import replace

import pytest

from rtr_shuffle import acceptance
from rtr_shuffle.chains import CONSTANTS

CRITERIA = {
    1: acceptance.eigenvalue_reproduction,
    2: acceptance.constant_consistency,
    3: acceptance.generator_convergence,
    4: acceptance.exact_tv_oracle,
    5: lambda: acceptance.coupling_validity(threads=2),
    6: acceptance.bijection_suite,
    7: lambda: acceptance.lemma3_desk_scale(threads=2),
    8: acceptance.queue_rate_identification,
    9: lambda: acceptance.lemma4_tail(threads=2),
    10: acceptance.dominance,
    11: acceptance.bound_calculator,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = CRITERIA[number]()
    print("\n" + result.line())
    for key, value in result.details.items():
        print(f"      {key}: {value}")
    assert result.number == number
    assert result.passed, result.details


def test_tampered_decay_constant_is_caught():
    bad = replace(CONSTANTS, a=0.9)
    assert not acceptance.constant_consistency(bad).passed
    assert not acceptance.eigenvalue_reproduction(bad).passed
    assert acceptance.constant_consistency().passed
