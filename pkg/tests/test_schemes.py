import numpy as np
import pytest

from src.model.errors import DomainError, ProbabilityRangeError
from src.model.params import SchemeConfig
from src.model.schemes import (
    clamp_probability, event_miss_prob, event_prob, final_outage, outage_ct, outage_ht, outage_ht_expanded,
    outage_rt, scheme_outage,
)

GRID = np.linspace(0.0, 1.0, 201)


def test_reference_values():
    assert outage_rt(0.5, 3) == 0.125
    assert outage_ct(0.5, 1) == pytest.approx(0.2257080078125, abs=1e-12)
    assert event_prob(0.5, 1, 1) == pytest.approx(0.328125, abs=1e-15)
    assert event_miss_prob(0.5, 2, 3) == pytest.approx(0.168792724609375, abs=1e-15)
    assert outage_ht(0.5, 2, 1, 3) == pytest.approx(0.0071227460, abs=1e-10)


def test_event_probabilities_complement():
    for o in GRID:
        for m, r in [(1, 1), (2, 3), (3, 1)]:
            assert event_prob(o, m, r) + event_miss_prob(o, m, r) == pytest.approx(1.0, abs=1e-14)


def test_hybrid_reduces_to_rt_and_ct():
    for o in GRID:
        assert outage_ht(o, 3, 0, 5) == pytest.approx(outage_rt(o, 3), abs=1e-12)
        assert outage_ht(o, 1, 2, 1) == pytest.approx(outage_ct(o, 2), abs=1e-12)


def test_expanded_form_agrees():
    for o in GRID[1:]:
        for m, n, r in [(1, 1, 1), (2, 1, 3), (2, 2, 2), (3, 1, 1)]:
            assert outage_ht_expanded(o, m, n, r) == pytest.approx(outage_ht(o, m, n, r), rel=1e-9, abs=1e-300)


def test_small_outage_keeps_precision():
    # leading term of the chain failure is o^r when o is tiny
    assert event_miss_prob(1e-9, 2, 1) == pytest.approx(1e-9, rel=1e-6)
    assert outage_ht(1e-6, 1, 1, 1) > 0.0


@pytest.mark.parametrize("scheme", [SchemeConfig.dt(), SchemeConfig.rt(4), SchemeConfig.ct(3),
                                    SchemeConfig.ht(2, 1, 2)])
def test_endpoints_and_monotonicity(scheme):
    assert final_outage(scheme, 0.0) == 0.0
    assert final_outage(scheme, 1.0) == pytest.approx(1.0)
    values = [final_outage(scheme, o) for o in GRID]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_dt_passes_link_outage_through():
    assert scheme_outage(SchemeConfig.dt(), 0.37).final_outage == 0.37


def test_ht_never_worse_than_rt_or_ct_at_equal_copies():
    for o in np.linspace(0.0, 1.0, 101):
        for copies in range(2, 8):
            best_ht = min(outage_ht(o, m, n, r)
                          for m in range(1, copies + 1) for n in range(0, copies) for r in range(1, copies + 1)
                          if m + n * r == copies)
            assert best_ht <= min(outage_rt(o, copies), outage_ct(o, copies - 1)) + 1e-12


def test_crossover_at_four_copies():
    def best_of_others(o):
        return min(outage_rt(o, 4), outage_ht(o, 1, 1, 3))

    for o in (0.05, 0.2, 0.35):
        assert outage_ct(o, 3) < best_of_others(o)
    assert outage_ct(0.6, 3) > best_of_others(0.6)


def test_clamp_probability():
    assert clamp_probability(-1e-17) == 0.0
    assert clamp_probability(1.0 + 1e-17) == 1.0
    with pytest.raises(ProbabilityRangeError):
        clamp_probability(1.1)
    with pytest.raises(ProbabilityRangeError):
        clamp_probability(-0.1)


@pytest.mark.parametrize("o", [-0.5, 1.5])
def test_outage_domain(o):
    with pytest.raises(DomainError):
        outage_rt(o, 2)
