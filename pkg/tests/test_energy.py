import dataclasses

import pytest

from src.model.energy import (
    ENERGY_FORMULAS, ENERGY_MODES, avg_current, avg_current_default, avg_current_modified, battery_hours, lifetime,
)
from src.model.errors import DomainError, InfeasiblePeriodError
from src.model.params import max_copies


@pytest.fixture
def sf7(scenario):
    return scenario.energy_table(7)


def test_single_copy_sf7(scenario, sf7):
    report = avg_current_default(sf7, 1, scenario.period_s)
    assert report.avg_current_ma == pytest.approx(0.1617437, rel=1e-6)
    assert report.lifetime_h == pytest.approx(14838.2, rel=1e-5)
    assert report.lifetime_days == pytest.approx(618.26, abs=0.01)
    assert report.sleep_time == pytest.approx(600.0 - 2.7318, abs=1e-9)


def test_single_copy_sf12(scenario):
    report = avg_current_default(scenario.energy_table(12), 1, scenario.period_s)
    assert report.avg_current_ma == pytest.approx(0.29952, rel=1e-4)
    assert report.lifetime_days == pytest.approx(333.87, abs=0.05)


@pytest.mark.parametrize("formula", ENERGY_FORMULAS)
def test_protocols_coincide_for_one_copy(scenario, sf7, formula):
    default = avg_current_default(sf7, 1, scenario.period_s, formula)
    modified = avg_current_modified(sf7, 1, scenario.period_s, formula)
    assert modified.avg_current == pytest.approx(default.avg_current, rel=1e-12)


def test_formulas_coincide_for_one_copy(scenario, sf7):
    literal = avg_current_default(sf7, 1, scenario.period_s, "literal")
    balance = avg_current_default(sf7, 1, scenario.period_s, "charge_balance")
    assert literal.avg_current == pytest.approx(balance.avg_current, rel=1e-12)


@pytest.mark.parametrize("sf", [7, 12])
def test_charge_balance_shape(scenario, sf):
    table = scenario.energy_table(sf)
    base = avg_current_default(table, 1, scenario.period_s, "charge_balance").avg_current
    for copies in range(2, 7):
        default = avg_current_default(table, copies, scenario.period_s, "charge_balance").avg_current
        modified = avg_current_modified(table, copies, scenario.period_s, "charge_balance").avg_current
        assert base < modified < default
        assert (modified - base) / base < (default - base) / base


def test_literal_modified_penalty(scenario, sf7):
    copies = 4
    default = avg_current_default(sf7, copies, scenario.period_s, "literal").avg_current
    modified = avg_current_modified(sf7, copies, scenario.period_s, "literal").avg_current
    receive_time = sum(s.duration for s in sf7.receive_states)
    expected_gap = copies / scenario.period_s * (copies - 1) * receive_time * sf7.sleep.current
    assert modified - default == pytest.approx(expected_gap, rel=1e-9)


def test_lifetime_decreases_with_copies(scenario, sf7):
    lifetimes = [avg_current_default(sf7, m, scenario.period_s, "charge_balance").lifetime_h for m in range(1, 8)]
    assert all(a > b for a, b in zip(lifetimes, lifetimes[1:]))


def test_infeasible_period(scenario, sf7):
    with pytest.raises(InfeasiblePeriodError):
        avg_current_default(sf7, 10, 20.0)
    with pytest.raises(InfeasiblePeriodError):
        avg_current_modified(sf7, 40, 20.0)
    # the modified protocol fits where the default one does not
    assert avg_current_modified(sf7, 10, 20.0).sleep_time > 0


def test_battery_and_lifetime(scenario, sf7):
    report = avg_current(sf7, 1, scenario.period_s, mode="default", formula="literal", battery_mah=1200.0)
    assert lifetime(report) == pytest.approx(report.lifetime_h)
    assert lifetime(report, battery_mah=2400.0) == pytest.approx(2 * report.lifetime_h)
    assert battery_hours(1e-3, 2400.0) == pytest.approx(2400.0)


def test_sleep_charge_fraction(scenario, sf7):
    report = avg_current_default(sf7, 1, scenario.period_s)
    assert 0.0 < report.sleep_charge_fraction < 1.0


@pytest.mark.parametrize("formula", ENERGY_FORMULAS)
@pytest.mark.parametrize("mode", ENERGY_MODES)
def test_sleep_is_a_minor_share_of_the_charge(scenario, mode, formula):
    for sf in scenario.sfs:
        table = scenario.energy_table(sf)
        for copies in range(1, max_copies(scenario, sf) + 1):
            report = avg_current(table, copies, scenario.period_s, mode, formula)
            assert report.sleep_charge_fraction < 0.5, (sf, copies)


@pytest.mark.parametrize("kwargs", [
    {"copies": 0}, {"period_s": 0.0}, {"formula": "exact"}, {"mode": "eager"},
])
def test_domain(scenario, sf7, kwargs):
    arguments = {"copies": 1, "period_s": scenario.period_s, "mode": "default", "formula": "literal"}
    arguments.update(kwargs)
    with pytest.raises(DomainError):
        avg_current(sf7, **arguments)
    with pytest.raises(DomainError):
        battery_hours(0.0, 2400.0)


def test_custom_period(scenario):
    short = dataclasses.replace(scenario, period_s=60.0)
    table = short.energy_table(7)
    assert avg_current_default(table, 1, short.period_s).avg_current > \
        avg_current_default(table, 1, scenario.period_s).avg_current
