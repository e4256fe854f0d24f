import dataclasses

import numpy as np
import pytest

from src.model.capacity import (
    SEARCH_KINDS, border_capture_integral, best_outage_config, enumerate_configs, invert_scheme, max_devices,
    optimize,
)
from src.model.channel import link_outage
from src.model.errors import DomainError
from src.model.params import SchemeConfig
from src.model.schemes import final_outage


@pytest.mark.parametrize("scheme", [SchemeConfig.dt(), SchemeConfig.rt(3), SchemeConfig.ct(2),
                                    SchemeConfig.ht(2, 1, 3)])
def test_invert_scheme(scheme):
    o = invert_scheme(scheme, 1e-3)
    assert final_outage(scheme, o) == pytest.approx(1e-3, rel=1e-8)


def test_invert_dt_is_identity():
    assert invert_scheme(SchemeConfig.dt(), 0.01) == pytest.approx(0.01, abs=1e-11)


@pytest.mark.parametrize("target", [0.0, 1.0, -0.5])
def test_invert_domain(target):
    with pytest.raises(DomainError):
        invert_scheme(SchemeConfig.rt(2), target)


def test_border_integral(scenario):
    assert border_capture_integral(scenario) == pytest.approx(0.8017, abs=1e-3)


def test_direct_transmission_capacity(scenario):
    result = max_devices(scenario, 7, SchemeConfig.dt(), 0.99)
    assert result.reachable
    assert 85.0 < result.n_devices < 95.0
    assert result.required_link_outage == pytest.approx(0.01, abs=1e-10)


def test_replication_raises_capacity(scenario):
    dt = max_devices(scenario, 7, SchemeConfig.dt(), 0.99).n_devices
    rt = max_devices(scenario, 7, SchemeConfig.rt(3), 0.99).n_devices
    assert rt > dt


def test_unreachable_target(scenario):
    deaf = dataclasses.replace(scenario, tx_power_dbm=-20.0)
    result = max_devices(deaf, 7, SchemeConfig.dt(), 0.999)
    assert not result.reachable
    assert result.n_devices == 0.0


def test_enumerate_configs():
    assert enumerate_configs("DT", 10) == [SchemeConfig.dt()]
    assert len(enumerate_configs("RT", 6)) == 6
    assert [c.copies for c in enumerate_configs("CT", 4)] == [1, 2, 3, 4]
    ht = enumerate_configs("HT", 5)
    assert all(c.copies <= 5 for c in ht)
    assert SchemeConfig.ht(2, 1, 3) in ht
    assert sum(1 for c in ht if c.n == 0) == 5
    with pytest.raises(DomainError):
        enumerate_configs("XT", 5)
    with pytest.raises(DomainError):
        enumerate_configs("RT", 0)


@pytest.mark.parametrize("target, expected", [(0.99, 7), (0.999, 10)])
def test_optimal_rt_sf7(scenario, target, expected):
    result = optimize(scenario, 7, target, "RT")
    assert result.config == SchemeConfig.rt(expected)
    assert SchemeConfig.rt(expected - 1) in [c for c, _ in result.near_ties]


@pytest.mark.parametrize("target, copies", [(0.99, 3), (0.999, 5)])
def test_optimal_ct(scenario, target, copies):
    assert optimize(scenario, 7, target, "CT").config.copies == copies


@pytest.mark.parametrize("kind, target, expected", [
    ("HT", 0.99, SchemeConfig.ht(2, 1, 3)),
    ("HT", 0.999, SchemeConfig.ht(2, 1, 4)),
    ("HT*", 0.99, SchemeConfig.ht(1, 1, 2)),
    ("HT*", 0.999, SchemeConfig.ht(2, 1, 3)),
])
def test_optimal_hybrid_sf7(scenario, kind, target, expected):
    assert optimize(scenario, 7, target, kind).config == expected


def test_sf12_is_capped_by_duty_cycle(scenario):
    assert optimize(scenario, 12, 0.999, "RT").config.copies <= 6


@pytest.mark.parametrize("target", [0.99, 0.999])
@pytest.mark.parametrize("sf", range(7, 13))
def test_capacity_dominance_ordering(scenario, sf, target):
    n = {kind: optimize(scenario, sf, target, kind).n_devices for kind in SEARCH_KINDS}
    slack = 1e-9 * n["HT"]
    assert n["HT"] >= n["HT*"] - slack
    assert n["HT*"] >= n["CT"] - slack
    assert n["HT"] >= n["RT"] - slack
    assert n["RT"] >= n["DT"] - slack


def test_threads_do_not_change_the_result(scenario):
    assert optimize(scenario, 9, 0.99, "HT", threads=4) == optimize(scenario, 9, 0.99, "HT")


def test_best_outage_config(loaded_scenario):
    rt = best_outage_config(loaded_scenario, 7, "RT")
    single = link_outage(loaded_scenario, 7, 200.0, 1).link_outage
    assert rt.config.kind == "RT"
    assert rt.final_outage <= single
    assert rt.final_outage == pytest.approx(final_outage(rt.config, rt.link_outage))
    hybrid = best_outage_config(loaded_scenario, 7, "HT")
    assert hybrid.final_outage <= rt.final_outage + 1e-15


@pytest.mark.parametrize("kind", ["RT", "CT", "HT"])
@pytest.mark.parametrize("sf", [7, 10])
def test_optimum_ignores_activity_factor_scale(scenario, sf, kind):
    base = optimize(scenario, sf, 0.99, kind, m_cap=6)
    slower = optimize(dataclasses.replace(scenario, period_s=2 * scenario.period_s), sf, 0.99, kind, m_cap=6)
    assert slower.config == base.config
    assert slower.n_devices == pytest.approx(2 * base.n_devices, rel=1e-12)


@pytest.mark.parametrize("kind", ["RT", "CT", "HT", "HT*"])
def test_optimum_ignores_capture_integral_scale(scenario, kind):
    stricter = dataclasses.replace(scenario, sir_threshold_db=4.0)
    ratio = border_capture_integral(scenario) / border_capture_integral(stricter)
    assert ratio != pytest.approx(1.0)
    base = optimize(scenario, 8, 0.999, kind)
    scaled = optimize(stricter, 8, 0.999, kind)
    assert scaled.config == base.config
    assert scaled.n_devices == pytest.approx(base.n_devices * ratio, rel=1e-9)


def test_inversion_undoes_final_outage():
    rng = np.random.default_rng(99)
    outages = np.concatenate([10.0 ** rng.uniform(-4.0, 0.0, 100), rng.uniform(1e-4, 1.0 - 1e-4, 100)])
    for o in np.clip(outages, 1e-4, 1.0 - 1e-4):
        m, n, r = (int(v) for v in rng.integers(1, 4, 3))
        scheme = [SchemeConfig.dt(), SchemeConfig.rt(m), SchemeConfig.ct(n), SchemeConfig.ht(m, n, r)][
            int(rng.integers(0, 4))]
        assert invert_scheme(scheme, final_outage(scheme, float(o))) == pytest.approx(float(o), abs=1e-9)
