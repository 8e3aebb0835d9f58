import csv
import io
import math

import pytest

import tagsep

REGEN = tagsep.Rates(0.1, 0.1, 5.0, 0.1)


def test_speed_and_drift():
    r = tagsep.Rates(1, 1, 2, 0.5)
    assert tagsep.speed(r) == pytest.approx(1.0)
    assert tagsep.drift(r) == pytest.approx(4.0)
    assert not tagsep.clt_regime(r)
    assert tagsep.clt_regime(REGEN)


def test_invalid_rates_raise():
    with pytest.raises(ValueError):
        tagsep.Rates(0.1, 0.0, 5.0, 0.1)
    with pytest.raises(ValueError):
        tagsep.Rates(0.1, 0.1, 5.0, 1.5)


def test_marginals_sum_to_one():
    nu = tagsep.marginal_solve(tagsep.Rates(1, 1, 2, 0.5))
    for v in nu.values():
        assert v == pytest.approx(1 / 3)


def test_regeneration_constants():
    assert tagsep.expected_tau(REGEN) == pytest.approx(1 / (5 / 6 - 0.4))
    assert tagsep.expected_x_tau(REGEN) == pytest.approx((5 / 6) / (5 / 6 - 0.4))
    with pytest.raises(tagsep.RegimeError):
        tagsep.expected_tau(tagsep.Rates(1, 1, 2, 0.5))


def test_g_and_coupling():
    assert tagsep.g(REGEN, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert tagsep.g_prime(REGEN, 0.0) == pytest.approx(0.52, rel=1e-9)
    s = tagsep.g(REGEN, -0.05)
    assert s == pytest.approx(-0.033022361642104814, rel=1e-12)
    assert tagsep.solve_g(REGEN, s) == pytest.approx(-0.05, abs=1e-8)
    a, b, c, d = tagsep.coupled_params(REGEN, -0.05)
    assert b == pytest.approx(-d)
    assert c == pytest.approx(-a - d)


def test_capped_oracle_approaches_closed_form():
    s = tagsep.g(REGEN, -0.05)
    closed = tagsep.mgf_mixture(REGEN, -0.05)
    v6 = tagsep.capped_mgf(REGEN, 6, s)
    v8 = tagsep.capped_mgf(REGEN, 8, s)
    assert v6 == pytest.approx(0.958062549860559, rel=1e-10)
    assert abs(v8 - closed) < abs(v6 - closed)
    with pytest.raises(tagsep.RadiusExceededError):
        tagsep.capped_mgf(REGEN, 4, 50.0)


def test_capped_marginals_are_a_distribution():
    mg = tagsep.capped_marginals(REGEN, 6)
    assert sum(mg.values()) == pytest.approx(1.0)
    assert all(v >= 0 for v in mg.values())


def test_run_regen_is_deterministic():
    a, tables_a = tagsep.run("regen", cycles=2000, seed=5)
    b, tables_b = tagsep.run("regen", cycles=2000, seed=5, threads=1)
    assert a["verdicts"] == b["verdicts"]
    assert tables_a == tables_b
    rows = list(csv.DictReader(io.StringIO(tables_a["cycles"])))
    assert len(rows) == 2000
    assert math.isfinite(a["estimates"]["tau_mean"]["value"])


def test_bad_config_and_regime():
    with pytest.raises(tagsep.ConfigError):
        tagsep.run("regen", cycels=10)
    with pytest.raises(tagsep.RegimeError):
        tagsep.run("regen", rates={"p1": 1, "p2": 1, "q1": 2, "rho": 0.5})


def test_experiment_names():
    names = tagsep.experiment_names()
    assert "analytic" in names and "exchangeability" in names
