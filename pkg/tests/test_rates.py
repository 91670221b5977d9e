import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_friction.checks import working_params
from collapse_friction.errors import RegimeError
from collapse_friction.rates import (
    EnvironmentParams,
    Regime,
    critical_beta,
    effective_temperature,
    effective_temperature_ratio,
    friction_rate,
    heating_power_standard,
    mixed_equilibrium,
    mixed_temperature,
    power_gamma_closed_form,
    power_gamma_quadrature,
    threshold_temperature,
)
from collapse_friction.units import SI, WORKING, Model, ModelParams, elementary_energy

models = st.sampled_from(list(Model))
x2s = st.floats(0.0, 4.0)


def test_dp_beta_zero():
    r = power_gamma_closed_form(working_params("DP"))
    assert r.P == pytest.approx(1 / (4 * math.sqrt(math.pi)), rel=1e-15)
    assert r.Gamma == 0.0
    assert r.regime is Regime.BOUNDARY
    assert r.E_inf is None and r.T_noise is None


def test_dp_x2_one():
    r = power_gamma_closed_form(working_params("DP", 1.0))
    assert r.P == pytest.approx(31 / 64 / (4 * math.sqrt(math.pi)), rel=1e-14)


@pytest.mark.parametrize("model,x2", [("DP", 16 / 9), ("CSL", 16 / 15)])
def test_critical_examples(model, x2):
    r = power_gamma_closed_form(working_params(model, x2))
    assert r.regime is Regime.CRITICAL
    assert abs(r.Gamma) <= 1e-12 * r.beta * r.P0


def test_csl_beta_zero_quadrature():
    for method in ("adaptive", "moments"):
        r = power_gamma_quadrature(working_params("CSL"), method=method)
        assert r.P == pytest.approx(3 / (32 * math.pi**1.5), rel=1e-12)
        assert r.Gamma == 0.0


@given(model=models, x2=x2s)
def test_closed_form_matches_quadrature(model, x2):
    p = working_params(model, x2)
    c = power_gamma_closed_form(p)
    for method in ("adaptive", "moments"):
        q = power_gamma_quadrature(p, method=method)
        assert q.P == pytest.approx(c.P, rel=1e-10)
        assert q.Gamma == pytest.approx(c.Gamma, rel=1e-9, abs=1e-12 * max(p.beta, 1e-300) * c.P0)


@given(model=models, x2=st.floats(1e-3, 4.0))
def test_friction_rate_is_beta_p0(model, x2):
    p = working_params(model, x2)
    assert friction_rate(p) == pytest.approx(p.beta * heating_power_standard(p), rel=1e-14)


def test_friction_rate_dp_value_and_zero():
    p = ModelParams("DP", 2.0, 3.0, beta=0.7, constants=WORKING)
    assert friction_rate(p) == pytest.approx(0.7 * 3.0 / (4 * math.sqrt(math.pi) * 8.0), rel=1e-14)
    assert friction_rate(p.replace(beta=0.0)) == 0.0


@pytest.mark.parametrize("model", list(Model))
def test_gamma_leading_order_is_two_thirds_eta(model):
    p = working_params(model, 1e-7)
    assert power_gamma_quadrature(p).Gamma / friction_rate(p) == pytest.approx(2 / 3, rel=1e-6)


@given(model=models, x2=x2s)
def test_gamma_sign_change_at_critical(model, x2):
    p = working_params(model, x2)
    r = power_gamma_closed_form(p)
    xc = {Model.DP: 16 / 9, Model.CSL: 16 / 15}[model]
    if x2 == 0:
        assert r.regime is Regime.BOUNDARY
    elif abs(x2 - xc) < 1e-9:
        pass
    elif x2 < xc:
        assert r.Gamma > 0 and r.regime is Regime.DISSIPATIVE
    else:
        assert r.Gamma < 0 and r.regime is Regime.HEATING


@given(model=models, frac=st.floats(1e-3, 0.999))
def test_temperature_consistency(model, frac):
    p = working_params(model)
    q = p.replace(beta=frac * critical_beta(p))
    r = power_gamma_closed_form(q)
    T = effective_temperature(q)
    assert T == pytest.approx(2 / 3 * r.P / r.Gamma / q.constants.kB, rel=1e-9)
    assert T == pytest.approx(r.T_noise, rel=1e-9)


def test_dp_temperature_example():
    assert effective_temperature_ratio("DP", 1e-3) == pytest.approx(0.999625, abs=1e-6)
    expected = (1 - 1.5e-3 + 15 / 16 * 1e-6) / (1 - 9 / 8 * 1e-3)
    assert effective_temperature_ratio("DP", 1e-3) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("model", list(Model))
def test_temperature_diverges_at_critical(model):
    p = working_params(model)
    bc = critical_beta(p)
    temps = [effective_temperature(p.replace(beta=bc * (1 - e))) for e in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert all(np.diff(temps) > 0)
    assert temps[-1] > 1e3 * p.replace(beta=bc).T_beta


def test_temperature_errors():
    with pytest.raises(RegimeError):
        effective_temperature(working_params("DP"))
    with pytest.raises(RegimeError):
        effective_temperature(working_params("CSL", 2.0))


@pytest.mark.parametrize("model,ratio", [("DP", 9 / 8), ("CSL", 15 / 8)])
def test_critical_temperature(model, ratio):
    p = working_params(model)
    assert 1 / (critical_beta(p) * p.constants.kB) == pytest.approx(ratio * elementary_energy(p), rel=1e-15)


def test_threshold_temperature():
    assert threshold_temperature(working_params("DP")) == 1.0
    p = ModelParams("CSL", 3e-7, 2e-26, gamma_csl=1e-30)
    assert threshold_temperature(p) == pytest.approx(4 * elementary_energy(p) / SI.kB, rel=1e-14)


def test_mixing_limits():
    p = working_params("CSL", 0.5)
    r = power_gamma_closed_form(p)
    T = effective_temperature(p)
    _, T_eff = mixed_equilibrium(r, EnvironmentParams(5.0, r.Gamma, kB=1.0))
    assert T_eff == pytest.approx((T + 5.0) / 2, rel=1e-14)
    assert mixed_temperature(r.Gamma, T, 1e15, 5.0) == pytest.approx(5.0, rel=1e-12)
    with pytest.raises(RegimeError):
        mixed_temperature(-1.0, T, 0.5, 5.0)


def test_heating_regime_with_bath():
    p = working_params("DP", 3.0)
    r = power_gamma_closed_form(p)
    env = EnvironmentParams(2.0, 3 * abs(r.Gamma), kB=1.0)
    E_inf, _ = mixed_equilibrium(r, env)
    assert E_inf == pytest.approx((r.P + env.P_env) / (r.Gamma + env.Gamma_env), rel=1e-15)
    assert E_inf > 0
    with pytest.raises(RegimeError):
        mixed_equilibrium(r, EnvironmentParams(2.0, 0.5 * abs(r.Gamma), kB=1.0))


def test_si_scale_report_is_finite():
    p = ModelParams("DP", 1e-7, 1.67e-27).with_T_beta(1e-3)
    r = power_gamma_closed_form(p)
    assert r.regime is Regime.DISSIPATIVE
    assert r.T_noise == pytest.approx(effective_temperature(p), rel=1e-12)
