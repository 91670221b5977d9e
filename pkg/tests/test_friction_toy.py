import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_friction.errors import ParameterError
from collapse_friction.friction_toy import (
    ToyParams,
    stationary_second_moment,
    toy_energy_ode,
    toy_langevin_ensemble,
)

P = ToyParams(D=1.0, beta=2.0, mass=1.0)


def test_energy_ode_limits():
    assert toy_energy_ode(0.4, P, 0.0) == 0.4
    assert toy_energy_ode(0.0, P, 1e4) == pytest.approx(1.5 / P.beta)


@given(beta=st.floats(0.1, 10), D=st.floats(0.1, 10), t=st.floats(0, 100))
def test_gibbs_energy_is_fixed_point(beta, D, t):
    p = ToyParams(D, beta, 1.0)
    assert toy_energy_ode(1.5 / beta, p, t) == pytest.approx(1.5 / beta, rel=1e-14)


def test_unstable_dt_rejected():
    with pytest.raises(ParameterError):
        toy_langevin_ensemble(P, 10, 1.0, 2 * P.max_dt, 1)


def test_frozen_momenta_without_noise():
    p = ToyParams(0.0, 2.0, 1.0)
    stats, finals = toy_langevin_ensemble(p, 5, 1.0, 0.1, 1, p0=(1.0, 0.0, 0.0))
    assert np.all(finals == [1.0, 0.0, 0.0])
    assert np.all(stats.mean_H == 0.5)


@pytest.mark.parametrize("method", ["exact", "euler"])
def test_ensemble_tracks_ode(method):
    horizon = 2.0 / P.energy_relaxation_rate
    stats, _ = toy_langevin_ensemble(P, 4000, horizon, P.max_dt / 2, 21, method=method)
    exact = toy_energy_ode(0.0, P, stats.time_grid)
    assert np.all(np.abs(stats.mean_H - exact) < 4 * stats.stderr_H)


def test_seeded_blocks_are_reproducible():
    a, fa = toy_langevin_ensemble(P, 2500, 0.5, P.max_dt, 9)
    b, fb = toy_langevin_ensemble(P, 2500, 0.5, P.max_dt, 9)
    assert np.array_equal(fa, fb) and a.mean_H.tolist() == b.mean_H.tolist()


def test_stationary_moment_small_run():
    kappa = P.drift
    m2, se = stationary_second_moment(P, 1000, 6 / kappa, 6 / kappa, P.max_dt, 4)
    assert abs(m2 - 3 * P.mass / P.beta) < 4 * se
