import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_friction.errors import NumericalError, SingularInputError
from collapse_friction.kernels import (
    dp_to_csl_mapping_residual,
    kernel_curvature_at_origin,
    kernel_k2_weighted,
    kernel_value,
    sigma_sq_derivative,
)
from collapse_friction.units import WORKING, Model, ModelParams

DP = ModelParams("DP", 1.0, 1.0, constants=WORKING)
CSL = ModelParams("CSL", 1.0, 1.0, gamma_csl=1.0, constants=WORKING)


def test_examples():
    assert kernel_value("CSL", 0.0, CSL) == 1.0
    assert kernel_value("DP", 1.0, DP) == pytest.approx(4 * math.pi * math.exp(-1), rel=1e-15)
    assert kernel_value("CSL", 2.0, CSL) == pytest.approx(math.exp(-4), rel=1e-15)


def test_dp_singular_at_origin():
    with pytest.raises(SingularInputError):
        kernel_value("DP", 0.0, DP)
    with pytest.raises(SingularInputError):
        kernel_value("DP", np.array([1.0, 0.0]), DP)
    assert kernel_k2_weighted(0.0, DP) == pytest.approx(4 * math.pi)


@given(model=st.sampled_from(list(Model)), k=st.lists(st.floats(1e-3, 8.0), min_size=2, max_size=20))
def test_positive_and_decreasing(model, k):
    params = DP if model is Model.DP else CSL
    k = np.sort(np.asarray(k))
    v = kernel_value(model, k, params)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) <= 0)


def test_gaussian_cutoff():
    assert kernel_value("CSL", 40.0, CSL) == 0.0


def test_curvature_matches_heating_powers():
    assert 0.5 * kernel_curvature_at_origin("DP", DP) == pytest.approx(1 / (4 * math.sqrt(math.pi)), rel=1e-15)
    assert 0.5 * kernel_curvature_at_origin("CSL", CSL) == pytest.approx(3 / (32 * math.pi**1.5), rel=1e-15)
    ratio = kernel_curvature_at_origin("DP", DP.replace(sigma=2.0)) / kernel_curvature_at_origin("DP", DP)
    assert ratio == pytest.approx(1 / 8, rel=1e-15)


@given(sigma=st.floats(0.1, 10.0), gamma=st.floats(1e-3, 1e3))
def test_mapping_residual_small(sigma, gamma):
    p = DP.replace(sigma=sigma)
    assert dp_to_csl_mapping_residual(p, gamma) <= 1e-6


def test_mapping_excludes_k_zero():
    with pytest.raises((SingularInputError, ValueError)):
        dp_to_csl_mapping_residual(DP, 1.0, k_grid=np.array([0.0, 1.0]))


def test_sigma_sq_derivative_polynomial():
    assert sigma_sq_derivative(lambda s: s**4, 1.5) == pytest.approx(2 * 1.5**2, rel=1e-10)


def test_sigma_sq_derivative_underflow():
    with pytest.raises(NumericalError):
        sigma_sq_derivative(lambda s: s, 1.0, rel_step=1e-300)
