"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary so they are visible without ``-s``.
"""

import pytest

from collapse_friction import checks

SEED = checks.DEFAULT_SEED
ACCEPTANCE_LINES = []


def _run(number, fn):
    result = fn()
    line = f"criterion {number:2d} " + result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line


def test_01_closed_form_vs_quadrature():
    _run(1, lambda: checks.check_closed_vs_quadrature(n_points=32, rtol=1e-8, max_seconds=5.0))


def test_02_beta_zero_heating_powers():
    _run(2, lambda: checks.check_standard_heating(rtol=1e-10))


def test_03_mapping_identity():
    _run(3, lambda: checks.check_mapping(tol=1e-6))


def test_04_critical_thresholds():
    _run(4, lambda: checks.check_critical(tol=1e-12))


def test_05_effective_temperature():
    _run(5, lambda: checks.check_effective_temperature(rtol=1e-10))


@pytest.mark.slow
def test_06_monte_carlo_balance():
    _run(6, lambda: checks.check_mc_balance(n_traj=10_000, seed=SEED, n_grid=10, max_seconds=300.0))


@pytest.mark.slow
def test_07_sampler_distribution():
    _run(7, lambda: checks.check_sampler(n_samples=100_000, seed=SEED, alpha=1e-3))


@pytest.mark.slow
def test_08_equilibrium_temperature():
    _run(8, lambda: checks.check_equilibrium(n_traj=10_000, seed=SEED))


@pytest.mark.slow
def test_09_toy_model():
    _run(9, lambda: checks.check_toy(n_traj=10_000, seed=SEED))


@pytest.mark.slow
def test_10_environment_mixing():
    _run(10, lambda: checks.check_environment(n_traj=10_000, seed=SEED))


def test_11_determinism():
    _run(11, lambda: checks.check_determinism(seed=SEED))
