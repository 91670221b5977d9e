"""Dissipative DP and CSL collapse models: rates, temperatures and jump-process Monte Carlo."""

__version__ = "0.1.0"

from .units import (  # noqa: E402
    SI,
    WORKING,
    DimensionlessParams,
    Model,
    ModelParams,
    PhysicalConstants,
    nondimensionalize,
    redimensionalize,
)
from .rates import (  # noqa: E402
    EnvironmentParams,
    RateReport,
    Regime,
    critical_beta,
    effective_temperature,
    friction_rate,
    mixed_equilibrium,
    power_gamma_closed_form,
    power_gamma_quadrature,
    threshold_temperature,
)
from .jump_kinetics import (  # noqa: E402
    EnsembleStats,
    Trajectory,
    exact_energy_trajectory,
    run_ensemble,
    simulate_trajectory,
)
