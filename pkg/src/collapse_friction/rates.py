"""Heating power, dissipation and friction rates, temperatures and thresholds.

Two independent routes produce the same :class:`RateReport`: closed-form
polynomials in x_beta^2, and radial quadrature of the k-space integrals
(adaptive by default, exact Gaussian moments as a second route).
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import NumericalError, ParameterError, RegimeError
from .kernels import kernel_curvature_at_origin
from .units import SI, Model, ModelParams, elementary_energy, nondimensionalize

# |Gamma| below this multiple of beta * P0 counts as the critical point
CRITICAL_RTOL = 1e-12

# critical x_beta^2 where Gamma changes sign
CRITICAL_X_BETA_SQ = {Model.DP: 16.0 / 9.0, Model.CSL: 16.0 / 15.0}

# coefficients of 1, x^2, x^4 in P/P0 and of 1, x^2 in Gamma/(beta * Gamma0)
_P_POLY = {Model.DP: (1.0, -3.0 / 4.0, 15.0 / 64.0), Model.CSL: (1.0, -5.0 / 4.0, 35.0 / 64.0)}
_GAMMA_POLY = {Model.DP: (1.0, -9.0 / 16.0), Model.CSL: (1.0, -15.0 / 16.0)}


class Regime(str, enum.Enum):
    DISSIPATIVE = "dissipative"
    CRITICAL = "critical"
    HEATING = "heating"
    # beta = 0: the standard model, Gamma vanishes identically
    BOUNDARY = "dissipative-boundary"


RECORD_FIELDS = ("model", "sigma", "beta", "x_beta_sq", "P", "Gamma", "eta", "E_inf", "T_noise", "regime")


@dataclass(frozen=True)
class RateReport:
    model: Model
    sigma: float
    beta: float
    x_beta_sq: float
    P: float
    Gamma: float
    eta: float
    E_inf: float | None
    T_noise: float | None
    regime: Regime
    P0: float = field(default=math.nan, compare=False)
    kB: float = field(default=SI.kB, compare=False, repr=False)

    def to_record(self) -> dict:
        return {
            "model": self.model.value,
            "sigma": self.sigma,
            "beta": self.beta,
            "x_beta_sq": self.x_beta_sq,
            "P": self.P,
            "Gamma": self.Gamma,
            "eta": self.eta,
            "E_inf": self.E_inf,
            "T_noise": self.T_noise,
            "regime": self.regime.value,
        }


@dataclass(frozen=True)
class EnvironmentParams:
    """Thermal environment acting on the particle alongside the collapse noise."""

    T_env: float
    Gamma_env: float
    kB: float = SI.kB

    def __post_init__(self):
        if not (math.isfinite(self.T_env) and self.T_env >= 0):
            raise ParameterError(f"T_env must be finite and >= 0, got {self.T_env!r}")
        if not (math.isfinite(self.Gamma_env) and self.Gamma_env >= 0):
            raise ParameterError(f"Gamma_env must be finite and >= 0, got {self.Gamma_env!r}")

    @property
    def P_env(self) -> float:
        return 1.5 * self.kB * self.T_env * self.Gamma_env


def heating_power_standard(params: ModelParams) -> float:
    """P0: heating power of the non-dissipative model (beta = 0)."""
    c, s, m = params.constants, params.sigma, params.mass
    if params.model is Model.DP:
        return c.hbar * c.G * m / (4.0 * math.sqrt(math.pi) * s**3)
    return 3.0 * m * c.hbar**2 * params.gamma_csl / (32.0 * math.pi**1.5 * s**5)


def classify_regime(Gamma: float, beta: float, P0: float) -> Regime:
    if beta == 0:
        return Regime.BOUNDARY
    if abs(Gamma) < CRITICAL_RTOL * beta * P0:
        return Regime.CRITICAL
    return Regime.DISSIPATIVE if Gamma > 0 else Regime.HEATING


def _report(params: ModelParams, P: float, Gamma: float) -> RateReport:
    P0 = heating_power_standard(params)
    regime = classify_regime(Gamma, params.beta, P0)
    kB = params.constants.kB
    if regime is Regime.DISSIPATIVE:
        # a vanishing beta can push P/Gamma past the float range
        E_inf = P / Gamma if Gamma * sys.float_info.max > P else math.inf
        T_noise = 2.0 / 3.0 * E_inf / kB
    else:
        E_inf = T_noise = None
    return RateReport(
        model=params.model,
        sigma=params.sigma,
        beta=params.beta,
        x_beta_sq=nondimensionalize(params).x_beta_sq,
        P=P,
        Gamma=Gamma,
        eta=friction_rate(params),
        E_inf=E_inf,
        T_noise=T_noise,
        regime=regime,
        P0=P0,
        kB=kB,
    )


def power_gamma_closed_form(params: ModelParams) -> RateReport:
    c, s, m, beta = params.constants, params.sigma, params.mass, params.beta
    x2 = nondimensionalize(params).x_beta_sq
    p0, p1, p2 = _P_POLY[params.model]
    g0, g1 = _GAMMA_POLY[params.model]
    if params.model is Model.DP:
        P_amp = c.hbar * m * c.G / (4.0 * math.sqrt(math.pi) * s**3)
        G_amp = c.hbar * m * c.G / (6.0 * math.sqrt(math.pi) * s**3)
    else:
        P_amp = 3.0 * m * params.gamma_csl * c.hbar**2 / (32.0 * math.pi**1.5 * s**5)
        G_amp = m * params.gamma_csl * c.hbar**2 / (16.0 * math.pi**1.5 * s**5)
    P = P_amp * (p0 + p1 * x2 + p2 * x2 * x2)
    Gamma = beta * G_amp * (g0 + g1 * x2)
    return _report(params, P, Gamma)


def _radial_setup(params: ModelParams):
    """Amplitude A and power n such that k^4 D_k dk = A u^n exp(-u^2) du, u = sigma k."""
    c, s = params.constants, params.sigma
    if params.model is Model.DP:
        return 4.0 * math.pi * c.hbar * c.G / s**3, 2
    return c.hbar**2 * params.gamma_csl / s**5, 4


def _moment(n: int) -> float:
    """Integral of u^n exp(-u^2) over [0, inf)."""
    return 0.5 * gamma_fn((n + 1) / 2.0)


def _adaptive(func, label: str) -> float:
    value, abserr, info = integrate.quad(
        func, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=400, full_output=1
    )[:3]
    scale = integrate.quad(lambda u: abs(func(u)), 0.0, np.inf, epsabs=0.0, epsrel=1e-10, limit=400)[0]
    if not (abserr <= 1e-11 * max(scale, 1e-300)) or not math.isfinite(value):
        raise NumericalError(
            f"radial quadrature for {label} did not converge",
            {"value": value, "abserr": abserr, "neval": info.get("neval"), "scale": scale},
        )
    return value


def power_gamma_quadrature(params: ModelParams, method: str = "adaptive") -> RateReport:
    """P and Gamma from their k-space integrals, angular part done by isotropy.

    ``method="adaptive"`` integrates the radial integrand numerically;
    ``method="moments"`` expands the polynomial and uses exact Gaussian moments.
    """
    c, s, m, beta = params.constants, params.sigma, params.mass, params.beta
    amp, n = _radial_setup(params)
    # polynomial coefficients in u^2, straight from the k-space integrands
    a1 = beta * c.hbar**2 / (4.0 * m * s**2)
    a2 = beta**2 * c.hbar**4 / (64.0 * m**2 * s**4)
    g1 = 3.0 * beta * c.hbar**2 / (16.0 * m * s**2)

    if method == "adaptive":
        I_P = _adaptive(lambda u: u**n * math.exp(-u * u) * (1.0 - a1 * u * u + a2 * u**4), "P")
        if beta == 0:
            I_G = 0.0
        else:
            I_G = _adaptive(lambda u: u**n * math.exp(-u * u) * (1.0 - g1 * u * u), "Gamma")
    elif method == "moments":
        I_P = _moment(n) - a1 * _moment(n + 2) + a2 * _moment(n + 4)
        I_G = _moment(n) - g1 * _moment(n + 2)
    else:
        raise ValueError(f"unknown quadrature method {method!r}")

    # d^3k/(2 pi)^3 -> 4 pi k^2 dk / (8 pi^3)
    radial = amp / (2.0 * math.pi**2)
    P = 0.5 * m * radial * I_P
    Gamma = beta * m / 3.0 * radial * I_G
    return _report(params, P, Gamma)


def friction_rate(params: ModelParams) -> float:
    """eta = (beta m / 2) * (-laplacian D at the origin) = beta * P0."""
    return 0.5 * params.beta * params.mass * kernel_curvature_at_origin(params.model, params)


def effective_temperature_ratio(model, u: float) -> float:
    """T/T_beta as a function of u = E_sigma/(kB T_beta)."""
    model = Model.parse(model)
    if model is Model.DP:
        num = 1.0 - 1.5 * u + 15.0 / 16.0 * u * u
        den = 1.0 - 9.0 / 8.0 * u
    else:
        num = 1.0 - 2.5 * u + 35.0 / 16.0 * u * u
        den = 1.0 - 15.0 / 8.0 * u
    if den <= 0:
        raise RegimeError("no finite equilibrium temperature: dissipation rate is not positive")
    return num / den


def effective_temperature(params: ModelParams) -> float:
    """Collapse-noise temperature T with (3/2) kB T = P/Gamma."""
    if params.beta == 0:
        raise RegimeError("no finite equilibrium temperature: beta = 0 has no dissipation")
    report = power_gamma_closed_form(params)
    if report.regime is not Regime.DISSIPATIVE:
        raise RegimeError(
            f"no finite equilibrium temperature in the {report.regime.value} regime (Gamma={report.Gamma!r})"
        )
    u = params.beta * elementary_energy(params)
    return params.T_beta * effective_temperature_ratio(params.model, u)


def critical_beta(params: ModelParams) -> float:
    return CRITICAL_X_BETA_SQ[params.model] / (2.0 * elementary_energy(params))


def threshold_temperature(params: ModelParams) -> float:
    c = params.constants
    return c.hbar**2 / (params.mass * c.kB * params.sigma**2)


def mixed_temperature(Gamma: float, T: float, Gamma_env: float, T_env: float) -> float:
    """Rate-weighted mean of the noise and environment temperatures."""
    total = Gamma + Gamma_env
    if not total > 0:
        raise RegimeError("no equilibrium: Gamma + Gamma_env must be positive")
    return (Gamma * T + Gamma_env * T_env) / total


def mixed_equilibrium(report: RateReport, env: EnvironmentParams) -> tuple[float, float]:
    """Asymptotic mean energy and temperature with an extra thermal bath.

    Valid whenever the combined rate is positive, including the heating regime
    of the collapse noise.
    """
    total = report.Gamma + env.Gamma_env
    if not total > 0:
        raise RegimeError(
            f"no equilibrium: Gamma + Gamma_env = {total!r} is not positive"
        )
    E_inf = (report.P + env.P_env) / total
    return E_inf, 2.0 / 3.0 * E_inf / report.kB
