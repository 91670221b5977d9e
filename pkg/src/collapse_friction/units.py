"""Physical constants, model parameters and the dimensionless working system.

Every numerical routine in the package works in units where hbar = m = sigma = 1
and time is measured in units of 1/rate_scale.  This module owns the mapping
to and from SI (or whatever consistent system the constants are given in).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import scipy.constants as sc

from .errors import ParameterError


class Model(str, enum.Enum):
    DP = "DP"
    CSL = "CSL"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ParameterError(f"unknown model {value!r}; expected DP or CSL") from None


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    G: float = sc.G
    kB: float = sc.k
    # CSL reference mass: one atomic mass unit
    m0: float = sc.physical_constants["atomic mass constant"][0]

    def __post_init__(self):
        for name in ("hbar", "G", "kB", "m0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"constant {name} must be finite and positive, got {value!r}")


SI = PhysicalConstants()
# hbar = G = kB = m0 = 1; used by the Monte Carlo acceptance runs
WORKING = PhysicalConstants(hbar=1.0, G=1.0, kB=1.0, m0=1.0)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be finite and positive, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one dissipative collapse model acting on one particle species.

    ``beta`` is the canonical dissipation parameter; ``beta = 0`` is the
    standard, non-dissipative model.  ``gamma_csl`` is required for CSL and
    must be absent for DP.
    """

    model: Model
    sigma: float
    mass: float
    beta: float = 0.0
    gamma_csl: float | None = None
    constants: PhysicalConstants = field(default=SI)

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))
        object.__setattr__(self, "mass", _positive("mass", self.mass))
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta >= 0):
            raise ParameterError(f"beta must be finite and >= 0, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)
        if self.model is Model.CSL:
            if self.gamma_csl is None:
                raise ParameterError("CSL parameters require gamma_csl")
            gamma = float(self.gamma_csl)
            if not (math.isfinite(gamma) and gamma >= 0):
                raise ParameterError(f"gamma_csl must be finite and >= 0, got {self.gamma_csl!r}")
            object.__setattr__(self, "gamma_csl", gamma)
        elif self.gamma_csl is not None:
            raise ParameterError("gamma_csl is only meaningful for the CSL model")

    @property
    def lambda_csl(self) -> float | None:
        """CSL collapse rate gamma*m0^2/(sqrt(4 pi) sigma)^3, or None for DP."""
        if self.model is not Model.CSL:
            return None
        return self.gamma_csl * self.constants.m0**2 / (math.sqrt(4 * math.pi) * self.sigma) ** 3

    @property
    def T_beta(self) -> float:
        """Temperature view of beta, 1/(kB beta); infinite for beta = 0."""
        return math.inf if self.beta == 0 else 1.0 / (self.constants.kB * self.beta)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def with_T_beta(self, T_beta: float) -> "ModelParams":
        T_beta = _positive("T_beta", T_beta)
        return self.replace(beta=1.0 / (self.constants.kB * T_beta))

    def with_x_beta_sq(self, x_beta_sq: float) -> "ModelParams":
        """Copy with beta chosen so that x_beta^2 = 2 beta E_sigma takes the given value."""
        return self.replace(beta=float(x_beta_sq) / (2.0 * elementary_energy(self)))


@dataclass(frozen=True)
class DimensionlessParams:
    x_beta_sq: float
    rate_scale: float
    e_sigma: float

    @property
    def beta_tilde(self) -> float:
        """beta in units of m sigma^2 / hbar^2 (equals 2 x_beta^2)."""
        return 2.0 * self.x_beta_sq

    @property
    def energy_unit(self) -> float:
        """hbar^2/(m sigma^2) = 4 E_sigma."""
        return 4.0 * self.e_sigma


def elementary_energy(p: ModelParams) -> float:
    return p.constants.hbar**2 / (4.0 * p.mass * p.sigma**2)


def rate_scale(p: ModelParams) -> float:
    """Prefactor nu such that the jump rate density per d^3(sigma k) per unit time
    is nu * exp(-u^2) * (1/u^2 for DP, 1 for CSL) * (bracket)^2, u = sigma k."""
    c = p.constants
    if p.model is Model.DP:
        return p.mass**2 * c.G / (2.0 * math.pi**2 * c.hbar * p.sigma)
    return p.mass**2 * p.gamma_csl / (8.0 * math.pi**3 * p.sigma**3)


def nondimensionalize(p: ModelParams) -> DimensionlessParams:
    if not isinstance(p, ModelParams):
        raise ParameterError("expected ModelParams")
    hbar = p.constants.hbar
    return DimensionlessParams(
        x_beta_sq=hbar**2 * p.beta / (2.0 * p.mass * p.sigma**2),
        rate_scale=rate_scale(p),
        e_sigma=elementary_energy(p),
    )


def redimensionalize(
    d: DimensionlessParams,
    model: Model | str,
    sigma: float,
    constants: PhysicalConstants = SI,
) -> ModelParams:
    """Inverse of :func:`nondimensionalize` given the smearing length.

    For DP the rate scale is fixed by G and is not an independent input; it is
    checked for consistency instead.
    """
    model = Model.parse(model)
    sigma = _positive("sigma", sigma)
    e_sigma = _positive("e_sigma", d.e_sigma)
    mass = constants.hbar**2 / (4.0 * e_sigma * sigma**2)
    beta = d.x_beta_sq / (2.0 * e_sigma)
    if model is Model.CSL:
        gamma = d.rate_scale * 8.0 * math.pi**3 * sigma**3 / mass**2
        return ModelParams(model, sigma, mass, beta, gamma_csl=gamma, constants=constants)
    out = ModelParams(model, sigma, mass, beta, constants=constants)
    expected = rate_scale(out)
    if not math.isclose(expected, d.rate_scale, rel_tol=1e-12):
        raise ParameterError(
            f"DP rate scale {d.rate_scale!r} inconsistent with G (expected {expected!r})"
        )
    return out


def momentum_unit(p: ModelParams) -> float:
    return p.constants.hbar / p.sigma


def energy_unit(p: ModelParams) -> float:
    return p.constants.hbar**2 / (p.mass * p.sigma**2)
