"""Fourier-space decoherence kernels of the DP and CSL models."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError, SingularInputError
from .units import Model, ModelParams


def _coupling(params: ModelParams) -> float:
    """Kernel amplitude: 4 pi hbar G (DP, multiplies 1/k^2) or hbar^2 gamma (CSL)."""
    c = params.constants
    if params.model is Model.DP:
        return 4.0 * math.pi * c.hbar * c.G
    return c.hbar**2 * params.gamma_csl


def kernel_value(model, k, params: ModelParams):
    """D_k = exp(-sigma^2 k^2) * (4 pi hbar G / k^2 | hbar^2 gamma).

    ``model`` must agree with ``params.model``; it is repeated so call sites
    read like the formula.  Works elementwise on arrays.
    """
    model = Model.parse(model)
    if model is not params.model:
        raise ValueError(f"model {model.value} does not match params ({params.model.value})")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("wavenumber magnitude must be >= 0")
    gauss = np.exp(-(params.sigma * k) ** 2)
    if model is Model.DP:
        if np.any(k == 0):
            raise SingularInputError("DP kernel is singular at k = 0; use kernel_k2_weighted")
        out = _coupling(params) * gauss / k**2
    else:
        out = _coupling(params) * gauss
    return float(out) if out.ndim == 0 else out


def kernel_k2_weighted(k, params: ModelParams):
    """k^2 D_k, finite for both models including k = 0."""
    k = np.asarray(k, dtype=float)
    gauss = np.exp(-(params.sigma * k) ** 2)
    if params.model is Model.DP:
        out = _coupling(params) * gauss
    else:
        out = _coupling(params) * k**2 * gauss
    return float(out) if out.ndim == 0 else out


def kernel_curvature_at_origin(model, params: ModelParams) -> float:
    """-laplacian D(r) at r = 0, i.e. the integral of D_k k^2 d^3k/(2 pi)^3.

    Half the mass times this value is the heating power of the standard model.
    """
    model = Model.parse(model)
    if model is not params.model:
        raise ValueError(f"model {model.value} does not match params ({params.model.value})")
    c, s = params.constants, params.sigma
    if model is Model.DP:
        return c.hbar * c.G / (2.0 * math.sqrt(math.pi) * s**3)
    return 3.0 * c.hbar**2 * params.gamma_csl / (16.0 * math.pi**1.5 * s**5)


def mapping_prefactor(params: ModelParams, gamma: float) -> float:
    """-hbar gamma / (4 pi G): multiplies d/d(sigma^2) of a DP quantity to give CSL."""
    c = params.constants
    return -c.hbar * gamma / (4.0 * math.pi * c.G)


def sigma_sq_derivative(func, sigma: float, rel_step: float = 1e-5):
    """d func / d(sigma^2) at ``sigma`` by Richardson-extrapolated central differences.

    ``func`` maps a smearing length to a float or array.  The step in sigma^2 is
    ``rel_step * sigma^2``.
    """
    s2 = sigma * sigma
    h = rel_step * s2
    if not (h > 0 and s2 - h > 0 and s2 + h != s2):
        raise NumericalError(
            "finite-difference step underflow", {"sigma": sigma, "rel_step": rel_step, "h": h}
        )

    def central(step):
        fp = np.asarray(func(math.sqrt(s2 + step)), dtype=float)
        fm = np.asarray(func(math.sqrt(s2 - step)), dtype=float)
        return (fp - fm) / (2.0 * step)

    coarse = central(h)
    fine = central(h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def dp_to_csl_mapping_residual(params_dp: ModelParams, gamma: float, k_grid=None) -> float:
    """Max relative deviation between D_k^CSL and the mapped sigma^2-derivative of D_k^DP.

    The default grid is 64 points spread over (0, 6/sigma].
    """
    if params_dp.model is not Model.DP:
        raise ValueError("params_dp must describe the DP model")
    sigma = params_dp.sigma
    if k_grid is None:
        k_grid = np.linspace(6.0 / sigma / 64, 6.0 / sigma, 64)
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid <= 0):
        raise ValueError("mapping residual grid must exclude k = 0")

    def dp_kernel(s):
        return kernel_value(Model.DP, k_grid, params_dp.replace(sigma=s))

    numeric = mapping_prefactor(params_dp, gamma) * sigma_sq_derivative(dp_kernel, sigma)
    params_csl = ModelParams(
        Model.CSL, sigma, params_dp.mass, params_dp.beta, gamma_csl=gamma,
        constants=params_dp.constants,
    )
    exact = kernel_value(Model.CSL, k_grid, params_csl)
    return float(np.max(np.abs(numeric - exact) / np.abs(exact)))
