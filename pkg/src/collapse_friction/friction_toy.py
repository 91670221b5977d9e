"""Single-particle linear-friction model with a Gibbs steady state.

The Lindblad generator x + i(hbar beta/4m) p gives, for the momentum alone,
an Ornstein-Uhlenbeck process with per-component drift -(beta D/m) p and
noise strength 2D.  Its mean energy obeys

    dE/dt = 3D/m - (2 beta D/m) E,

and its stationary momentum law is Maxwell-Boltzmann at inverse temperature beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .jump_kinetics import EnsembleStats, reduce_samples

# trajectories per independent random stream
BLOCK = 1000


@dataclass(frozen=True)
class ToyParams:
    D: float
    beta: float
    mass: float

    def __post_init__(self):
        for name in ("beta", "mass"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and positive, got {v!r}")
        if not (math.isfinite(self.D) and self.D >= 0):
            raise ParameterError(f"D must be finite and >= 0, got {self.D!r}")

    @property
    def drift(self) -> float:
        """Per-component momentum relaxation rate beta D / m."""
        return self.beta * self.D / self.mass

    @property
    def heating_power(self) -> float:
        return 3.0 * self.D / self.mass

    @property
    def energy_relaxation_rate(self) -> float:
        return 2.0 * self.beta * self.D / self.mass

    @property
    def max_dt(self) -> float:
        if self.D == 0:
            return math.inf
        return 0.01 * self.mass / (self.beta * self.D)


def toy_energy_ode(E0: float, params: ToyParams, t):
    E_inf = 1.5 / params.beta
    out = E_inf + (E0 - E_inf) * np.exp(-params.energy_relaxation_rate * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _stepper(params: ToyParams, dt: float, method: str):
    if method not in ("exact", "euler"):
        raise ValueError(f"unknown integrator {method!r}")
    kappa = params.drift
    if kappa == 0:
        return 1.0, 0.0
    if method == "exact":
        decay = math.exp(-kappa * dt)
        noise = math.sqrt(params.D / kappa * -math.expm1(-2.0 * kappa * dt))
    else:
        decay = 1.0 - kappa * dt
        noise = math.sqrt(2.0 * params.D * dt)
    return decay, noise


def _validate_dt(params: ToyParams, dt: float):
    if not (dt > 0 and dt <= params.max_dt):
        raise ParameterError(
            f"dt={dt!r} violates the stability bound dt <= 0.01 m/(beta D) = {params.max_dt!r}"
        )


def toy_langevin_ensemble(
    params: ToyParams,
    n_traj: int,
    horizon: float,
    dt: float,
    seed: int,
    time_grid=None,
    method: str = "exact",
    p0=None,
):
    """Ensemble of momentum trajectories; returns (EnsembleStats, final momenta).

    Each block of ``BLOCK`` trajectories owns a stream derived from
    (seed, block index), so results do not depend on how blocks are scheduled.
    Grid times are rounded to whole steps.
    """
    _validate_dt(params, dt)
    if n_traj < 2:
        raise ValueError("need at least two trajectories")
    if time_grid is None:
        time_grid = np.linspace(horizon / 10, horizon, 10)
    grid = np.asarray(time_grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > horizon * (1 + 1e-12)) or np.any(np.diff(grid) < 0):
        raise ValueError("time grid must be sorted and within [0, horizon]")
    steps = np.rint(grid / dt).astype(int)
    decay, noise = _stepper(params, dt, method)
    p_init = np.zeros(3) if p0 is None else np.asarray(p0, dtype=float).reshape(3)

    H_blocks, finals = [], []
    for b, start in enumerate(range(0, n_traj, BLOCK)):
        n = min(BLOCK, n_traj - start)
        rng = _block_rng(seed, b)
        p = np.tile(p_init, (n, 1))
        H = np.empty((n, grid.size))
        step = 0
        for g, target in enumerate(steps):
            while step < target:
                p = decay * p + noise * rng.standard_normal((n, 3))
                step += 1
            H[:, g] = np.einsum("ij,ij->i", p, p) / (2.0 * params.mass)
        H_blocks.append(H)
        finals.append(p)
    H = np.concatenate(H_blocks)
    mean, se = reduce_samples(H)
    stats = EnsembleStats(steps * dt, mean, se, n_traj, seed, extra={"method": method, "dt": dt})
    return stats, np.concatenate(finals)


def stationary_second_moment(
    params: ToyParams,
    n_traj: int,
    burn_in: float,
    window: float,
    dt: float,
    seed: int,
    method: str = "exact",
) -> tuple[float, float]:
    """Estimate of <p^2> at equilibrium with its standard error.

    Each trajectory is time-averaged over ``window`` after ``burn_in``; the
    error comes from the spread of those independent per-trajectory averages.
    """
    _validate_dt(params, dt)
    decay, noise = _stepper(params, dt, method)
    n_burn = int(round(burn_in / dt))
    n_win = int(round(window / dt))
    if n_win < 1:
        raise ValueError("window shorter than one step")
    per_traj = []
    for b, start in enumerate(range(0, n_traj, BLOCK)):
        n = min(BLOCK, n_traj - start)
        rng = _block_rng(seed, b)
        p = np.zeros((n, 3))
        for _ in range(n_burn):
            p = decay * p + noise * rng.standard_normal((n, 3))
        acc = np.zeros(n)
        for _ in range(n_win):
            p = decay * p + noise * rng.standard_normal((n, 3))
            acc += np.einsum("ij,ij->i", p, p)
        per_traj.append(acc / n_win)
    samples = np.concatenate(per_traj)[:, None]
    mean, se = reduce_samples(samples)
    return float(mean[0]), float(se[0])
