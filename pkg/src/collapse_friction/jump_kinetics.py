"""Event-driven Monte Carlo of the single-particle momentum jump process.

Between jumps the momentum is constant, so the jump intensity is constant too
and the process can be sampled exactly by thinning: proposals come from an
isotropic envelope whose total rate and radial law are known in closed form,
and each proposal is kept with probability (true rate)/(envelope rate).

Internally everything runs with hbar = m = sigma = 1 and time in units of
1/rate_scale.  In those units a jump p -> p + k happens with rate density

    exp(-k^2) * h(k) * F(p, k)^2,   F = 1 - bt k^2/8 - bt (k.p)/4,

per d^3k, where h = 1/k^2 (DP) or 1 (CSL) and bt = beta hbar^2/(m sigma^2).
F equals 1 - (beta/8m)[(p + hbar k)^2 - p^2]: transfers that lower the
kinetic energy are favoured, which is what produces friction.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import JumpCapExceeded, NumericalError, SamplerError
from .kernels import kernel_value
from .rates import EnvironmentParams, power_gamma_closed_form
from .units import Model, ModelParams, energy_unit, momentum_unit, nondimensionalize

DEFAULT_MAX_JUMPS = 10_000_000
MAX_ATTEMPTS = 1_000_000

# 2 pi Gamma((n+1)/2): envelope mass of the radial monomial k^n exp(-k^2), with 4 pi k^2 dk
_RADIAL_MASS = [2.0 * math.pi * math.gamma((n + 1) / 2.0) for n in range(9)]


class JumpStream:
    """Buffered standard draws from one numpy Generator.

    Scalar draws from a Generator cost about a microsecond each; pulling them
    in blocks keeps the event loop in plain Python floats.
    """

    def __init__(self, seed_or_rng, block: int = 4096):
        if isinstance(seed_or_rng, np.random.Generator):
            self.rng = seed_or_rng
        else:
            self.rng = np.random.Generator(np.random.PCG64(seed_or_rng))
        self.block = block
        self._n, self._ni = [], 0
        self._u, self._ui = [], 0
        self._e, self._ei = [], 0

    def normal(self) -> float:
        if self._ni == len(self._n):
            self._n, self._ni = self.rng.standard_normal(self.block).tolist(), 0
        self._ni += 1
        return self._n[self._ni - 1]

    def uniform(self) -> float:
        if self._ui == len(self._u):
            self._u, self._ui = self.rng.random(self.block).tolist(), 0
        self._ui += 1
        return self._u[self._ui - 1]

    def exponential(self) -> float:
        if self._ei == len(self._e):
            self._e, self._ei = self.rng.standard_exponential(self.block).tolist(), 0
        self._ei += 1
        return self._e[self._ei - 1]


def trajectory_seed(master_seed: int, index: int) -> int:
    """64-bit seed of trajectory ``index``, a fixed hash of (master_seed, index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


# --------------------------------------------------------------------------
# dimensionless kernel of the sampler


def _shape(params: ModelParams) -> int:
    # power of k in k^2 h(k): 0 for DP, 2 for CSL
    return 0 if params.model is Model.DP else 2


def _next_jump(px, py, pz, bt, s, stream, tau_max=math.inf, max_attempts=MAX_ATTEMPTS):
    """Waiting time and transfer of the next accepted jump from momentum p.

    Returns ``(tau, None)`` once the accumulated waiting time passes
    ``tau_max``; by memorylessness the caller can simply stop there.
    """
    b = bt / 8.0
    q = bt / 4.0
    d = q * math.sqrt(px * px + py * py + pz * pz)
    # (1 + d k + b k^2)^2 = sum_j c_j k^j, all c_j >= 0
    c = (1.0, 2.0 * d, d * d + 2.0 * b, 2.0 * b * d, b * b)
    w = [c[j] * _RADIAL_MASS[j + s] for j in range(5)]
    total = w[0] + w[1] + w[2] + w[3] + w[4]
    tau = 0.0
    for _ in range(max_attempts):
        tau += stream.exponential() / total
        if tau > tau_max:
            return tau, None
        r = stream.uniform() * total
        j = 0
        acc = w[0]
        while r >= acc and j < 4:
            j += 1
            acc += w[j]
        # k^2 ~ Gamma((n+1)/2) is half a chi-square with n+1 degrees of freedom
        ssq = 0.0
        for _ in range(j + s + 1):
            z = stream.normal()
            ssq += z * z
        k = math.sqrt(0.5 * ssq)
        nx, ny, nz = stream.normal(), stream.normal(), stream.normal()
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if norm == 0.0:
            continue
        kx, ky, kz = k * nx / norm, k * ny / norm, k * nz / norm
        f = 1.0 - b * k * k - q * (kx * px + ky * py + kz * pz)
        env = 1.0 + d * k + b * k * k
        if stream.uniform() * env * env < f * f:
            return tau, (kx, ky, kz)
    raise SamplerError(f"no proposal accepted in {max_attempts} attempts (|p|={d / q if q else 0.0})")


def _total_rate_dimensionless(p_sq: float, bt: float, s: int) -> float:
    b = bt / 8.0
    m = [0.5 * math.gamma((n + 1) / 2.0) for n in range(s, s + 5)]
    return 4.0 * math.pi * (m[0] - 2.0 * b * m[2] + b * b * m[4] + bt * bt * p_sq / 48.0 * m[2])


# --------------------------------------------------------------------------
# public physics-unit API


def jump_rate_density(p, k, params: ModelParams) -> float:
    """Rate density (per unit time per d^3k) of the jump p -> p + hbar k."""
    p = np.asarray(p, dtype=float)
    k = np.asarray(k, dtype=float)
    hbar, m, beta = params.constants.hbar, params.mass, params.beta
    kk = float(np.sqrt(k @ k))
    pk = p + hbar * k
    bracket = 1.0 + beta / (8.0 * m) * (float(p @ p) - float(pk @ pk))
    Dk = kernel_value(params.model, kk, params)
    return m**2 / hbar**2 * Dk / (2.0 * math.pi) ** 3 * bracket**2


def total_jump_rate(p, params: ModelParams) -> float:
    """Integral of :func:`jump_rate_density` over all k, in closed form."""
    p = np.asarray(p, dtype=float)
    dl = nondimensionalize(params)
    pt_sq = float(p @ p) / momentum_unit(params) ** 2
    return dl.rate_scale * _total_rate_dimensionless(pt_sq, dl.beta_tilde, _shape(params))


@dataclass(frozen=True)
class MomentumState:
    p: tuple
    t: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.p) or not math.isfinite(self.t):
            raise ValueError("momentum state must be finite")


def sample_next_jump(state: MomentumState, params: ModelParams, rng) -> tuple[float, np.ndarray]:
    """Exact sample of the waiting time and momentum transfer hbar k of the next jump."""
    stream = rng if isinstance(rng, JumpStream) else JumpStream(rng)
    dl = nondimensionalize(params)
    if dl.rate_scale == 0:
        return math.inf, np.zeros(3)
    pu = momentum_unit(params)
    px, py, pz = (v / pu for v in state.p)
    tau, k = _next_jump(px, py, pz, dl.beta_tilde, _shape(params), stream)
    return tau / dl.rate_scale, np.asarray(k) * pu


@dataclass
class Trajectory:
    """Jump epochs of one trajectory; ``momenta[i]`` holds on [times[i], times[i+1])."""

    times: np.ndarray
    momenta: np.ndarray
    seed: int
    params: ModelParams
    horizon: float
    complete: bool = True

    @property
    def states(self) -> list[MomentumState]:
        return [MomentumState(tuple(p), float(t)) for t, p in zip(self.times, self.momenta)]

    @property
    def transfers(self) -> np.ndarray:
        return np.diff(self.momenta, axis=0)

    def momentum_at(self, t) -> np.ndarray:
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1
        if np.any(idx < 0):
            raise ValueError("requested time precedes the trajectory start")
        return self.momenta[idx]

    def energy_at(self, t) -> np.ndarray:
        p = self.momentum_at(t)
        return np.sum(p * p, axis=-1) / (2.0 * self.params.mass)


def _simulate_dimensionless(p0t, bt, s, tau_h, stream, max_jumps):
    px, py, pz = p0t
    times = [0.0]
    moms = [(px, py, pz)]
    tau = 0.0
    while True:
        wait, k = _next_jump(px, py, pz, bt, s, stream, tau_max=tau_h - tau)
        if k is None:
            return times, moms, True
        if len(times) > max_jumps:
            return times, moms, False
        tau += wait
        px, py, pz = px + k[0], py + k[1], pz + k[2]
        times.append(tau)
        moms.append((px, py, pz))


def simulate_trajectory(
    p0, params: ModelParams, horizon: float, seed: int, max_jumps: int = DEFAULT_MAX_JUMPS
) -> Trajectory:
    """Exact event-driven trajectory on [0, horizon], reproducible from ``seed``."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    p0 = np.asarray(p0, dtype=float).reshape(3)
    dl = nondimensionalize(params)
    pu = momentum_unit(params)
    if dl.rate_scale == 0:
        return Trajectory(np.zeros(1), p0[None, :].copy(), int(seed), params, horizon)
    stream = JumpStream(int(seed))
    times, moms, complete = _simulate_dimensionless(
        tuple(p0 / pu), dl.beta_tilde, _shape(params), horizon * dl.rate_scale, stream, max_jumps
    )
    traj = Trajectory(
        np.asarray(times) / dl.rate_scale, np.asarray(moms) * pu, int(seed), params, horizon, complete
    )
    traj.momenta[0] = p0
    if not complete:
        raise JumpCapExceeded(
            f"trajectory exceeded {max_jumps} jumps before t={horizon}", partial=traj
        )
    return traj


def exact_energy_trajectory(E0: float, params: ModelParams, t, env: EnvironmentParams | None = None):
    """Mean kinetic energy from the balance equation dE/dt = P - Gamma E.

    With ``env`` the bath's power and rate are added to P and Gamma.
    """
    report = power_gamma_closed_form(params)
    P, Gamma = report.P, report.Gamma
    if env is not None:
        P, Gamma = P + env.P_env, Gamma + env.Gamma_env
    t = np.asarray(t, dtype=float)
    z = -Gamma * t
    # expm1(z)/z, continuous through Gamma = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(np.abs(z) < 1e-8, 1.0 + z / 2.0, np.expm1(z) / np.where(z == 0, 1.0, z))
    out = E0 * np.exp(z) + P * t * phi
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# ensembles


@dataclass
class EnsembleStats:
    time_grid: np.ndarray
    mean_H: np.ndarray
    stderr_H: np.ndarray
    n_traj: int
    master_seed: int | None = None
    extra: dict = field(default_factory=dict)


class EnsembleError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"trajectory {index} failed: {cause!r}")
        self.index = index
        self.cause = cause


def reduce_samples(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error over axis 0 with exactly rounded sums.

    ``math.fsum`` makes the result independent of summation order, so the
    reduction is deterministic whatever the chunking.
    """
    n = H.shape[0]
    mean = np.array([math.fsum(col) / n for col in H.T])
    var = np.array([math.fsum((col - mu) ** 2) / (n - 1) for col, mu in zip(H.T, mean)])
    return mean, np.sqrt(var / n)


def _ensemble_chunk(args):
    kind, indices, payload = args
    rows = []
    for i in indices:
        try:
            rows.append(_TASKS[kind](i, **payload))
        except Exception as exc:  # noqa: BLE001 - re-raised with the index
            return i, exc
    return None, np.asarray(rows)


def initial_momentum(index: int, master_seed: int, params: ModelParams, p0=None, initial_T=None):
    """Start momentum of trajectory ``index``: fixed ``p0`` or a Maxwellian draw at ``initial_T``.

    The Maxwellian draw uses its own stream so it never shifts the jump stream.
    """
    if initial_T is None:
        return np.zeros(3) if p0 is None else np.asarray(p0, dtype=float).reshape(3)
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index), 1))
    scale = math.sqrt(params.mass * params.constants.kB * initial_T)
    return scale * np.random.Generator(np.random.PCG64(ss)).standard_normal(3)


def _jump_row(i, p0, params, horizon, grid, master_seed, max_jumps, initial_T=None):
    start = initial_momentum(i, master_seed, params, p0, initial_T)
    traj = simulate_trajectory(start, params, horizon, trajectory_seed(master_seed, i), max_jumps)
    return traj.energy_at(grid)


def _map_chunks(kind, n_traj, payload, workers):
    chunk = max(1, math.ceil(n_traj / max(1, workers) / 4))
    jobs = [(kind, range(a, min(a + chunk, n_traj)), payload) for a in range(0, n_traj, chunk)]
    if workers <= 1:
        results = map(_ensemble_chunk, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_ensemble_chunk, jobs)
    rows = []
    try:
        for failed, block in results:
            if failed is not None:
                raise EnsembleError(failed, block)
            rows.append(block)
    finally:
        if workers > 1:
            pool.shutdown(cancel_futures=True)
    return np.concatenate(rows, axis=0)


def _check_grid(time_grid, horizon):
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("time grid must be a non-empty 1-D sequence")
    if np.any(grid < 0) or np.any(grid > horizon):
        raise ValueError("time grid must lie within [0, horizon]")
    return grid


def run_ensemble(
    p0,
    params: ModelParams,
    horizon: float,
    n_traj: int,
    time_grid,
    master_seed: int,
    workers: int = 1,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    initial_T: float | None = None,
) -> EnsembleStats:
    """Mean and standard error of H = p^2/2m on ``time_grid`` over ``n_traj`` trajectories.

    Trajectory i uses the seed ``trajectory_seed(master_seed, i)``; with
    ``initial_T`` each trajectory starts from its own Maxwellian draw instead of ``p0``.
    """
    if n_traj < 2:
        raise ValueError("need at least two trajectories for a standard error")
    grid = _check_grid(time_grid, horizon)
    payload = dict(
        p0=np.asarray(p0, dtype=float), params=params, horizon=horizon, grid=grid,
        master_seed=master_seed, max_jumps=max_jumps, initial_T=initial_T,
    )
    H = _map_chunks("jump", n_traj, payload, workers)
    mean, se = reduce_samples(H)
    return EnsembleStats(grid, mean, se, n_traj, master_seed)


def _thermostat_row(i, p0, params, env, grid_steps, dt, master_seed):
    """One trajectory of jumps plus an exact OU bath, Strang-split with step ``dt``."""
    dl = nondimensionalize(params)
    pu = momentum_unit(params)
    nu = dl.rate_scale
    bt, s = dl.beta_tilde, _shape(params)
    stream = JumpStream(trajectory_seed(master_seed, i))
    # per-component bath: dp = -(Gamma_E/2) p dt + noise, stationary variance m kB T_E
    half = 0.5 * dt
    decay = math.exp(-0.5 * env.Gamma_env * half)
    kick = math.sqrt(params.mass * env.kB * env.T_env * (1.0 - decay * decay)) / pu
    tau_step = dt * nu
    px, py, pz = (v / pu for v in p0)
    out = []
    step = 0
    for target in grid_steps:
        while step < target:
            px = px * decay + kick * stream.normal()
            py = py * decay + kick * stream.normal()
            pz = pz * decay + kick * stream.normal()
            remaining = tau_step
            while nu > 0:
                wait, k = _next_jump(px, py, pz, bt, s, stream, tau_max=remaining)
                if k is None:
                    break
                remaining -= wait
                px, py, pz = px + k[0], py + k[1], pz + k[2]
            px = px * decay + kick * stream.normal()
            py = py * decay + kick * stream.normal()
            pz = pz * decay + kick * stream.normal()
            step += 1
        out.append(0.5 * (px * px + py * py + pz * pz))
    return np.asarray(out) * energy_unit(params)


_TASKS = {"jump": _jump_row, "thermostat": _thermostat_row}


def run_thermostat_ensemble(
    p0,
    params: ModelParams,
    env: EnvironmentParams,
    horizon: float,
    n_traj: int,
    time_grid,
    master_seed: int,
    dt: float,
    workers: int = 1,
) -> EnsembleStats:
    """Jump process coupled to an Ornstein-Uhlenbeck bath at (T_env, Gamma_env).

    The bath is integrated exactly; it is combined with the exact jump process
    by symmetric splitting, whose bias on the mean energy is O(dt^2).
    Grid times must be multiples of ``dt``.
    """
    if n_traj < 2:
        raise ValueError("need at least two trajectories for a standard error")
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = _check_grid(time_grid, horizon)
    steps = np.rint(grid / dt).astype(int)
    if np.any(np.abs(steps * dt - grid) > 1e-9 * max(dt, float(np.max(grid)))):
        raise NumericalError("time grid is not aligned with the splitting step", {"dt": dt})
    if np.any(np.diff(steps) < 0):
        raise ValueError("time grid must be sorted")
    payload = dict(
        p0=np.asarray(p0, dtype=float), params=params, env=env,
        grid_steps=steps.tolist(), dt=dt, master_seed=master_seed,
    )
    H = _map_chunks("thermostat", n_traj, payload, workers)
    mean, se = reduce_samples(H)
    return EnsembleStats(grid, mean, se, n_traj, master_seed, extra={"dt": dt})
