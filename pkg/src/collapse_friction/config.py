"""Flat key = value experiment configs.

One assignment per line, ``#`` starts a comment, values may be quoted.
Unknown keys are rejected with the offending line number.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .friction_toy import ToyParams
from .rates import EnvironmentParams
from .units import SI, WORKING, Model, ModelParams

COMMANDS = ("rates", "sweep", "simulate", "toy", "validate")

FLOAT_KEYS = {
    "sigma_m", "gamma_csl_m3_per_s", "mass_kg", "beta_per_J", "T_beta_K",
    "T_env_K", "Gamma_env_per_s",
    "sweep_min", "sweep_max",
    "horizon_s", "p0_x", "p0_y", "p0_z", "initial_T_K", "dt_s",
    "toy_D",
}
INT_KEYS = {"seed", "sweep_points", "n_traj", "grid_points", "max_jumps"}
STR_KEYS = {"model", "units", "sweep_axis", "sweep_scale", "toy_method"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | STR_KEYS

SWEEP_AXES = ("beta_per_J", "T_beta_K", "x_beta_sq")


class ConfigError(ParameterError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    n_points: int
    scale: str = "linear"

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.n_points)
        return np.linspace(self.min, self.max, self.n_points)


@dataclass(frozen=True)
class MCSettings:
    n_traj: int
    horizon: float
    grid_points: int
    master_seed: int
    p0: tuple = (0.0, 0.0, 0.0)
    initial_T: float | None = None
    dt: float | None = None
    max_jumps: int = 10_000_000
    method: str = "exact"

    def time_grid(self):
        return np.linspace(self.horizon / self.grid_points, self.horizon, self.grid_points)


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    params: ModelParams | None
    env: EnvironmentParams | None
    sweep_axis: SweepAxis | None
    mc: MCSettings | None
    toy: ToyParams | None
    output_dir: Path
    seed: int
    threads: int
    config_hash: str
    raw: dict


def _parse_int(value: str) -> int:
    try:
        return int(value.replace("_", ""))
    except ValueError:
        f = float(value)
        if not f.is_integer():
            raise
        return int(f)


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        try:
            if key in FLOAT_KEYS:
                parsed = float(value)
                if not math.isfinite(parsed):
                    raise ValueError
            elif key in INT_KEYS:
                parsed = _parse_int(value)
            else:
                parsed = value
        except ValueError:
            raise ConfigError(f"cannot parse value {value!r}", line=lineno, key=key) from None
        values[key] = (parsed, lineno)
    return values


def config_hash(values: dict) -> str:
    canon = "\n".join(f"{k}={values[k]!r}" for k in sorted(values))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _get(values, key, default=None, required=False):
    if key in values:
        return values[key][0]
    if required:
        raise ConfigError("missing required key", key=key)
    return default


def _wrap(values, key, fn):
    """Run ``fn`` and attach the line of ``key`` to any parameter error."""
    try:
        return fn()
    except ConfigError:
        raise
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc), line=values.get(key, (None, None))[1], key=key) from None


def build_model_params(values: dict) -> ModelParams:
    units = _get(values, "units", "si").lower()
    if units not in ("si", "working"):
        raise ConfigError("units must be 'si' or 'working'", line=values["units"][1], key="units")
    constants = SI if units == "si" else WORKING
    model = _wrap(values, "model", lambda: Model.parse(_get(values, "model", required=True)))
    if "beta_per_J" in values and "T_beta_K" in values:
        raise ConfigError("give either beta_per_J or T_beta_K, not both", line=values["T_beta_K"][1], key="T_beta_K")
    if "T_beta_K" in values:
        T = values["T_beta_K"][0]
        if not T > 0:
            raise ConfigError("T_beta_K must be positive", line=values["T_beta_K"][1], key="T_beta_K")
        beta = 1.0 / (constants.kB * T)
    else:
        beta = _get(values, "beta_per_J", 0.0)
    if model is Model.CSL:
        gamma = _get(values, "gamma_csl_m3_per_s", required=True)
    else:
        if "gamma_csl_m3_per_s" in values:
            raise ConfigError("gamma_csl_m3_per_s only applies to CSL",
                              line=values["gamma_csl_m3_per_s"][1], key="gamma_csl_m3_per_s")
        gamma = None
    return _wrap(values, "sigma_m", lambda: ModelParams(
        model,
        _get(values, "sigma_m", required=True),
        _get(values, "mass_kg", required=True),
        beta,
        gamma_csl=gamma,
        constants=constants,
    ))


def load_spec(
    command: str,
    path,
    output_dir=None,
    seed: int | None = None,
    threads: int = 1,
) -> ExperimentSpec:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    path = Path(path)
    values = parse_config_text(path.read_text())
    if seed is None:
        seed = _get(values, "seed", 0)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", key="seed")
    digest = config_hash({**{k: v[0] for k, v in values.items()}, "seed": seed, "command": command})

    params = env = sweep = mc = toy = None
    if command in ("rates", "sweep", "simulate"):
        params = build_model_params(values)
    if "T_env_K" in values or "Gamma_env_per_s" in values:
        kB = params.constants.kB if params is not None else SI.kB
        env = _wrap(values, "T_env_K", lambda: EnvironmentParams(
            _get(values, "T_env_K", required=True), _get(values, "Gamma_env_per_s", required=True), kB))
    if command == "sweep":
        name = _get(values, "sweep_axis", required=True)
        if name not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}", line=values["sweep_axis"][1], key="sweep_axis")
        scale = _get(values, "sweep_scale", "linear")
        if scale not in ("linear", "log"):
            raise ConfigError("sweep_scale must be linear or log", line=values["sweep_scale"][1], key="sweep_scale")
        sweep = SweepAxis(
            name, _get(values, "sweep_min", required=True), _get(values, "sweep_max", required=True),
            _get(values, "sweep_points", required=True), scale,
        )
        if sweep.n_points < 1 or (scale == "log" and sweep.min <= 0):
            raise ConfigError("invalid sweep range", key="sweep_points")
    if command in ("simulate", "toy", "validate"):
        mc = MCSettings(
            n_traj=_get(values, "n_traj", 10_000),
            horizon=_get(values, "horizon_s", required=command != "validate") or 0.0,
            grid_points=_get(values, "grid_points", 10),
            master_seed=seed,
            p0=(_get(values, "p0_x", 0.0), _get(values, "p0_y", 0.0), _get(values, "p0_z", 0.0)),
            initial_T=_get(values, "initial_T_K"),
            dt=_get(values, "dt_s"),
            max_jumps=_get(values, "max_jumps", 10_000_000),
            method=_get(values, "toy_method", "exact"),
        )
        if mc.n_traj < 2:
            raise ConfigError("n_traj must be at least 2", line=values.get("n_traj", (0, None))[1], key="n_traj")
        if command != "validate" and not mc.horizon > 0:
            raise ConfigError("horizon_s must be positive", line=values["horizon_s"][1], key="horizon_s")
    if command == "simulate" and env is not None and mc.dt is None:
        raise ConfigError("simulate with an environment needs dt_s", key="dt_s")
    if command == "toy":
        mass = _get(values, "mass_kg", required=True)
        beta = _get(values, "beta_per_J", required=True)
        toy = _wrap(values, "toy_D", lambda: ToyParams(_get(values, "toy_D", required=True), beta, mass))
        if mc.dt is None:
            if math.isinf(toy.max_dt):
                raise ConfigError("toy_D = 0 needs an explicit dt_s", key="dt_s")
            mc = MCSettings(**{**mc.__dict__, "dt": toy.max_dt / 10})

    return ExperimentSpec(
        command=command,
        params=params,
        env=env,
        sweep_axis=sweep,
        mc=mc,
        toy=toy,
        output_dir=Path(output_dir) if output_dir is not None else Path("results") / command,
        seed=seed,
        threads=threads,
        config_hash=digest,
        raw={k: v[0] for k, v in values.items()},
    )
