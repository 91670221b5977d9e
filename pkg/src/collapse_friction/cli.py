"""Command line entry point: rates | sweep | simulate | toy | validate."""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from . import artifacts
from .config import COMMANDS, ConfigError, ExperimentSpec, load_spec
from .errors import JumpCapExceeded, NumericalError, RegimeError, SamplerError
from .friction_toy import toy_energy_ode, toy_langevin_ensemble
from .jump_kinetics import (
    EnsembleError,
    exact_energy_trajectory,
    run_ensemble,
    run_thermostat_ensemble,
    simulate_trajectory,
    trajectory_seed,
)
from .rates import (
    Regime,
    heating_power_standard,
    mixed_equilibrium,
    power_gamma_closed_form,
    power_gamma_quadrature,
)
from .units import elementary_energy

# sweep rows with |Gamma| below this fraction of beta*P0 are reported as critical
CRITICAL_BAND = 1e-9


def _params_record(params) -> dict:
    return {
        "model": params.model.value,
        "sigma": params.sigma,
        "mass": params.mass,
        "beta": params.beta,
        "gamma_csl": params.gamma_csl,
        "constants": dataclasses.asdict(params.constants),
    }


def _meta(spec: ExperimentSpec, **extra) -> dict:
    return artifacts.metadata(spec.config_hash, spec.seed, command=spec.command, **extra)


def cmd_rates(spec: ExperimentSpec) -> list[Path]:
    params = spec.params
    report = power_gamma_closed_form(params)
    quad = power_gamma_quadrature(params)
    payload = {
        "report": report.to_record(),
        "quadrature": {"P": quad.P, "Gamma": quad.Gamma},
        "P0": report.P0,
        "E_sigma": elementary_energy(params),
        "params": _params_record(params),
        "metadata": _meta(spec),
    }
    if spec.env is not None:
        E_inf, T_eff = mixed_equilibrium(report, spec.env)
        payload["environment"] = {
            "T_env": spec.env.T_env, "Gamma_env": spec.env.Gamma_env, "E_inf": E_inf, "T_eff": T_eff,
        }
    out = spec.output_dir
    return [
        artifacts.write_json(out / "rates.json", payload),
        artifacts.write_reports_csv(out / "rates.csv", [report], _meta(spec)),
    ]


def sweep_reports(spec: ExperimentSpec):
    base = spec.params
    e_sigma = elementary_energy(base)
    reports = []
    for v in spec.sweep_axis.values():
        if spec.sweep_axis.name == "beta_per_J":
            params = base.replace(beta=float(v))
        elif spec.sweep_axis.name == "T_beta_K":
            params = base.with_T_beta(float(v))
        else:
            params = base.replace(beta=float(v) / (2.0 * e_sigma))
        rep = power_gamma_closed_form(params)
        band = CRITICAL_BAND * params.beta * heating_power_standard(params)
        if rep.regime is not Regime.CRITICAL and params.beta > 0 and abs(rep.Gamma) <= band:
            rep = dataclasses.replace(rep, regime=Regime.CRITICAL, E_inf=None, T_noise=None)
        reports.append(rep)
    return reports


def cmd_sweep(spec: ExperimentSpec) -> list[Path]:
    reports = sweep_reports(spec)
    meta = _meta(spec, sweep_axis=spec.sweep_axis.name)
    out = spec.output_dir
    payload = {
        "records": [r.to_record() for r in reports],
        "sweep": dataclasses.asdict(spec.sweep_axis),
        "params": _params_record(spec.params),
        "metadata": meta,
    }
    return [
        artifacts.write_reports_csv(out / "sweep.csv", reports, meta),
        artifacts.write_json(out / "sweep.json", payload),
    ]


def cmd_simulate(spec: ExperimentSpec) -> list[Path]:
    params, mc = spec.params, spec.mc
    grid = mc.time_grid()
    p0 = np.asarray(mc.p0, dtype=float)
    if mc.initial_T is not None:
        E0 = 1.5 * params.constants.kB * mc.initial_T
    else:
        E0 = float(p0 @ p0) / (2.0 * params.mass)
    t0 = time.perf_counter()
    if spec.env is not None:
        if mc.initial_T is not None:
            raise ConfigError("initial_T_K is not supported together with an environment", key="initial_T_K")
        stats = run_thermostat_ensemble(
            p0, params, spec.env, mc.horizon, mc.n_traj, grid, mc.master_seed, mc.dt, workers=spec.threads
        )
    else:
        stats = run_ensemble(
            p0, params, mc.horizon, mc.n_traj, grid, mc.master_seed,
            workers=spec.threads, max_jumps=mc.max_jumps, initial_T=mc.initial_T,
        )
    elapsed = time.perf_counter() - t0
    exact = exact_energy_trajectory(E0, params, stats.time_grid, env=spec.env)
    meta = _meta(spec, n_traj=mc.n_traj)
    out = spec.output_dir
    paths = [artifacts.write_ensemble_csv(out / "ensemble.csv", stats, meta, overlay=exact)]
    report = power_gamma_closed_form(params)
    sidecar = {
        "params": _params_record(params),
        "report": report.to_record(),
        "horizon": mc.horizon,
        "p0": p0,
        "initial_T": mc.initial_T,
        "E0": E0,
        "n_traj": mc.n_traj,
        "master_seed": mc.master_seed,
        "trajectory_seeds": "SeedSequence(master_seed, spawn_key=(i,)) for trajectory i",
        "trajectory_0_seed": trajectory_seed(mc.master_seed, 0),
        "threads": spec.threads,
        "seconds": elapsed,
        "metadata": meta,
    }
    if spec.env is not None:
        sidecar["environment"] = {"T_env": spec.env.T_env, "Gamma_env": spec.env.Gamma_env, "dt": mc.dt}
    else:
        if mc.initial_T is None:
            traj = simulate_trajectory(p0, params, mc.horizon, trajectory_seed(mc.master_seed, 0), mc.max_jumps)
            paths.append(artifacts.write_trajectory_csv(out / "trajectory_0.csv", traj, meta))
    paths.append(artifacts.write_json(out / "ensemble.json", sidecar))
    return paths


def cmd_toy(spec: ExperimentSpec) -> list[Path]:
    toy, mc = spec.toy, spec.mc
    p0 = np.asarray(mc.p0, dtype=float)
    stats, _ = toy_langevin_ensemble(
        toy, mc.n_traj, mc.horizon, mc.dt, mc.master_seed, time_grid=mc.time_grid(), method=mc.method, p0=p0
    )
    E0 = float(p0 @ p0) / (2.0 * toy.mass)
    overlay = toy_energy_ode(E0, toy, stats.time_grid)
    meta = _meta(spec, n_traj=mc.n_traj)
    out = spec.output_dir
    sidecar = {
        "toy": dataclasses.asdict(toy),
        "dt": mc.dt,
        "method": mc.method,
        "horizon": mc.horizon,
        "p0": p0,
        "stationary_p_sq": 3.0 * toy.mass / toy.beta,
        "heating_power": toy.heating_power,
        "master_seed": mc.master_seed,
        "metadata": meta,
    }
    return [
        artifacts.write_ensemble_csv(out / "toy_ensemble.csv", stats, meta, overlay=overlay, overlay_name="E_ode"),
        artifacts.write_json(out / "toy_ensemble.json", sidecar),
    ]


def cmd_validate(spec: ExperimentSpec) -> tuple[list[Path], bool]:
    from .checks import run_all

    n_traj = spec.mc.n_traj if spec.mc is not None else 10_000
    results = run_all(n_traj=n_traj, seed=spec.seed, workers=spec.threads)
    payload = {
        "checks": [{"name": r.name, "passed": bool(r.passed), "detail": r.detail, "data": r.data} for r in results],
        "metadata": _meta(spec),
    }
    path = artifacts.write_json(spec.output_dir / "validation.json", payload)
    return [path], all(r.passed for r in results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collapse-friction",
        description="Heating power, friction and temperature of dissipative DP/CSL collapse models.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key = value configuration file")
    parser.add_argument("--out", default=None, help="output directory (default results/<command>)")
    parser.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for ensembles")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        spec = load_spec(args.command, args.config, args.out, args.seed, args.threads)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    handlers = {"rates": cmd_rates, "sweep": cmd_sweep, "simulate": cmd_simulate, "toy": cmd_toy}
    try:
        if args.command == "validate":
            paths, ok = cmd_validate(spec)
        else:
            paths, ok = handlers[args.command](spec), True
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, SamplerError, JumpCapExceeded, RegimeError, EnsembleError) as exc:
        print(f"{args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(f"wrote {p}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
