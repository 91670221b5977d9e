"""Invariant and oracle checks, shared by the ``validate`` command and the test suite.

Each check returns one :class:`CheckResult`.  Monte Carlo checks run in the
working system hbar = m = sigma = G = gamma = kB = 1.
"""

from __future__ import annotations

import contextlib
import io
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, stats

from .friction_toy import ToyParams, stationary_second_moment, toy_langevin_ensemble
from .jump_kinetics import (
    JumpStream,
    MomentumState,
    exact_energy_trajectory,
    run_ensemble,
    run_thermostat_ensemble,
    sample_next_jump,
)
from .kernels import dp_to_csl_mapping_residual, mapping_prefactor, sigma_sq_derivative
from .rates import (
    CRITICAL_X_BETA_SQ,
    EnvironmentParams,
    Regime,
    critical_beta,
    effective_temperature,
    effective_temperature_ratio,
    heating_power_standard,
    mixed_equilibrium,
    mixed_temperature,
    power_gamma_closed_form,
    power_gamma_quadrature,
)
from .units import WORKING, Model, ModelParams, elementary_energy, momentum_unit, nondimensionalize

DEFAULT_SEED = 20261016


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def working_params(model, x_beta_sq: float = 0.0) -> ModelParams:
    model = Model.parse(model)
    base = ModelParams(
        model, 1.0, 1.0, 0.0, gamma_csl=1.0 if model is Model.CSL else None, constants=WORKING
    )
    return base.with_x_beta_sq(x_beta_sq) if x_beta_sq else base


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


# --------------------------------------------------------------------------
# deterministic checks


def check_closed_vs_quadrature(n_points: int = 32, rtol: float = 1e-8, max_seconds: float = 5.0) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for model in Model:
        for x2 in np.linspace(0.0, 4.0, n_points):
            p = working_params(model, x2)
            closed = power_gamma_closed_form(p)
            quad = power_gamma_quadrature(p)
            worst = max(worst, _rel(closed.P, quad.P))
            # Gamma is identically zero at beta = 0; there both routes must return exactly 0
            if closed.Gamma == 0.0:
                worst = max(worst, abs(quad.Gamma))
            else:
                worst = max(worst, _rel(closed.Gamma, quad.Gamma))
    elapsed = time.perf_counter() - t0
    ok = worst <= rtol and elapsed < max_seconds
    return CheckResult(
        "closed form vs quadrature",
        ok,
        f"max rel err {worst:.2e} (tol {rtol:g}) over {n_points} x_beta^2 x 2 models in {elapsed:.2f}s",
        {"max_rel_err": worst, "seconds": elapsed},
    )


def check_standard_heating(rtol: float = 1e-10) -> CheckResult:
    errs = {}
    for model in Model:
        p = working_params(model)
        c = p.constants
        if model is Model.DP:
            expected = c.hbar * c.G * p.mass / (4.0 * math.sqrt(math.pi) * p.sigma**3)
        else:
            expected = 3.0 * p.mass * c.hbar**2 * p.gamma_csl / (32.0 * math.pi**1.5 * p.sigma**5)
        q = power_gamma_quadrature(p)
        errs[model.value] = _rel(q.P, expected)
        if q.Gamma != 0.0:
            errs[model.value + "_Gamma"] = abs(q.Gamma)
    worst = max(errs.values())
    return CheckResult(
        "beta=0 heating powers", worst <= rtol, f"rel err DP {errs['DP']:.1e}, CSL {errs['CSL']:.1e}", errs
    )


def check_mapping(tol: float = 1e-6, gamma: float = 1.0) -> CheckResult:
    dp = working_params(Model.DP)
    residuals = {"kernel": dp_to_csl_mapping_residual(dp, gamma)}
    for x2 in (0.0, 0.5, 1.5, 3.0):
        beta = x2 / (2.0 * elementary_energy(dp))
        dp_b = dp.replace(beta=beta)
        csl_b = ModelParams(Model.CSL, dp.sigma, dp.mass, beta, gamma_csl=gamma, constants=dp.constants)
        pref = mapping_prefactor(dp, gamma)
        dP = pref * sigma_sq_derivative(lambda s: power_gamma_closed_form(dp_b.replace(sigma=s)).P, dp.sigma)
        dG = pref * sigma_sq_derivative(lambda s: power_gamma_closed_form(dp_b.replace(sigma=s)).Gamma, dp.sigma)
        target = power_gamma_closed_form(csl_b)
        residuals[f"P(x2={x2})"] = _rel(float(dP), target.P)
        if beta > 0:
            residuals[f"Gamma(x2={x2})"] = _rel(float(dG), target.Gamma)
    worst = max(residuals.values())
    return CheckResult(
        "DP->CSL sigma^2 mapping", worst <= tol, f"max residual {worst:.2e} (tol {tol:g})", residuals
    )


def _bisect_gamma_root(params: ModelParams, lo: float, hi: float, iters: int = 80) -> float:
    g = lambda b: power_gamma_quadrature(params.replace(beta=b)).Gamma  # noqa: E731
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_critical(tol: float = 1e-12) -> CheckResult:
    details, ok = {}, True
    for model, ratio in ((Model.DP, 9.0 / 8.0), (Model.CSL, 15.0 / 8.0)):
        p = working_params(model)
        bc = critical_beta(p)
        crit = power_gamma_closed_form(p.replace(beta=bc))
        P0 = heating_power_standard(p)
        gamma_rel = abs(crit.Gamma) / (bc * P0)
        kT_ratio = 1.0 / (p.constants.kB * bc) / elementary_energy(p)
        below = power_gamma_quadrature(p.replace(beta=bc * (1 - 1e-3))).Gamma
        above = power_gamma_quadrature(p.replace(beta=bc * (1 + 1e-3))).Gamma
        root = _bisect_gamma_root(p, bc * 0.5, bc * 1.5)
        good = (
            gamma_rel <= tol
            and abs(kT_ratio - ratio) <= 1e-12 * ratio
            and abs(crit.x_beta_sq - CRITICAL_X_BETA_SQ[model]) <= 1e-12
            and crit.regime is Regime.CRITICAL
            and below > 0 > above
            and _rel(root, bc) <= 1e-9
        )
        ok &= good
        details[model.value] = {
            "Gamma_over_betaP0": gamma_rel, "kT_over_Esigma": kT_ratio, "quad_root_rel": _rel(root, bc),
            "Gamma_below": below, "Gamma_above": above,
        }
    return CheckResult(
        "critical thresholds",
        ok,
        f"|Gamma|/(beta P0) DP {details['DP']['Gamma_over_betaP0']:.1e}, CSL {details['CSL']['Gamma_over_betaP0']:.1e}; "
        f"kB T_crit/E_sigma = {details['DP']['kT_over_Esigma']:.12g}, {details['CSL']['kT_over_Esigma']:.12g}",
        details,
    )


def check_effective_temperature(rtol: float = 1e-10) -> CheckResult:
    worst, ok, details = 0.0, True, {}
    for model in Model:
        p = working_params(model)
        e_sigma = elementary_energy(p)
        u_crit = 0.5 * CRITICAL_X_BETA_SQ[model]
        for u in np.linspace(1e-3, 0.98 * u_crit, 40):
            q = p.replace(beta=u / e_sigma)
            T_formula = effective_temperature(q)
            quad = power_gamma_quadrature(q)
            T_balance = 2.0 / 3.0 * quad.P / quad.Gamma / q.constants.kB
            worst = max(worst, _rel(T_formula, T_balance))
        asym = abs(effective_temperature_ratio(model, 1e-3) - 1.0)
        near = p.replace(beta=critical_beta(p) * (1 - 1e-4))
        diverge = effective_temperature(near) / near.T_beta
        details[model.value] = {"asymptote": asym, "T_over_Tbeta_near_crit": diverge}
        ok &= asym <= 1e-3 and diverge > 100.0
    ok &= worst <= rtol
    return CheckResult(
        "effective temperature",
        ok,
        f"formula vs (2/3)P/Gamma max rel {worst:.1e}; |T/T_beta-1| at u=1e-3: "
        f"DP {details['DP']['asymptote']:.1e}, CSL {details['CSL']['asymptote']:.1e}; "
        f"T/T_beta near crit: DP {details['DP']['T_over_Tbeta_near_crit']:.0f}, CSL {details['CSL']['T_over_Tbeta_near_crit']:.0f}",
        {"max_rel": worst, **details},
    )


def check_environment_analytic() -> tuple[bool, str]:
    p = working_params(Model.CSL, 0.5)
    rep = power_gamma_closed_form(p)
    T = effective_temperature(p)
    T_env = 3.0 * T
    env = EnvironmentParams(T_env, rep.Gamma, kB=p.constants.kB)
    E_inf, T_eff = mixed_equilibrium(rep, env)
    sym = abs(T_eff - 0.5 * (T + T_env)) <= 1e-14 * T_eff
    weighted = mixed_temperature(rep.Gamma, T, env.Gamma_env, T_env)
    strong = mixed_temperature(rep.Gamma, T, 1e12 * rep.Gamma, T_env)
    heat = power_gamma_closed_form(working_params(Model.CSL, 3.0))
    env_h = EnvironmentParams(T_env, 2.0 * abs(heat.Gamma), kB=p.constants.kB)
    E_h, _ = mixed_equilibrium(heat, env_h)
    # long-time limit of the combined linear ODE as an independent route
    E_ode = exact_energy_trajectory(0.0, working_params(Model.CSL, 3.0), 200.0 / env_h.Gamma_env, env=env_h)
    ok = (
        sym
        and _rel(weighted, T_eff) <= 1e-14
        and abs(strong - T_env) <= 1e-9 * T_env
        and math.isfinite(E_h) and _rel(E_h, E_ode) <= 1e-12
    )
    return ok, f"symmetric T_eff err {abs(T_eff - 0.5 * (T + T_env)):.1e}; heating+bath E_inf {E_h:.6g} vs ODE {E_ode:.6g}"


# --------------------------------------------------------------------------
# Monte Carlo checks


def balance_scenarios():
    """(label, params, p0, horizon) for {DP, CSL} x {beta=0, dissipative, heating}."""
    out = []
    for model in Model:
        p0 = working_params(model)
        out.append((f"{model.value} beta=0", p0, (0.0, 0.0, 0.0), 10.0 / nondimensionalize(p0).rate_scale))
        diss = working_params(model, 0.5)
        out.append((f"{model.value} dissipative", diss, (0.0, 0.0, 3.0),
                    5.0 / power_gamma_closed_form(diss).Gamma))
        heat = working_params(model, 3.0)
        out.append((f"{model.value} heating", heat, (0.0, 0.0, 1.0),
                    0.7 / abs(power_gamma_closed_form(heat).Gamma)))
    return out


def check_mc_balance(n_traj: int = 10_000, seed: int = DEFAULT_SEED, n_grid: int = 10,
                     max_seconds: float = 300.0, workers: int = 1) -> CheckResult:
    ok, rows = True, {}
    for i, (label, params, p0, horizon) in enumerate(balance_scenarios()):
        t0 = time.perf_counter()
        grid = np.linspace(horizon / n_grid, horizon, n_grid)
        st = run_ensemble(p0, params, horizon, n_traj, grid, seed + i, workers=workers)
        E0 = float(np.dot(p0, p0)) / (2.0 * params.mass)
        exact = exact_energy_trajectory(E0, params, grid)
        z = (st.mean_H - exact) / st.stderr_H
        elapsed = time.perf_counter() - t0
        good = bool(np.all(np.abs(z) <= 3.0)) and elapsed < max_seconds
        regime = power_gamma_closed_form(params).regime
        if regime is Regime.HEATING:
            good &= bool(st.mean_H[-1] > E0)
        ok &= good
        rows[label] = {"max_abs_z": float(np.max(np.abs(z))), "seconds": elapsed, "z": z.tolist()}
    summary = ", ".join(f"{k} {v['max_abs_z']:.2f}" for k, v in rows.items())
    return CheckResult("Monte Carlo balance", ok, f"max |z| per scenario: {summary}", rows)


def _cell_probabilities(params: ModelParams, p_tilde: float, k_edges, mu_edges) -> np.ndarray:
    """Exact (|k|, cos theta) cell masses of the normalised jump density at fixed |p|."""
    bt = nondimensionalize(params).beta_tilde
    s = 0 if params.model is Model.DP else 2

    def mu_mass(k, m1, m2):
        A = 1.0 - bt * k * k / 8.0
        B = bt * k * p_tilde / 4.0
        return A * A * (m2 - m1) - A * B * (m2**2 - m1**2) + B * B * (m2**3 - m1**3) / 3.0

    probs = np.empty((len(k_edges) - 1, len(mu_edges) - 1))
    for i in range(len(k_edges) - 1):
        for j in range(len(mu_edges) - 1):
            probs[i, j] = integrate.quad(
                lambda k: k**s * math.exp(-k * k) * mu_mass(k, mu_edges[j], mu_edges[j + 1]),
                k_edges[i], k_edges[i + 1], epsabs=0.0, epsrel=1e-12, limit=200,
            )[0]
    return probs / probs.sum()


def sampler_chi_square(params: ModelParams, p_tilde: float, n_samples: int, seed: int,
                       nk: int = 20, nmu: int = 20, k_max: float = 4.5):
    pu = momentum_unit(params)
    state = MomentumState((0.0, 0.0, p_tilde * pu), 0.0)
    stream = JumpStream(seed)
    ks = np.empty((n_samples, 3))
    for i in range(n_samples):
        ks[i] = sample_next_jump(state, params, stream)[1]
    ks /= pu
    kmag = np.linalg.norm(ks, axis=1)
    mu = ks[:, 2] / kmag
    k_edges = np.append(np.linspace(0.0, k_max, nk), np.inf)
    mu_edges = np.linspace(-1.0, 1.0, nmu + 1)
    observed, _, _ = np.histogram2d(kmag, mu, bins=[k_edges, mu_edges])
    expected = n_samples * _cell_probabilities(params, p_tilde, k_edges, mu_edges)
    obs, exp = observed.ravel(), expected.ravel()
    small = exp < 5.0
    if small.any():
        obs = np.append(obs[~small], obs[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
    res = stats.chisquare(obs, exp)
    return float(res.pvalue), int(obs.size)


def sampler_cases():
    return [
        ("DP beta=0", working_params(Model.DP), 1.0),
        ("DP x2=0.5 |p|=2", working_params(Model.DP, 0.5), 2.0),
        ("CSL beta=0", working_params(Model.CSL), 1.0),
        ("CSL x2=0.5 |p|=2", working_params(Model.CSL, 0.5), 2.0),
    ]


def check_sampler(n_samples: int = 100_000, seed: int = DEFAULT_SEED, alpha: float = 1e-3) -> CheckResult:
    pvals = {}
    for i, (label, params, p) in enumerate(sampler_cases()):
        pvals[label] = sampler_chi_square(params, p, n_samples, seed + 100 + i)[0]
    ok = all(v > alpha for v in pvals.values())
    return CheckResult(
        "sampler chi-square", ok, ", ".join(f"{k} p={v:.3f}" for k, v in pvals.items()), pvals
    )


def check_equilibrium(n_traj: int = 10_000, seed: int = DEFAULT_SEED, workers: int = 1) -> CheckResult:
    ok, rows = True, {}
    for i, model in enumerate(Model):
        params = working_params(model, 0.5)
        horizon = 10.0 / power_gamma_closed_form(params).Gamma
        st = run_ensemble((0.0, 0.0, 0.0), params, horizon, n_traj, [horizon], seed + 200 + i, workers=workers)
        target = 1.5 * params.constants.kB * effective_temperature(params)
        z = (st.mean_H[0] - target) / st.stderr_H[0]
        ok &= abs(z) <= 3.0
        rows[model.value] = {"mean_H": float(st.mean_H[0]), "target": target, "z": float(z)}
    return CheckResult(
        "equilibrium temperature",
        ok,
        ", ".join(f"{k}: <H>={v['mean_H']:.4f} vs 1.5kT={v['target']:.4f} (z={v['z']:.2f})" for k, v in rows.items()),
        rows,
    )


def check_toy(n_traj: int = 10_000, seed: int = DEFAULT_SEED) -> CheckResult:
    params = ToyParams(D=1.0, beta=2.0, mass=1.0)
    kappa = params.drift
    m2, m2_se = stationary_second_moment(params, n_traj, 8.0 / kappa, 12.0 / kappa, params.max_dt / 10, seed + 300)
    target = 3.0 * params.mass / params.beta
    rel_m2 = abs(m2 - target) / target

    # early-time heating slope, fitted through the origin
    t_end = 0.002 / params.energy_relaxation_rate
    grid = np.linspace(t_end / 10, t_end, 10)
    early, _ = toy_langevin_ensemble(params, 4 * n_traj, t_end, t_end / 50, seed + 301, time_grid=grid)
    slope = float(np.dot(early.time_grid, early.mean_H) / np.dot(early.time_grid, early.time_grid))
    rel_slope = abs(slope - params.heating_power) / params.heating_power

    _, finals = toy_langevin_ensemble(params, n_traj, 20.0 / kappa, params.max_dt, seed + 302)
    speeds = np.linalg.norm(finals, axis=1)
    ks = stats.kstest(speeds, stats.maxwell(scale=math.sqrt(params.mass / params.beta)).cdf)
    ok = rel_m2 <= 0.01 and rel_slope <= 0.02 and ks.pvalue > 1e-3
    return CheckResult(
        "friction toy model",
        ok,
        f"<p^2> rel err {rel_m2:.2%} (se {m2_se / target:.2%}); heating slope rel err {rel_slope:.2%}; "
        f"Maxwell KS p={ks.pvalue:.3f}",
        {"rel_m2": rel_m2, "rel_slope": rel_slope, "ks_p": float(ks.pvalue)},
    )


def check_environment(n_traj: int = 10_000, seed: int = DEFAULT_SEED, workers: int = 1) -> CheckResult:
    ok_a, detail_a = check_environment_analytic()
    params = working_params(Model.CSL, 0.5)
    rep = power_gamma_closed_form(params)
    T = effective_temperature(params)
    env = EnvironmentParams(3.0 * T, rep.Gamma, kB=params.constants.kB)
    horizon = 8.0 / (rep.Gamma + env.Gamma_env)
    dt = horizon / 400
    grid = dt * np.arange(40, 401, 40)
    st = run_thermostat_ensemble((0.0, 0.0, 0.0), params, env, horizon, n_traj, grid, seed + 400, dt, workers=workers)
    exact = exact_energy_trajectory(0.0, params, grid, env=env)
    z = (st.mean_H - exact) / st.stderr_H
    E_inf, T_eff = mixed_equilibrium(rep, env)
    T_mc = 2.0 / 3.0 * st.mean_H[-1] / params.constants.kB
    T_se = 2.0 / 3.0 * st.stderr_H[-1] / params.constants.kB
    z_T = (T_mc - T_eff) / T_se
    ok = ok_a and bool(np.all(np.abs(z) <= 3.0)) and abs(z_T) <= 3.0
    return CheckResult(
        "environment mixing",
        ok,
        f"{detail_a}; MC max |z| {np.max(np.abs(z)):.2f}, T_eff MC {T_mc:.4f} vs {T_eff:.4f} (z={z_T:.2f})",
        {"z": z.tolist(), "T_mc": T_mc, "T_eff": T_eff},
    )


def check_determinism(n_traj: int = 400, seed: int = DEFAULT_SEED, thread_counts=(1, 2)) -> CheckResult:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "sim.cfg"
        cfg.write_text(
            "units = working\nmodel = CSL\nsigma_m = 1\nmass_kg = 1\ngamma_csl_m3_per_s = 1\n"
            f"beta_per_J = 1.0\nn_traj = {n_traj}\nhorizon_s = 100\np0_z = 2\nseed = {seed}\n"
        )
        blobs = []
        for run, threads in enumerate(list(thread_counts) + [thread_counts[0]]):
            out = tmp / f"run{run}"
            with contextlib.redirect_stdout(io.StringIO()):
                status = main(["simulate", "--config", str(cfg), "--out", str(out), "--threads", str(threads)])
            if status != 0:
                return CheckResult("determinism", False, f"simulate exited with {status}")
            blobs.append((out / "ensemble.csv").read_bytes())
    same = all(b == blobs[0] for b in blobs)
    return CheckResult(
        "determinism",
        bool(same),
        f"ensemble.csv byte-identical across threads {list(thread_counts)} and a repeat: {same}",
    )


def run_all(n_traj: int = 10_000, seed: int = DEFAULT_SEED, workers: int = 1, log=print):
    checks = [
        check_closed_vs_quadrature,
        check_standard_heating,
        check_mapping,
        check_critical,
        check_effective_temperature,
        lambda: check_mc_balance(n_traj, seed, workers=workers),
        lambda: check_sampler(seed=seed),
        lambda: check_equilibrium(n_traj, seed, workers=workers),
        lambda: check_toy(n_traj, seed),
        lambda: check_environment(n_traj, seed, workers=workers),
        lambda: check_determinism(seed=seed),
    ]
    results = []
    for fn in checks:
        res = fn()
        if log is not None:
            log(res.line())
        results.append(res)
    return results
