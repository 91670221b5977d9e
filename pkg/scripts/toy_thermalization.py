"""Friction toy model: energy relaxation from rest and the final speed histogram
against the Maxwell law at inverse temperature beta."""

import argparse
import math
from pathlib import Path

import numpy as np
from scipy import stats

from collapse_friction.artifacts import metadata, write_csv
from collapse_friction.friction_toy import ToyParams, toy_energy_ode, toy_langevin_ensemble


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--D", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=2.0)
    parser.add_argument("--mass", type=float, default=1.0)
    parser.add_argument("--n-traj", type=int, default=10_000)
    parser.add_argument("--method", choices=["exact", "euler"], default="exact")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default="results/toy")
    args = parser.parse_args()

    params = ToyParams(args.D, args.beta, args.mass)
    horizon = 5.0 / params.energy_relaxation_rate
    grid = np.linspace(horizon / 50, horizon, 50)
    st, finals = toy_langevin_ensemble(
        params, args.n_traj, horizon, params.max_dt / 10, args.seed, time_grid=grid, method=args.method
    )
    meta = metadata("n/a", args.seed, D=args.D, beta=args.beta, method=args.method)
    out = Path(args.out)
    write_csv(out / "relaxation.csv", ["t", "mean_H", "stderr_H", "E_ode"],
              zip(st.time_grid, st.mean_H, st.stderr_H, toy_energy_ode(0.0, params, st.time_grid)), meta)

    speeds = np.linalg.norm(finals, axis=1)
    law = stats.maxwell(scale=math.sqrt(params.mass / params.beta))
    counts, edges = np.histogram(speeds, bins=40, density=True)
    centres = 0.5 * (edges[1:] + edges[:-1])
    write_csv(out / "speeds.csv", ["speed", "density", "maxwell"], zip(centres, counts, law.pdf(centres)), meta)
    ks = stats.kstest(speeds, law.cdf)
    print(f"<p^2> = {np.mean(speeds**2):.4f} (Gibbs {3 * params.mass / params.beta:.4f}), KS p = {ks.pvalue:.3f}")


if __name__ == "__main__":
    main()
