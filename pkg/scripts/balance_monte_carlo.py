"""Jump-process ensembles against the exact mean-energy law E(t) for the six
standard scenarios ({DP, CSL} x {beta = 0, dissipative, heating}).

One CSV per scenario with the ensemble mean, its standard error, the exact
curve and the z-score at each grid point.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from collapse_friction.artifacts import metadata, write_csv
from collapse_friction.checks import DEFAULT_SEED, balance_scenarios
from collapse_friction.jump_kinetics import exact_energy_trajectory, run_ensemble


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-traj", type=int, default=10_000)
    parser.add_argument("--grid", type=int, default=10)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="results/balance")
    args = parser.parse_args()

    for i, (label, params, p0, horizon) in enumerate(balance_scenarios()):
        t0 = time.perf_counter()
        grid = np.linspace(horizon / args.grid, horizon, args.grid)
        st = run_ensemble(p0, params, horizon, args.n_traj, grid, args.seed + i, workers=args.threads)
        exact = exact_energy_trajectory(float(np.dot(p0, p0)) / 2, params, grid)
        z = (st.mean_H - exact) / st.stderr_H
        name = label.replace(" ", "_").replace("=", "")
        write_csv(
            Path(args.out) / f"{name}.csv",
            ["t", "mean_H", "stderr_H", "E_exact", "z"],
            zip(grid, st.mean_H, st.stderr_H, exact, z),
            metadata("n/a", args.seed + i, scenario=label, n_traj=args.n_traj),
        )
        print(f"{label:18s} max|z| = {np.max(np.abs(z)):.2f}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
