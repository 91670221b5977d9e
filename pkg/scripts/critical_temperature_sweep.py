"""Collapse-noise temperature T/T_beta against u = E_sigma/(kB T_beta) for DP and CSL.

Writes a CSV with the closed-form ratio and the quadrature balance (2/3)P/Gamma
side by side, plus the sign of Gamma, up to the heating threshold of each model.
"""

import argparse
from pathlib import Path

import numpy as np

from collapse_friction.artifacts import metadata, write_csv
from collapse_friction.checks import working_params
from collapse_friction.rates import CRITICAL_X_BETA_SQ, effective_temperature_ratio, power_gamma_quadrature
from collapse_friction.units import Model, elementary_energy


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--out", default="results/critical_temperature.csv")
    args = parser.parse_args()

    rows = []
    for model in Model:
        p = working_params(model)
        e_sigma = elementary_energy(p)
        u_max = 0.5 * CRITICAL_X_BETA_SQ[model]
        # denser near the divergence
        for u in u_max * (1 - np.geomspace(1, 1e-4, args.points)) + 1e-6:
            q = p.replace(beta=u / e_sigma)
            quad = power_gamma_quadrature(q)
            balance = 2 / 3 * quad.P / quad.Gamma * q.beta if quad.Gamma > 0 else None
            rows.append([model.value, u, effective_temperature_ratio(model, u), balance, np.sign(quad.Gamma)])
    path = write_csv(
        Path(args.out), ["model", "u", "T_over_Tbeta", "T_over_Tbeta_quadrature", "sign_Gamma"], rows,
        metadata("n/a", 0, script="critical_temperature_sweep"),
    )
    print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
