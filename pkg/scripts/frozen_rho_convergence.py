#!/usr/bin/env python3
"""Frozen-parameter convergence study of the projected gain flow.

For each frozen parameter value, integrate the gain flow on the benchmark
from the box center and print the gap to the Riccati-optimal gain over time.
Shows the face-throttling effect: with --margin 0 the optima at the extreme
parameter values sit almost on the box boundary and the terminal approach
stalls; with the default interior margin the gap decays to integrator noise.
"""

import argparse

import numpy as np

from lpvflow import case_study
from lpvflow.linalg import unvec
from lpvflow.lpv_model import ParamTrajectory, eval_A
from lpvflow.lqr_core import solve_care
from lpvflow.sim import SimConfig, simulate_closed_loop


def run(margin: float, alpha: float, T: float) -> None:
    sys_ = case_study.benchmark_system()
    box = case_study.REFERENCE_GAIN_BOX.inflate(margin) if margin > 0 else case_study.REFERENCE_GAIN_BOX
    k0 = unvec((box.lo + box.hi) / 2.0, sys_.m, sys_.n)
    for rho in case_study.FROZEN_PARAMETER_VALUES:
        _, k_opt = solve_care(eval_A(sys_, np.array([rho])), sys_.B, sys_.Q, sys_.R)
        cfg = SimConfig(
            x0=np.zeros(sys_.n),
            K0=k0,
            alpha=alpha,
            T=T,
            dt=0.05,
            trajectory=ParamTrajectory.constant(np.array([rho]), sys_.param_box),
        )
        trace = simulate_closed_loop(sys_, box, cfg)
        gaps = np.linalg.norm(trace.k - np.tile(k_opt.T.ravel(), (trace.k.shape[0], 1)), axis=1)
        print(f"rho = {rho}: K* = {k_opt.ravel().tolist()}")
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            idx = min(int(frac * (len(gaps) - 1)), len(gaps) - 1)
            print(f"  t = {trace.times[idx]:5.2f}  |K - K*| = {gaps[idx]:.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--margin", type=float, default=case_study.CONVERGENCE_BOX_MARGIN,
                    help="inflate the reference box by this much (0 = reference box)")
    ap.add_argument("--alpha", type=float, default=case_study.LEARNING_RATE)
    ap.add_argument("--T", type=float, default=2.0)
    args = ap.parse_args()
    run(args.margin, args.alpha, args.T)
