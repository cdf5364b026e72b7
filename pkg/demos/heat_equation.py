"""Solve the 1-D heat equation with a 16 sub-network FLM and report grid errors.

The full two-phase protocol takes a minute or two; pass a number of phase-1
epochs on the command line to cut it short, e.g. ``python heat_equation.py 500``.
"""
import sys

import numpy as np

from flm.optim import AdamConfig, TrainConfig
from flm.pde import BEST_CONFIGS, make_problem, solve, surface

best = BEST_CONFIGS["heat"]
adam = AdamConfig(best["lr"], *best["betas"])
epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000

run = solve("heat", best["N"], adam, seed=0, phase1=TrainConfig(epochs, 1e-4),
            phase2=TrainConfig(30_000, 1e-8) if epochs >= 10_000 else None)
print(f"phase 1 stopped after {run.phase1.epochs_run} epochs ({run.phase1.stop_reason})")
if run.phase2 is not None:
    print(f"phase 2 ran {run.phase2.epochs_run} more epochs")
m = run.metrics
print(f"MSE {m.mse:.2e}  MAE {m.mae:.2e}  max {m.max_err:.2e}")

# learned frequencies drift away from the integer lattice they started on
print("learned frequencies:\n", np.round(run.model.n, 3))

S = surface(run.model, make_problem("heat"), grid_n=11)
print("coarse surface rows (x, t, u_exact, u_flm, abs_err):")
print(np.array2string(S[:5], precision=4))
