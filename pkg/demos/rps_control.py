"""Steer a Rock-Paper-Scissors population towards the mixed equilibrium.

A shooting solver gives the reference optimum; three one-input FLMs trained
on the penalised objective should land within a fraction of a percent of it.
Training runs 30k epochs (a few minutes); a smaller budget can be passed
as the first argument.
"""
import sys

import numpy as np

from flm.ocp import replay_objective, train_ocp
from flm.optim import TrainConfig
from flm.pmp import solve_bvp

u0 = np.array([0.2, 0.2, 0.6])
epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 30_000

ref = solve_bvp(u0)
print(f"reference J* = {ref.J_star:.6f} (|lambda(T)| = {ref.residual_norm:.1e}, "
      f"{ref.iterations} Newton steps)")

sol = train_ocp("fixed", u0, train_cfg=TrainConfig(epochs, 1e-6, log_every=5000))
J = sol.objective_values(u0[None])[0]
print(f"FLM J      = {J:.6f}  ({100 * abs(J - ref.J_star) / ref.J_star:.2f}% off)")
print(f"replayed   = {replay_objective(sol, u0):.6f}  (learned control fed through RK4)")

t = np.linspace(0, sol.config.T, 7)
u, _, gamma = sol.trajectories(u0[None], t)
for ti, ui, gi in zip(t, u[0], gamma[0]):
    print(f"t={ti:3.1f}  u=({ui[0]:.3f}, {ui[1]:.3f}, {ui[2]:.3f})  gamma={gi:+.3f}")
