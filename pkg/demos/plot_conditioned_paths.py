"""
Paths conditioned to keep their local time small
================================================

Draw Brownian paths conditioned on ``L_s <= f(s)`` for all ``s <= t`` by
rejection, with ``f(t) = sqrt(t) (log t)^-gamma``.  For ``gamma > 1`` the
allowance is integrable against ``t^-3/2`` and the conditioned path drifts
away from 0; for smaller ``gamma`` it keeps returning.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from limloc import ConstraintSpec, classify
from limloc.rng import Seed
from limloc.samplers import reject_condition

t, dt = 2000.0, 0.01
fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
for i, (gamma, ax) in enumerate(zip([0.5, 0.9, 1.1], axes)):
    f = ConstraintSpec.power_log(gamma)
    draw = reject_condition(Seed(7, i), f, "K", t, dt)
    regime = classify(f).verdict
    print(f"gamma={gamma}: {draw.attempts} attempts, L_t/f(t) = {draw.profile.final / f(t):.3f} ({regime})")
    ax.plot(draw.path.times, draw.path.values, lw=0.4)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_ylabel(f"gamma = {gamma}")
axes[-1].set_xlabel("t")
fig.savefig("conditioned_paths.png", dpi=120)

# The same draws are available from the command line, with CSV output:
#   limloc figure1 --t 1e4 --gamma 0.5,0.9,1.1 --out figure1
