"""
The two limit constructions
===========================

Two conditionings have explicit limits as ``t -> infinity``.

* Local time at most 1: Brownian motion runs until its local time reaches a
  uniform level ``U``, then leaves along a Bessel-3 process.  The terminal
  local time is ``U``.
* At most one unit of time below 0: the path is a conditioned bridge up to
  its last zero ``g``, then a Bessel-3.  The total time below 0 is ``U^2``.
"""
import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from limloc.samplers import bounded_allowance_batch, limit_bounded_allowance, negative_part_batch
from limloc.stats import ks_test

# Bounded allowance.  Draws whose local time has not reached U by the
# horizon are truncated; a longer horizon makes them rarer.
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    ba = bounded_allowance_batch(seed=1, n=20000, horizon=200.0, dt=1e-5)
print(f"truncated draws: {ba.truncated_fraction:.2%}")
print("terminal local time vs U(0,1):", ks_test(ba.local_time, lambda x: np.clip(x, 0, 1)))

# Negative part.  A is the time spent below 0; sqrt(A) should be uniform.
neg = negative_part_batch(seed=2, n=5000, dt=1e-3)
print("sqrt(A) vs U(0,1):", ks_test(np.sqrt(neg.time_below), lambda x: np.clip(x, 0, 1)))

fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.5))
left.hist(ba.local_time, bins=40, density=True)
left.set_title("terminal local time")
right.hist(np.sqrt(neg.time_below), bins=40, density=True)
right.set_title("sqrt(time below 0)")
fig.savefig("limit_laws.png", dpi=120)

# One full path of the first construction, for plotting.
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    draw = limit_bounded_allowance(seed=3, horizon=20.0, dt=1e-3)
print(f"U = {draw.diagnostics['U']:.3f}, switch at t = {draw.switch_time}, sign {draw.sign:+d}")
