"""
Local time of a Brownian path
=============================

Simulate one Brownian path, estimate its local time at 0 in two ways, and
check the estimate against the reflection identity ``L_1 ~ |X_1|``.
"""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from limloc import gen_brownian, occupation_estimate
from limloc.localtime import excursion_count_estimate
from limloc.paths import brownian_batch

# One path on [0, 4] with 10^5 steps.  The occupation estimate counts grid
# points inside the band |x| <= 2 sqrt(dt) and divides by the band width.
path = gen_brownian(seed=1, horizon=4.0, dt=4e-5)
occ = occupation_estimate(path)

# The second estimate counts excursions longer than delta and scales the count
# by sqrt(pi delta / 2), the inverse of the excursion-measure tail.
cnt = excursion_count_estimate(path, delta=1e-3)
print(f"occupation estimate  L_4 = {occ.final:.3f}")
print(f"excursion-count est. L_4 = {cnt.final:.3f}")

fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
top.plot(path.times, path.values, lw=0.5)
top.axhline(0, color="k", lw=0.5)
top.set_ylabel("X")
bottom.plot(occ.times, occ.values, label="occupation")
bottom.plot(cnt.times, cnt.values, label="excursion count")
bottom.set_ylabel("local time at 0")
bottom.set_xlabel("t")
bottom.legend()
fig.savefig("local_time_basics.png", dpi=120)

# Levy's identity says L_1 has the law of |X_1|, so its mean is sqrt(2/pi).
dt = 1e-4
x = brownian_batch(seed=2, n_paths=2000, horizon=1.0, dt=dt)
eps = 2 * math.sqrt(dt)
l1 = (np.abs(x[:, :-1]) <= eps).sum(axis=1) * dt / (2 * eps)
print(f"mean L_1 = {l1.mean():.4f} +- {l1.std() / math.sqrt(l1.size):.4f}, "
      f"sqrt(2/pi) = {math.sqrt(2 / math.pi):.4f}")
