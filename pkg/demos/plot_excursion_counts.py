"""
Excursions as a Poisson point process
=====================================

Indexed by local time, the excursions of Brownian motion away from 0 form a
Poisson point process.  Those longer than ``delta`` arrive at rate
``sqrt(2 / (pi delta))``, so their number by local time 1 is Poisson.
"""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy import stats

from limloc import _kernels
from limloc.excursions import extract, reconstruct
from limloc.localtime import occupation_estimate
from limloc.montecarlo import run_chunks
from limloc.paths import gen_brownian

delta, dt = 0.01, 1e-7
eps = 2 * math.sqrt(dt)
counts = np.concatenate(run_chunks(
    5, 4000, 1000,
    lambda rng, m: _kernels.long_excursions_per_local_time(rng, m, dt, eps, delta, 1.0, True, 3 * math.sqrt(dt))))
rate = math.sqrt(2 / (math.pi * delta))
print(f"rate {rate:.3f}: mean {counts.mean():.3f}, variance {counts.var(ddof=1):.3f}")

k = np.arange(counts.max() + 1)
fig, ax = plt.subplots(figsize=(7, 4))
ax.bar(k, np.bincount(counts) / counts.size, width=0.8, alpha=0.6, label="simulated")
ax.plot(k, stats.poisson.pmf(k, rate), "ko-", ms=3, label=f"Poisson({rate:.2f})")
ax.set_xlabel(f"excursions longer than {delta} by local time 1")
ax.legend()
fig.savefig("excursion_counts.png", dpi=120)

# Cutting a path into excursions and laying them back out recovers it.
path = gen_brownian(seed=6, horizon=1.0, dt=1e-3)
ex = extract(path, occupation_estimate(path))
back = reconstruct(ex)
print(f"{len(ex)} excursions; largest gap after rebuild {np.max(np.abs(back.values - path.values)):.3g} "
      "(nonzero only at the snapped zeros)")
