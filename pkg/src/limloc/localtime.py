"""Local time at zero and related path functionals.

Two estimators of the local time profile are provided:

* occupation density, ``(1/2 eps) * Leb{s <= t : |X_s| <= eps}``;
* excursion counting, ``sqrt(pi delta / 2) * #{excursions longer than delta begun before t}``.

Both are nondecreasing, start at 0, and live on the same grid as the path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError, ParameterError
from .paths import Path, _grid_step, _read_csv, _write_csv, time_index

ESTIMATORS = ("occupation", "excursion_count")


@dataclass(frozen=True)
class LocalTimeProfile:
    """Estimated local time at 0 on the grid of its source path."""

    dt: float
    values: np.ndarray = field(repr=False)
    estimator: str = "occupation"
    bandwidth: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if self.estimator not in ESTIMATORS:
            raise IntegrityError(f"unknown estimator {self.estimator!r}")
        if v.ndim != 1 or v.size < 1 or v[0] != 0.0:
            raise IntegrityError("a profile is a 1-D array starting at 0")
        if np.any(np.diff(v) < 0):
            raise IntegrityError("a local time profile must be nondecreasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def at(self, t: float) -> float:
        return float(self.values[time_index(t, self.dt, self.values.size - 1)])

    def to_csv(self, path) -> None:
        _write_csv(path, "t,L", self.times, self.values)

    @classmethod
    def from_csv(cls, path, estimator="occupation", bandwidth=0.0) -> "LocalTimeProfile":
        t, v = _read_csv(path, "t,L")
        return cls(_grid_step(t), v, estimator, bandwidth)


def default_bandwidth(dt: float) -> float:
    """Occupation half-width ``2 sqrt(dt)``: wide enough to catch a typical step."""
    return 2.0 * math.sqrt(dt)


def occupation_estimate(path: Path, epsilon: float | None = None) -> LocalTimeProfile:
    """Occupation-density estimate of local time, a left-point Riemann sum."""
    eps = default_bandwidth(path.dt) if epsilon is None else float(epsilon)
    if not (np.isfinite(eps) and eps > 0):
        raise ParameterError(f"bandwidth must be positive, got {epsilon}")
    inband = np.abs(path.values[:-1]) <= eps
    prof = np.zeros(len(path))
    np.cumsum(inband, out=prof[1:])
    prof *= path.dt / (2.0 * eps)
    return LocalTimeProfile(path.dt, prof, "occupation", eps)


def detect_zeros(values: np.ndarray, snap: bool = False, crossing_rng=None, dt: float | None = None) -> np.ndarray:
    """Grid indices of zeros of a discretised path.

    Step ``k`` carries a zero when ``x_k == 0`` or ``x_k`` and ``x_{k+1}`` have
    opposite signs; the last point counts when it is exactly 0.  The zero is
    placed at ``k`` unless ``snap`` is set, in which case it moves to whichever
    of ``k, k+1`` is closer to 0.

    With ``crossing_rng`` a step whose endpoints share a sign also carries a
    zero with the Brownian-bridge crossing probability ``exp(-2ab/dt)``.
    """
    x = np.asarray(values, dtype=float)
    a, b = x[:-1], x[1:]
    # compare signs rather than test a * b < 0, which underflows for tiny values
    flip = ((a < 0.0) & (b > 0.0)) | ((a > 0.0) & (b < 0.0))
    hit = (a == 0.0) | flip
    if crossing_rng is not None:
        if dt is None:
            raise ParameterError("dt is required for probabilistic crossing")
        same = (a != 0.0) & (np.sign(a) == np.sign(b))
        p = np.exp(-2.0 * np.abs(a[same]) * np.abs(b[same]) / dt)
        extra = np.zeros_like(hit)
        extra[same] = crossing_rng.random(p.size) < p
        hit |= extra
    idx = np.flatnonzero(hit)
    if snap and idx.size:
        right = (np.abs(x[idx + 1]) < np.abs(x[idx])) & (x[idx] != 0.0)
        idx = idx + right
    if x[-1] == 0.0:
        idx = np.append(idx, x.size - 1)
    return np.unique(idx)


def excursion_intervals(values: np.ndarray, snap: bool = True):
    """``(start, end, complete)`` index triples of the excursions away from 0.

    An excursion runs between consecutive zeros and must contain at least one
    nonzero interior value.  The stretch after the last zero is reported with
    ``complete=False``.  Anything before the first zero is not an excursion
    from 0 and is dropped.
    """
    x = np.asarray(values, dtype=float)
    z = detect_zeros(x, snap=snap)
    out = []
    for a, b in zip(z[:-1], z[1:]):
        if b - a >= 2 and np.any(x[a + 1:b] != 0.0):
            out.append((int(a), int(b), True))
    if z.size and z[-1] < x.size - 1:
        out.append((int(z[-1]), x.size - 1, False))
    return out


def excursion_count_estimate(path: Path, delta: float) -> LocalTimeProfile:
    """Local time as ``sqrt(pi delta / 2)`` times the number of excursions longer than ``delta``.

    An excursion is counted from the step after its start.  The final,
    unfinished excursion counts once its observed length exceeds ``delta``.
    """
    if not (np.isfinite(delta) and delta >= path.dt):
        raise ParameterError(f"delta must be at least dt={path.dt}, got {delta}")
    jumps = np.zeros(len(path))
    for a, b, _ in excursion_intervals(path.values):
        if (b - a) * path.dt > delta:
            jumps[a + 1] += 1.0
    prof = np.cumsum(jumps) * math.sqrt(math.pi * delta / 2.0)
    return LocalTimeProfile(path.dt, prof, "excursion_count", float(delta))


def inverse_local_time(profile: LocalTimeProfile, u: float) -> float | None:
    """Smallest grid time at which the profile exceeds ``u``; ``None`` if it never does."""
    if not np.isfinite(u) or u < 0:
        raise ParameterError(f"level must be finite and >= 0, got {u}")
    k = int(np.searchsorted(profile.values, u, side="right"))
    return None if k >= profile.values.size else k * profile.dt


def negative_occupation(path: Path) -> np.ndarray:
    """Cumulative time spent below 0: ``A_{t_k} = dt * #{j < k : x_j < 0}``."""
    out = np.zeros(len(path))
    np.cumsum(path.values[:-1] < 0.0, out=out[1:])
    return out * path.dt


def last_zero(path: Path, t: float | None = None, crossing_rng=None) -> float:
    """Largest grid time ``<= t`` carrying a zero, or 0 when there is none."""
    k = len(path) - 1 if t is None else path.index(t)
    z = detect_zeros(path.values[: k + 1], crossing_rng=crossing_rng, dt=path.dt)
    return float(z[-1] * path.dt) if z.size else 0.0


def running_max(path: Path) -> np.ndarray:
    return np.maximum.accumulate(path.values)
