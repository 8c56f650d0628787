"""Discretised sample paths: Brownian motion, bridges and three-dimensional Bessel processes.

A :class:`Path` is a uniform grid of values starting at time 0.  All
generators take a :class:`~limloc.rng.Seed` and are deterministic in it.
Batch generators return plain 2-D arrays (one row per path) so that
vectorised statistics do not pay per-object overhead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError, ParameterError
from .rng import Seed, as_seed

BESSEL_METHODS = ("norm3d", "euler")


@dataclass(frozen=True)
class Path:
    """Values of a process at times ``0, dt, 2 dt, ...``."""

    dt: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise IntegrityError(f"dt must be positive and finite, got {self.dt}")
        if v.ndim != 1 or v.size < 1:
            raise IntegrityError("path values must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise IntegrityError("path values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def origin(self) -> float:
        return float(self.values[0])

    @property
    def horizon(self) -> float:
        return (self.values.size - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    def index(self, t: float) -> int:
        """Grid index of time ``t``, snapped down to the enclosing step."""
        return time_index(t, self.dt, self.values.size - 1)

    def at(self, t: float) -> float:
        return float(self.values[self.index(t)])

    def to_csv(self, path) -> None:
        _write_csv(path, "t,x", self.times, self.values)

    @classmethod
    def from_csv(cls, path) -> "Path":
        t, x = _read_csv(path, "t,x")
        return cls(_grid_step(t), x)


def time_index(t: float, dt: float, last: int) -> int:
    if not np.isfinite(t) or t < 0:
        raise ParameterError(f"time must be finite and non-negative, got {t}")
    k = int(math.floor(t / dt + 1e-9))
    if k > last:
        raise ParameterError(f"time {t} lies beyond the grid horizon {last * dt}")
    return k


def n_steps(span: float, dt: float, name: str = "horizon") -> int:
    """Number of grid steps covering ``span`` (rounded down, at least one)."""
    if not (np.isfinite(dt) and dt > 0):
        raise ParameterError(f"dt must be positive and finite, got {dt}")
    if not (np.isfinite(span) and span > 0):
        raise ParameterError(f"{name} must be positive and finite, got {span}")
    n = int(math.floor(span / dt + 1e-9))
    if n < 1:
        raise ParameterError(f"{name}={span} is shorter than one step dt={dt}")
    return n


def _write_csv(path, header, t, x):
    data = np.column_stack([t, x])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def _read_csv(path, header):
    with open(path) as fh:
        first = fh.readline().strip()
        if first.replace(" ", "") != header:
            raise IntegrityError(f"expected header {header!r}, found {first!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, 0], data[:, 1]


def _grid_step(t):
    if t.size < 2:
        raise IntegrityError("need at least two rows to recover the grid step")
    steps = np.diff(t)
    dt = float(t[-1] / (t.size - 1))
    if abs(t[0]) > 1e-12 or not np.allclose(steps, dt, rtol=1e-9, atol=0):
        raise IntegrityError("time column is not a uniform grid starting at 0")
    return dt


# ---------------------------------------------------------------------------
# array-level generators (shared by the single-path and batch entry points)


def brownian_array(rng: np.random.Generator, n_paths: int, n: int, dt: float, start=0.0) -> np.ndarray:
    out = np.empty((n_paths, n + 1))
    out[:, 0] = start
    incr = rng.standard_normal((n_paths, n))
    incr *= math.sqrt(dt)
    np.cumsum(incr, axis=1, out=out[:, 1:])
    out[:, 1:] += start
    return out


def bridge_array(rng: np.random.Generator, n_paths: int, n: int, dt: float) -> np.ndarray:
    w = brownian_array(rng, n_paths, n, dt)
    frac = np.arange(n + 1) / n
    w -= frac * w[:, -1:]
    w[:, -1] = 0.0
    return w


def bessel3_array(rng, n_paths, n, dt, start=0.0, method="norm3d") -> np.ndarray:
    if method == "norm3d":
        acc = np.zeros((n_paths, n + 1))
        for axis in range(3):
            w = brownian_array(rng, n_paths, n, dt, start if axis == 0 else 0.0)
            acc += w * w
        return np.sqrt(acc)
    if method == "euler":
        return _bessel3_euler(rng, n_paths, n, dt, start)
    raise ParameterError(f"unknown Bessel method {method!r}; choose from {BESSEL_METHODS}")


def _bessel3_euler(rng, n_paths, n, dt, start):
    # dR = dW + dt / R.  From 0 the drift is singular, so the first step is
    # taken exactly as the norm of a 3-d Gaussian.
    sq = math.sqrt(dt)
    out = np.empty((n_paths, n + 1))
    out[:, 0] = start
    k0 = 0
    if start == 0.0:
        out[:, 1] = sq * np.sqrt((rng.standard_normal((n_paths, 3)) ** 2).sum(axis=1))
        k0 = 1
    r = out[:, k0].copy()
    for k in range(k0, n):
        r = np.abs(r + sq * rng.standard_normal(n_paths) + dt / r)
        out[:, k + 1] = r
    return out


def bessel3_bridge_array(rng, n_paths, n, dt) -> np.ndarray:
    acc = np.zeros((n_paths, n + 1))
    for _ in range(3):
        b = bridge_array(rng, n_paths, n, dt)
        acc += b * b
    return np.sqrt(acc)


# ---------------------------------------------------------------------------
# public single-path generators


def gen_brownian(seed, horizon: float, dt: float) -> Path:
    """Standard Brownian motion from 0 on ``[0, horizon]``."""
    n = n_steps(horizon, dt)
    return Path(dt, brownian_array(as_seed(seed).generator(), 1, n, dt)[0])


def gen_bridge(seed, duration: float, dt: float) -> Path:
    """Brownian bridge from 0 to 0 over ``duration``: ``W_s - (s/T) W_T``."""
    n = n_steps(duration, dt, "duration")
    return Path(dt, bridge_array(as_seed(seed).generator(), 1, n, dt)[0])


def gen_bessel3(seed, horizon: float, dt: float, start: float = 0.0, method: str = "norm3d") -> Path:
    """Three-dimensional Bessel process.

    ``norm3d`` takes the Euclidean norm of a 3-d Brownian motion started at
    ``(start, 0, 0)`` and is exact on the grid.  ``euler`` discretises the SDE
    ``dR = dW + dt/R``; it is kept for comparison only.
    """
    if not (np.isfinite(start) and start >= 0):
        raise ParameterError(f"Bessel start must be >= 0, got {start}")
    n = n_steps(horizon, dt)
    return Path(dt, bessel3_array(as_seed(seed).generator(), 1, n, dt, start, method)[0])


def gen_bessel3_bridge(seed, duration: float, dt: float) -> Path:
    """Norm of three independent Brownian bridges: a Bessel-3 bridge from 0 to 0."""
    n = n_steps(duration, dt, "duration")
    return Path(dt, bessel3_bridge_array(as_seed(seed).generator(), 1, n, dt)[0])


# ---------------------------------------------------------------------------
# batch generators: rows are paths; chunk c of a batch uses sub-stream c so the
# output does not depend on how the work is split.

_CHUNK = 256


def _batched(seed, n_paths, fill):
    seed = as_seed(seed)
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    parts = []
    for c, lo in enumerate(range(0, n_paths, _CHUNK)):
        parts.append(fill(seed.generator(c), min(_CHUNK, n_paths - lo)))
    return np.concatenate(parts, axis=0)


def brownian_batch(seed, n_paths: int, horizon: float, dt: float) -> np.ndarray:
    n = n_steps(horizon, dt)
    return _batched(seed, n_paths, lambda g, m: brownian_array(g, m, n, dt))


def bridge_batch(seed, n_paths: int, duration: float, dt: float) -> np.ndarray:
    n = n_steps(duration, dt, "duration")
    return _batched(seed, n_paths, lambda g, m: bridge_array(g, m, n, dt))


def bessel3_batch(seed, n_paths: int, horizon: float, dt: float, start=0.0, method="norm3d") -> np.ndarray:
    n = n_steps(horizon, dt)
    return _batched(seed, n_paths, lambda g, m: bessel3_array(g, m, n, dt, start, method))


def bessel3_bridge_batch(seed, n_paths: int, duration: float, dt: float) -> np.ndarray:
    n = n_steps(duration, dt, "duration")
    return _batched(seed, n_paths, lambda g, m: bessel3_bridge_array(g, m, n, dt))
