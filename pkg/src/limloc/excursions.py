"""Excursions away from zero, indexed by the local time at which they start.

``extract`` cuts a path at its zeros, ``reconstruct`` glues a set of
excursions back together with zeros in between, and ``splice`` replaces
everything after a given local-time level with one prescribed excursion.
``sample_conditioned_excursion`` draws from the excursion measure restricted
to long excursions.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError, ParameterError
from .localtime import LocalTimeProfile, excursion_intervals, occupation_estimate
from .paths import Path, bessel3_bridge_array, n_steps
from .rng import as_seed


@dataclass(frozen=True)
class Excursion:
    level: float
    start: float
    duration: float
    sign: int
    samples: np.ndarray = field(repr=False)
    complete: bool = True

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).copy()
        if self.sign not in (-1, 1):
            raise IntegrityError(f"sign must be +1 or -1, got {self.sign}")
        if s.size < 2 or s[0] != 0.0 or (self.complete and s[-1] != 0.0):
            raise IntegrityError("excursion samples must start (and, if complete, end) at 0")
        inner = s[1:-1] if self.complete else s[1:]
        if np.any(inner * self.sign < 0.0):
            raise IntegrityError("excursion samples change sign")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def to_dict(self):
        return {"level": self.level, "start": self.start, "duration": self.duration,
                "sign": self.sign, "complete": self.complete, "samples": self.samples.tolist()}


@dataclass(frozen=True)
class ExcursionSet:
    dt: float
    excursions: tuple
    closure: float

    def __post_init__(self):
        exc = tuple(sorted(self.excursions, key=lambda e: (e.level, e.start)))
        ends = -1
        for e in sorted(exc, key=lambda e: e.start):
            a = _grid(e.start, self.dt)
            if a < ends:
                raise IntegrityError(f"excursion starting at {e.start} overlaps its predecessor")
            ends = a + e.samples.size - 1
            if ends * self.dt > self.closure + 1e-9 * max(1.0, self.closure):
                raise IntegrityError("excursion runs past the closure time")
        object.__setattr__(self, "excursions", exc)

    def __len__(self):
        return len(self.excursions)

    def to_json(self) -> str:
        return json.dumps({"dt": self.dt, "closure": self.closure,
                           "excursions": [e.to_dict() for e in self.excursions]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExcursionSet":
        d = json.loads(text)
        exc = [Excursion(e["level"], e["start"], e["duration"], e["sign"],
                         np.asarray(e["samples"]), e.get("complete", True)) for e in d["excursions"]]
        return cls(d["dt"], tuple(exc), d["closure"])


def _grid(t, dt):
    return int(round(t / dt))


def extract(path: Path, profile: LocalTimeProfile, delta: float = 0.0) -> ExcursionSet:
    """Split ``path`` into the excursions (longer than ``delta``) between its zeros.

    Endpoints are snapped to the grid point nearest each detected sign change
    and set to 0, so interior values come through unchanged.
    """
    if len(profile) != len(path) or not math.isclose(profile.dt, path.dt, rel_tol=1e-12):
        raise ParameterError("profile and path must share the same grid")
    if delta < 0:
        raise ParameterError("delta must be >= 0")
    x = path.values
    out = []
    for a, b, complete in excursion_intervals(x):
        if (b - a) * path.dt <= delta:
            continue
        s = x[a:b + 1].copy()
        s[0] = 0.0
        if complete:
            s[-1] = 0.0
        nz = s[np.flatnonzero(s)]
        sign = 1 if nz.size == 0 or nz[0] > 0 else -1
        out.append(Excursion(float(profile.values[a]), a * path.dt, (b - a) * path.dt, sign, s, complete))
    return ExcursionSet(path.dt, tuple(out), path.horizon)


def reconstruct(excursions: ExcursionSet) -> Path:
    """Lay the excursions out at their start times, with zeros in the gaps."""
    dt = excursions.dt
    n = _grid(excursions.closure, dt)
    x = np.zeros(n + 1)
    for e in excursions.excursions:
        a = _grid(e.start, dt)
        x[a:a + e.samples.size] = e.samples
    return Path(dt, x)


def nu_tail(t):
    """Excursion-measure mass of excursions longer than ``t``: ``sqrt(2 / (pi t))``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ParameterError("duration must be positive")
    out = np.sqrt(2.0 / (np.pi * t))
    return float(out) if out.ndim == 0 else out


def sample_conditioned_excursion(seed, min_duration: float, horizon: float, dt: float) -> Excursion:
    """One excursion from the excursion measure restricted to durations above ``min_duration``.

    The duration has density proportional to ``s^{-3/2}`` on
    ``(min_duration, horizon]``; the mass beyond ``horizon`` is cut off so that
    the excursion fits on the grid.  Given its duration, the shape is a
    Bessel-3 bridge and the sign is a fair coin.
    """
    if not (min_duration > 0 and horizon > min_duration):
        raise ParameterError("need 0 < min_duration < horizon")
    n_steps(min_duration, dt, "min_duration")
    rng = as_seed(seed).generator()
    v = rng.random()
    # inverse CDF of s^{-3/2} on (m, H]: F(s) = (1 - sqrt(m/s)) / (1 - sqrt(m/H))
    q = 1.0 - v * (1.0 - math.sqrt(min_duration / horizon))
    s = min_duration / (q * q)
    n = max(2, int(math.ceil(s / dt - 1e-9)))
    shape = bessel3_bridge_array(rng, 1, n, dt)[0]
    sign = 1 if rng.random() < 0.5 else -1
    return Excursion(0.0, 0.0, n * dt, sign, sign * shape, True)


def splice(path: Path, profile: LocalTimeProfile, excursion: Excursion, level: float) -> ExcursionSet:
    """Excursions of ``path`` up to local time ``level``, then ``excursion``.

    The new excursion starts at the first grid time where the profile exceeds
    ``level``, so the rebuilt path accumulates local time up to ``level`` and
    then leaves for good (when the excursion is long).
    """
    k = int(np.searchsorted(profile.values, level, side="right"))
    if k >= len(path):
        raise ParameterError(f"the profile never exceeds level {level}")
    head = Path(path.dt, path.values[: k + 1])
    head_prof = LocalTimeProfile(path.dt, profile.values[: k + 1], profile.estimator, profile.bandwidth)
    base = [e for e in extract(head, head_prof).excursions if e.complete]
    placed = Excursion(float(level), k * path.dt, excursion.duration, excursion.sign,
                       excursion.samples, excursion.complete)
    closure = k * path.dt + (excursion.samples.size - 1) * path.dt
    return ExcursionSet(path.dt, tuple(base) + (placed,), closure)


def rebuilt_local_time(excursions: ExcursionSet, epsilon: float | None = None) -> LocalTimeProfile:
    """Occupation profile of ``reconstruct(excursions)``."""
    return occupation_estimate(reconstruct(excursions), epsilon)
