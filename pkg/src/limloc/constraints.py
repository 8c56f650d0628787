"""Allowance functions ``f`` and the local-time events they define.

Events on a path ``X`` with local time profile ``L``:

``E_t``    ``L_t <= f(t)``
``K_t``    ``L_s <= f(s)`` for every grid time ``s <= t``
``K'_n``   dyadic relaxation of ``K_{2^n}``: on each block ``[2^{j-1}, 2^j)`` the
           local time gained since the block start stays below ``f``; the
           first block is ``[0, 1)`` and is measured from 0
``H_j``    ``X`` has a zero in ``[2^{j-1}, 2^j)``
``A'_j``   ``H_j`` and the block constraint on ``[2^{j-1}, 2^j)``

``classify`` decides whether ``int_1^inf f(t) t^{-3/2} dt`` is finite, which
separates the two regimes of the conditioned limit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .localtime import LocalTimeProfile, detect_zeros
from .paths import Path, time_index

VARIANTS = ("constant", "power_log", "table")
EVENTS = ("E", "K", "Kprime", "H", "Aprime")


@dataclass(frozen=True)
class ConstraintSpec:
    """A positive nondecreasing allowance ``f`` on ``[0, inf)``.

    Build one with :meth:`constant`, :meth:`power_log` or :meth:`table`.
    """

    variant: str
    params: dict = field(default_factory=dict)
    knots: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}")
        probe = np.geomspace(1e-3, 1e8, 4001)
        if self.knots:
            probe = np.union1d(probe, np.asarray(self.knots[0]))
        fv = self(probe)
        if not (fv[0] > 0 and np.all(np.isfinite(fv))):
            raise ParameterError("f must be positive and finite")
        if np.any(np.diff(fv) < -1e-12 * np.abs(fv[1:])):
            raise ParameterError("f must be nondecreasing")
        pos = probe > 0
        ratio = fv[pos] / np.sqrt(probe[pos])
        object.__setattr__(self, "_ratio_nonincreasing", bool(np.all(np.diff(ratio) <= 1e-12 * ratio[1:])))

    # -- constructors ------------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> "ConstraintSpec":
        if not (np.isfinite(c) and c > 0):
            raise ParameterError(f"constant allowance must be positive, got {c}")
        return cls("constant", {"c": float(c)})

    @classmethod
    def power_log(cls, gamma: float) -> "ConstraintSpec":
        """``f(t) = sqrt(t) (log t)^{-gamma}`` for large ``t``, held constant on the left.

        The formula decreases until ``log t = 2 gamma``, so the constant part
        extends to ``t0 = exp(max(1, 2 gamma))`` to keep ``f`` nondecreasing.
        """
        if not (np.isfinite(gamma) and gamma >= 0):
            raise ParameterError(f"gamma must be >= 0, got {gamma}")
        return cls("power_log", {"gamma": float(gamma)})

    @classmethod
    def table(cls, t, f) -> "ConstraintSpec":
        """Linear interpolation through ``(t_i, f_i)``, constant outside the table."""
        t = np.asarray(t, float)
        f = np.asarray(f, float)
        if t.ndim != 1 or t.size < 2 or t.size != f.size:
            raise ParameterError("a table needs at least two (t, f) pairs")
        if np.any(np.diff(t) <= 0) or t[0] < 0:
            raise ParameterError("table abscissae must be increasing and >= 0")
        return cls("table", {"t_min": float(t[0]), "t_max": float(t[-1])}, (tuple(t), tuple(f)))

    @classmethod
    def from_json(cls, obj) -> "ConstraintSpec":
        """From ``{"variant": ..., "params": {...}}`` (a dict or a JSON string)."""
        d = json.loads(obj) if isinstance(obj, str) else dict(obj)
        v, p = d.get("variant"), d.get("params", {})
        if v == "constant":
            return cls.constant(p["c"])
        if v == "power_log":
            return cls.power_log(p["gamma"])
        if v == "table":
            if "csv" in p:
                return cls.from_csv(p["csv"])
            return cls.table(p["t"], p["f"])
        raise ParameterError(f"unknown variant {v!r}")

    @classmethod
    def from_csv(cls, path) -> "ConstraintSpec":
        with open(path) as fh:
            head = fh.readline().strip().replace(" ", "")
            if head != "t,f":
                raise ParameterError(f"expected header 't,f', found {head!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls.table(data[:, 0], data[:, 1])

    def to_json(self) -> str:
        if self.variant == "table":
            p = {"t": list(self.knots[0]), "f": list(self.knots[1])}
        else:
            p = dict(self.params)
        return json.dumps({"variant": self.variant, "params": p}, sort_keys=True)

    # -- evaluation --------------------------------------------------------
    @property
    def ratio_nonincreasing(self) -> bool:
        """Whether ``f(t) / sqrt(t)`` was found nonincreasing on the probe grid."""
        return self._ratio_nonincreasing

    @property
    def left_edge(self) -> float:
        """Where the left constant extension ends (``power_log`` only)."""
        return math.exp(max(1.0, 2.0 * self.params["gamma"]))

    def __call__(self, t):
        t = np.asarray(t, float)
        if self.variant == "constant":
            out = np.full_like(t, self.params["c"])
        elif self.variant == "power_log":
            g = self.params["gamma"]
            s = np.maximum(t, self.left_edge)
            out = np.sqrt(s) * np.log(s) ** (-g)
        else:
            out = np.interp(t, self.knots[0], self.knots[1])
        return float(out) if out.ndim == 0 else out

    def grid(self, n: int, dt: float) -> np.ndarray:
        """``f`` at grid times ``0, dt, ..., n dt``."""
        return self(np.arange(n + 1) * dt)


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class EventVerdict:
    event: str
    holds: bool
    first_violation: float | None = None
    window: tuple = ()


def _check_grid(profile: LocalTimeProfile, path: Path | None = None):
    if path is not None and (len(path) != len(profile) or not math.isclose(path.dt, profile.dt)):
        raise ParameterError("path and profile must share the same grid")


def first_violation(values, fvals) -> int | None:
    """Index of the first ``values[k] > fvals[k]``, or ``None``."""
    bad = np.flatnonzero(np.asarray(values) > np.asarray(fvals))
    return int(bad[0]) if bad.size else None


def check_E(profile: LocalTimeProfile, f: ConstraintSpec, t: float) -> EventVerdict:
    k = time_index(t, profile.dt, len(profile) - 1)
    ok = profile.values[k] <= f(k * profile.dt)
    return EventVerdict("E", bool(ok), None if ok else k * profile.dt, (0.0, k * profile.dt))


def check_K(profile: LocalTimeProfile, f: ConstraintSpec, t: float) -> EventVerdict:
    k = time_index(t, profile.dt, len(profile) - 1)
    i = first_violation(profile.values[: k + 1], f.grid(k, profile.dt))
    return EventVerdict("K", i is None, None if i is None else i * profile.dt, (0.0, k * profile.dt))


def dyadic_blocks(n: int, dt: float):
    """Index ranges ``[start, stop)`` of the blocks ``[0,1), [1,2), [2,4), ..., [2^{n-1}, 2^n)``."""
    if n < 0:
        raise ParameterError("n must be >= 0")
    edges = [0.0] + [2.0**j for j in range(n + 1)]
    idx = [int(math.ceil(e / dt - 1e-9)) for e in edges]
    return [(a, b) for a, b in zip(idx[:-1], idx[1:]) if b > a]


def blockwise_reset(values, blocks) -> np.ndarray:
    """Profile minus its value at the start of each block (entries outside blocks are 0)."""
    v = np.asarray(values, float)
    out = np.zeros_like(v)
    for a, b in blocks:
        out[a:b] = v[a:b] - v[a]
    return out


def check_Kprime(profile: LocalTimeProfile, f: ConstraintSpec, n: int) -> EventVerdict:
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ParameterError("n must be a non-negative integer")
    blocks = dyadic_blocks(n, profile.dt)
    stop = blocks[-1][1]
    if stop > len(profile) - 1:
        raise ParameterError(f"profile does not cover [0, 2^{n}]")
    reset = blockwise_reset(profile.values[:stop], blocks)
    i = first_violation(reset, f.grid(stop - 1, profile.dt))
    return EventVerdict("Kprime", i is None, None if i is None else i * profile.dt, (0.0, 2.0**n))


def _block(j: int, dt: float):
    if not isinstance(j, (int, np.integer)) or j < 1:
        raise ParameterError("block index j must be >= 1")
    return int(math.ceil(2.0 ** (j - 1) / dt - 1e-9)), int(math.ceil(2.0**j / dt - 1e-9))


def check_H(path: Path, j: int) -> EventVerdict:
    """Does the path have a zero in ``[2^{j-1}, 2^j)``?"""
    a, b = _block(j, path.dt)
    if b > len(path) - 1:
        raise ParameterError(f"path does not cover [0, 2^{j}]")
    z = detect_zeros(path.values[: b + 1])
    ok = bool(np.any((z >= a) & (z < b)))
    return EventVerdict("H", ok, None, (2.0 ** (j - 1), 2.0**j))


def check_Cprime(profile: LocalTimeProfile, f: ConstraintSpec, j: int) -> EventVerdict:
    """Block constraint on ``[2^{j-1}, 2^j)``, measured from the block start."""
    a, b = _block(j, profile.dt)
    if b > len(profile) - 1:
        raise ParameterError(f"profile does not cover [0, 2^{j}]")
    seg = profile.values[a:b] - profile.values[a]
    i = first_violation(seg, f(np.arange(a, b) * profile.dt))
    return EventVerdict("Cprime", i is None, None if i is None else (a + i) * profile.dt,
                        (2.0 ** (j - 1), 2.0**j))


def check_Aprime(path: Path, profile: LocalTimeProfile, f: ConstraintSpec, j: int) -> EventVerdict:
    _check_grid(profile, path)
    h, c = check_H(path, j), check_Cprime(profile, f, j)
    return EventVerdict("Aprime", h.holds and c.holds, c.first_violation, h.window)


# ---------------------------------------------------------------------------
# integral test


@dataclass(frozen=True)
class Classification:
    verdict: str  # "convergent" | "divergent"
    method: str  # "symbolic" | "numerical"
    partial_integrals: tuple = ()
    exponent: float | None = None


def _window_increments(f: ConstraintSpec, k_max: int):
    """``int f(t) t^{-3/2} dt`` over ``[2^{k-1}, 2^k]``, ``k = 1..k_max``.

    Tables and constants are piecewise linear, and on a segment where
    ``f = a + b t`` the integrand has the antiderivative ``-2a/sqrt(t) + 2b sqrt(t)``.
    """
    edges = 2.0 ** np.arange(k_max + 1)
    knots = np.asarray(f.knots[0]) if f.knots else np.zeros(0)
    knots = knots[(knots > 1.0) & (knots < edges[-1])]
    t = np.union1d(edges, knots)
    y = f(t)
    b = np.diff(y) / np.diff(t)
    a = y[:-1] - b * t[:-1]
    r = np.sqrt(t)
    seg = 2.0 * a * (1.0 / r[:-1] - 1.0 / r[1:]) + 2.0 * b * (r[1:] - r[:-1])
    starts = np.searchsorted(t, edges[:-1])
    return np.add.reduceat(seg, starts)


def classify(f: ConstraintSpec, t_max: float | None = None, tol: float = 1e-6) -> Classification:
    """Is ``int_1^inf f(t) t^{-3/2} dt`` finite?

    ``power_log`` is settled exactly (finite iff ``gamma > 1``).  Otherwise the
    integral is split over doubling windows ``[2^{k-1}, 2^k]`` up to ``t_max``.
    By Cauchy condensation the integral is finite iff the window increments
    are summable.  The verdict is "convergent" once the last increment is below
    ``tol`` relative to the running total; failing that, a power law
    ``increment ~ k^{-p}`` is fitted to the second half of the windows and the
    verdict is "convergent" iff ``p > 1``.  Both rules are unchanged when ``f``
    is multiplied by a constant.
    """
    if f.variant == "power_log":
        g = f.params["gamma"]
        return Classification("convergent" if g > 1 else "divergent", "symbolic")
    if f.variant == "table":
        last = f.params["t_max"]
        t_max = last if t_max is None else float(t_max)
        if t_max > last or f.params["t_min"] > 1.0:
            raise ParameterError(f"table covers [{f.params['t_min']}, {last}], not [1, {t_max}]")
    else:
        t_max = 2.0**60 if t_max is None else float(t_max)
    k_max = int(math.floor(math.log2(t_max) + 1e-9))
    if k_max < 4:
        raise ParameterError("need t_max >= 16 for at least four doubling windows")
    inc = _window_increments(f, k_max)
    partial = tuple(np.cumsum(inc).tolist())
    if inc[-1] <= tol * partial[-1]:
        return Classification("convergent", "numerical", partial, None)
    k = np.arange(1, k_max + 1)
    tail = slice(k_max // 2, k_max)
    p = -np.polyfit(np.log(k[tail]), np.log(inc[tail]), 1)[0]
    return Classification("convergent" if p > 1 else "divergent", "numerical", partial, float(p))
