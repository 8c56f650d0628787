"""Samplers for Brownian motion conditioned on its local time.

Two kinds of sampler live here.

Finite-time conditioning by rejection: draw Brownian paths on ``[0, t]``
and keep the first one in the event ``E_t``, ``K_t`` or ``K'_n``.
:func:`reject_condition` returns that path; :func:`rejection_batch` runs
many attempts and keeps only summary statistics, which is what the
Monte Carlo checks need.

Direct constructions of the conditioned limits:

* :func:`limit_bounded_allowance` for a bounded allowance.  Run Brownian
  motion until its local time exceeds ``U ~ Uniform(0, 1)``, then leave
  0 for good along a Bessel-3 process with a random sign.
* :func:`limit_negative_part` for at most one unit of time below 0.
  Draw the last zero ``g``, fill ``[0, g]`` with a bridge conditioned to
  spend at most one unit below 0, then continue with a Bessel-3 from 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .analytics import g_quantile, prob_E_exact
from .constraints import ConstraintSpec, EventVerdict, check_E, check_K, check_Kprime, dyadic_blocks
from .errors import ParameterError, RejectionBudgetError
from .localtime import LocalTimeProfile, default_bandwidth, negative_occupation, occupation_estimate
from .montecarlo import run_chunks, run_until
from .paths import Path, brownian_array, n_steps
from .rng import as_seed

EVENT_CODES = {"E": K.EV_E, "K": K.EV_K, "Kprime": K.EV_KPRIME}
CHUNK = 1000

#: Fast-forward only when this many standard deviations of a step away from the band.
SKIP_MARGIN = 3.0


@dataclass(frozen=True)
class ConditionedDraw:
    path: Path
    profile: LocalTimeProfile
    attempts: int
    verdict: EventVerdict
    bandwidth: float


@dataclass(frozen=True)
class LimitDraw:
    path: Path
    terminal_quantity: float
    sign: int
    switch_time: float | None
    truncated: bool = False
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# rejection


def _event_setup(f: ConstraintSpec, event: str, t: float, dt: float, eps: float | None):
    if event not in EVENT_CODES:
        raise ParameterError(f"event must be one of {sorted(EVENT_CODES)}, got {event!r}")
    n = n_steps(t, dt, "t")
    eps = default_bandwidth(dt) if eps is None else float(eps)
    if not eps > 0:
        raise ParameterError("bandwidth must be positive")
    resets = np.zeros(0, np.int64)
    if event == "E":
        fvals = np.array([f(n * dt)])
    else:
        fvals = f.grid(n, dt)
    if event == "Kprime":
        level = math.log2(t)
        if abs(level - round(level)) > 1e-12 or level < 0:
            raise ParameterError("Kprime needs t = 2^n")
        blocks = dyadic_blocks(int(round(level)), dt)
        resets = np.array([a for a, _ in blocks] + [n], np.int64)
    return n, eps, fvals, resets


def _verdict(event, profile, f, t):
    if event == "E":
        return check_E(profile, f, t)
    if event == "K":
        return check_K(profile, f, t)
    return check_Kprime(profile, f, int(round(math.log2(t))))


def reject_condition(seed, f: ConstraintSpec, event: str, t: float, dt: float,
                     epsilon: float | None = None, max_attempts: int | None = None) -> ConditionedDraw:
    """First Brownian path on ``[0, t]`` that lies in ``event``.

    Attempts run until the event is violated, so rejected paths are cheap.
    The default budget is ``100 / p`` attempts, with ``p`` the exact
    acceptance probability for ``E`` and a pilot estimate otherwise.
    """
    seed = as_seed(seed)
    n, eps, fvals, resets = _event_setup(f, event, t, dt, epsilon)
    if max_attempts is None:
        max_attempts = _default_budget(seed, f, event, t, dt, eps)
    if max_attempts < 1:
        raise ParameterError("max_attempts must be >= 1")
    out = np.empty(n + 1)
    tries, ok = K.walk_until_accept(seed.generator(), int(max_attempts), n, dt, eps, fvals,
                                    EVENT_CODES[event], resets, out)
    if not ok:
        raise RejectionBudgetError(f"no path in {event} after {tries} attempts", tries, 0)
    path = Path(dt, out)
    profile = occupation_estimate(path, eps)
    return ConditionedDraw(path, profile, int(tries), _verdict(event, profile, f, t), eps)


def _default_budget(seed, f, event, t, dt, eps, pilot=2000):
    if event == "E":
        p = prob_E_exact(t, f(t))
    else:
        b = rejection_batch(seed.with_stream(seed.stream + 2**32), f, event, t, dt, attempts=pilot,
                            epsilon=eps, fast_forward=True, threads=1)
        p = max(b.accepted, 1) / b.attempts
    return int(math.ceil(100.0 / max(p, 1e-12)))


@dataclass(frozen=True)
class RejectionBatch:
    """Outcome of many rejection attempts, keeping statistics of the accepted ones."""

    attempts: int
    accepted: int
    local_time: np.ndarray = field(repr=False)
    x_record: np.ndarray = field(repr=False)
    sup_abs: np.ndarray = field(repr=False)
    x_end: np.ndarray = field(repr=False)

    @property
    def rate(self) -> float:
        return self.accepted / self.attempts

    @property
    def rate_stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.attempts)


def rejection_batch(seed, f: ConstraintSpec, event: str, t: float, dt: float, *,
                    attempts: int | None = None, accepted: int | None = None, max_attempts: int = 10**8,
                    epsilon: float | None = None, record_time: float | None = None,
                    sup_time: float | None = None, fast_forward: bool = True,
                    threads: int | None = None) -> RejectionBatch:
    """Run rejection attempts and summarise the accepted paths.

    Give either ``attempts`` (a fixed number of tries) or ``accepted`` (stop
    once that many paths are accepted; exactly that many are kept).  For each
    accepted path the batch keeps its terminal local time, its value at
    ``record_time``, ``max |X|`` over ``[0, sup_time]`` and its terminal value.

    With ``fast_forward`` the kernel jumps over stretches spent away from the
    band (see :mod:`limloc._kernels`).  Terminal values are then unavailable
    (NaN) whenever the final stretch was skipped.
    """
    seed = as_seed(seed)
    if (attempts is None) == (accepted is None):
        raise ParameterError("give exactly one of attempts / accepted")
    n, eps, fvals, resets = _event_setup(f, event, t, dt, epsilon)
    rec = -1 if record_time is None else int(math.floor(record_time / dt + 1e-9))
    sup = -1 if sup_time is None else int(math.floor(sup_time / dt + 1e-9))
    if rec > n or sup > n:
        raise ParameterError("record_time and sup_time must lie in [0, t]")
    code = EVENT_CODES[event]
    margin = SKIP_MARGIN * math.sqrt(dt)

    def work(rng, size):
        return K.walk_batch(rng, size, n, dt, eps, fvals, code, resets, rec, sup, fast_forward, margin)

    if attempts is not None:
        parts = run_chunks(seed, attempts, CHUNK, work, threads)
    else:
        parts = run_until(seed, CHUNK, work, lambda ps: sum(int(p[0].sum()) for p in ps) >= accepted,
                          max_chunks=max(1, max_attempts // CHUNK), threads=threads)
    ok = np.concatenate([p[0] for p in parts])
    cols = [np.concatenate([p[i] for p in parts]) for i in range(1, 5)]
    total = ok.size
    if accepted is not None:
        hits = np.flatnonzero(ok)
        if hits.size < accepted:
            raise RejectionBudgetError(f"only {hits.size} of {accepted} accepted in {total} attempts",
                                       total, hits.size)
        total = int(hits[accepted - 1]) + 1
        ok = ok[:total]
        cols = [c[:total] for c in cols]
    loc, xr, xe, sp = (c[ok] for c in cols)
    return RejectionBatch(int(total), int(ok.sum()), loc, xr, sp, xe)


# ---------------------------------------------------------------------------
# bounded allowance limit


def limit_bounded_allowance(seed, horizon: float, dt: float, epsilon: float | None = None) -> LimitDraw:
    """Brownian motion stopped at the inverse local time of ``U``, then a signed Bessel-3.

    The switch happens at the first grid index whose occupation profile
    exceeds ``U``.  If the horizon comes first the draw is flagged
    ``truncated`` and is plain Brownian motion.
    """
    seed = as_seed(seed)
    n = n_steps(horizon, dt)
    eps = default_bandwidth(dt) if epsilon is None else float(epsilon)
    head = seed.generator(0)
    u = head.random()
    sign = 1 if head.random() < 0.5 else -1
    x = brownian_array(seed.generator(1), 1, n, dt)[0]
    count = np.cumsum(np.abs(x[:-1]) <= eps) * (dt / (2 * eps))
    ktau = int(np.searchsorted(count, u, side="right")) + 1
    truncated = ktau > n
    if truncated:
        warnings.warn("local time did not reach U before the horizon; draw is truncated", stacklevel=2)
    else:
        r = _bessel_radius(seed.generator(2), n - ktau, dt)
        x[ktau + 1:] = sign * r[1:]
    path = Path(dt, x)
    prof = occupation_estimate(path, eps)
    return LimitDraw(path, prof.final, sign, None if truncated else ktau * dt, truncated, {"U": u})


def _bessel_radius(rng, n, dt):
    y = np.zeros((n + 1, 3))
    np.cumsum(rng.standard_normal((n, 3)) * math.sqrt(dt), axis=0, out=y[1:])
    return np.sqrt((y * y).sum(axis=1))


@dataclass(frozen=True)
class BoundedAllowanceSample:
    u: np.ndarray = field(repr=False)
    local_time: np.ndarray = field(repr=False)
    sign: np.ndarray = field(repr=False)
    switch_time: np.ndarray = field(repr=False)  # NaN when truncated

    @property
    def truncated_fraction(self) -> float:
        return float(np.isnan(self.switch_time).mean())


def bounded_allowance_batch(seed, n: int, horizon: float, dt: float, epsilon: float | None = None,
                            fast_forward: bool = True, threads: int | None = None) -> BoundedAllowanceSample:
    """Terminal local time, sign and switch time of ``n`` draws of the bounded-allowance limit."""
    steps = n_steps(horizon, dt)
    eps = default_bandwidth(dt) if epsilon is None else float(epsilon)
    margin = SKIP_MARGIN * math.sqrt(dt)
    parts = run_chunks(seed, n, CHUNK * 10,
                       lambda rng, m: K.bounded_allowance_batch(rng, m, steps, dt, eps, fast_forward, margin),
                       threads)
    u, loc, sg, kt = (np.concatenate([p[i] for p in parts]) for i in range(4))
    sw = np.where(kt >= 0, kt * dt, np.nan)
    out = BoundedAllowanceSample(u, loc, sg.astype(int), sw)
    if out.truncated_fraction > 0.01:
        warnings.warn(f"{out.truncated_fraction:.1%} of draws were truncated at the horizon", stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# negative part limit

M_MIN = 1000
M_CAP = 2**20


def sample_g(seed, size: int | None = None):
    """Last zero of the negative-part limit, by inverting its CDF."""
    rng = as_seed(seed).generator()
    return g_quantile(rng.random() if size is None else rng.random(size))


def _bridge_resolution(g, dt, m_min=M_MIN, m_cap=M_CAP):
    m = min(max(int(math.ceil(g / dt)), m_min), m_cap)
    return m, g / m


def limit_negative_part(seed, horizon: float, dt: float, bridge_budget: int | None = None,
                        m_min: int = M_MIN, m_cap: int = M_CAP) -> LimitDraw:
    """Brownian bridge on ``[0, g]`` spending at most one unit below 0, then a Bessel-3 from 0.

    The bridge is simulated on its own grid of ``clip(ceil(g/dt), m_min, m_cap)``
    steps, so short bridges are still resolved.  The condition is enforced
    exactly by rejecting cyclic shifts (see :func:`limloc._kernels.shifted_bridge_rank`);
    ``terminal_quantity`` is the time below 0 measured on that grid.  The
    returned path samples the construction at the grid ``k dt``.  Grid times
    between bridge nodes are filled in with Brownian-bridge interpolation.
    """
    seed = as_seed(seed)
    n = n_steps(horizon, dt)
    rng = seed.generator(0)
    v = rng.random()
    g = float(g_quantile(v))
    m, dt_b = _bridge_resolution(g, dt, m_min, m_cap)
    cap = min(math.floor(1.0 / dt_b), m - 1)
    budget = int(math.ceil(100.0 * m / (cap + 1))) if bridge_budget is None else int(bridge_budget)
    if budget < 1:
        raise ParameterError("bridge_budget must be >= 1")
    b, kk, rank, tries = K.shifted_bridge_rank(rng, m, dt_b, g > 1.0, budget)
    if tries < 0:
        raise RejectionBudgetError(f"no admissible bridge shift within {budget} proposals", budget, 0)
    nodes = np.concatenate([b[kk:m], b[:kk], [b[kk]]]) - b[kk]
    times = np.arange(n + 1) * dt
    inside = times < g
    x = np.empty(n + 1)
    x[inside] = _interpolate_bridge(seed.generator(1), nodes, dt_b, times[inside])
    off = times[~inside] - g
    if off.size:
        steps = np.diff(off, prepend=0.0)
        y = np.cumsum(seed.generator(2).standard_normal((off.size, 3)) * np.sqrt(steps)[:, None], axis=0)
        x[~inside] = np.sqrt((y * y).sum(axis=1))
    path = Path(dt, x)
    a_inf = rank * dt_b
    diag = {"g": g, "proposals": int(tries), "bridge_steps": m,
            "A_horizon_grid": float(negative_occupation(path)[-1])}
    return LimitDraw(path, a_inf, 1, g, g > horizon, diag)


def _interpolate_bridge(rng, nodes, h, times):
    """Values at ``times`` of Brownian motion pinned to ``nodes`` at spacing ``h``."""
    if times.size == 0:
        return times
    m = nodes.size - 1
    i = np.minimum((times / h).astype(np.int64), m - 1)
    u = times - i * h
    start = np.r_[True, i[1:] != i[:-1]]
    du = np.where(start, u, np.diff(u, prepend=0.0))
    inc = np.sqrt(np.maximum(du, 0.0)) * rng.standard_normal(times.size)
    cs = np.cumsum(inc)
    grp = np.cumsum(start) - 1
    first = np.flatnonzero(start)
    w = cs - (cs[first] - inc[first])[grp]
    last = np.r_[first[1:] - 1, times.size - 1]
    w_end = w[last] + np.sqrt(np.maximum(h - u[last], 0.0)) * rng.standard_normal(first.size)
    rise = nodes[i + 1] - nodes[i]
    return nodes[i] + w - (u / h) * (w_end[grp] - rise)


@dataclass(frozen=True)
class NegativePartSample:
    g: np.ndarray = field(repr=False)
    time_below: np.ndarray = field(repr=False)
    proposals: np.ndarray = field(repr=False)


def negative_part_batch(seed, n: int, dt: float, m_min: int = M_MIN, m_cap: int = M_CAP,
                        budget_factor: float = 100.0, threads: int | None = None) -> NegativePartSample:
    """``g`` and the time spent below 0 for ``n`` draws of the negative-part limit."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    parts = run_chunks(seed, n, CHUNK,
                       lambda rng, k: K.negative_part_batch(rng, k, dt, m_min, m_cap, budget_factor), threads)
    g, a, t = (np.concatenate([p[i] for p in parts]) for i in range(3))
    if np.any(t < 0):
        raise RejectionBudgetError("bridge shift budget exhausted", int(t.size), int((t >= 0).sum()))
    return NegativePartSample(g, a, t)


# ---------------------------------------------------------------------------
# reflection coupling


@dataclass(frozen=True)
class Coupling:
    x: Path
    z: Path
    meeting_time: float


def couple_reflect(seed, x0: float, y0: float, horizon: float, dt: float) -> Coupling:
    """Couple Brownian motions from ``x0`` and ``y0 >= |x0|``.

    ``Z`` follows an independent motion ``Y`` from ``y0`` until the first grid
    time ``tau`` with ``Y <= |X|``, then ``Z = X`` or ``-X`` (whichever sign
    makes ``Z_tau = |X_tau|``).  Before ``tau`` ``|Z| > |X|``; after it
    ``|Z| = |X|``, so the occupation local time of ``Z`` never exceeds that of ``X``.
    ``meeting_time`` is the horizon when the two never meet.
    """
    if not (np.isfinite(x0) and np.isfinite(y0) and y0 >= abs(x0)):
        raise ParameterError("need finite starts with y0 >= |x0|")
    seed = as_seed(seed)
    n = n_steps(horizon, dt)
    x = brownian_array(seed.generator(0), 1, n, dt, x0)[0]
    y = brownian_array(seed.generator(1), 1, n, dt, y0)[0]
    z, tau = _reflect(x[None, :], y[None, :])
    return Coupling(Path(dt, x), Path(dt, z[0]), n * dt if tau[0] < 0 else tau[0] * dt)


def _reflect(x, y):
    met = y <= np.abs(x)
    any_met = met.any(axis=1)
    tau = np.where(any_met, met.argmax(axis=1), -1)
    z = y.copy()
    for r in np.flatnonzero(any_met):
        k = tau[r]
        s = 1.0 if x[r, k] >= 0 else -1.0
        z[r, k:] = s * x[r, k:]
    return z, tau


def coupled_values(seed, n: int, x0: float, y0: float, t: float, dt: float, threads: int | None = None):
    """``Z_t`` and ``X_t`` for ``n`` independent couplings (rows of :func:`couple_reflect`)."""
    steps = n_steps(t, dt)

    def work(rng, m):
        x = brownian_array(rng, m, steps, dt, x0)
        y = brownian_array(rng, m, steps, dt, y0)
        z, _ = _reflect(x, y)
        return z[:, -1], x[:, -1]

    parts = run_chunks(seed, n, 256, work, threads)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
