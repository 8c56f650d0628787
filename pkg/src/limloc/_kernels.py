"""Compiled inner loops for the Monte Carlo drivers.

All kernels draw from a numpy ``Generator`` handed in by the caller, so their
output is a deterministic function of the seed.

Fast-forwarding.  Several kernels only need grid statistics that change
while the path is near 0: the occupation count of ``|x| <= eps`` and the
sign changes.  Far from the band, a Brownian path started at ``x`` first
reaches ``|x| = eps`` after ``(|x| - eps)^2 / Z^2`` with ``Z`` standard
normal, and every grid point before then is outside the band.  The kernel
jumps to that time and resumes with a partial step to the next grid point.
A Bessel-3 path from ``r`` ever reaches ``eps`` with probability ``eps / r``.
Given that it does, its radius up to that time is a Brownian motion from
``r`` stopped at ``eps``.  The grid statistics therefore keep their exact
law; only intermediate path values are never materialised.
"""
import math

import numpy as np
from numba import njit

EV_NONE, EV_E, EV_K, EV_KPRIME = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def _walk(rng, n, dt, eps, fvals, event, resets, rec_idx, sup_idx, skip, margin, out, write):
    """One Brownian path on ``n`` steps with an optional early-stopping local-time event.

    Returns ``(accepted, count, x_rec, x_end, sup_abs, fail_index)`` where
    ``count`` is the number of in-band grid points among ``0..n-1``.
    """
    sq = math.sqrt(dt)
    c = dt / (2.0 * eps)
    fend = fvals[fvals.size - 1]
    nres = resets.size
    x = 0.0
    k = 0
    count = 0
    base = 0
    r = 0
    x_rec = np.nan
    sup = 0.0
    if write:
        out[0] = 0.0
    while k < n:
        while r < nres and resets[r] <= k:
            base = count
            r += 1
        if k == rec_idx:
            x_rec = x
        ax = abs(x)
        if k <= sup_idx and ax > sup:
            sup = ax
        if ax <= eps:
            count += 1
            if event == EV_E:
                if count * c > fend:
                    return False, count, x_rec, x, sup, k + 1
            elif event == EV_K:
                if count * c > fvals[k + 1]:
                    return False, count, x_rec, x, sup, k + 1
            elif event == EV_KPRIME:
                # index k+1 opening a new block is measured from that block's start
                if not (r < nres and resets[r] == k + 1):
                    if (count - base) * c > fvals[k + 1]:
                        return False, count, x_rec, x, sup, k + 1
        elif skip and k >= rec_idx and k >= sup_idx and ax > eps + margin:
            z = rng.standard_normal()
            s = k * dt + (ax - eps) ** 2 / (z * z)
            kn = int(math.floor(s / dt)) + 1
            if kn > n:
                x = np.nan
                k = n
                break
            h = kn * dt - s
            x = math.copysign(eps, x) + math.sqrt(h) * rng.standard_normal()
            k = kn
            continue
        x += sq * rng.standard_normal()
        k += 1
        if write:
            out[k] = x
    if n == rec_idx:
        x_rec = x
    if n <= sup_idx and abs(x) > sup:
        sup = abs(x)
    return True, count, x_rec, x, sup, -1


@njit(cache=True, nogil=True)
def walk_batch(rng, attempts, n, dt, eps, fvals, event, resets, rec_idx, sup_idx, skip, margin):
    ok = np.zeros(attempts, np.bool_)
    loc = np.empty(attempts)
    xr = np.empty(attempts)
    xe = np.empty(attempts)
    sp = np.empty(attempts)
    dummy = np.empty(1)
    c = dt / (2.0 * eps)
    for i in range(attempts):
        a, cnt, x_rec, x_end, sup, _ = _walk(rng, n, dt, eps, fvals, event, resets, rec_idx, sup_idx,
                                              skip, margin, dummy, False)
        ok[i] = a
        loc[i] = cnt * c
        xr[i] = x_rec
        xe[i] = x_end
        sp[i] = sup
    return ok, loc, xr, xe, sp


@njit(cache=True, nogil=True)
def walk_until_accept(rng, max_attempts, n, dt, eps, fvals, event, resets, out):
    """Rejection loop writing the current attempt into ``out``; stops at the first acceptance."""
    for i in range(max_attempts):
        a, _, _, _, _, _ = _walk(rng, n, dt, eps, fvals, event, resets, -1, -1, False, 0.0, out, True)
        if a:
            return i + 1, True
    return max_attempts, False


@njit(cache=True, nogil=True)
def bounded_allowance_batch(rng, draws, n, dt, eps, skip, margin):
    """Brownian motion until local time exceeds ``U ~ Uniform(0,1)``, then a Bessel-3 from 0.

    Grid convention matches the path-level sampler: the Brownian part covers
    indices ``0..k_tau`` where ``k_tau`` is the first index whose occupation
    profile exceeds ``U``; the Bessel part occupies indices ``k_tau + j``,
    ``j >= 1``.  Returns ``U``, terminal local time, sign, ``k_tau`` (``-1``
    when the horizon comes first).
    """
    sq = math.sqrt(dt)
    c = dt / (2.0 * eps)
    us = np.empty(draws)
    loc = np.empty(draws)
    signs = np.empty(draws, np.int8)
    ktau = np.empty(draws, np.int64)
    for i in range(draws):
        u = rng.random()
        sgn = 1 if rng.random() < 0.5 else -1
        us[i] = u
        signs[i] = sgn
        x = 0.0
        k = 0
        count = 0
        kt = -1
        while k < n:
            ax = abs(x)
            if ax <= eps:
                count += 1
                if count * c > u:
                    x += sq * rng.standard_normal()
                    k += 1
                    kt = k
                    break
            elif skip and ax > eps + margin:
                z = rng.standard_normal()
                s = k * dt + (ax - eps) ** 2 / (z * z)
                kn = int(math.floor(s / dt)) + 1
                if kn > n:
                    k = n
                    break
                x = math.copysign(eps, x) + math.sqrt(kn * dt - s) * rng.standard_normal()
                k = kn
                continue
            x += sq * rng.standard_normal()
            k += 1
        ktau[i] = kt
        if kt >= 0 and kt < n:
            # index kt still holds the Brownian value
            if abs(x) <= eps:
                count += 1
            y0 = 0.0
            y1 = 0.0
            y2 = 0.0
            k = kt
            while k < n:
                y0 += sq * rng.standard_normal()
                y1 += sq * rng.standard_normal()
                y2 += sq * rng.standard_normal()
                k += 1
                if k >= n:
                    break
                rad = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
                if rad <= eps:
                    count += 1
                elif skip and rad > eps + margin:
                    if rng.random() >= eps / rad:
                        break
                    z = rng.standard_normal()
                    s = k * dt + (rad - eps) ** 2 / (z * z)
                    kn = int(math.floor(s / dt)) + 1
                    if kn >= n:
                        break
                    h = math.sqrt(kn * dt - s)
                    y0 = eps + h * rng.standard_normal()
                    y1 = h * rng.standard_normal()
                    y2 = h * rng.standard_normal()
                    k = kn
                    rad = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
                    if rad <= eps:
                        count += 1
        loc[i] = count * c
    return us, loc, signs, ktau


@njit(cache=True, nogil=True)
def shifted_bridge_rank(rng, m, dt_b, conditioned, budget):
    """Discrete bridge of ``m`` steps of size ``dt_b`` and a cyclic shift of it.

    A cyclic shift of the increments preserves the law of the bridge, and the
    number of negative points of the path shifted to start at node ``K`` is
    the rank of ``b_K`` among the nodes.  When ``conditioned`` is set the
    shift is proposed uniformly and accepted iff that rank is at most
    ``floor(1 / dt_b)``, i.e. the shifted bridge spends at most one unit of
    time below 0.  Returns ``(bridge nodes b_0..b_m, K, rank, proposals)``;
    ``proposals = -1`` signals an exhausted budget.
    """
    b = np.empty(m + 1)
    b[0] = 0.0
    s = math.sqrt(dt_b)
    for j in range(m):
        b[j + 1] = b[j] + s * rng.standard_normal()
    last = b[m]
    for j in range(m + 1):
        b[j] -= last * j / m
    b[m] = 0.0
    if not conditioned:
        rank = 0
        for j in range(m):
            if b[j] < 0.0:
                rank += 1
        return b, 0, rank, 0
    cap = int(math.floor(1.0 / dt_b))
    if cap >= m - 1:
        thr = np.inf
    else:
        thr = np.partition(b[:m].copy(), cap)[cap]
    kk = 0
    tries = 0
    while True:
        if tries >= budget:
            return b, 0, 0, -1
        kk = int(rng.random() * m)
        tries += 1
        if b[kk] <= thr:
            break
    pivot = b[kk]
    rank = 0
    for j in range(m):
        if b[j] < pivot:
            rank += 1
    return b, kk, rank, tries


@njit(cache=True, nogil=True)
def negative_part_batch(rng, draws, dt, m_min, m_cap, budget_factor):
    """Last zero ``g`` and time below zero ``A`` for the negative-part limit.

    ``g`` is drawn from ``P(g <= a) = sqrt(a)/2`` (``a <= 1``), ``1 - 1/(2 sqrt a)``
    (``a >= 1``).  The bridge over ``[0, g]`` has ``clip(ceil(g/dt), m_min, m_cap)``
    steps and is conditioned to spend at most one unit of time below zero.
    """
    gs = np.empty(draws)
    aa = np.empty(draws)
    tries = np.empty(draws, np.int64)
    for i in range(draws):
        v = rng.random()
        g = (2.0 * v) ** 2 if v < 0.5 else 1.0 / (2.0 * (1.0 - v)) ** 2
        m = int(math.ceil(g / dt))
        m = min(max(m, m_min), m_cap)
        dt_b = g / m
        budget = int(budget_factor * m / (min(math.floor(1.0 / dt_b), m - 1) + 1)) + 1
        _, _, rank, t = shifted_bridge_rank(rng, m, dt_b, g > 1.0, budget)
        gs[i] = g
        aa[i] = rank * dt_b if t >= 0 else np.nan
        tries[i] = t
    return gs, aa, tries


@njit(cache=True, nogil=True)
def first_zero_times(rng, draws, x0, n, dt):
    """First grid time at which a Brownian path from ``x0`` is at or past 0 (``inf`` if none by step ``n``)."""
    sq = math.sqrt(dt)
    out = np.empty(draws)
    for i in range(draws):
        x = x0
        t = np.inf
        for k in range(n):
            y = x + sq * rng.standard_normal()
            if y == 0.0 or (y < 0.0) != (x < 0.0):
                t = (k + 1) * dt
                break
            x = y
        out[i] = t
    return out


@njit(cache=True, nogil=True)
def long_excursions_per_local_time(rng, draws, dt, eps, delta, level, skip, margin):
    """Number of excursions longer than ``delta`` completed before local time reaches ``level``.

    Zeros sit at the left end of a sign-changing step (or at an exact 0);
    local time is the occupation estimate with half-width ``eps``.
    """
    sq = math.sqrt(dt)
    c = dt / (2.0 * eps)
    out = np.empty(draws, np.int64)
    for i in range(draws):
        x = 0.0
        k = 0
        count = 0
        last = 0
        hits = 0
        while True:
            ax = abs(x)
            if ax <= eps:
                count += 1
                if count * c > level:
                    break
            elif skip and ax > eps + margin:
                z = rng.standard_normal()
                s = k * dt + (ax - eps) ** 2 / (z * z)
                kn = int(math.floor(s / dt)) + 1
                y = math.copysign(eps, x) + math.sqrt(kn * dt - s) * rng.standard_normal()
                # every skipped grid point kept the sign of x, so a sign change
                # can only sit on the step ending at kn
                if (x < 0.0) != (y < 0.0):
                    if (kn - 1 - last) * dt > delta:
                        hits += 1
                    last = kn - 1
                x = y
                k = kn
                continue
            y = x + sq * rng.standard_normal()
            if x == 0.0 or (x < 0.0) != (y < 0.0):
                if (k - last) * dt > delta:
                    hits += 1
                last = k
            x = y
            k += 1
        out[i] = hits
    return out
