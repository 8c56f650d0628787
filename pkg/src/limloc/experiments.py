"""Experiment drivers behind the ``figure1`` and ``probe-conjecture`` commands."""
from __future__ import annotations

import math
import os

import numpy as np

from .constraints import ConstraintSpec, check_K
from .errors import RejectionBudgetError
from .rng import Seed
from .samplers import reject_condition, rejection_batch

CURVE_TIMES = (1e2, 1e3, 1e4)


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


def figure1(gammas, t: float, dt: float, root: int, budget: int | None, out_dir: str,
            curve_attempts: int = 0, threads: int | None = None) -> dict:
    """One ``K_t``-conditioned trajectory per ``gamma`` with ``f = power_log(gamma)``.

    Writes ``trajectory_gamma<g>.csv`` and ``localtime_gamma<g>.csv`` into
    ``out_dir`` and returns a summary.  A ``gamma`` whose budget runs out
    gets a failure entry instead of files.  With ``curve_attempts > 0``
    the summary also carries acceptance rates of ``K_s`` at ``s`` in
    :data:`CURVE_TIMES`.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries, files = [], []
    for i, g in enumerate(gammas):
        f = ConstraintSpec.power_log(g)
        entry = {"gamma": g, "t": t, "dt": dt, "seed_root": root, "stream": i}
        try:
            draw = reject_condition(Seed(root, i), f, "K", t, dt, max_attempts=budget)
        except RejectionBudgetError as exc:
            entry.update(status="budget_exhausted", attempts=exc.attempts, message=str(exc))
            entries.append(entry)
            continue
        held = check_K(draw.profile, f, t).holds
        if not held:  # cannot happen for a correct sampler
            raise AssertionError(f"accepted trajectory violates K_t for gamma={g}")
        tp = os.path.join(out_dir, f"trajectory_gamma{_tag(g)}.csv")
        lp = os.path.join(out_dir, f"localtime_gamma{_tag(g)}.csv")
        draw.path.to_csv(tp)
        draw.profile.to_csv(lp)
        files += [tp, lp]
        entry.update(status="ok", attempts=draw.attempts, bandwidth=draw.bandwidth,
                     local_time=float(draw.profile.final), f_t=float(f(t)),
                     ratio_L_over_f=float(draw.profile.final / f(t)), check_K=bool(held),
                     files=[os.path.basename(tp), os.path.basename(lp)])
        if curve_attempts > 0:
            curve = []
            for j, s in enumerate(CURVE_TIMES):
                b = rejection_batch(Seed(root, 1000 + 10 * i + j), f, "K", s, dt, attempts=curve_attempts,
                                    threads=threads)
                curve.append({"t": s, "attempts": b.attempts, "accepted": b.accepted,
                              "rate": b.rate, "stderr": b.rate_stderr})
            entry["acceptance_curve"] = curve
        entries.append(entry)
    return {"command": "figure1", "trajectories": entries, "files": files}


QUANTILES = {"q10": 0.10, "q50": 0.50, "q90": 0.90}


def probe_conjecture(gamma: float, times, n: int, dt: float, root: int, budget: int,
                     threads: int | None = None) -> list[dict]:
    """Quantiles of ``L_t / f(t)`` over ``K_t``-accepted draws, ``f = power_log(gamma)``.

    Exploratory: nothing here is judged.  Rows follow the order of ``times``;
    a row whose budget ran out is flagged ``partial`` and summarises the
    draws accepted so far (if any).
    """
    f = ConstraintSpec.power_log(gamma)
    rows = []
    for j, t in enumerate(times):
        row = {"t": float(t), "f_t": float(f(t)), "requested": n}
        try:
            b = rejection_batch(Seed(root, j), f, "K", t, dt, accepted=n, max_attempts=budget,
                                threads=threads)
            ratios = b.local_time / f(t)
            row.update(partial=False, accepted=b.accepted, attempts=b.attempts)
        except RejectionBudgetError as exc:
            b = rejection_batch(Seed(root, j), f, "K", t, dt, attempts=max(exc.attempts, 1), threads=threads)
            ratios = b.local_time / f(t)
            row.update(partial=True, accepted=b.accepted, attempts=b.attempts)
        for name, q in QUANTILES.items():
            row[name] = float(np.quantile(ratios, q)) if ratios.size else math.nan
        row["max_ratio"] = float(ratios.max()) if ratios.size else math.nan
        rows.append(row)
    return rows
