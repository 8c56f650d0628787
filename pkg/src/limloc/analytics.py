"""Closed-form probabilities and densities used as references for the simulations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import ParameterError
from .paths import _write_csv


def _positive(name, v):
    if not (np.all(np.isfinite(v)) and np.all(np.asarray(v) > 0)):
        raise ParameterError(f"{name} must be positive and finite")


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def prob_E_exact(t, c):
    """``P(L_t <= c) = 2 Phi(c / sqrt t) - 1`` for Brownian local time at 0.

    By Levy's identity ``L_t`` has the law of ``|X_t|``.
    """
    _positive("t", t)
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ParameterError("c must be >= 0")
    return _scalar(special.erf(c / np.sqrt(2.0 * np.asarray(t, dtype=float))))


def prob_Eprime(t, a):
    """``1 - exp(-a sqrt(2/(pi t)))``: probability that some excursion longer than ``t``
    starts before local time ``a``."""
    _positive("t", t)
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ParameterError("a must be >= 0")
    return _scalar(-np.expm1(-a * np.sqrt(2.0 / (np.pi * np.asarray(t, dtype=float)))))


def hitting_density(x, t):
    """Density of the first time Brownian motion started at ``x`` hits 0."""
    _positive("t", t)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.abs(x) * t ** -1.5 * np.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi)
    return _scalar(out)


def hitting_cdf(x, t):
    """``P(T_0 <= t)`` from ``x``, i.e. ``2 (1 - Phi(|x| / sqrt t))``."""
    _positive("t", t)
    return _scalar(special.erfc(np.abs(np.asarray(x, dtype=float)) / np.sqrt(2.0 * np.asarray(t, dtype=float))))


def arcsine_cdf(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ParameterError("arcsine CDF is defined on [0, 1]")
    return _scalar(2.0 / np.pi * np.arcsin(np.sqrt(x)))


def arcsine_pdf(x):
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ParameterError("arcsine density is defined on (0, 1)")
    return _scalar(1.0 / (np.pi * np.sqrt(x * (1.0 - x))))


# Law of the last zero g in the limit of Brownian motion conditioned to spend
# at most one unit of time below 0.  P(g > A) has two regimes.


def g_tail(A):
    """``P(g > A) = 1 / (2 sqrt A)`` for ``A >= 1``."""
    A = np.asarray(A, dtype=float)
    if np.any(A < 1):
        raise ParameterError("the tail formula holds for A >= 1")
    return _scalar(0.5 / np.sqrt(A))


def g_head(A):
    """``P(g <= A) = sqrt(A) / 2`` for ``0 <= A <= 1``."""
    A = np.asarray(A, dtype=float)
    if np.any((A < 0) | (A > 1)):
        raise ParameterError("the head formula holds for 0 <= A <= 1")
    return _scalar(0.5 * np.sqrt(A))


def g_cdf(A):
    A = np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise ParameterError("A must be >= 0")
    out = np.where(A <= 1, 0.5 * np.sqrt(np.minimum(A, 1.0)), 1.0 - 0.5 / np.sqrt(np.maximum(A, 1.0)))
    return _scalar(out)


def g_quantile(v):
    """Inverse of :func:`g_cdf`: ``(2v)^2`` below the median, ``1 / (2(1-v))^2`` above."""
    v = np.asarray(v, dtype=float)
    if np.any((v < 0) | (v >= 1)):
        raise ParameterError("quantile level must lie in [0, 1)")
    out = np.where(v < 0.5, (2.0 * v) ** 2, 1.0 / (2.0 * (1.0 - v)) ** 2)
    return _scalar(out)


def normal_cdf(x):
    return _scalar(0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0)))


@dataclass(frozen=True)
class DensityGrid:
    """A density tabulated on a grid, with its integral over the grid."""

    x: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    normalisation: float = 1.0

    def to_csv(self, path) -> None:
        _write_csv(path, "x,density", self.x, self.density)


def density_grid(fn, x) -> DensityGrid:
    """Tabulate ``fn`` on ``x``; the normalisation is its trapezoidal integral there."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ParameterError("grid must be increasing with at least two points")
    d = np.asarray(fn(x), dtype=float)
    return DensityGrid(x, d, float(integrate.trapezoid(d, x)))
