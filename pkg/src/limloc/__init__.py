"""Simulation toolkit for Brownian motion conditioned on its local time at 0.

The modules build on each other:

* :mod:`limloc.paths` generates Brownian, bridge and Bessel-3 paths on a grid;
* :mod:`limloc.localtime` estimates local time, zeros and excursion intervals;
* :mod:`limloc.excursions` splits paths into excursions and glues them back;
* :mod:`limloc.constraints` holds the constraint functions ``f`` and the
  events ``E_t``, ``K_t``, ``K'_n`` built from them;
* :mod:`limloc.samplers` conditions by rejection and samples the limit laws;
* :mod:`limloc.analytics` and :mod:`limloc.stats` provide closed forms and
  the Monte Carlo judging tools.
"""
__version__ = "0.1.0"

from .constraints import ConstraintSpec, classify
from .errors import IntegrityError, ParameterError, RejectionBudgetError
from .localtime import LocalTimeProfile, occupation_estimate
from .paths import Path, gen_bessel3, gen_bessel3_bridge, gen_bridge, gen_brownian
from .rng import Seed

__all__ = [
    "ConstraintSpec", "IntegrityError", "LocalTimeProfile", "ParameterError", "Path",
    "RejectionBudgetError", "Seed", "classify", "gen_bessel3", "gen_bessel3_bridge",
    "gen_bridge", "gen_brownian", "occupation_estimate",
]
