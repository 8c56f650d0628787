"""Reproducible random streams.

Every stochastic routine takes a :class:`Seed`.  A seed is a ``(root, stream)``
pair; the pair is turned into a Philox counter-based generator through
``numpy.random.SeedSequence`` so that distinct streams never overlap and the
same pair always yields the same numbers, whatever the number of workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_MAX = 2**64


@dataclass(frozen=True)
class Seed:
    root: int
    stream: int = 0

    def __post_init__(self):
        for name in ("root", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or not 0 <= v < _MAX:
                raise ParameterError(f"seed {name} must be an integer in [0, 2**64), got {v!r}")

    def sequence(self, *path: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.root), spawn_key=(int(self.stream), *map(int, path)))

    def generator(self, *path: int) -> np.random.Generator:
        """Philox generator for this stream, optionally for a numbered sub-stream."""
        return np.random.Generator(np.random.Philox(self.sequence(*path)))

    def with_stream(self, stream: int) -> "Seed":
        return Seed(self.root, stream)


def as_seed(seed) -> Seed:
    """Accept a Seed, a bare integer root, or a ``(root, stream)`` tuple."""
    if isinstance(seed, Seed):
        return seed
    if isinstance(seed, tuple):
        return Seed(*seed)
    return Seed(seed)
