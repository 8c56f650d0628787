import numpy as np
import pytest

from limloc.errors import ParameterError
from limloc.montecarlo import THREADS_ENV, default_threads, run_chunks, run_until


def _draw(rng, m):
    return rng.standard_normal(m)


@pytest.mark.parametrize("threads", [1, 2, 5])
def test_chunks_do_not_depend_on_threads(threads):
    ref = np.concatenate(run_chunks(3, 1000, 64, _draw, threads=1))
    got = np.concatenate(run_chunks(3, 1000, 64, _draw, threads=threads))
    assert np.array_equal(ref, got)


def test_run_until_is_a_prefix():
    done = lambda parts: sum(p.size for p in parts) >= 300
    a = run_until(4, 64, _draw, done, 100, threads=1)
    b = run_until(4, 64, _draw, done, 100, threads=3)
    assert len(a) == len(b) == 5
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_threads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ParameterError):
        default_threads()
