import numpy as np
import pytest
from hypothesis import given, strategies as st

from limloc.rng import Seed, as_seed


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**32))
def test_same_seed_same_stream(root, stream):
    a = Seed(root, stream).generator().standard_normal(4)
    b = Seed(root, stream).generator().standard_normal(4)
    assert np.array_equal(a, b)


def test_streams_and_subpaths_are_distinct():
    s = Seed(5)
    draws = [s.generator().random(), s.with_stream(1).generator().random(),
             s.generator(0).random(), s.generator(1).random()]
    assert len(set(draws)) == 4


@pytest.mark.parametrize("bad", [-1, 2**64])
def test_root_out_of_range(bad):
    with pytest.raises(ValueError):
        Seed(bad)


def test_as_seed_forms():
    assert as_seed(3) == Seed(3, 0)
    assert as_seed((3, 4)) == Seed(3, 4)
    s = Seed(9, 2)
    assert as_seed(s) is s
