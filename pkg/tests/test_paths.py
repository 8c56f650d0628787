import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from limloc.errors import IntegrityError, ParameterError
from limloc.paths import (Path, bessel3_batch, bridge_batch, brownian_batch, gen_bessel3, gen_bessel3_bridge,
                          gen_bridge, gen_brownian, time_index)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_path_is_read_only_copy():
    raw = np.array([0.0, 1.0, -1.0])
    p = Path(0.5, raw)
    raw[1] = 7.0
    assert p.values[1] == 1.0
    with pytest.raises(ValueError):
        p.values[0] = 1.0
    assert p.horizon == 1.0 and p.origin == 0.0


@pytest.mark.parametrize("dt,vals", [(0.0, [0.0, 1.0]), (-1.0, [0.0, 1.0]), (0.1, [0.0, np.nan]), (0.1, [])])
def test_path_rejects_bad_input(dt, vals):
    with pytest.raises((IntegrityError, ParameterError)):
        Path(dt, np.asarray(vals, float))


@given(arrays(float, st.integers(2, 40), elements=finite), st.sampled_from([1e-3, 0.01, 0.25]))
def test_csv_round_trip(tmp_path_factory, values, dt):
    f = tmp_path_factory.mktemp("p") / "path.csv"
    p = Path(dt, values)
    p.to_csv(f)
    q = Path.from_csv(f)
    assert np.array_equal(q.values, p.values)
    assert math.isclose(q.dt, dt, rel_tol=1e-12)


def test_single_row_csv_has_no_grid_step(tmp_path):
    Path(0.1, np.zeros(1)).to_csv(tmp_path / "p.csv")
    with pytest.raises(IntegrityError):
        Path.from_csv(tmp_path / "p.csv")


def test_time_index_snaps_down():
    assert time_index(0.30000000000000004, 0.1, 10) == 3
    assert time_index(0.35, 0.1, 10) == 3
    with pytest.raises(ParameterError):
        time_index(1.5, 0.1, 10)


def test_generators_are_deterministic():
    assert np.array_equal(gen_brownian(7, 1, 1e-3).values, gen_brownian(7, 1, 1e-3).values)
    assert not np.array_equal(gen_brownian(7, 1, 1e-3).values, gen_brownian(8, 1, 1e-3).values)


def test_bridge_endpoints():
    b = gen_bridge(1, 2.0, 0.01)
    assert b.values[0] == 0.0 and abs(b.values[-1]) < 1e-12
    r = gen_bessel3_bridge(1, 2.0, 0.01)
    assert r.values[0] == 0.0 and abs(r.values[-1]) < 1e-12
    assert np.all(r.values >= 0)


@pytest.mark.parametrize("method", ["norm3d", "euler"])
def test_bessel3_nonnegative(method):
    assert np.all(gen_bessel3(3, 5.0, 1e-3, method=method).values >= 0)


def test_bessel3_mean_square():
    # E R_t^2 = 3t for a Bessel-3 from 0
    r = bessel3_batch(11, 4000, 1.0, 0.01)[:, -1]
    assert abs(np.mean(r**2) - 3.0) < 4 * np.std(r**2) / math.sqrt(r.size)


def test_brownian_increment_law():
    x = brownian_batch(2, 2000, 1.0, 0.01)
    end = x[:, -1]
    assert abs(end.mean()) < 4 / math.sqrt(end.size)
    assert abs(end.var() - 1.0) < 4 * math.sqrt(2 / end.size)


def test_bridge_midpoint_variance():
    x = bridge_batch(4, 4000, 1.0, 0.01)[:, 50]
    assert abs(x.var() - 0.25) < 4 * 0.25 * math.sqrt(2 / x.size)


def test_batch_rows_follow_chunk_streams():
    # a longer batch starts with the rows of a shorter one
    a = brownian_batch(9, 300, 0.5, 0.01)
    b = brownian_batch(9, 600, 0.5, 0.01)
    assert np.array_equal(a[:256], b[:256])


def test_single_step_path():
    p = gen_brownian(0, 0.01, 0.01)
    assert len(p) == 2 and p.values[0] == 0.0


def test_increments_uncorrelated():
    x = brownian_batch(12, 20000, 2.0, 0.05)
    a, b = x[:, 20], x[:, 40] - x[:, 20]
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 3 / math.sqrt(a.size)


def test_bessel3_bridge_midpoint():
    from limloc.paths import bessel3_bridge_batch
    x = bessel3_bridge_batch(13, 8000, 2.0, 0.01)[:, 100]
    m = np.mean(x**2)
    assert abs(m - 1.5) < 3 * np.std(x**2) / math.sqrt(x.size)


def test_euler_bessel_matches_norm3d():
    from scipy.stats import ks_2samp
    a = bessel3_batch(14, 10000, 1.0, 1e-3, start=1.0)[:, -1]
    b = bessel3_batch(15, 10000, 1.0, 1e-3, start=1.0, method="euler")[:, -1]
    assert ks_2samp(a, b).pvalue > 0.01


def test_brownian_scaling():
    from scipy.stats import ks_2samp
    c = 4.0
    a = brownian_batch(16, 10000, 1.0, 0.01)[:, 50]
    b = brownian_batch(17, 10000, c, 0.04)[:, 50] / math.sqrt(c)
    assert ks_2samp(a, b).pvalue > 0.01


def test_bessel_dominates_half_normal():
    from scipy.stats import ks_2samp
    r = bessel3_batch(18, 5000, 1.0, 0.01)[:, -1]
    h = np.abs(brownian_batch(19, 5000, 1.0, 0.01)[:, -1])
    # one-sided: the half-normal CDF lies above the Bessel CDF
    assert ks_2samp(h, r, alternative="less").pvalue > 0.01
    assert ks_2samp(h, r, alternative="greater").pvalue < 1e-6
