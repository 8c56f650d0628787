import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from limloc.errors import IntegrityError, ParameterError
from limloc.localtime import (LocalTimeProfile, default_bandwidth, detect_zeros, excursion_count_estimate,
                              excursion_intervals, inverse_local_time, last_zero, negative_occupation,
                              occupation_estimate, running_max)
from limloc.paths import Path, brownian_batch, gen_brownian

walks = arrays(float, st.integers(2, 60), elements=st.floats(-3, 3, allow_nan=False))


def test_occupation_hand_example():
    p = Path(0.01, np.array([0.0, 0.1, 0.5, -0.1, 0.0]))
    prof = occupation_estimate(p, epsilon=0.2)
    # left points 0, 0.1, 0.5, -0.1 -> in band, in band, out, in band
    assert np.allclose(prof.values, np.array([0, 1, 2, 2, 3]) * 0.01 / 0.4)
    assert prof.bandwidth == 0.2 and prof.estimator == "occupation"


@given(walks)
def test_occupation_is_a_profile(x):
    x = np.concatenate([[0.0], x])
    prof = occupation_estimate(Path(0.01, x))
    assert prof.values[0] == 0 and np.all(np.diff(prof.values) >= 0)
    assert prof.final <= (len(x) - 1) * 0.01 / (2 * default_bandwidth(0.01)) + 1e-12


def test_profile_validation():
    with pytest.raises(IntegrityError):
        LocalTimeProfile(0.1, np.array([0.0, 1.0, 0.5]))
    with pytest.raises(IntegrityError):
        LocalTimeProfile(0.1, np.array([0.1, 1.0]))
    with pytest.raises(ParameterError):
        occupation_estimate(Path(0.1, np.zeros(3)), epsilon=0)


def test_profile_csv_round_trip(tmp_path):
    prof = occupation_estimate(gen_brownian(1, 1.0, 0.01))
    prof.to_csv(tmp_path / "l.csv")
    back = LocalTimeProfile.from_csv(tmp_path / "l.csv")
    assert np.array_equal(back.values, prof.values)


def test_mean_local_time_matches_reflection_identity():
    # L_1 has the law of |N(0,1)|, mean sqrt(2/pi); the estimator is biased by O(sqrt dt)
    x = brownian_batch(5, 3000, 1.0, 1e-4)
    dt = 1e-4
    eps = default_bandwidth(dt)
    loc = (np.abs(x[:, :-1]) <= eps).sum(axis=1) * dt / (2 * eps)
    assert abs(loc.mean() - math.sqrt(2 / math.pi)) < 4 * loc.std() / math.sqrt(loc.size) + eps


def test_detect_zeros_examples():
    assert list(detect_zeros(np.array([0.0, 1.0, 2.0, -1.0, -2.0, 0.0]))) == [0, 2, 5]
    assert list(detect_zeros(np.array([1.0, 2.0, 3.0]))) == []
    # snapping moves the zero to the closer end of the step
    assert list(detect_zeros(np.array([1.0, 2.0, -0.5]), snap=True)) == [2]
    assert list(detect_zeros(np.array([1.0, 0.3, -2.0]), snap=True)) == [1]


def test_probabilistic_crossing_needs_dt():
    with pytest.raises(ParameterError):
        detect_zeros(np.array([1.0, 1.0]), crossing_rng=np.random.default_rng(0))
    # two points at 1e-6 and 1e-6 with dt = 1 almost surely carry a crossing
    z = detect_zeros(np.array([1e-6, 1e-6]), crossing_rng=np.random.default_rng(0), dt=1.0)
    assert list(z) == [0]


def test_excursion_intervals():
    x = np.array([0.0, 1.0, 2.0, 0.0, -1.0, 0.0, 0.0, 3.0])
    assert excursion_intervals(x) == [(0, 3, True), (3, 5, True), (6, 7, False)]
    # the segment before the first zero is not an excursion from 0
    assert excursion_intervals(np.array([2.0, 1.0, 0.0, 1.0, 0.0])) == [(2, 4, True)]


@given(walks)
def test_excursions_are_disjoint_and_ordered(x):
    iv = excursion_intervals(x)
    for (a, b, _), (c, d, _) in zip(iv, iv[1:]):
        assert a < b <= c < d
    assert all(c for *_, c in iv[:-1])


def test_excursion_count_estimate():
    p = Path(0.1, np.array([0.0, 1.0, 1.0, 1.0, 0.0, -1.0, 0.0, 2.0, 2.0, 2.0]))
    prof = excursion_count_estimate(p, delta=0.25)
    c = math.sqrt(math.pi * 0.25 / 2)
    assert prof.values[1] == pytest.approx(c)
    assert prof.final == pytest.approx(2 * c)  # the short one is skipped, the unfinished one counts
    with pytest.raises(ParameterError):
        excursion_count_estimate(p, delta=0.01)


def test_inverse_local_time_is_right_continuous():
    prof = LocalTimeProfile(1.0, np.array([0.0, 1.0, 1.0, 2.0]))
    assert inverse_local_time(prof, 0.0) == 1.0
    assert inverse_local_time(prof, 1.0) == 3.0
    assert inverse_local_time(prof, 2.0) is None


def test_negative_occupation_and_last_zero():
    p = Path(0.5, np.array([0.0, -1.0, -1.0, 1.0, 2.0]))
    assert list(negative_occupation(p)) == [0.0, 0.0, 0.5, 1.0, 1.0]
    assert last_zero(p) == 1.0
    assert last_zero(p, t=0.5) == 0.0
    assert list(running_max(p)) == [0.0, 0.0, 0.0, 1.0, 2.0]


def test_linear_path_hand_integral():
    dt = 1e-4
    p = Path(dt, np.arange(10001) * dt)
    # time 0.1 in the band [-0.1, 0.1], divided by 0.2; the left-point sum adds one extra step
    assert occupation_estimate(p, 0.1).final == pytest.approx(0.5, abs=dt / 0.2 + 1e-12)


def test_path_outside_band_has_flat_profile():
    p = Path(0.01, np.concatenate([[0.0], 1.0 + np.abs(np.sin(np.arange(99)))]))
    prof = occupation_estimate(p, 0.5)
    assert np.all(prof.values[1:] == prof.values[1])


@given(walks)
def test_profile_moves_only_on_band_steps(x):
    x = np.concatenate([[0.0], x])
    prof = occupation_estimate(Path(0.01, x), 0.5)
    grew = np.diff(prof.values) > 0
    assert np.array_equal(grew, np.abs(x[:-1]) <= 0.5)


def test_excursion_count_edge_cases():
    p = Path(0.1, np.array([0.0, 1.0, 1.0, 1.0, 1.0, 0.0]))
    assert excursion_count_estimate(p, 0.3).final == pytest.approx(math.sqrt(math.pi * 0.3 / 2))
    assert excursion_count_estimate(p, 10.0).final == 0.0


def test_estimators_agree_on_average():
    x = brownian_batch(21, 3000, 1.0, 1e-5)
    occ, cnt = [], []
    for row in x:
        p = Path(1e-5, row)
        occ.append(occupation_estimate(p).final)
        cnt.append(excursion_count_estimate(p, 1e-3).final)
    assert abs(np.mean(cnt) / np.mean(occ) - 1) < 0.15


def test_inverse_local_time_edges():
    prof = LocalTimeProfile(0.5, np.array([0.0, 0.0, 0.0, 1.0, 2.0]))
    assert inverse_local_time(prof, 0.0) == 1.5
    us = np.linspace(0, 1.9, 30)
    ts = [inverse_local_time(prof, u) for u in us]
    assert ts == sorted(ts)
    assert inverse_local_time(prof, prof.final) is None


def test_negative_occupation_edges():
    assert np.all(negative_occupation(Path(0.1, np.abs(np.arange(11.0)))) == 0)
    p = Path(0.01, np.r_[-np.ones(100), [-1.0]])
    assert negative_occupation(p)[-1] == pytest.approx(1.0)
    assert last_zero(Path(0.1, np.array([0.0, 1.0, 2.0]))) == 0.0
    assert last_zero(Path(0.1, np.array([0.0, 1.0, 0.0]))) == pytest.approx(0.2)


def test_bandwidth_refinement_is_cauchy_like():
    x = brownian_batch(22, 1000, 1.0, 1e-4)
    dt = 1e-4
    ests = {}
    for k in (8, 4, 2):
        eps = k * math.sqrt(dt)
        ests[k] = (np.abs(x[:, :-1]) <= eps).sum(axis=1) * dt / (2 * eps)
    d1 = np.mean(np.abs(ests[8] - ests[4]))
    d2 = np.mean(np.abs(ests[4] - ests[2]))
    assert d2 < d1


def test_levy_identity_local_time_vs_maximum():
    from scipy.stats import ks_2samp
    dt = 1e-4
    eps = default_bandwidth(dt)
    loc, sup = [], []
    for s in range(10):
        x = brownian_batch((23, s), 1000, 1.0, dt)
        loc.append((np.abs(x[:, :-1]) <= eps).sum(axis=1) * dt / (2 * eps))
        y = brownian_batch((24, s), 1000, 1.0, dt)
        sup.append(y.max(axis=1))
    assert ks_2samp(np.concatenate(loc), np.concatenate(sup)).pvalue > 0.01
