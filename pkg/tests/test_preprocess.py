import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from hybridsde.model import get_model
from hybridsde.preprocess import (
    NoisyObservations, estimate_noise_variance, local_means, read_observations,
    read_observations_csv, write_observations, write_observations_csv,
)
from hybridsde.schedule import BlockSchedule
from hybridsde.simulate import SimulationConfig, simulate_path


def sched(p, k, h=0.01):
    return BlockSchedule(tau=2.0, h=h, p=p, delta=p * h, k=k, k_reduced=k, t_reduced=k * p * h)


def test_hand_arithmetic():
    obs = NoisyObservations(np.arange(6.0), h=0.1)
    np.testing.assert_array_equal(local_means(obs, sched(2, 3)).ybar[:, 0], [0.5, 2.5, 4.5])


def test_tail_dropped():
    obs = NoisyObservations(np.arange(7.0), h=0.1)
    assert local_means(obs, sched(3, 2)).ybar[:, 0].tolist() == [1.0, 4.0]
    with pytest.raises(ValueError):
        local_means(obs, sched(3, 3))


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3), st.integers(1, 7), st.integers(1, 9), st.integers(1, 3))
def test_constant_series(c, p, k, d):
    obs = NoisyObservations(np.full((p * k + 2, d), c), h=0.1)
    np.testing.assert_allclose(local_means(obs, sched(p, k)).ybar, c, rtol=1e-12, atol=0)


@settings(max_examples=100, deadline=None)
@given(
    hnp.arrays(np.float64, (41, 2), elements=st.floats(-100, 100)),
    hnp.arrays(np.float64, (41, 2), elements=st.floats(-100, 100)),
    st.floats(-5, 5), st.floats(-5, 5), st.integers(1, 8),
)
def test_linearity(y1, y2, a, b, p):
    s = sched(p, 40 // p)
    lhs = local_means(NoisyObservations(a * y1 + b * y2, 0.1), s).ybar
    rhs = a * local_means(NoisyObservations(y1, 0.1), s).ybar + b * local_means(NoisyObservations(y2, 0.1), s).ybar
    scale = np.abs(a * y1).max() + np.abs(b * y2).max() + 1e-300
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * scale)


def test_pure_noise_recovery():
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(11)))
    lam = 1e-3
    y = np.sqrt(lam) * rng.standard_normal((10**6 + 1, 3))
    L = estimate_noise_variance(NoisyObservations(y, h=1e-4)).lambda_hat
    assert np.all(np.abs(L - lam * np.eye(3)) < 5e-5)


def test_zero_increments():
    obs = NoisyObservations(np.tile([1.0, -2.0], (100, 1)), h=0.1)
    assert np.all(estimate_noise_variance(obs).lambda_hat == 0.0)


def test_chunked_sum_matches_direct():
    rng = np.random.default_rng(3)
    y = np.cumsum(rng.normal(size=(200_001, 2)), axis=0)
    L = estimate_noise_variance(NoisyObservations(y, 0.1)).lambda_hat
    dy = np.diff(y, axis=0)
    np.testing.assert_allclose(L, dy.T @ dy / (2 * 200_000), rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(hnp.arrays(np.float64, (30, 3), elements=st.floats(-50, 50)),
       hnp.arrays(np.float64, (3,), elements=st.floats(-1e3, 1e3)))
def test_psd_and_translation_invariant(y, shift):
    L = estimate_noise_variance(NoisyObservations(y, 0.1)).lambda_hat
    np.testing.assert_array_equal(L, L.T)
    tol = 1e-12 * max(np.trace(L), 1e-300)
    assert np.linalg.eigvalsh(L).min() >= -tol
    L2 = estimate_noise_variance(NoisyObservations(y + shift, 0.1)).lambda_hat
    np.testing.assert_allclose(L2, L, rtol=1e-9, atol=1e-9 * (np.abs(shift).max() ** 2 + 1))


def test_bias_scales_with_h():
    # E[Lambda_hat] - Lambda ~ (h/2) A for an OU path; doubling h doubles it
    rm = get_model("ou-1d")
    bias = []
    for h in (1e-4, 2e-4):
        cfg = SimulationConfig(rm.spec, [1.0], [1.0], [0.0], 10**6, h, [[1e-3]], substeps=2, seed=5)
        L = estimate_noise_variance(simulate_path(cfg)).lambda_hat[0, 0]
        bias.append(L - 1e-3)
    assert abs(bias[1] / bias[0] - 2.0) < 0.3 * 2.0


def test_binary_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    obs = NoisyObservations(rng.normal(size=(11, 3)), h=0.25)
    p = write_observations(tmp_path / "o.bin", obs)
    back = read_observations(p)
    np.testing.assert_array_equal(back.y, obs.y)
    assert back.h == 0.25 and back.n == 10 and back.d == 3
    raw = p.read_bytes()
    assert raw[:4] == b"HSDE" and len(raw) == 32 + 11 * 3 * 8


def test_binary_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + bytes(28))
    with pytest.raises(ValueError, match="magic"):
        read_observations(bad)
    bad.write_bytes(b"HSD")
    with pytest.raises(ValueError, match="truncated"):
        read_observations(bad)
    obs = NoisyObservations(np.zeros((4, 2)), 0.1)
    p = write_observations(tmp_path / "t.bin", obs)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError, match="payload"):
        read_observations(p)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    obs = NoisyObservations(rng.normal(size=(6, 2)), h=0.125)
    p = write_observations(tmp_path / "o.csv", obs)
    back = read_observations(p)
    np.testing.assert_array_equal(back.y, obs.y)
    assert back.h == 0.125
    (tmp_path / "plain.csv").write_text("1.0,2.0\n3.0,4.0\n")
    with pytest.raises(ValueError, match="step h"):
        read_observations_csv(tmp_path / "plain.csv")
    assert read_observations_csv(tmp_path / "plain.csv", h=0.5).y.shape == (2, 2)


def test_observation_validation():
    with pytest.raises(ValueError):
        NoisyObservations(np.array([1.0, np.nan]), 0.1)
    with pytest.raises(ValueError):
        NoisyObservations(np.zeros(1), 0.1)
    with pytest.raises(ValueError):
        NoisyObservations(np.zeros(3), 0.0)
