import numpy as np
import pytest
from scipy import stats

from hybridsde.errors import ConfigError, SimulationExplosionError
from hybridsde.model import ModelSpec, get_model
from hybridsde.simulate import (
    SimulationConfig, batch_simulate, psd_sqrt, replication_config, simulate_path, student_t_noise,
)

OU = get_model("ou-1d")
P3 = get_model("paper-3d")


def python_only(spec):
    return ModelSpec(d=spec.d, r=spec.r, m1=spec.m1, m2=spec.m2, drift=spec.drift, diffusion=spec.diffusion)


def ou_cfg(**kw):
    base = dict(model=OU.spec, alpha=[1.0], beta=[1.0], x0=[0.0], n=1000, h=0.01,
                Lambda=1e-3 * np.eye(1), substeps=4, seed=7)
    base.update(kw)
    return SimulationConfig(**base)


def test_matches_reference_euler_recursion():
    cfg = SimulationConfig(P3.spec, P3.alpha_true, P3.beta_true, P3.x0, 300, 1e-3,
                           P3.Lambda_true, substeps=3, seed=5)
    obs, X, eps = simulate_path(cfg, return_components=True)
    ss = np.random.SeedSequence(entropy=5, spawn_key=())
    w_ss, _ = ss.spawn(2)
    Z = np.random.Generator(np.random.Philox(w_ss)).standard_normal((300, 3, 3))
    x = P3.x0.copy()
    dt = 1e-3 / 3
    ref = [x.copy()]
    for i in range(300):
        for s in range(3):
            b = P3.spec.drift(x[None], P3.beta_true)[0]
            a = P3.spec.diffusion(x[None], P3.alpha_true)[0]
            x = x + b * dt + a @ Z[i, s] * np.sqrt(dt)
        ref.append(x.copy())
    np.testing.assert_allclose(X, np.array(ref), rtol=1e-12, atol=1e-14)


def test_jit_and_python_paths_agree():
    a = simulate_path(ou_cfg())
    b = simulate_path(ou_cfg(model=python_only(OU.spec)))
    np.testing.assert_allclose(a.y, b.y, rtol=1e-13, atol=1e-15)


def test_noise_is_added_exactly():
    lam = np.array([[2e-3, 5e-4, 0], [5e-4, 1e-3, 0], [0, 0, 4e-3]])
    cfg = SimulationConfig(P3.spec, P3.alpha_true, P3.beta_true, P3.x0, 200, 1e-3, lam, seed=1)
    obs, X, eps = simulate_path(cfg, return_components=True)
    np.testing.assert_allclose(obs.y - X, eps @ psd_sqrt(lam), atol=1e-15)
    np.testing.assert_allclose(psd_sqrt(lam) @ psd_sqrt(lam), lam, atol=1e-15)


def test_noise_free_deterministic_decay():
    cfg = ou_cfg(alpha=[1e-300], x0=[1.0], n=50, h=0.1, substeps=5, Lambda=np.zeros((1, 1)))
    obs = simulate_path(cfg)
    np.testing.assert_allclose(obs.y[:, 0], (1 - 0.02) ** (5 * np.arange(51)), rtol=1e-13)


def test_ou_stationary_variance():
    cfg = ou_cfg(n=50_000, h=0.01, substeps=2, Lambda=np.zeros((1, 1)), seed=2)
    v = [np.var(o.y[5000:, 0]) for o in batch_simulate(cfg, 8, seed_base=2)]
    assert np.mean(v) == pytest.approx(0.5, rel=0.1)


def test_same_seed_same_path_and_replications_are_stable():
    cfg = ou_cfg()
    assert np.array_equal(simulate_path(cfg).y, simulate_path(cfg).y)
    reps = list(batch_simulate(cfg, 3, seed_base=11))
    late = list(batch_simulate(cfg, 2, seed_base=11, start=1))
    assert np.array_equal(reps[1].y, late[0].y) and np.array_equal(reps[2].y, late[1].y)
    assert np.array_equal(simulate_path(replication_config(cfg, 11, 2)).y, reps[2].y)


def test_replications_are_uncorrelated():
    cfg = ou_cfg(n=100_000, h=1e-3, substeps=1, Lambda=np.zeros((1, 1)))
    a, b = batch_simulate(cfg, 2, seed_base=3)
    r = np.corrcoef(np.diff(a.y[:, 0]), np.diff(b.y[:, 0]))[0, 1]
    assert abs(r) < 0.01


def test_explosion_is_reported():
    blow = ModelSpec(d=1, r=1, m1=1, m2=1, drift=lambda x, b: b[0] * x ** 3,
                     diffusion=lambda x, a: np.full((1, 1), a[0]))
    cfg = ou_cfg(model=blow, x0=[10.0], beta=[1.0], h=0.1, n=100, substeps=1)
    with pytest.raises(SimulationExplosionError) as err:
        simulate_path(cfg)
    assert 1 <= err.value.index <= 100


def test_student_t_law():
    law = student_t_noise(8.0)
    z = law(np.random.default_rng(0), (400_000,))
    assert np.var(z) == pytest.approx(1.0, rel=0.03)
    assert stats.kurtosis(z, fisher=False) == pytest.approx(3 + 6 / (8 - 4), rel=0.15)
    with pytest.raises(ConfigError):
        student_t_noise(2.0)
    obs = simulate_path(ou_cfg(noise_law=law))
    assert np.all(np.isfinite(obs.y))


@pytest.mark.parametrize("kw", [
    dict(substeps=0), dict(n=0), dict(h=-1.0), dict(Lambda=np.eye(2)),
    dict(Lambda=-np.eye(1)), dict(x0=[0.0, 1.0]), dict(noise_law="cauchy"),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ou_cfg(**kw)
