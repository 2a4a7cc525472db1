import json
import warnings

import numpy as np
import pytest

import _oracles as orc
from hybridsde.bayes import McmcConfig
from hybridsde.contrasts import EffectiveDiffusion, contrast_derivatives
from hybridsde.errors import StageError
from hybridsde.model import ModelSpec, ParamSpace, get_model
from hybridsde.multistep import (
    hybrid_estimate, newton_direction, newton_refine_alpha, newton_refine_beta,
)
from hybridsde.preprocess import LocalMeanSeries
from hybridsde.schedule import BlockSchedule, TuningConfig, compute_J1, compute_J2
from hybridsde.simulate import SimulationConfig, simulate_path

CONST = orc.const_diffusion_model()
OU = get_model("ou-1d")


def series(y, delta):
    y = np.asarray(y, float).reshape(len(y), -1)
    k = y.shape[0]
    return LocalMeanSeries(y, BlockSchedule(tau=2.0, h=delta, p=1, delta=delta, k=k,
                                            k_reduced=k, t_reduced=k * delta))


def walk(k, delta, seed, drift=0.0):
    rng = np.random.default_rng(seed)
    return np.concatenate([[0.0], np.cumsum(drift * delta + np.sqrt(delta) * rng.standard_normal(k - 1))])


@pytest.mark.parametrize("start", [-7.0, 0.3, 9.5])
def test_beta_one_step_is_exact_on_quadratic(start):
    delta = 0.01
    lm = series(walk(400, delta, 1, drift=2.0), delta)
    D = np.diff(lm.ybar[1:, 0])
    target = D.sum() / ((lm.schedule.k - 2) * delta)
    tr = newton_refine_beta(CONST, [start], [1.0], lm, 1, T=4.0)
    assert tr.steps == 1
    assert tr.final[0] == pytest.approx(target, rel=1e-10)
    assert tr.used_identity_fallback == [False, False]


def test_guarded_step_solves_the_normal_equation():
    delta = 0.01
    lm = series(walk(400, delta, 2), delta)
    cv = contrast_derivatives("W1", [0.7], model=OU.spec, lm=lm, Lambda=np.array([[1e-3]]),
                              eff=EffectiveDiffusion("limit", 1.5, delta))
    N = lm.schedule.k
    step, fallback = newton_direction(cv, N)
    assert not fallback
    resid = cv.hessian / N @ step + cv.gradient / N
    assert np.linalg.norm(resid) < 1e-10 * max(1.0, np.linalg.norm(cv.gradient / N))


def test_identity_fallback_on_flat_direction():
    flat = ModelSpec(d=1, r=1, m1=1, m2=2,
                     drift=lambda x, b: np.broadcast_to(b[0], np.shape(x)).astype(float),
                     diffusion=CONST.diffusion, dA_dalpha=CONST.dA_dalpha, d2A_dalpha2=CONST.d2A_dalpha2,
                     db_dbeta=lambda x, b: np.stack([np.ones(np.shape(x)), np.zeros(np.shape(x))], axis=-2),
                     d2b_dbeta2=lambda x, b: np.zeros(np.shape(x)[:-1] + (2, 2, 1)))
    delta = 0.01
    lm = series(walk(100, delta, 3, drift=1.0), delta)
    cv = contrast_derivatives("H2_full", [0.0, 5.0], model=flat, lm=lm, alpha=[1.0])
    step, fallback = newton_direction(cv, 2.0)
    assert fallback
    np.testing.assert_array_equal(step, -cv.gradient / 2.0)
    tr = newton_refine_beta(flat, [0.0, 5.0], [1.0], lm, 2, T=1.0)
    assert tr.used_identity_fallback == [False, True, True]


def test_zero_steps_returns_initializer():
    delta = 0.01
    lm = series(walk(50, delta, 4), delta)
    tr = newton_refine_beta(CONST, [1.5], [1.0], lm, 0, T=0.5)
    assert tr.steps == 0
    assert tr.final[0] == 1.5
    assert len(tr.objective_values) == len(tr.grad_norms) == 1


def test_clamp_is_recorded_and_warned():
    delta = 0.01
    lm = series(walk(200, delta, 5, drift=30.0), delta)
    space = ParamSpace.cube(0.0, 5.0, 1)
    with pytest.warns(RuntimeWarning, match="clamped"):
        tr = newton_refine_beta(CONST, [1.0], [1.0], lm, 1, T=2.0, space=space)
    assert tr.clamped == [False, True]
    assert tr.final[0] == 5.0


def test_failure_carries_partial_trace():
    delta = 0.01
    lm = series(walk(50, delta, 6), delta)
    with pytest.raises(StageError) as err:
        newton_refine_alpha(OU.spec, [0.5], -np.ones((1, 1)), lm, 1)
    assert err.value.stage == "alpha-newton"
    assert err.value.partial is not None


@pytest.fixture(scope="module")
def ou_run():
    rm = OU
    n, h = 50_000, 50_000 ** -0.7
    obs = simulate_path(SimulationConfig(rm.spec, [1.0], [1.0], [0.0], n, h, 1e-3 * np.eye(1), seed=3))
    tun = TuningConfig(n=n, h=h)
    mc = McmcConfig(n_iters=1500, burn_in=300, seed=1)
    spaces = (rm.alpha_space, rm.beta_space)
    return obs, tun, mc, spaces


def test_pipeline_is_deterministic_and_serialises(ou_run, tmp_path):
    obs, tun, mc, spaces = ou_run
    a = hybrid_estimate(obs, OU.spec, spaces, tun, mc, mc)
    b = hybrid_estimate(obs, OU.spec, spaces, tun, mc, mc)
    da, db = a.to_dict(), b.to_dict()
    da.pop("timings"), db.pop("timings")
    assert da == db
    doc = json.loads(a.write_json(tmp_path / "r.json").read_text())
    assert doc["J1"] == compute_J1(tun) == 1 and doc["J2"] == compute_J2(tun) == 1
    assert len(doc["alpha_trace"]["iterates"]) == 2
    assert set(a.timings) == {"schedule", "noise-variance", "alpha-init", "alpha-newton",
                              "beta-init", "beta-newton"}
    assert abs(a.alpha_hat[0] - 1.0) < 0.1


def test_pipeline_stage_error_has_partial_result(ou_run):
    obs, tun, mc, spaces = ou_run
    dead = ModelSpec(d=1, r=1, m1=1, m2=1, drift=OU.spec.drift,
                     diffusion=lambda x, a: np.full(np.shape(x)[:-1] + (1, 1), np.nan))
    with pytest.raises(StageError) as err:
        hybrid_estimate(obs, dead, spaces, tun, mc, mc)
    assert err.value.stage == "alpha-init"
    part = err.value.partial
    assert np.all(np.isfinite(part.lambda_hat.lambda_hat))
    assert part.alpha_trace is None
