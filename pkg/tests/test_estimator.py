import numpy as np
import pytest
from sklearn.base import clone

from adastep.environments.drift import DriftEnvironment, DriftModel
from adastep.estimator import AdaptiveRateLearner


def _drift_env(f=(1.0, -1.0, 2.0), sigma=0.2):
    return DriftEnvironment(DriftModel(f=list(f), noise_sigma=sigma))


def test_get_params_round_trip():
    est = AdaptiveRateLearner(algo="saga", gamma=0.25, saga_m=7)
    params = est.get_params()
    assert params["algo"] == "saga"
    assert params["gamma"] == 0.25
    rebuilt = AdaptiveRateLearner(**params)
    assert rebuilt.get_params() == params


def test_clone_preserves_configuration():
    est = AdaptiveRateLearner(algo="pass", policy="optimal", gamma=0.1)
    dup = clone(est)
    assert dup.get_params() == est.get_params()


def test_set_params_chains():
    est = AdaptiveRateLearner().set_params(algo="rl", policy="inv", alpha=0.7)
    assert est.algo == "rl" and est.policy == "inv" and est.alpha == 0.7


def test_fit_predict_on_drift():
    env = _drift_env()
    est = AdaptiveRateLearner(algo="pass", policy="pc", gamma=0.5,
                              episodes=400, random_state=1)
    est.fit(env)
    assert np.allclose(est.predict(), env.model.f, atol=0.15)
    assert est.predict([0]).shape == (1,)
    assert est.score(env) > -0.15


def test_unknown_algo_rejected_at_setup():
    est = AdaptiveRateLearner(algo="sgd")
    with pytest.raises(ValueError):
        est.fit(_drift_env())


def test_identical_random_state_reproduces_table():
    env1, env2 = _drift_env(), _drift_env()
    a = AdaptiveRateLearner(algo="saga", policy="pc", episodes=100,
                            random_state=42).fit(env1)
    b = AdaptiveRateLearner(algo="saga", policy="pc", episodes=100,
                            random_state=42).fit(env2)
    assert np.array_equal(a.values_, b.values_)


def test_optimal_policy_runs_and_learns():
    env = _drift_env(sigma=0.3)
    est = AdaptiveRateLearner(algo="rl", policy="optimal", episodes=600,
                              random_state=3)
    est.fit(env)
    assert np.allclose(est.values_, env.model.f, atol=0.25)


def test_optimal_policy_with_sign_search():
    env = _drift_env(sigma=0.3)
    est = AdaptiveRateLearner(algo="pass", policy="optimal", episodes=600,
                              random_state=4)
    est.fit(env)
    assert np.allclose(est.values_, env.model.f, atol=0.25)


def test_vector_learner_through_estimator():
    env = _drift_env(sigma=0.0)
    est = AdaptiveRateLearner(algo="pass_vec", policy="constant", gamma=1.0,
                              episodes=1, random_state=0)
    est.fit(env)
    assert np.allclose(est.values_, env.model.f)
