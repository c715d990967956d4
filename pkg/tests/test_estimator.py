import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import oracles
from sysinterp import InterpolatingDiscretizer
from sysinterp.exceptions import InvalidArgumentError, NoInterpolatingModelError
from sysinterp.systems import is_interpolation


def test_params_round_trip_and_clone():
    est = InterpolatingDiscretizer(tau=0.1, degree=4, mode="delta-min")
    assert est.get_params() == {"tau": 0.1, "degree": 4, "mode": "delta-min", "x0": None}
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(degree=6)
    assert est.degree == 6


def test_fit_discretizes_double_integrator():
    est = InterpolatingDiscretizer().fit(*oracles.DOUBLE_INTEGRATOR)
    assert est.free_dims_ == 6 and est.residual_ < 1e-12
    assert est.inclusion_.holds
    assert est.A_d_.shape == (2, 2) and est.B_d_.shape == (2, 1)
    assert est.n_features_in_ == 1


def test_fit_with_given_model():
    est = InterpolatingDiscretizer().fit(*oracles.DOUBLE_INTEGRATOR, oracles.REFERENCE_A_D, oracles.REFERENCE_B_D)
    np.testing.assert_array_equal(est.A_d_, oracles.REFERENCE_A_D)
    assert est.free_dims_ is None and est.residual_ < 1e-12


def test_fit_rejects_non_interpolated_model():
    est = InterpolatingDiscretizer(degree=3)
    with pytest.raises(NoInterpolatingModelError):
        est.fit(*oracles.DOUBLE_INTEGRATOR, np.eye(2), np.zeros((2, 1)))
    with pytest.raises(InvalidArgumentError):
        InterpolatingDiscretizer().fit(*oracles.DOUBLE_INTEGRATOR, np.eye(2))
    with pytest.raises(InvalidArgumentError):
        InterpolatingDiscretizer(mode="exact").fit(*oracles.DOUBLE_INTEGRATOR)
    with pytest.raises(InvalidArgumentError):
        InterpolatingDiscretizer(tau=-1).fit(*oracles.DOUBLE_INTEGRATOR)


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        InterpolatingDiscretizer().transform(np.zeros((3, 1)))


def test_transform_predict_shapes_and_consistency(rng):
    est = InterpolatingDiscretizer(x0=[0.5, 0.0]).fit(*oracles.DOUBLE_INTEGRATOR, oracles.REFERENCE_A_D, oracles.REFERENCE_B_D)
    u_d = rng.normal(size=(5, 1))
    U = est.transform(u_d)
    X = est.predict(u_d)
    assert U.shape == (4, 6, 1) and X.shape == (4, 6, 2)
    syn = est.synthesize(u_d)
    assert is_interpolation(syn.x_pred, syn.x_d)
    traj = est.simulate(u_d)
    np.testing.assert_allclose(traj.at_breakpoints(), syn.x_d.values, atol=1e-6)
    with pytest.raises(InvalidArgumentError):
        est.transform(np.zeros((3, 2)))


def test_fit_transform_takes_system_then_sequence(rng):
    u_d = rng.normal(size=(3, 1))
    U = InterpolatingDiscretizer().fit_transform(*oracles.DOUBLE_INTEGRATOR, u_d)
    assert U.shape == (2, 6, 1)
    np.testing.assert_allclose(U[:, 0, 0], u_d[:2, 0])
