"""scikit-learn style front end: fit a discrete model to a continuous system, then
transform discrete input sequences into interpolating continuous inputs."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from ._validation import check_degree, check_matrix, check_positive, check_vector
from .discretization import build_problem, discretize
from .exceptions import InvalidArgumentError, NoInterpolatingModelError
from .interpolation import MODES, build_interpolating_input, check_interpolator
from .legendre import build_operator_set, build_quadrature
from .systems import CtLti, DiscreteSignal, DtLti, ct_simulate


class InterpolatingDiscretizer(TransformerMixin, BaseEstimator):
    """Discretize ``dx/dt = A_c x + B_c u`` by system interpolation.

    Parameters
    ----------
    tau : float
        Sampling time.
    degree : int
        Polynomial degree ``N`` of each inter-sample segment.
    mode : {"min-norm", "delta-min"}
        How non-unique segment solutions are selected in :meth:`transform`.
    x0 : array-like or None
        Initial state used by :meth:`transform`; zeros when ``None``.

    Attributes
    ----------
    model_ : DtLti
        Discrete model interpolated by the continuous system.
    residual_ : float
        Relative residual of the discretization equation for ``model_``.
    free_dims_ : int or None
        Dimension of the set of admissible models (``None`` for a user model).
    inclusion_ : InclusionReport
    """

    def __init__(self, tau=0.2, degree=5, mode="min-norm", x0=None):
        self.tau = tau
        self.degree = degree
        self.mode = mode
        self.x0 = x0

    def _validate_params(self):
        check_positive(self.tau, "tau")
        check_degree(self.degree, "degree")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")

    def fit(self, A_c, B_c, A_d=None, B_d=None):
        """Compute ``model_``.

        When ``A_d`` and ``B_d`` are given they are checked instead of solved for;
        a pair that the continuous system does not interpolate raises
        :class:`NoInterpolatingModelError`.
        """
        self._validate_params()
        A_c = check_matrix(A_c, "A_c")
        B_c = check_matrix(B_c, "B_c", shape=(A_c.shape[0], None))
        self.system_ = CtLti(A_c, B_c)
        self.scheme_ = build_quadrature(self.tau, self.degree)

        if (A_d is None) != (B_d is None):
            raise InvalidArgumentError("pass both A_d and B_d, or neither")
        if A_d is None:
            result = discretize(self.system_, self.scheme_)
            self.model_, self.residual_, self.free_dims_ = result
        else:
            n, m = self.system_.n, self.system_.m
            self.model_ = DtLti(check_matrix(A_d, "A_d", (n, n)), check_matrix(B_d, "B_d", (n, m)))
            problem = build_problem(self.system_, build_operator_set(self.scheme_))
            self.residual_ = problem.residual(self.model_.A_d, self.model_.B_d)
            self.free_dims_ = None

        self.inclusion_ = check_interpolator(self.system_, self.model_, self.scheme_)
        if not self.inclusion_.holds:
            raise NoInterpolatingModelError(
                f"system is not an interpolator of the model "
                f"(residual {self.inclusion_.relative_residual:.3e})"
            )
        self.n_features_in_ = self.system_.m
        return self

    @property
    def A_d_(self):
        check_is_fitted(self, "model_")
        return self.model_.A_d

    @property
    def B_d_(self):
        check_is_fitted(self, "model_")
        return self.model_.B_d

    def _initial_state(self, x0):
        x0 = self.x0 if x0 is None else x0
        if x0 is None:
            return np.zeros(self.system_.n)
        return check_vector(x0, "x0", self.system_.n)

    def synthesize(self, X, x0=None):
        """Build the interpolating input for the discrete input sequence ``X``.

        ``X`` has shape ``(ell + 1, m)``; returns a :class:`~sysinterp.interpolation.Synthesis`.
        """
        check_is_fitted(self, "model_")
        u_d = np.asarray(X, dtype=float)
        if u_d.ndim == 1:
            u_d = u_d.reshape(-1, self.system_.m)
        if u_d.ndim != 2 or u_d.shape[1] != self.system_.m:
            raise InvalidArgumentError(f"X must have shape (ell + 1, {self.system_.m})")
        return build_interpolating_input(
            self.system_, self.model_, self.scheme_, self._initial_state(x0),
            DiscreteSignal(u_d), mode=self.mode,
        )

    def transform(self, X, x0=None):
        """Node values of the interpolating input, shape ``(ell, degree + 1, m)``."""
        return self.synthesize(X, x0).u_c.segment_values

    def fit_transform(self, A_c, B_c, X, x0=None):
        """Fit on ``(A_c, B_c)`` and transform the input sequence ``X``.

        The system matrices and the input sequence are different objects, so the
        mixin's ``fit(X).transform(X)`` pattern does not apply here.
        """
        return self.fit(A_c, B_c).transform(X, x0)

    def predict(self, X, x0=None):
        """Predicted state node values, shape ``(ell, degree + 1, n)``."""
        return self.synthesize(X, x0).x_pred.segment_values

    def simulate(self, X, x0=None, steps_per_segment=256):
        syn = self.synthesize(X, x0)
        return ct_simulate(self.system_, self._initial_state(x0), syn.u_c, steps_per_segment)

    def __sklearn_is_fitted__(self):
        return hasattr(self, "model_")


__all__ = ["InterpolatingDiscretizer", "NotFittedError"]
