"""Interpolation-based discretization: find ``(A_d, B_d)`` such that a continuous
system is an ``N``-th order interpolator of the resulting discrete model."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._config import get_tolerances
from .exceptions import NoInterpolatingModelError
from .interpolation import operator_matrix, parameter_matrix
from .legendre import build_operator_set
from .systems import DtLti


@dataclass(frozen=True)
class DiscretizationProblem:
    """``Q M = R + T1 [A_d B_d] T2`` with unknowns ``M``, ``A_d`` and ``B_d``."""

    Q: np.ndarray
    R: np.ndarray
    T1: np.ndarray
    T2: np.ndarray

    @property
    def n(self):
        return self.T1.shape[1]

    @property
    def m(self):
        return self.T2.shape[0] - self.n

    def system_matrix(self):
        """``[I ⊗ Q, -T2^T ⊗ T1]`` acting on ``[vec M; vec [A_d B_d]]``."""
        cols = self.R.shape[1]
        return np.hstack([np.kron(np.eye(cols), self.Q), -np.kron(self.T2.T, self.T1)])

    def residual(self, A_d, B_d):
        """Relative residual of the best ``M`` for a given ``(A_d, B_d)``."""
        target = self.R + self.T1 @ np.hstack([A_d, B_d]) @ self.T2
        M, *_ = np.linalg.lstsq(self.Q, target, rcond=None)
        return float(np.linalg.norm(self.Q @ M - target) / max(1.0, np.linalg.norm(target)))


def build_problem(ct, ops):
    n, m, N = ct.n, ct.m, ops.N
    Q = operator_matrix(ct, ops)
    R = parameter_matrix(ct, ops)
    T1 = np.zeros((2 * n + n * N + m, n))
    T1[n + n * N : 2 * n + n * N] = np.eye(n)
    T2 = np.hstack([np.eye(n + m), np.zeros((n + m, m))])
    return DiscretizationProblem(Q=Q, R=R, T1=T1, T2=T2)


@dataclass(frozen=True)
class DiscretizationResult:
    model: DtLti
    residual: float
    free_dims: int

    def __iter__(self):
        return iter((self.model, self.residual, self.free_dims))


def discretize(ct, scheme, tol=None, lapack_driver="gelsd"):
    """Compute a discrete model that ``ct`` interpolates for ``(tau, N)``.

    The vectorised linear equation is solved in the minimum-norm least-squares
    sense over ``(vec M, vec [A_d B_d])`` jointly.

    Returns
    -------
    DiscretizationResult
        Unpacks as ``(model, residual, free_dims)``; ``free_dims`` is the dimension
        of the set of admissible ``[A_d B_d]`` (0 means unique).

    Raises
    ------
    NoInterpolatingModelError
        If the relative residual exceeds ``tol``.
    """
    tol = get_tolerances().residual if tol is None else tol
    prob = build_problem(ct, build_operator_set(scheme))
    K = prob.system_matrix()
    rhs = prob.R.ravel(order="F")
    sol, *_ = scipy.linalg.lstsq(K, rhs, lapack_driver=lapack_driver)
    residual = float(np.linalg.norm(K @ sol - rhs) / max(1.0, np.linalg.norm(rhs)))
    if residual > tol:
        raise NoInterpolatingModelError(
            f"no discrete model interpolated by this system for tau={scheme.tau}, "
            f"N={scheme.N} (relative residual {residual:.3e})"
        )
    n, m = ct.n, ct.m
    n_v2 = n * (n + m)
    v2 = sol[-n_v2:]
    AB = v2.reshape((n, n + m), order="F")

    _, s, Vt = np.linalg.svd(K)
    rank = int(np.sum(s > s[0] * max(K.shape) * 1e-12))
    null_basis = Vt[rank:].T
    free_dims = int(np.linalg.matrix_rank(null_basis[-n_v2:], tol=1e-9)) if null_basis.size else 0

    return DiscretizationResult(model=DtLti(AB[:, :n], AB[:, n:]), residual=residual, free_dims=free_dims)
