"""Deciding whether a continuous-time system interpolates a discrete-time one, and
building the continuous inputs that realise the interpolation."""

import warnings
from dataclasses import dataclass

import numpy as np

from ._config import get_tolerances
from ._validation import check_vector
from .bounds import weight_diagonal
from .exceptions import InconsistentSystemError, InvalidArgumentError, NumericalFailureError
from .legendre import build_operator_set
from .systems import (
    DiscreteSignal,
    PiecewisePolySignal,
    _check_pair,
    dt_simulate,
    is_interpolation,
)

MIN_NORM = "min-norm"
DELTA_MIN = "delta-min"
MODES = (MIN_NORM, DELTA_MIN)
DELTA_RCOND = 1e-10


class NearInconsistentWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class InclusionReport:
    """Outcome of the image-inclusion test.

    ``worst_column`` indexes the column of the left block (ordered as
    ``x0`` components, then ``u_d(0)``, then ``u_d(1)``) furthest from the
    right block's image; ``worst_label`` names it.
    """

    holds: bool
    relative_residual: float
    rank_lhs_augmented: int
    rank_rhs: int
    rank_agrees: bool
    worst_column: int
    worst_label: str

    def to_dict(self):
        return {
            "holds": self.holds,
            "residual": self.relative_residual,
            "rank_augmented": self.rank_lhs_augmented,
            "rank_rhs": self.rank_rhs,
            "rank_agrees": self.rank_agrees,
            "worst_column": self.worst_column,
            "worst_label": self.worst_label,
        }


@dataclass(frozen=True)
class SegmentSolution:
    """Node values ``X`` (``n x N``) and ``U`` (``m x N``) of one segment."""

    X: np.ndarray
    U: np.ndarray
    residual: float
    mode: str
    null_dim: int = 0
    near_inconsistent: bool = False

    @property
    def stacked(self):
        """``[vec(X); vec(U)]`` with column-major vectorisation."""
        return np.concatenate([self.X.ravel(order="F"), self.U.ravel(order="F")])


def operator_matrix(ct, ops):
    """Right block of the inclusion (the matrix acting on ``[vec X; vec U]``)."""
    n, m, N = ct.n, ct.m, ops.N
    In, Im, IN = np.eye(n), np.eye(m), np.eye(N)
    row_psi0 = np.hstack([np.kron(ops.psi0[None, :], In), np.zeros((n, m * N))])
    row_dyn = np.hstack([np.kron(ops.Psi.T, In) - np.kron(IN, ct.A_c), -np.kron(IN, ct.B_c)])
    row_x_end = np.hstack([np.kron(ops.phi_tau[None, :], In), np.zeros((n, m * N))])
    row_u_end = np.hstack([np.zeros((m, n * N)), np.kron(ops.phi_tau[None, :], Im)])
    return np.vstack([row_psi0, row_dyn, row_x_end, row_u_end])


def parameter_matrix(ct, ops, A_d=None, B_d=None):
    """Left block of the inclusion, acting on ``[x0; u_d(0); u_d(1)]``.

    With ``A_d``/``B_d`` omitted, their entries are left at zero.
    """
    n, m, N = ct.n, ct.m, ops.N
    In, Im = np.eye(n), np.eye(m)
    A_d = np.zeros((n, n)) if A_d is None else A_d
    B_d = np.zeros((n, m)) if B_d is None else B_d
    return np.vstack(
        [
            np.hstack([ct.A_c - ops.dphi0_at_0 * In, ct.B_c, np.zeros((n, m))]),
            np.hstack([-np.kron(ops.sigma[:, None], In), np.zeros((n * N, 2 * m))]),
            np.hstack([A_d - ops.phi0_at_tau * In, B_d, np.zeros((n, m))]),
            np.hstack([np.zeros((m, n)), -ops.phi0_at_tau * Im, Im]),
        ]
    )


def build_inclusion_matrices(ct, dt, ops):
    """Return ``(L, R)``: the left (parameter) and right (operator) blocks.

    ``L`` is ``(2n + nN + m) x (n + 2m)`` and ``R`` is ``(2n + nN + m) x (nN + mN)``.
    """
    _check_pair(ct, dt)
    return parameter_matrix(ct, ops, dt.A_d, dt.B_d), operator_matrix(ct, ops)


def _column_labels(n, m):
    return (
        [f"x0[{k}]" for k in range(n)]
        + [f"u_d(0)[{k}]" for k in range(m)]
        + [f"u_d(1)[{k}]" for k in range(m)]
    )


def _rank(M, rel):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > s[0] * max(M.shape) * rel))


def check_interpolator(ct, dt, scheme, tol=None, rank_tol=None):
    """Decide whether ``ct`` is an ``N``-th order interpolator of ``dt``.

    The inclusion ``Im L ⊂ Im R`` is tested through the residual of projecting
    ``L`` onto the range of ``R``; a rank comparison serves as a cross-check.
    """
    tols = get_tolerances()
    tol = tols.inclusion if tol is None else tol
    rank_tol = tols.rank if rank_tol is None else rank_tol
    L, R = build_inclusion_matrices(ct, dt, build_operator_set(scheme))

    try:
        U, s, _ = np.linalg.svd(R, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD failed: {exc}") from exc
    r = int(np.sum(s > s[0] * max(R.shape) * rank_tol)) if s.size and s[0] > 0 else 0
    Ur = U[:, :r]
    residual_cols = L - Ur @ (Ur.T @ L)
    rel = np.linalg.norm(residual_cols) / max(1.0, np.linalg.norm(L))
    col_norms = np.linalg.norm(residual_cols, axis=0)
    worst = int(np.argmax(col_norms))

    rank_aug = _rank(np.hstack([R, L]), rank_tol)
    holds = bool(rel <= tol)
    return InclusionReport(
        holds=holds,
        relative_residual=float(rel),
        rank_lhs_augmented=rank_aug,
        rank_rhs=r,
        rank_agrees=(rank_aug == r) == holds,
        worst_column=worst,
        worst_label=_column_labels(ct.n, ct.m)[worst],
    )


def _delta_factor(ct, scheme):
    # Delta = S^T S with S = sqrt(W) [I (x) A_c, I (x) B_c]
    N = scheme.N
    F = np.hstack([np.kron(np.eye(N), ct.A_c), np.kron(np.eye(N), ct.B_c)])
    sqrt_w = np.sqrt(np.repeat(weight_diagonal(scheme), ct.n))
    return sqrt_w[:, None] * F


def segment_rhs(ct, dt, ops, x_i, u_i, u_ip1):
    L = parameter_matrix(ct, ops, dt.A_d, dt.B_d)
    return L @ np.concatenate([x_i, u_i, u_ip1])


def solve_segment(ct, dt, ops, x_i, u_i, u_ip1, mode=MIN_NORM, scheme=None):
    """Solve the per-segment linear system for the interior node values.

    Parameters
    ----------
    mode : {"min-norm", "delta-min"}
        ``"min-norm"`` returns the minimum Euclidean norm solution;
        ``"delta-min"`` minimises the Delta-seminorm that drives the inter-sample
        bound, subject to the same equations, and needs ``scheme``.

    Raises
    ------
    InconsistentSystemError
        If the relative residual exceeds the segment error tolerance.
    """
    _check_pair(ct, dt)
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    n, m, N = ct.n, ct.m, ops.N
    x_i = check_vector(x_i, "x_i", n)
    u_i = check_vector(u_i, "u_i", m)
    u_ip1 = check_vector(u_ip1, "u_ip1", m)

    Q = operator_matrix(ct, ops)
    b = segment_rhs(ct, dt, ops, x_i, u_i, u_ip1)
    _, s, Vt = np.linalg.svd(Q)
    rank_q = int(np.sum(s > s[0] * max(Q.shape) * 1e-12)) if s.size and s[0] > 0 else 0
    z = np.linalg.pinv(Q, rcond=max(Q.shape) * 1e-12) @ b
    null_dim = Q.shape[1] - rank_q

    if mode == DELTA_MIN and null_dim > 0:
        if scheme is None:
            raise InvalidArgumentError("delta-min mode needs the quadrature scheme")
        # minimise |S (z + Z y)| over the null space Z of Q
        S = _delta_factor(ct, scheme)
        Z = Vt[rank_q:].T
        # S Z is often rank deficient (or numerically zero); singular values are cut
        # relative to |S| so round-off directions cannot produce huge null-space steps
        Us, ss, Vts = np.linalg.svd(S @ Z, full_matrices=False)
        keep = ss > DELTA_RCOND * max(1.0, np.linalg.norm(S, 2))
        y = Vts[keep].T @ ((Us[:, keep].T @ -(S @ z)) / ss[keep])
        z = z + Z @ y

    scale = 1.0 + np.linalg.norm(b)
    residual = float(np.linalg.norm(Q @ z - b) / scale)
    tols = get_tolerances()
    if residual > tols.segment_error:
        raise InconsistentSystemError(
            f"segment system inconsistent (relative residual {residual:.3e}); "
            "the continuous system does not interpolate the discrete one"
        )
    near = residual > tols.inclusion
    if near:
        warnings.warn(
            f"segment residual {residual:.3e} above {tols.inclusion:g}", NearInconsistentWarning
        )
    X = z[: n * N].reshape((n, N), order="F")
    U = z[n * N :].reshape((m, N), order="F")
    return SegmentSolution(X=X, U=U, residual=residual, mode=mode, null_dim=int(null_dim),
                           near_inconsistent=bool(near))


@dataclass(frozen=True)
class Synthesis:
    """Result of building an interpolating input for a discrete input sequence."""

    u_c: PiecewisePolySignal
    x_pred: PiecewisePolySignal
    x_d: DiscreteSignal
    u_d: DiscreteSignal
    segments: tuple

    def __iter__(self):
        # allows ``u_c, x_pred = build_interpolating_input(...)``
        return iter((self.u_c, self.x_pred))


def build_interpolating_input(ct, dt, scheme, x0, u_d, mode=MIN_NORM):
    """Construct ``u_c`` and the predicted state, segment by segment.

    On segment ``i`` the input's node values are ``[u_d(i), U^i_1..U^i_N]`` and the
    state's are ``[x_d(i), X^i_1..X^i_N]``.
    """
    _check_pair(ct, dt)
    if not isinstance(u_d, DiscreteSignal):
        u_d = DiscreteSignal(np.asarray(u_d, dtype=float).reshape(-1, ct.m))
    x_d = dt_simulate(dt, x0, u_d)
    ops = build_operator_set(scheme)
    ell, N = u_d.horizon_ell, scheme.N
    u_nodes = np.empty((ell, N + 1, ct.m))
    x_nodes = np.empty((ell, N + 1, ct.n))
    segments = []
    for i in range(ell):
        sol = solve_segment(ct, dt, ops, x_d[i], u_d[i], u_d[i + 1], mode=mode, scheme=scheme)
        segments.append(sol)
        u_nodes[i, 0], u_nodes[i, 1:] = u_d[i], sol.U.T
        x_nodes[i, 0], x_nodes[i, 1:] = x_d[i], sol.X.T
    return Synthesis(
        u_c=PiecewisePolySignal(scheme, u_nodes),
        x_pred=PiecewisePolySignal(scheme, x_nodes),
        x_d=x_d,
        u_d=u_d,
        segments=tuple(segments),
    )


def verify_input_membership(ct, dt, scheme, x0, u_d, u_c, tol=1e-6):
    """Check that ``u_c`` belongs to the set of interpolating inputs for ``(x0, u_d)``.

    ``u_c`` must interpolate ``u_d``, and on each segment there must exist state node
    values ``X`` such that ``(X, U)`` solves the segment system, where ``U`` are the
    interior node values of ``u_c``. ``X`` is recovered by least squares.
    """
    _check_pair(ct, dt)
    if not isinstance(u_d, DiscreteSignal):
        u_d = DiscreteSignal(np.asarray(u_d, dtype=float).reshape(-1, ct.m))
    if u_c.dim != ct.m or u_c.horizon_ell != u_d.horizon_ell:
        raise InvalidArgumentError("u_c does not match u_d in dimension or horizon")
    if not is_interpolation(u_c, u_d):
        return False
    ops = build_operator_set(scheme)
    Q = operator_matrix(ct, ops)
    n, N = ct.n, scheme.N
    x_d = dt_simulate(dt, x0, u_d)
    for i in range(u_d.horizon_ell):
        b = segment_rhs(ct, dt, ops, x_d[i], u_d[i], u_d[i + 1])
        vec_u = u_c.segment_values[i, 1:].T.ravel(order="F")
        Qx, Qu = Q[:, : n * N], Q[:, n * N :]
        target = b - Qu @ vec_u
        vec_x, *_ = np.linalg.lstsq(Qx, target, rcond=None)
        if np.linalg.norm(Qx @ vec_x - target) > tol * (1.0 + np.linalg.norm(b)):
            return False
    return True
