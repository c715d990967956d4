"""Shifted Legendre polynomials, Gauss-Radau quadrature on ``[0, tau]`` and the
Lagrange basis built on the quadrature nodes.

The left endpoint ``t = 0`` is always a node. Polynomials of degree ``<= N`` are
represented by their values at the ``N + 1`` nodes, and the rule integrates
polynomials of degree ``<= 2N`` exactly.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from ._validation import check_degree, check_positive, check_sequence
from .exceptions import InvalidArgumentError, NumericalFailureError

NODE_RESIDUAL_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
MAX_NEWTON_ITER = 100


def legendre_standard(k, t):
    """Evaluate the Legendre polynomial of degree ``k`` at ``t`` (scalar or array).

    Uses the three-term recurrence ``(j+1) P_{j+1} = (2j+1) t P_j - j P_{j-1}``.
    """
    if k < 0:
        raise InvalidArgumentError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for j in range(1, k):
        p_prev, p = p, ((2 * j + 1) * t * p - j * p_prev) / (j + 1)
    return p if p.ndim else float(p)


def legendre_binomial(k, t):
    """Closed-form binomial sum for the Legendre polynomial; reliable for small ``k`` only."""
    if k < 0:
        raise InvalidArgumentError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for i in range(k // 2 + 1):
        total = total + (-1) ** i * comb(k, i) * comb(2 * k - 2 * i, k) * t ** (k - 2 * i)
    total = total / 2**k
    return total if total.ndim else float(total)


def _legendre_with_derivative(k, x):
    # returns P_k(x), P_k'(x) using P'_{j+1} = P'_{j-1} + (2j+1) P_j
    p_prev, p = 1.0, x
    d_prev, d = 0.0, 1.0
    if k == 0:
        return 1.0, 0.0
    for j in range(1, k):
        p_next = ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
        d_next = d_prev + (2 * j + 1) * p
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d


def legendre_shifted(k, tau, t):
    """Legendre polynomial of degree ``k`` shifted to the interval ``[0, tau]``."""
    tau = check_positive(tau, "tau")
    return legendre_standard(k, 2.0 * np.asarray(t, dtype=float) / tau - 1.0)


def _radau_interior_roots(N):
    """Interior roots in (-1, 1) of ``P_N + P_{N+1}``, sorted ascending."""

    def f(x):
        a, da = _legendre_with_derivative(N, x)
        b, db = _legendre_with_derivative(N + 1, x)
        return a + b, da + db

    grid = np.linspace(-1.0, 1.0, 16 * (N + 1) + 1)[1:]
    values = np.array([f(x)[0] for x in grid])
    guesses = -np.cos(2.0 * np.pi * np.arange(1, N + 1) / (2 * N + 1))

    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi > 0:
            continue
        inside = guesses[(guesses > lo) & (guesses < hi)]
        x = inside[0] if inside.size else 0.5 * (lo + hi)
        a, b, fa = lo, hi, flo
        for _ in range(MAX_NEWTON_ITER):
            fx, dfx = f(x)
            if fx == 0.0:
                break
            if fa * fx < 0:
                b = x
            else:
                a, fa = x, fx
            step = fx / dfx if dfx != 0 else np.inf
            x_new = x - step
            if not (a < x_new < b):
                x_new = 0.5 * (a + b)
            if abs(x_new - x) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
                x = x_new
                break
            x = x_new
        else:
            raise NumericalFailureError(
                f"Radau node iteration did not converge in [{lo}, {hi}] for N={N}"
            )
        roots.append(x)

    if len(roots) != N:
        raise NumericalFailureError(
            f"expected {N} interior Radau roots for N={N}, bracketed {len(roots)}"
        )
    return np.array(roots)


@dataclass(frozen=True)
class QuadratureScheme:
    """Gauss-Radau nodes and weights on ``[0, tau]`` for polynomial degree ``N``."""

    tau: float
    degree_N: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def N(self):
        return self.degree_N

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)


def build_quadrature(tau, N):
    """Construct the Gauss-Radau scheme with ``N + 1`` nodes on ``[0, tau]``.

    Parameters
    ----------
    tau : float
        Sampling time, the length of the interval.
    N : int
        Polynomial degree; the rule is exact up to degree ``2N``.

    Returns
    -------
    QuadratureScheme
        Node 0 is exactly ``0``; all nodes lie in ``[0, tau)``.
    """
    tau = check_positive(tau, "tau")
    N = check_degree(N)
    x = _radau_interior_roots(N)
    nodes = np.concatenate([[0.0], tau * (x + 1.0) / 2.0])

    weights = np.empty(N + 1)
    weights[0] = tau / (N + 1) ** 2
    leg_N = legendre_shifted(N, tau, nodes[1:])
    weights[1:] = (tau - nodes[1:]) / ((N + 1) ** 2 * leg_N**2)

    scheme = QuadratureScheme(tau=tau, degree_N=N, nodes=nodes, weights=weights)
    _assert_scheme(scheme)
    return scheme


def _assert_scheme(scheme):
    t, w, tau, N = scheme.nodes, scheme.weights, scheme.tau, scheme.N
    if not (t[0] == 0.0 and np.all(np.diff(t) > 0) and t[-1] < tau):
        raise NumericalFailureError(f"Radau nodes out of order: {t}")
    if abs(w.sum() - tau) > WEIGHT_SUM_TOL * tau * max(1, N):
        raise NumericalFailureError(f"Radau weights sum to {w.sum()}, expected {tau}")
    if np.any(w <= 0):
        raise NumericalFailureError("non-positive Radau weight")


def radau_integrate(scheme, values_at_nodes):
    """Quadrature sum ``sum_i values[i] * w_i`` (vector-valued samples allowed)."""
    vals = np.asarray(values_at_nodes, dtype=float)
    if vals.ndim == 0 or vals.shape[0] != scheme.N + 1:
        raise InvalidArgumentError(
            f"need {scheme.N + 1} samples, got {vals.shape[0] if vals.ndim else 0}"
        )
    out = np.tensordot(scheme.weights, vals, axes=(0, 0))
    return out if np.ndim(out) else float(out)


def poly_l2_norm(scheme, values_at_nodes):
    """L2 norm on ``[0, tau]`` of the degree-``<= N`` polynomial with the given node values."""
    vals = check_sequence(values_at_nodes, "values_at_nodes")
    if vals.shape[0] != scheme.N + 1:
        raise InvalidArgumentError(f"need {scheme.N + 1} samples, got {vals.shape[0]}")
    return float(np.sqrt(np.dot(scheme.weights, np.sum(vals**2, axis=1))))


def _check_index(scheme, i):
    if not 0 <= i <= scheme.N:
        raise InvalidArgumentError(f"node index {i} outside [0, {scheme.N}]")


def phi_eval(scheme, i, t):
    """Lagrange basis polynomial of node ``i`` evaluated at ``t`` (scalar or array)."""
    _check_index(scheme, i)
    nodes = scheme.nodes
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    for j, tj in enumerate(nodes):
        if j != i:
            out = out * (t - tj) / (nodes[i] - tj)
    return out if out.ndim else float(out)


def phi_deriv(scheme, i, t):
    """Time derivative of the Lagrange basis polynomial of node ``i`` by the product rule."""
    _check_index(scheme, i)
    nodes = scheme.nodes
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for l, tl in enumerate(nodes):
        if l == i:
            continue
        term = np.full_like(t, 1.0 / (nodes[i] - tl))
        for j, tj in enumerate(nodes):
            if j != i and j != l:
                term = term * (t - tj) / (nodes[i] - tj)
        total = total + term
    return total if total.ndim else float(total)


def basis_matrix(scheme, t):
    """Matrix ``B[k, i] = phi_i(t[k])`` for a vector of local times."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.stack([phi_eval(scheme, i, t) for i in range(scheme.N + 1)], axis=1)


@dataclass(frozen=True)
class OperatorSet:
    """Node-derived quantities entering the interpolation equations.

    ``phi_tau[i-1] = phi_i(tau)``, ``psi0[i-1] = phi_i'(0)``, ``Psi[i-1, j-1] = phi_i'(t_j)``
    and ``sigma[j-1] = phi_0'(t_j)`` for ``i, j = 1..N``.
    """

    phi_tau: np.ndarray
    psi0: np.ndarray
    Psi: np.ndarray
    sigma: np.ndarray
    phi0_at_tau: float
    dphi0_at_0: float

    @property
    def N(self):
        return self.phi_tau.shape[0]

    def __post_init__(self):
        for arr in (self.phi_tau, self.psi0, self.Psi, self.sigma):
            arr.setflags(write=False)


def build_operator_set(scheme):
    N, nodes, tau = scheme.N, scheme.nodes, scheme.tau
    phi_tau = np.array([phi_eval(scheme, i, tau) for i in range(1, N + 1)])
    # D[i, j] = phi_i'(t_j)
    D = np.array([phi_deriv(scheme, i, nodes) for i in range(N + 1)])
    return OperatorSet(
        phi_tau=phi_tau,
        psi0=D[1:, 0].copy(),
        Psi=D[1:, 1:].copy(),
        sigma=D[0, 1:].copy(),
        phi0_at_tau=float(phi_eval(scheme, 0, tau)),
        dphi0_at_0=float(D[0, 0]),
    )
