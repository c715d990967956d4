"""Discrete-time planning for conjunctions of ``G``/``F`` atoms over linear predicates.

Each ``F`` atom is replaced by a witness step inside its window. For a fixed choice
of witnesses every constraint is linear in the stacked input sequence, so planning
reduces to a sequence of linear feasibility problems.
"""

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive, check_vector
from .exceptions import InvalidArgumentError, NumericalFailureError
from .systems import DiscreteSignal, dt_simulate

FEAS_TOL = 1e-9
MAX_PIVOTS = 10**6
DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class StlAtom:
    """``G`` or ``F`` over the step window ``[a, b]`` of ``gamma_vec . x + gamma_scalar >= 0``."""

    kind: str
    window: tuple
    gamma_vec: np.ndarray
    gamma_scalar: float

    def __post_init__(self):
        if self.kind not in ("G", "F"):
            raise InvalidArgumentError(f"atom kind must be 'G' or 'F', got {self.kind!r}")
        a, b = (int(w) for w in self.window)
        if not 0 <= a <= b:
            raise InvalidArgumentError(f"invalid window {self.window}")
        object.__setattr__(self, "window", (a, b))
        object.__setattr__(self, "gamma_vec", check_vector(self.gamma_vec, "gamma_vec"))
        object.__setattr__(self, "gamma_scalar", float(self.gamma_scalar))

    def score(self, x):
        return float(self.gamma_vec @ x + self.gamma_scalar)

    def steps(self):
        return range(self.window[0], self.window[1] + 1)


@dataclass(frozen=True)
class StlSpec:
    atoms: tuple
    horizon_ell: int
    input_bound: float = 200.0

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise InvalidArgumentError("specification needs at least one atom")
        for atom in atoms:
            if atom.window[1] > self.horizon_ell:
                raise InvalidArgumentError(
                    f"atom window {atom.window} exceeds horizon {self.horizon_ell}"
                )
        object.__setattr__(self, "atoms", atoms)
        check_positive(self.input_bound, "input_bound")


def atom_from_dict(d):
    return StlAtom(d["kind"], tuple(d["window"]), d["gamma_vec"], d["gamma_scalar"])


def atom_to_dict(atom):
    return {
        "kind": atom.kind,
        "window": list(atom.window),
        "gamma_vec": atom.gamma_vec.tolist(),
        "gamma_scalar": atom.gamma_scalar,
    }


def load_spec(path, horizon_ell, input_bound):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["atoms"]
    return StlSpec(tuple(atom_from_dict(d) for d in data), horizon_ell, input_bound)


def save_spec(path, spec):
    with open(path, "w") as fh:
        json.dump([atom_to_dict(a) for a in spec.atoms], fh, indent=2)


def at_most(index, value, n, horizon_ell):
    """``x[index] <= value`` over the whole horizon, as a ``G`` atom."""
    g = np.zeros(n)
    g[index] = -1.0
    return StlAtom("G", (0, horizon_ell), g, value)


def robot_spec(horizon_ell=10, input_bound=200.0):
    """Reach ``x1 <= -2`` in steps 1..4, ``x1 >= 2`` in 5..7, ``x1 <= -2`` in 8..10,
    and keep ``|x2| <= 15`` over 0..10 (double integrator robot)."""
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    atoms = (
        StlAtom("F", (1, 4), -e1, -2.0),
        StlAtom("F", (5, 7), e1, -2.0),
        StlAtom("F", (8, 10), -e1, -2.0),
        StlAtom("G", (0, 10), -e2, 15.0),
        StlAtom("G", (0, 10), e2, 15.0),
    )
    return StlSpec(atoms, horizon_ell, input_bound)


@dataclass(frozen=True)
class AtomResult:
    atom: StlAtom
    satisfied: bool
    robustness: float


@dataclass(frozen=True)
class SatisfactionReport:
    satisfied: bool
    atoms: tuple = field(default_factory=tuple)

    def __bool__(self):
        return self.satisfied


def dt_stl_satisfied(states, spec):
    """Evaluate every atom on a discrete state trajectory.

    ``robustness`` is the min (``G``) or max (``F``) of the predicate score over the window.
    """
    values = states.values if isinstance(states, DiscreteSignal) else np.asarray(states, dtype=float)
    if values.shape[0] - 1 < spec.horizon_ell:
        raise InvalidArgumentError(
            f"state horizon {values.shape[0] - 1} shorter than spec horizon {spec.horizon_ell}"
        )
    results = []
    for atom in spec.atoms:
        scores = [atom.score(values[i]) for i in atom.steps()]
        rob = min(scores) if atom.kind == "G" else max(scores)
        results.append(AtomResult(atom, rob >= 0.0, rob))
    return SatisfactionReport(all(r.satisfied for r in results), tuple(results))


# --- linear feasibility -------------------------------------------------------------


def _pivot(T, row, col):
    T[row] /= T[row, col]
    others = np.arange(T.shape[0]) != row
    T[others] -= np.outer(T[others, col], T[row])


def linear_feasibility(A_ineq, b_ineq, tol=FEAS_TOL, max_pivots=MAX_PIVOTS):
    """Find ``x`` with ``A_ineq @ x <= b_ineq`` by a dense phase-one simplex.

    Free variables are split as ``x = p - q``; rows with a negative right-hand
    side receive an artificial variable. Bland's rule prevents cycling.

    Returns
    -------
    numpy.ndarray or None
        A feasible point, or ``None`` when the phase-one optimum exceeds ``tol``.
    """
    A = np.atleast_2d(np.asarray(A_ineq, dtype=float))
    b = np.asarray(b_ineq, dtype=float).ravel()
    rows, nvar = A.shape
    if b.size != rows:
        raise InvalidArgumentError("A_ineq and b_ineq disagree in row count")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InvalidArgumentError("non-finite constraint data")
    if rows == 0:
        return np.zeros(nvar)

    sign = np.where(b < 0, -1.0, 1.0)
    neg = np.flatnonzero(b < 0)
    n_art = neg.size
    # columns: p (nvar), q (nvar), slack (rows), artificial (n_art), rhs
    ncol = 2 * nvar + rows + n_art
    T = np.zeros((rows + 1, ncol + 1))
    T[:rows, :nvar] = sign[:, None] * A
    T[:rows, nvar : 2 * nvar] = -sign[:, None] * A
    T[:rows, 2 * nvar : 2 * nvar + rows] = np.diag(sign)
    T[neg, 2 * nvar + rows + np.arange(n_art)] = 1.0
    T[:rows, -1] = sign * b
    basis = np.array([2 * nvar + r for r in range(rows)])
    basis[neg] = 2 * nvar + rows + np.arange(n_art)

    # objective row: minimise the sum of artificials, written in reduced-cost form
    T[-1, 2 * nvar + rows : ncol] = 1.0
    for r in neg:
        T[-1] -= T[r]

    eps = 1e-12
    for _ in range(max_pivots):
        reduced = T[-1, :ncol]
        candidates = np.flatnonzero(reduced < -eps)
        if candidates.size == 0:
            break
        col = candidates[0]
        column = T[:rows, col]
        positive = column > eps
        if not np.any(positive):
            # cannot happen in phase one: the objective is bounded below by zero
            raise NumericalFailureError("phase-one simplex reported an unbounded direction")
        ratios = np.full(rows, np.inf)
        ratios[positive] = T[:rows, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + eps * max(1.0, abs(best)))
        row = ties[np.argmin(basis[ties])]
        _pivot(T, row, col)
        basis[row] = col
    else:
        raise NumericalFailureError(f"simplex exceeded {max_pivots} pivots")

    if -T[-1, -1] > tol * max(1.0, np.abs(b).max()):
        return None
    z = np.zeros(ncol)
    z[basis] = T[:rows, -1]
    x = z[:nvar] - z[nvar : 2 * nvar]
    if np.max(A @ x - b, initial=0.0) > tol * max(1.0, np.abs(b).max()):
        return None
    return x


# --- planning ---------------------------------------------------------------------


def state_maps(dt, x0, ell):
    """Return ``(M, c)`` with ``x(i) = M[i] @ u_flat + c[i]``; ``u_flat`` stacks ``u(0..ell)``."""
    n, m = dt.n, dt.m
    M = np.zeros((ell + 1, n, (ell + 1) * m))
    c = np.zeros((ell + 1, n))
    c[0] = x0
    for i in range(ell):
        M[i + 1] = dt.A_d @ M[i]
        M[i + 1][:, i * m : (i + 1) * m] += dt.B_d
        c[i + 1] = dt.A_d @ c[i]
    return M, c


@dataclass(frozen=True)
class PlanResult:
    u_d: DiscreteSignal
    x_d: DiscreteSignal
    witnesses: tuple
    report: SatisfactionReport


def plan(dt, x0, spec, margin=DEFAULT_MARGIN):
    """Find ``u_d(0..ell)`` whose discrete trajectory satisfies ``spec``.

    Witness choices for the ``F`` atoms are tried in lexicographic order (earliest
    step first); predicates are imposed with a small positive ``margin`` so the
    returned trajectory satisfies them despite rounding. Returns ``None`` when no
    witness combination is feasible.
    """
    x0 = check_vector(x0, "x0", dt.n)
    ell, m = spec.horizon_ell, dt.m
    if ell < 1:
        raise InvalidArgumentError("horizon must be at least 1")
    M, c = state_maps(dt, x0, ell)
    nvar = (ell + 1) * m

    def rows_for(atom, step):
        # gamma . (M u + c) + gamma0 >= margin  <=>  -gamma M u <= gamma . c + gamma0 - margin
        return -(atom.gamma_vec @ M[step]), atom.gamma_vec @ c[step] + atom.gamma_scalar - margin

    base_A, base_b = [np.eye(nvar), -np.eye(nvar)], [np.full(nvar, spec.input_bound)] * 2
    for atom in spec.atoms:
        if atom.kind == "G":
            for step in atom.steps():
                a, rhs = rows_for(atom, step)
                base_A.append(a[None, :])
                base_b.append([rhs])
    base_A, base_b = np.vstack(base_A), np.concatenate(base_b)

    f_atoms = [a for a in spec.atoms if a.kind == "F"]
    for choice in itertools.product(*(list(a.steps()) for a in f_atoms)):
        extra = [rows_for(a, s) for a, s in zip(f_atoms, choice)]
        A_ineq = np.vstack([base_A] + [r[0][None, :] for r in extra])
        b_ineq = np.concatenate([base_b, [r[1] for r in extra]])
        u = linear_feasibility(A_ineq, b_ineq)
        if u is None:
            continue
        u_d = DiscreteSignal(u.reshape(ell + 1, m))
        x_d = dt_simulate(dt, x0, u_d)
        report = dt_stl_satisfied(x_d, spec)
        if report.satisfied:
            return PlanResult(u_d=u_d, x_d=x_d, witnesses=choice, report=report)
    return None


def sampled_stl_report(times, states, spec, tau):
    """Evaluate ``spec`` on a densely sampled continuous trace.

    Step windows ``[a, b]`` become time windows ``[a tau, b tau]``.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    slack = 1e-9 * tau
    results = []
    for atom in spec.atoms:
        a, b = atom.window
        mask = (times >= a * tau - slack) & (times <= b * tau + slack)
        scores = states[mask] @ atom.gamma_vec + atom.gamma_scalar
        rob = float(scores.min() if atom.kind == "G" else scores.max())
        results.append(AtomResult(atom, rob >= 0.0, rob))
    return SatisfactionReport(all(r.satisfied for r in results), tuple(results))
