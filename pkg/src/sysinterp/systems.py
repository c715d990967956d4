"""Linear time-invariant models, discrete and piecewise-polynomial signals, and
simulation oracles for both time domains."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from ._validation import check_matrix, check_sequence, check_vector
from .exceptions import InvalidArgumentError
from .legendre import QuadratureScheme, basis_matrix

DEFAULT_STEPS_PER_SEGMENT = 256


@dataclass(frozen=True)
class CtLti:
    """Continuous-time pair ``dx/dt = A_c x + B_c u``."""

    A_c: np.ndarray
    B_c: np.ndarray

    def __post_init__(self):
        A = check_matrix(self.A_c, "A_c")
        if A.shape[0] != A.shape[1]:
            raise InvalidArgumentError(f"A_c must be square, got {A.shape}")
        B = check_matrix(self.B_c, "B_c", shape=(A.shape[0], None))
        object.__setattr__(self, "A_c", A)
        object.__setattr__(self, "B_c", B)

    @property
    def n(self):
        return self.A_c.shape[0]

    @property
    def m(self):
        return self.B_c.shape[1]


@dataclass(frozen=True)
class DtLti:
    """Discrete-time pair ``x(i+1) = A_d x(i) + B_d u(i)``."""

    A_d: np.ndarray
    B_d: np.ndarray

    def __post_init__(self):
        A = check_matrix(self.A_d, "A_d")
        if A.shape[0] != A.shape[1]:
            raise InvalidArgumentError(f"A_d must be square, got {A.shape}")
        B = check_matrix(self.B_d, "B_d", shape=(A.shape[0], None))
        object.__setattr__(self, "A_d", A)
        object.__setattr__(self, "B_d", B)

    @property
    def n(self):
        return self.A_d.shape[0]

    @property
    def m(self):
        return self.B_d.shape[1]


def _check_pair(ct, dt):
    if ct.n != dt.n or ct.m != dt.m:
        raise InvalidArgumentError(
            f"system dimensions differ: continuous (n={ct.n}, m={ct.m}), "
            f"discrete (n={dt.n}, m={dt.m})"
        )


@dataclass(frozen=True)
class DiscreteSignal:
    """Values ``s(0), ..., s(ell)`` stored as an ``(ell + 1, p)`` array."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", check_sequence(self.values, "values"))

    @property
    def horizon_ell(self):
        return self.values.shape[0] - 1

    @property
    def dim(self):
        return self.values.shape[1]

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class PiecewisePolySignal:
    """Continuous signal on ``[0, ell * tau]``, polynomial of degree ``<= N`` per segment.

    ``segment_values[i, j]`` is the value at local time ``scheme.nodes[j]`` of segment ``i``.
    """

    scheme: QuadratureScheme
    segment_values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.segment_values, dtype=float)
        if vals.ndim == 2:
            vals = vals[:, :, None]
        if vals.ndim != 3 or vals.shape[1] != self.scheme.N + 1 or vals.shape[0] < 1:
            raise InvalidArgumentError(
                f"segment_values must have shape (ell, {self.scheme.N + 1}, p), got {vals.shape}"
            )
        object.__setattr__(self, "segment_values", vals)

    @property
    def horizon_ell(self):
        return self.segment_values.shape[0]

    @property
    def dim(self):
        return self.segment_values.shape[2]

    @property
    def duration(self):
        return self.horizon_ell * self.scheme.tau

    def segment_at(self, i, local_t):
        """Evaluate segment ``i`` at local times in ``[0, tau]``; returns ``(k, p)``."""
        return basis_matrix(self.scheme, local_t) @ self.segment_values[i]

    def __call__(self, t):
        return eval_signal(self, t)


def _locate(sig, t):
    tau, ell = sig.scheme.tau, sig.horizon_ell
    t = np.atleast_1d(np.asarray(t, dtype=float))
    end = ell * tau
    slack = 1e-12 * max(1.0, end)
    if np.any(t < -slack) or np.any(t > end + slack):
        raise InvalidArgumentError(f"time outside signal domain [0, {end}]")
    seg = np.clip(np.floor(t / tau).astype(int), 0, ell - 1)
    local = np.clip(t - seg * tau, 0.0, tau)
    return seg, local


def eval_signal(sig, t):
    """Evaluate a piecewise-polynomial signal.

    A breakpoint ``t = i * tau`` with ``i < ell`` is evaluated on segment ``i`` at local
    time 0; ``t = ell * tau`` uses the last segment at local time ``tau``.
    Returns a ``(p,)`` vector for scalar ``t`` and ``(k, p)`` for an array.
    """
    scalar = np.ndim(t) == 0
    seg, local = _locate(sig, t)
    out = np.empty((seg.size, sig.dim))
    for i in np.unique(seg):
        mask = seg == i
        out[mask] = sig.segment_at(i, local[mask])
    return out[0] if scalar else out


def dt_simulate(sys, x0, u_d):
    """Run the discrete recursion over the horizon of ``u_d``; returns ``x(0..ell)``."""
    x0 = check_vector(x0, "x0", sys.n)
    if not isinstance(u_d, DiscreteSignal):
        u_d = DiscreteSignal(u_d)
    if u_d.dim != sys.m:
        raise InvalidArgumentError(f"input dimension {u_d.dim} != m={sys.m}")
    if u_d.horizon_ell < 1:
        raise InvalidArgumentError("input horizon must be at least 1")
    xs = np.empty((u_d.horizon_ell + 1, sys.n))
    xs[0] = x0
    for i in range(u_d.horizon_ell):
        xs[i + 1] = sys.A_d @ xs[i] + sys.B_d @ u_d[i]
    return DiscreteSignal(xs)


@dataclass(frozen=True)
class Trajectory:
    """Sampled continuous-time trajectory; ``breakpoints[i]`` indexes time ``i * tau``."""

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    breakpoints: np.ndarray = field(repr=False)

    def at_breakpoints(self):
        return self.states[self.breakpoints]


def ct_simulate(sys, x0, u_c, steps_per_segment=DEFAULT_STEPS_PER_SEGMENT):
    """Classical fixed-step RK4 integration of ``dx/dt = A_c x + B_c u_c(t)``.

    The input is evaluated on the segment being integrated (never across a
    breakpoint), so each step sees a single polynomial.
    """
    x0 = check_vector(x0, "x0", sys.n)
    if u_c.dim != sys.m:
        raise InvalidArgumentError(f"input dimension {u_c.dim} != m={sys.m}")
    if int(steps_per_segment) < 1:
        raise InvalidArgumentError("steps_per_segment must be >= 1")
    K = int(steps_per_segment)
    tau, ell = u_c.scheme.tau, u_c.horizon_ell
    h = tau / K
    A, B = sys.A_c, sys.B_c

    local = np.linspace(0.0, tau, 2 * K + 1)  # sub-step grid incl. RK4 midpoints
    states = np.empty((ell * K + 1, sys.n))
    inputs = np.empty((ell * K + 1, sys.m))
    states[0] = x0
    x = x0.copy()
    for i in range(ell):
        u = u_c.segment_at(i, local)
        Bu = u @ B.T
        for k in range(K):
            b0, bh, b1 = Bu[2 * k], Bu[2 * k + 1], Bu[2 * k + 2]
            k1 = A @ x + b0
            k2 = A @ (x + 0.5 * h * k1) + bh
            k3 = A @ (x + 0.5 * h * k2) + bh
            k4 = A @ (x + h * k3) + b1
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            states[i * K + k + 1] = x
        inputs[i * K : (i + 1) * K] = u[0 : 2 * K : 2]
    inputs[-1] = u_c.segment_at(ell - 1, [tau])[0]
    times = np.concatenate([i * tau + local[0 : 2 * K : 2] for i in range(ell)] + [[ell * tau]])
    return Trajectory(times=times, states=states, inputs=inputs, breakpoints=np.arange(ell + 1) * K)


@dataclass(frozen=True)
class InterpolationCheck:
    holds: bool
    max_error: float
    failures: tuple

    def __bool__(self):
        return self.holds


def is_interpolation(s_c, s_d, tol=None):
    """Check that ``s_c`` matches ``s_d`` at both ends of every segment.

    The polynomial-per-segment requirement holds by construction of
    :class:`PiecewisePolySignal`.
    """
    if not isinstance(s_d, DiscreteSignal):
        s_d = DiscreteSignal(s_d)
    if s_c.dim != s_d.dim or s_c.horizon_ell != s_d.horizon_ell:
        raise InvalidArgumentError(
            f"signal mismatch: continuous (ell={s_c.horizon_ell}, p={s_c.dim}), "
            f"discrete (ell={s_d.horizon_ell}, p={s_d.dim})"
        )
    tol = get_tolerances().interpolation if tol is None else tol
    tau = s_c.scheme.tau
    failures = []
    worst = 0.0
    for i in range(s_c.horizon_ell):
        ends = s_c.segment_at(i, [0.0, tau])
        for side, value, target in ((i, ends[0], s_d[i]), (i + 1, ends[1], s_d[i + 1])):
            err = float(np.linalg.norm(value - target))
            worst = max(worst, err)
            if err > tol * (1.0 + np.linalg.norm(target)):
                failures.append((i, side, err))
    return InterpolationCheck(holds=not failures, max_error=worst, failures=tuple(failures))


# --- file formats -----------------------------------------------------------------


def system_to_dict(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    return {
        "schema_version": 1,
        "n": A.shape[0],
        "m": B.shape[1],
        "A": A.ravel().tolist(),
        "B": B.ravel().tolist(),
    }


def _matrices_from_dict(data):
    try:
        n, m = int(data["n"]), int(data["m"])
        A = np.asarray(data["A"], dtype=float).reshape(n, n)
        B = np.asarray(data["B"], dtype=float).reshape(n, m)
    except (KeyError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed system file: {exc}") from exc
    return A, B


def load_ct(path):
    with open(path) as fh:
        return CtLti(*_matrices_from_dict(json.load(fh)))


def load_dt(path):
    with open(path) as fh:
        return DtLti(*_matrices_from_dict(json.load(fh)))


def save_system(path, A, B):
    with open(path, "w") as fh:
        json.dump(system_to_dict(A, B), fh, indent=2)


def _fmt(x):
    return f"{x:.17g}"


def write_signal_csv(path, times, columns):
    """Write ``time`` plus named columns; ``columns`` maps header prefix to ``(k, p)`` arrays."""
    header = ["time"]
    blocks = []
    for prefix, arr in columns.items():
        arr = np.asarray(arr, dtype=float).reshape(len(times), -1)
        header += [f"{prefix}_{j + 1}" for j in range(arr.shape[1])]
        blocks.append(arr)
    data = np.column_stack([np.asarray(times, dtype=float)] + blocks)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows([[_fmt(v) for v in row] for row in data])


def write_discrete_csv(path, signal, prefix="u"):
    vals = signal.values if isinstance(signal, DiscreteSignal) else np.asarray(signal, dtype=float)
    vals = np.asarray(vals).reshape(len(vals), -1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step"] + [f"{prefix}_{j + 1}" for j in range(vals.shape[1])])
        for i, row in enumerate(vals):
            writer.writerow([i] + [_fmt(v) for v in row])


def read_csv(path):
    """Return ``(header, float array)`` for a CSV written by this module."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in row] for row in rows[1:]])


def read_discrete_csv(path):
    header, data = read_csv(path)
    if header[0] != "step":
        raise InvalidArgumentError(f"{path}: expected a 'step' column first")
    return DiscreteSignal(data[:, 1:])
