"""Regions, distances and inter-sample violation bounds."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_vector
from .exceptions import InvalidArgumentError, UnsupportedRegionError
from .legendre import legendre_shifted


@dataclass(frozen=True)
class Point:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", check_vector(self.point, "point"))

    @property
    def dim(self):
        return self.point.size


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = check_vector(self.lower, "lower")
        hi = check_vector(self.upper, "upper", lo.size)
        if np.any(lo > hi):
            raise InvalidArgumentError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size


@dataclass(frozen=True)
class HalfSpace:
    """The set ``{z : normal . z + offset >= 0}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        g = check_vector(self.normal, "normal")
        if not np.any(g):
            raise InvalidArgumentError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", g)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.size


Region = (Point, Box, HalfSpace)


def region_from_dict(data):
    kind = data.get("type")
    if kind == "point":
        return Point(data["point"])
    if kind == "box":
        return Box(data["lower"], data["upper"])
    if kind == "halfspace":
        return HalfSpace(data["normal"], data["offset"])
    raise InvalidArgumentError(f"unknown region type {kind!r}")


def region_to_dict(region):
    if isinstance(region, Point):
        return {"type": "point", "point": region.point.tolist()}
    if isinstance(region, Box):
        return {"type": "box", "lower": region.lower.tolist(), "upper": region.upper.tolist()}
    return {"type": "halfspace", "normal": region.normal.tolist(), "offset": region.offset}


def _check_dim(z, region):
    z = check_vector(z, "z")
    if z.size != region.dim:
        raise InvalidArgumentError(f"point has dimension {z.size}, region {region.dim}")
    return z


def point_region_distance(z, region):
    """Euclidean distance from ``z`` to the closest point of ``region``."""
    z = _check_dim(z, region)
    if isinstance(region, Point):
        return float(np.linalg.norm(z - region.point))
    if isinstance(region, Box):
        return float(np.linalg.norm(z - np.clip(z, region.lower, region.upper)))
    if isinstance(region, HalfSpace):
        return float(max(0.0, -(region.normal @ z + region.offset)) / np.linalg.norm(region.normal))
    raise UnsupportedRegionError(f"unsupported region {type(region).__name__}")


def _as_box(region):
    if isinstance(region, Point):
        return region.point, region.point
    if isinstance(region, Box):
        return region.lower, region.upper
    raise UnsupportedRegionError(
        f"Hausdorff distance needs bounded regions, got {type(region).__name__}"
    )


def _directed(lo_a, hi_a, lo_b, hi_b):
    # sup over a in A of d(a, B); d(., B)^2 separates per coordinate and is convex,
    # so each coordinate is maximised at an endpoint of A's interval
    def gap(x):
        return np.maximum(0.0, np.maximum(lo_b - x, x - hi_b))

    return float(np.linalg.norm(np.maximum(gap(lo_a), gap(hi_a))))


def same_region(a, b):
    if type(a) is not type(b):
        return False
    if isinstance(a, Point):
        return np.array_equal(a.point, b.point)
    if isinstance(a, Box):
        return np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)
    return np.array_equal(a.normal, b.normal) and a.offset == b.offset


def hausdorff_distance(a, b):
    """Hausdorff distance between two points/boxes.

    Identical regions of any kind are at distance 0; otherwise half-spaces raise
    :class:`UnsupportedRegionError`.
    """
    if same_region(a, b):
        return 0.0
    lo_a, hi_a = _as_box(a)
    lo_b, hi_b = _as_box(b)
    if lo_a.size != lo_b.size:
        raise InvalidArgumentError("regions have different dimensions")
    return max(_directed(lo_a, hi_a, lo_b, hi_b), _directed(lo_b, hi_b, lo_a, hi_a))


def weight_diagonal(scheme):
    """``(tau - t_j) / L_N(t_j)^2`` for the interior nodes ``j = 1..N``."""
    t = scheme.nodes[1:]
    return (scheme.tau - t) / legendre_shifted(scheme.N, scheme.tau, t) ** 2


@dataclass(frozen=True)
class DeltaOperator:
    Delta: np.ndarray
    W: np.ndarray

    def seminorm(self, z):
        return float(np.sqrt(max(0.0, z @ self.Delta @ z)))


def build_delta(ct, scheme):
    N = scheme.N
    F = np.hstack([np.kron(np.eye(N), ct.A_c), np.kron(np.eye(N), ct.B_c)])
    W = np.kron(np.diag(weight_diagonal(scheme)), np.eye(ct.n))
    Delta = F.T @ W @ F
    return DeltaOperator(Delta=0.5 * (Delta + Delta.T), W=W)


@dataclass(frozen=True)
class BoundTerms:
    drift: float
    interior: float
    region: float

    @property
    def dynamic(self):
        return self.drift + self.interior

    @property
    def total(self):
        return self.drift + self.interior + self.region


def dynamic_terms(ct, scheme, x_d_i, u_d_i, sol, delta=None):
    """The two state-dependent terms of the inter-sample bound, ``(drift, interior)``."""
    N, tau = scheme.N, scheme.tau
    x_d_i = check_vector(x_d_i, "x_d_i", ct.n)
    u_d_i = check_vector(u_d_i, "u_d_i", ct.m)
    delta = build_delta(ct, scheme) if delta is None else delta
    factor = N / (N + 1)
    drift = np.sqrt(6.0) * tau * factor * np.linalg.norm(ct.A_c @ x_d_i + ct.B_c @ u_d_i)
    interior = np.sqrt(6.0 * tau) * factor * delta.seminorm(sol.stacked)
    return float(drift), float(interior)


def segment_bound_terms(ct, scheme, x_d_i, u_d_i, sol, pi_i, pi_ip1, pi, delta=None):
    drift, interior = dynamic_terms(ct, scheme, x_d_i, u_d_i, sol, delta)
    region = min(hausdorff_distance(pi_i, pi), hausdorff_distance(pi_ip1, pi))
    return BoundTerms(drift=drift, interior=interior, region=region)


def segment_violation_bound(ct, scheme, x_d_i, u_d_i, sol, pi_i, pi_ip1, pi):
    """Upper bound on the distance from ``pi`` of the state anywhere on segment ``i``.

    ``pi_i`` and ``pi_ip1`` must contain the sampled states at both ends of the
    segment; ``sol`` is the segment solution used to build the input.
    """
    return segment_bound_terms(ct, scheme, x_d_i, u_d_i, sol, pi_i, pi_ip1, pi).total


def stl_score(Gamma, gamma, x):
    Gamma = check_vector(Gamma, "Gamma")
    x = check_vector(x, "x", Gamma.size)
    return float(Gamma @ x + gamma)


def stl_score_bound(ct, scheme, Gamma, x_d_i, u_d_i, sol):
    """Bound on ``|rho(x_c(i tau + t)) - rho(x_d(i))|`` over segment ``i``."""
    Gamma = check_vector(Gamma, "Gamma", ct.n)
    drift, interior = dynamic_terms(ct, scheme, x_d_i, u_d_i, sol)
    return float(np.linalg.norm(Gamma) * (drift + interior))
