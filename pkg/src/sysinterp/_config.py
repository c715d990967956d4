"""Numerical tolerances, overridable through environment variables.

``SYSINTERP_INCLUSION_TOL``, ``SYSINTERP_RESIDUAL_TOL``, ``SYSINTERP_SEGMENT_ERROR_TOL``,
``SYSINTERP_RANK_TOL`` and ``SYSINTERP_INTERP_TOL`` replace the defaults below when set.
"""

import os
from dataclasses import dataclass

INCLUSION_TOL = 1e-8
RESIDUAL_TOL = 1e-8
SEGMENT_ERROR_TOL = 1e-6
RANK_TOL = 1e-12
INTERP_TOL = 1e-8


@dataclass(frozen=True)
class Tolerances:
    inclusion: float = INCLUSION_TOL
    residual: float = RESIDUAL_TOL
    segment_error: float = SEGMENT_ERROR_TOL
    rank: float = RANK_TOL
    interpolation: float = INTERP_TOL

    def __post_init__(self):
        for name in ("inclusion", "residual", "segment_error", "rank", "interpolation"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name!r} must be positive")


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    return float(raw)


def get_tolerances() -> Tolerances:
    return Tolerances(
        inclusion=_env_float("SYSINTERP_INCLUSION_TOL", INCLUSION_TOL),
        residual=_env_float("SYSINTERP_RESIDUAL_TOL", RESIDUAL_TOL),
        segment_error=_env_float("SYSINTERP_SEGMENT_ERROR_TOL", SEGMENT_ERROR_TOL),
        rank=_env_float("SYSINTERP_RANK_TOL", RANK_TOL),
        interpolation=_env_float("SYSINTERP_INTERP_TOL", INTERP_TOL),
    )
