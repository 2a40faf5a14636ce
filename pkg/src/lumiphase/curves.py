"""Adaptive curve-based illumination adjustment.

The enhancement is an iterated quadratic update

    e_n = e_{n-1} + a_n * e_{n-1} * (1 - e_{n-1}),

with per-iteration parameter fields a_n in [-1, 1].  A visibility score v
in [0, 1] (0 = darkest) chooses how many iterations stay active: maps past
the score-derived cutoff are zeroed, so darker inputs receive deeper
adjustment.  The same score also shifts the exposure target used by the
objective.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff
from .errors import (
    IterationRangeError,
    ScoreRangeError,
    ShapeMismatchError,
)

DEFAULT_N_ITER = 8


def _check_unit(name, x):
    if not (0.0 <= x <= 1.0):
        raise ScoreRangeError(f"{name}={x!r} outside [0, 1]")
    return float(x)


@dataclass(frozen=True)
class PerceptualScores:
    """Visibility v (0 = darkest) and blurriness b (1 = most blurred)."""

    v: float
    b: float
    provenance: str = "file"

    def __post_init__(self):
        _check_unit("v", self.v)
        _check_unit("b", self.b)


@dataclass(frozen=True)
class IterationPolicy:
    """Deterministic monotone mapping from visibility to pipeline settings.

    ``iterations``: n_v = round_half_up(n_max * clamp(slope * (1 - v))),
    nonincreasing in v for slope >= 0.
    ``exposure offset``: E_d = clamp(e_d_gain * (2v - 1), +-e_d_limit),
    so brighter scenes get a higher exposure target.
    """

    n_max: int = DEFAULT_N_ITER
    slope: float = 1.0
    e_d_gain: float = 0.1
    e_d_limit: float = 0.1

    def __post_init__(self):
        if self.n_max < 0:
            raise IterationRangeError(f"n_max={self.n_max} must be >= 0")
        if self.slope < 0:
            raise ValueError("slope must be nonnegative")


@dataclass
class CurveParamStack:
    """N parameter fields in [-1, 1] plus the active-iteration cutoff n_v.

    ``maps`` has shape (N, ...) where the trailing shape broadcasts against
    the image; after mask_curves all fields with 1-based index > n_v are
    exactly zero.
    """

    maps: np.ndarray
    n_v: int = field(default=-1)

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=np.float64)
        if self.maps.ndim < 1:
            raise ShapeMismatchError("maps must be a stack with a leading iteration axis")
        if self.n_v < 0:
            self.n_v = self.n_total
        if not 0 <= self.n_v <= self.n_total:
            raise IterationRangeError(f"n_v={self.n_v} outside [0, {self.n_total}]")
        if self.maps.size and (np.min(self.maps) < -1.0 or np.max(self.maps) > 1.0):
            raise ValueError("curve parameters must lie in [-1, 1]")

    @property
    def n_total(self):
        return self.maps.shape[0]


def logistic_refine(x, steps):
    """Iterate x <- x + c * x * (1 - x) over the given coefficient fields.

    Works on plain arrays and on autodiff tensors.  For x in [0, 1] and
    coefficients in [-1, 1] every iterate stays in [0, 1]:
    x + c*x*(1-x) <= 2x - x^2 = 1 - (1-x)^2 and >= x^2.
    """
    for c in steps:
        x = x + c * x * (1.0 - x)
    return x


def _check_broadcast(a_shape, b_shape):
    try:
        np.broadcast_shapes(a_shape, b_shape)
    except ValueError as exc:
        raise ShapeMismatchError(f"cannot broadcast {a_shape} with {b_shape}") from exc


def apply_curve_step(e_prev, a):
    """One quadratic adjustment step; preserves the [0, 1] range."""
    _check_broadcast(np.shape(e_prev) or (), np.shape(a) or ())
    return logistic_refine(e_prev, [a])


def apply_curves(x, stack):
    """Run the full curve recursion with the (possibly masked) fields."""
    for a in stack.maps:
        _check_broadcast(np.shape(x), np.shape(a))
    out = x
    for a in stack.maps:
        out = logistic_refine(out, [a])
    return out


def visibility_to_iterations(v, policy=IterationPolicy()):
    """Map visibility to the active iteration count (darker => deeper)."""
    v = _check_unit("v", v)
    frac = min(max(policy.slope * (1.0 - v), 0.0), 1.0)
    # round half-up so the tie at .5 goes to the deeper setting
    return int(math.floor(policy.n_max * frac + 0.5))


def exposure_offset(v, policy=IterationPolicy()):
    """Visibility-dependent shift of the exposure target, in [-limit, limit]."""
    v = _check_unit("v", v)
    raw = policy.e_d_gain * (2.0 * v - 1.0)
    return float(min(max(raw, -policy.e_d_limit), policy.e_d_limit))


def mask_curves(stack, n_v):
    """Zero every field with 1-based index greater than n_v."""
    if not 0 <= n_v <= stack.n_total:
        raise IterationRangeError(f"n_v={n_v} outside [0, {stack.n_total}]")
    maps = stack.maps.copy()
    maps[n_v:] = 0.0
    return replace(stack, maps=maps, n_v=int(n_v))


def estimate_curves(x, mode="free", n_total=DEFAULT_N_ITER, per_channel=True):
    """Zero-initialized parameter stack for per-image optimization.

    ``free`` mode allocates one field per pixel (and per channel unless
    per_channel is False); ``constant`` mode allocates a single scalar per
    iteration that broadcasts spatially.  Zero initialization makes the
    enhancement start as the identity.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == "free":
        trailing = x.shape if per_channel or x.ndim == 2 else x.shape[:2] + (1,)
        maps = np.zeros((n_total,) + trailing)
    elif mode == "constant":
        maps = np.zeros((n_total,) + (1,) * x.ndim)
    else:
        raise ValueError(f"unknown estimator mode {mode!r}")
    return CurveParamStack(maps=maps, n_v=n_total)


def squash_curve(raw):
    """Map free parameters into [-1, 1]: odd, smooth, slope 1 at zero."""
    return autodiff.tanh(raw)
