"""Content-aware spatial-frequency rotary positional encoding.

Two rotary fields are built over a token grid:

* a frequency field whose per-token rotation angle is the local phase of
  the previous grid's spectrum (one shared angle for every channel pair);
* a spatial field implementing axial rotary encoding on scale-normalized
  coordinates ``(i * h_base / h, j * w_base / w)``, so tokens at coarser
  scales align with their location at the base scale.

The two are fused with a mixing coefficient `lam`, either by convex
combination of the 2x2 blocks (literal, not a rotation anymore) or by
interpolating the angles (stays a rotation).  A small multi-head
attention block applies the field to queries and keys.
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff, spectral
from .errors import HeadDivisibilityError, OddChannelsError, ShapeMismatchError


@dataclass(frozen=True)
class FusionParam:
    """Free mixing parameter; lam = sigmoid(raw) stays in [0, 1]."""

    raw: float = 0.0

    @property
    def lam(self):
        return float(autodiff.sigmoid(np.float64(self.raw)))


@dataclass(frozen=True)
class RotaryField:
    """Per-token, per-channel-pair 2x2 blocks acting on (q, k) vectors.

    ``blocks`` has shape (h, w, pairs, 2, 2).  ``angles`` carries the
    underlying rotation angles for the pure modes and is None for
    matrix-fused fields (whose blocks are generally not rotations).
    """

    mode: str
    blocks: np.ndarray
    angles: np.ndarray | None = None

    @property
    def grid_shape(self):
        return self.blocks.shape[:2]

    @property
    def pairs(self):
        return self.blocks.shape[2]


def _blocks_from_angles(angles):
    c = np.cos(angles)
    s = np.sin(angles)
    row0 = np.stack([c, -s], axis=-1)
    row1 = np.stack([s, c], axis=-1)
    return np.stack([row0, row1], axis=-2)


def _require_even(channels):
    if channels % 2 != 0:
        raise OddChannelsError(f"channel count {channels} must be even")


def phase_angles(prev, out_hw=None):
    """Per-token phase of the previous grid's spectrum, in (-pi, pi].

    The channel dimension is reduced by averaging before the transform
    (one angle per token).  When ``out_hw`` differs from the grid size the
    angle field is resampled by nearest neighbor, which preserves exact
    phase values.
    """
    grid = np.asarray(prev, dtype=np.float64)
    if grid.ndim == 3:
        grid = grid.mean(axis=2)
    if grid.ndim != 2:
        raise ShapeMismatchError(f"token grid must be 2-D or 3-D, got ndim={grid.ndim}")
    angles = spectral.phase(np.fft.fft2(grid))
    if out_hw is not None and tuple(out_hw) != grid.shape:
        h_out, w_out = out_hw
        rows = (np.arange(h_out) * grid.shape[0]) // h_out
        cols = (np.arange(w_out) * grid.shape[1]) // w_out
        angles = angles[np.ix_(rows, cols)]
    return angles


def build_frequency_rope(angles, channels):
    """Rotary field rotating every channel pair of a token by its phase angle."""
    _require_even(channels)
    angles = np.asarray(angles, dtype=np.float64)
    if angles.ndim != 2:
        raise ShapeMismatchError("angle field must be 2-D")
    pairs = channels // 2
    per_pair = np.repeat(angles[:, :, None], pairs, axis=2)
    return RotaryField("frequency", _blocks_from_angles(per_pair), per_pair)


def build_spatial_rope(h_k, w_k, h_base, w_base, channels, base=10000.0):
    """Axial rotary field on scale-normalized coordinates.

    The first half of the channel pairs rotates by theta_c * (i * h_base / h_k),
    the second half by theta_c * (j * w_base / w_k), with
    theta_c = base ** (-2c / (channels / 2)) per pair index c within each half.
    """
    if min(h_k, w_k, h_base, w_base) < 1:
        raise ShapeMismatchError("grid dims must be >= 1")
    if base <= 0:
        raise ValueError("base must be positive")
    _require_even(channels)
    if channels % 4 != 0:
        raise OddChannelsError(
            f"channel count {channels} must be a multiple of 4: the row and column"
            " halves each need an even number of channels to form rotation pairs"
        )
    half = channels // 4
    freqs = base ** (-2.0 * np.arange(half) / (channels / 2.0))
    rows = np.arange(h_k) * (h_base / h_k)
    cols = np.arange(w_k) * (w_base / w_k)
    row_angles = rows[:, None, None] * freqs[None, None, :]
    row_angles = np.broadcast_to(row_angles, (h_k, w_k, half))
    col_angles = cols[None, :, None] * freqs[None, None, :]
    col_angles = np.broadcast_to(col_angles, (h_k, w_k, half))
    angles = np.concatenate([row_angles, col_angles], axis=2)
    return RotaryField("spatial", _blocks_from_angles(angles), angles)


def fuse_rope(freq, spa, lam, mode="matrix"):
    """Mix the frequency and spatial fields with coefficient lam in [0, 1].

    ``matrix`` blends the 2x2 blocks directly (the result contracts norms,
    it is no longer orthogonal).  ``angle`` interpolates the rotation
    angles instead and stays a proper rotation.
    """
    if isinstance(lam, FusionParam):
        lam = lam.lam
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam={lam} outside [0, 1]")
    if freq.blocks.shape != spa.blocks.shape:
        raise ShapeMismatchError(
            f"field shapes differ: {freq.blocks.shape} vs {spa.blocks.shape}"
        )
    if mode == "matrix":
        blocks = lam * freq.blocks + (1.0 - lam) * spa.blocks
        return RotaryField("fused", blocks, None)
    if mode == "angle":
        if freq.angles is None or spa.angles is None:
            raise ValueError("angle fusion needs pure rotation fields")
        angles = lam * freq.angles + (1.0 - lam) * spa.angles
        return RotaryField("fused", _blocks_from_angles(angles), angles)
    raise ValueError(f"unknown fusion mode {mode!r}")


def rotate_tokens(grid, field):
    """Apply the field's 2x2 blocks to adjacent channel pairs of each token."""
    grid = np.asarray(grid, dtype=np.float64)
    h, w, channels = grid.shape
    _require_even(channels)
    if field.grid_shape != (h, w) or field.pairs != channels // 2:
        raise ShapeMismatchError(
            f"field {field.grid_shape}x{field.pairs} does not match grid {grid.shape}"
        )
    pairs = grid.reshape(h, w, channels // 2, 2)
    rotated = np.einsum("hwpij,hwpj->hwpi", field.blocks, pairs)
    return rotated.reshape(h, w, channels)


def _check_heads(channels, heads):
    if heads < 1:
        raise HeadDivisibilityError("heads must be >= 1")
    if channels % (2 * heads) != 0:
        raise HeadDivisibilityError(
            f"channels {channels} not divisible by 2 * heads = {2 * heads}"
        )


def attention_logits(q, k, field, heads=1):
    """Scaled dot-product logits between rotated queries and keys.

    Returns an array of shape (heads, tokens, tokens) with tokens flattened
    row-major from the grid.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if q.shape != k.shape:
        raise ShapeMismatchError(f"q {q.shape} vs k {k.shape}")
    h, w, channels = q.shape
    _check_heads(channels, heads)
    qr = rotate_tokens(q, field).reshape(h * w, heads, channels // heads)
    kr = rotate_tokens(k, field).reshape(h * w, heads, channels // heads)
    scale = 1.0 / np.sqrt(channels // heads)
    return np.einsum("thd,shd->hts", qr, kr) * scale


def attention_with_rope(q, k, v, field, heads=1):
    """Multi-head attention with rotary-encoded queries and keys."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != np.shape(q):
        raise ShapeMismatchError(f"v {v.shape} vs q {np.shape(q)}")
    h, w, channels = v.shape
    logits = attention_logits(q, k, field, heads)
    logits = logits - logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=2, keepdims=True)
    values = v.reshape(h * w, heads, channels // heads)
    out = np.einsum("hts,shd->thd", weights, values)
    return out.reshape(h, w, channels)
