"""Recursive modulation of the Fourier phase, guided by a blurriness score.

The phase of each channel's spectrum is mapped affinely onto [0, 1],
refined by T bounded quadratic steps

    m_t = m_{t-1} + (s * f_t) * m_{t-1} * (1 - m_{t-1}),

and recombined with the untouched magnitude before inverting.  The
per-step fields f_t live in [0, 1] and the global strength s = gain * b
is derived from the blurriness score, so sharp inputs (b = 0) pass
through unchanged.

The pointwise refinement breaks the conjugate symmetry the original
phase had.  By default the modulated field is projected back before
recombining (conjugate pairs antisymmetrized, self-conjugate bins keeping
their original phase), which keeps the inverse transform real and the
output spectrum's magnitude exactly equal to the input's.  Set
``symmetrize=False`` for the raw pointwise variant, which instead takes
the real part of the inverse and reports the imaginary residue.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff, spectral
from .curves import logistic_refine
from .errors import ScoreRangeError, ShapeMismatchError

DEFAULT_T_STEPS = 8


@dataclass
class PhaseModStack:
    """T adjustment fields in [0, 1] plus a global strength scalar."""

    maps: np.ndarray
    strength: float = field(default=1.0)

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=np.float64)
        if self.maps.ndim < 1:
            raise ShapeMismatchError("maps must be a stack with a leading step axis")
        if self.maps.size and (np.min(self.maps) < 0.0 or np.max(self.maps) > 1.0):
            raise ValueError("phase adjustment fields must lie in [0, 1]")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength={self.strength} outside [0, 1]")

    @property
    def t_total(self):
        return self.maps.shape[0]


def normalize_phase(ph):
    """Affine map from (-pi, pi] onto [0, 1]."""
    return (ph + np.pi) / (2.0 * np.pi)


def denormalize_phase(nph):
    """Inverse of normalize_phase."""
    return 2.0 * np.pi * nph - np.pi


def modulate_phase(nph, stack):
    """Run the bounded refinement; inputs and outputs stay in [0, 1].

    0 and 1 are fixed points of every step, and with effective step maps
    s * f_t in [0, 1] each iterate remains in [0, 1].
    """
    if not isinstance(nph, autodiff.Tensor):
        nph = np.asarray(nph, dtype=np.float64)
        if nph.size and (nph.min() < 0.0 or nph.max() > 1.0):
            raise ValueError("normalized phase must lie in [0, 1]")
    for f in stack.maps:
        try:
            np.broadcast_shapes(np.shape(nph), np.shape(f))
        except ValueError as exc:
            raise ShapeMismatchError(
                f"phase field {np.shape(f)} does not broadcast with {np.shape(nph)}"
            ) from exc
    steps = [stack.strength * f for f in stack.maps]
    return logistic_refine(nph, steps)


def blur_to_strength(b, gain=1.0):
    """Modulation strength s = gain * b; sharp inputs disable the module."""
    if not 0.0 <= b <= 1.0:
        raise ScoreRangeError(f"b={b!r} outside [0, 1]")
    if not 0.0 <= gain <= 1.0:
        raise ScoreRangeError(f"gain={gain!r} outside [0, 1]")
    return float(gain) * float(b)


def antisymmetrize_phase(ph):
    """Project a phase field back onto conjugate antisymmetry.

    Subtracts half of the wrapped symmetric defect
    wrap(ph(u, v) + ph(-u, -v)), so that afterwards
    ph(u, v) + ph(-u, -v) = 0 (mod 2*pi) and the spectrum built from it
    (with a symmetric magnitude) inverts to a real image.  A field that is
    already antisymmetric, including the pi values at self-conjugate bins,
    is left untouched up to roundoff.
    """
    mirrored = autodiff.flip_conj(ph)
    defect = ph + mirrored
    two_pi = 2.0 * np.pi
    wraps = autodiff.detached_round(defect / two_pi)
    wrapped = defect - two_pi * wraps
    return ph - 0.5 * wrapped


#: Shift applied inside squash_unit so that zero-initialized raw parameters
#: give near-zero step maps (sigmoid(-4) ~ 0.018): optimization starts from
#: an almost-identity modulation instead of a half-strength one.
SQUASH_UNIT_BIAS = -4.0


def squash_unit(raw):
    """Map free parameters into [0, 1] (smooth, monotone, near 0 at init)."""
    return autodiff.sigmoid(raw + SQUASH_UNIT_BIAS)


def self_conjugate_mask(height, width):
    """1.0 at bins that are their own conjugate partner (DC and Nyquist)."""
    mask = np.zeros((height, width))
    rows = [0] + ([height // 2] if height % 2 == 0 else [])
    cols = [0] + ([width // 2] if width % 2 == 0 else [])
    for r in rows:
        for c in cols:
            mask[r, c] = 1.0
    return mask


def symmetrize_phase(ph_star, ph_reference):
    """Hermitian projection of a modulated phase field.

    Conjugate pairs are antisymmetrized; self-conjugate bins (whose phase
    is structurally 0 or pi for a real image, the DC bin in particular
    carrying the global mean) keep the reference phase.  Rounding those
    bins to the nearest feasible value instead would make the output's
    sign flip discontinuously, with a locked (zero) gradient.
    """
    sym = antisymmetrize_phase(ph_star)
    shape = np.shape(ph_star)
    mask = self_conjugate_mask(shape[0], shape[1])
    if len(shape) == 3:
        mask = mask[:, :, None]
    return sym * (1.0 - mask) + ph_reference * mask


def phase_modulation_forward(img, stack, b, gain=1.0, mag_eps=0.0, symmetrize=True):
    """Phase-modulation pipeline without the final clamp.

    Returns (pre-clamp image, modulated phase, max imaginary residue of the
    inverse).  The residue is recorded as a diagnostic; with symmetrize it
    sits at roundoff level.
    """
    img = spectral.as_image(img)
    strength = blur_to_strength(b, gain)
    spec = spectral.fft2(img)
    ph = spectral.phase(spec)
    mag = spectral.magnitude(spec, mag_eps)
    modulated = modulate_phase(normalize_phase(ph), replace(stack, strength=strength))
    ph_star = denormalize_phase(modulated)
    if symmetrize:
        ph_star = symmetrize_phase(ph_star, ph)
    out = spectral.recombine(mag, ph_star)
    x_pre, residual = spectral.ifft2_with_residual(out)
    return x_pre, ph_star, residual


def apply_phase_modulation(img, stack, b, gain=1.0, mag_eps=0.0, symmetrize=True):
    """Full module: modulate the phase, keep the magnitude, clamp to [0, 1]."""
    x_pre, _, _ = phase_modulation_forward(img, stack, b, gain=gain, mag_eps=mag_eps, symmetrize=symmetrize)
    return np.clip(x_pre, 0.0, 1.0)
