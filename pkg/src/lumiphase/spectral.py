"""Two-dimensional spectral primitives shared by the whole package.

Conventions
-----------
* Images are real arrays of shape ``(H, W)`` or ``(H, W, C)``; transforms
  act over the first two axes and channels are handled independently.
* The forward DFT is unnormalized; the inverse carries the full
  ``1/(H*W)`` factor.
* Phase angles live in ``(-pi, pi]`` and the angle of an exactly-zero bin
  is defined as 0.
"""

import numpy as np

from .errors import ResidualImaginaryError, ShapeMismatchError

#: Default smoothing added under the square root of ``magnitude`` on
#: differentiation paths; keeps |.| differentiable at the origin.
MAG_EPS_DEFAULT = 1e-12

#: Largest imaginary residue tolerated when inverting a spectrum that is
#: supposed to describe a real image.
IMAG_TOL_DEFAULT = 1e-4


def as_image(arr):
    """Coerce to a float64 array of shape (H, W) or (H, W, C)."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim not in (2, 3):
        raise ShapeMismatchError(f"expected a 2-D or 3-D array, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ShapeMismatchError(f"degenerate spatial dims {out.shape}")
    return out


def fft2(img):
    """Unnormalized forward DFT over the first two axes, per channel."""
    img = as_image(img)
    return np.fft.fft2(img, axes=(0, 1))


def ifft2(spec, imag_tol=IMAG_TOL_DEFAULT):
    """Inverse DFT (with the 1/(H*W) factor), returning the real part.

    Raises ResidualImaginaryError when the inverse carries more imaginary
    energy than ``imag_tol``, which signals a non-conjugate-symmetric
    spectrum passed where a real image was expected.  Callers that intend
    a phase-only reconstruction should use phase_only_reconstruction.
    """
    img, residual = ifft2_with_residual(spec)
    if residual > imag_tol:
        raise ResidualImaginaryError(residual, imag_tol)
    return img


def ifft2_with_residual(spec):
    """Inverse DFT returning (real part, max abs imaginary residue)."""
    spec = np.asarray(spec, dtype=np.complex128)
    inv = np.fft.ifft2(spec, axes=(0, 1))
    residual = float(np.max(np.abs(inv.imag))) if inv.size else 0.0
    return inv.real, residual


def phase(spec):
    """Per-bin angle atan2(imag, real) in (-pi, pi]; the angle of 0 is 0."""
    spec = np.asarray(spec, dtype=np.complex128)
    ph = np.arctan2(spec.imag, spec.real)
    # atan2 may return exactly -pi for (-x, -0.0); fold onto the open interval.
    ph = np.where(ph == -np.pi, np.pi, ph)
    ph = np.where((spec.real == 0.0) & (spec.imag == 0.0), 0.0, ph)
    return ph


def magnitude(spec, eps=0.0):
    """sqrt(real^2 + imag^2 + eps); pass eps > 0 on differentiation paths."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    spec = np.asarray(spec, dtype=np.complex128)
    return np.sqrt(spec.real**2 + spec.imag**2 + eps)


def recombine(mag, ph):
    """Assemble a complex spectrum from magnitude and phase views."""
    mag = np.asarray(mag, dtype=np.float64)
    ph = np.asarray(ph, dtype=np.float64)
    if mag.shape != ph.shape:
        raise ShapeMismatchError(f"magnitude {mag.shape} vs phase {ph.shape}")
    return mag * np.cos(ph) + 1j * (mag * np.sin(ph))


def phase_only_reconstruction(ph, eps=MAG_EPS_DEFAULT):
    """|IFFT(e^{j*phase})| per channel.

    Inverts a unit-magnitude spectrum carrying only the given phase and
    returns the (eps-smoothed) magnitude of the complex inverse.  The
    result is a nonnegative structure map, never larger than 1 because
    |IFFT(U)| <= mean(|U|) = 1 for a unit-magnitude spectrum; it is not
    clamped or rescaled.
    """
    ph = np.asarray(ph, dtype=np.float64)
    unit = np.cos(ph) + 1j * np.sin(ph)
    inv = np.fft.ifft2(unit, axes=(0, 1))
    return np.sqrt(inv.real**2 + inv.imag**2 + eps)


def conjugate_flip(arr):
    """Map index (u, v) to ((-u) mod H, (-v) mod W) over the first two axes.

    For the spectrum of a real image, ``conj(conjugate_flip(F)) == F``.
    The map is an involution.
    """
    arr = np.asarray(arr)
    flipped = arr[::-1, ::-1]
    return np.roll(flipped, shift=(1, 1), axis=(0, 1))
