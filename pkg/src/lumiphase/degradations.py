"""Synthetic degradation and reference metrics for closed-loop evaluation.

The forward model is x_lq = clamp(gamma * (x_hq (*) k) + n, 0, 1) with a
circular-boundary convolution (matching the DFT pipeline), an attenuation
factor gamma in (0, 1], and seeded Gaussian noise added after the
attenuation.
"""

from dataclasses import dataclass

import numpy as np

from .curves import PerceptualScores
from .errors import KernelNormalizationError, KernelSpecError, ShapeMismatchError

KERNEL_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DegradationConfig:
    gamma: float
    kernel: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", np.asarray(self.kernel, dtype=np.float64))
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma={self.gamma} outside (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.kernel.ndim != 2:
            raise KernelSpecError("kernel must be 2-D")
        if np.any(self.kernel < 0):
            raise KernelNormalizationError("kernel must be nonnegative")
        if abs(self.kernel.sum() - 1.0) > KERNEL_SUM_TOL:
            raise KernelNormalizationError(
                f"kernel sums to {self.kernel.sum():.12f}, expected 1"
            )


def circular_convolve(img, kernel):
    """2-D convolution with wrap-around boundaries, kernel centered."""
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    ch, cw = kernel.shape[0] // 2, kernel.shape[1] // 2
    out = np.zeros_like(img)
    for p in range(kernel.shape[0]):
        for q in range(kernel.shape[1]):
            weight = kernel[p, q]
            if weight == 0.0:
                continue
            out += weight * np.roll(img, shift=(p - ch, q - cw), axis=(0, 1))
    return out


def degrade(x_hq, cfg):
    """Attenuate, blur, add seeded noise, clamp to [0, 1]."""
    x_hq = np.asarray(x_hq, dtype=np.float64)
    blurred = circular_convolve(x_hq, cfg.kernel)
    out = cfg.gamma * blurred
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(cfg.seed)
        out = out + cfg.noise_sigma * rng.standard_normal(x_hq.shape)
    return np.clip(out, 0.0, 1.0)


def gaussian_kernel(size, sigma):
    """Sampled, unit-sum Gaussian kernel; size must be odd."""
    if size < 1 or size % 2 == 0:
        raise KernelSpecError(f"size={size} must be odd and >= 1")
    if sigma < 0:
        raise KernelSpecError("sigma must be nonnegative")
    if size == 1 or sigma == 0:
        out = np.zeros((size, size))
        out[size // 2, size // 2] = 1.0
        return out
    r = size // 2
    coords = np.arange(-r, r + 1, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    kernel = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def motion_kernel(length, angle_deg):
    """Unit-mass anti-aliased line segment of the given length and angle.

    Cell weights fall off linearly with distance to the segment, so a
    length of 1 degenerates to a delta.
    """
    if length < 1:
        raise KernelSpecError(f"length={length} must be >= 1")
    half = (length - 1) / 2.0
    radius = int(np.ceil(half))
    size = 2 * radius + 1
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    theta = np.deg2rad(angle_deg)
    ux, uy = np.cos(theta), np.sin(theta)
    along = xx * ux + yy * uy
    perp = -xx * uy + yy * ux
    excess = np.maximum(np.abs(along) - half, 0.0)
    dist = np.hypot(perp, excess)
    kernel = np.maximum(1.0 - dist, 0.0)
    return kernel / kernel.sum()


def psnr(a, b, peak=1.0):
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak**2 / mse)


#: Fraction of spectral energy a sharp calibration target keeps outside the
#: lowest-quartile band; used to normalize the blurriness proxy.
SHARP_HF_FRACTION = 0.85

#: Radial frequency (cycles/pixel) below which energy counts as "low band";
#: a quarter of the maximum axial frequency 0.5.
LOW_BAND_CUTOFF = 0.125

#: Global mean of a nominally well-lit image, used by the visibility proxy.
WELL_LIT_MEAN = 0.5


def high_frequency_fraction(img, cutoff=LOW_BAND_CUTOFF):
    """Share of spectral energy (luminance, DC included in the total)
    at radial frequencies >= cutoff."""
    img = np.asarray(img, dtype=np.float64)
    lum = img.mean(axis=2) if img.ndim == 3 else img
    energy = np.abs(np.fft.fft2(lum)) ** 2
    h, w = lum.shape
    fu = np.minimum(np.arange(h), h - np.arange(h)) / h
    fv = np.minimum(np.arange(w), w - np.arange(w)) / w
    radius = np.hypot(fu[:, None], fv[None, :])
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(energy[radius >= cutoff].sum() / total)


def proxy_scores(img, well_lit_mean=WELL_LIT_MEAN, sharp_hf_fraction=SHARP_HF_FRACTION):
    """Deterministic heuristic stand-in for externally supplied scores.

    Visibility v is the global mean relative to a nominal well-lit level,
    clamped to [0, 1].  Blurriness b measures how much high-frequency
    energy is missing relative to a sharp calibration target; images with
    no high-frequency content at all (e.g. constants) read as b = 1.
    Outputs are tagged provenance="proxy".
    """
    img = np.asarray(img, dtype=np.float64)
    v = float(np.clip(img.mean() / well_lit_mean, 0.0, 1.0))
    hf = high_frequency_fraction(img)
    b = float(np.clip(1.0 - hf / sharp_hf_fraction, 0.0, 1.0))
    return PerceptualScores(v=v, b=b, provenance="proxy")
