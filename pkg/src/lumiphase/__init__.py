"""Reference-free joint low-light enhancement and deblurring.

The pipeline brightens an image with an adaptive stack of quadratic
illumination curves (depth chosen by a visibility score), then attenuates
blur artifacts by bounded recursive modulation of the Fourier phase
(strength chosen by a blurriness score).  All free parameters are fitted
per image against reference-free objectives by a small built-in
reverse-mode autodiff engine.
"""

__version__ = "0.1.0"

from .curves import (
    CurveParamStack,
    IterationPolicy,
    PerceptualScores,
    apply_curve_step,
    apply_curves,
    estimate_curves,
    exposure_offset,
    mask_curves,
    visibility_to_iterations,
)
from .degradations import (
    DegradationConfig,
    degrade,
    gaussian_kernel,
    motion_kernel,
    proxy_scores,
    psnr,
)
from .losses import (
    LossConfig,
    contrast_loss,
    entropy_loss,
    exposure_loss,
    soft_histogram,
    total_loss,
    tv_loss,
)
from .optimize import OptTrace, ParamSet, forward, gradient, gradient_check, init_params, optimize_image
from .phasemod import (
    PhaseModStack,
    blur_to_strength,
    denormalize_phase,
    modulate_phase,
    normalize_phase,
    apply_phase_modulation,
)
from .rope import (
    FusionParam,
    RotaryField,
    attention_with_rope,
    build_frequency_rope,
    build_spatial_rope,
    fuse_rope,
    phase_angles,
)
from .spectral import fft2, ifft2, magnitude, phase, phase_only_reconstruction, recombine

__all__ = [
    "CurveParamStack",
    "IterationPolicy",
    "PerceptualScores",
    "apply_curve_step",
    "apply_curves",
    "estimate_curves",
    "exposure_offset",
    "mask_curves",
    "visibility_to_iterations",
    "DegradationConfig",
    "degrade",
    "gaussian_kernel",
    "motion_kernel",
    "proxy_scores",
    "psnr",
    "LossConfig",
    "contrast_loss",
    "entropy_loss",
    "exposure_loss",
    "soft_histogram",
    "total_loss",
    "tv_loss",
    "OptTrace",
    "ParamSet",
    "forward",
    "gradient",
    "gradient_check",
    "init_params",
    "optimize_image",
    "PhaseModStack",
    "blur_to_strength",
    "denormalize_phase",
    "modulate_phase",
    "normalize_phase",
    "apply_phase_modulation",
    "FusionParam",
    "RotaryField",
    "attention_with_rope",
    "build_frequency_rope",
    "build_spatial_rope",
    "fuse_rope",
    "phase_angles",
    "fft2",
    "ifft2",
    "magnitude",
    "phase",
    "phase_only_reconstruction",
    "recombine",
]
