"""Flat key-value run configuration.

A configuration is a plain dict with the keys below.  Files are JSON
objects with the same flat keys; unknown keys are rejected and every
value is validated against the preconditions of the module it feeds.
"""

import json

from .curves import IterationPolicy
from .errors import ConfigError
from .losses import LossConfig

DEFAULTS = {
    # curve stage
    "curve_iterations": 8,
    "estimator_mode": "free",  # "free" (per pixel) or "constant" (per iteration)
    "curve_per_channel": True,
    # visibility policy
    "policy_n_max": 8,
    "policy_slope": 1.0,
    "policy_ed_gain": 0.1,
    # phase stage
    "phase_steps": 8,
    "phase_per_channel": False,
    "phase_symmetrize": True,
    "strength_gain": 1.0,
    "mag_eps": 1e-12,
    # the phase module consumes the curve-enhanced image
    "phase_input": "enhanced",
    # objective
    "exposure_base": 0.45,
    "exposure_weight": 1.0,
    "entropy_weight": 0.01,
    "contrast_weight": 0.01,
    "tv_weight": 1e-4,
    "entropy_sign": 1.0,
    "histogram_bins": 256,
    "histogram_mode": "soft",
    "hist_range": 1.0,
    "patch_rows": 4,
    "patch_cols": 4,
    # rotary encoding demo
    "rope_fusion_mode": "matrix",
    "rope_base": 10000.0,
    # optimizer schedule
    "opt_steps": 200,
    "opt_lr": 1e-2,
    "opt_beta1": 0.9,
    "opt_beta2": 0.999,
    "opt_eps": 1e-8,
    "opt_patience": 10,
    "seed": 0,
}


def _fail(key, value, why):
    raise ConfigError(f"config key {key!r} = {value!r}: {why}")


def _check_positive_int(key, v, minimum=1):
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        _fail(key, v, f"expected an integer >= {minimum}")


def _check_number(key, v, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, v, "expected a number")
    if lo is not None and v < lo:
        _fail(key, v, f"must be >= {lo}")
    if hi is not None and v > hi:
        _fail(key, v, f"must be <= {hi}")


def _check_choice(key, v, choices):
    if v not in choices:
        _fail(key, v, f"expected one of {sorted(choices)}")


def validate(cfg):
    """Validate a full configuration dict in place; returns it."""
    for key in cfg:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
    _check_positive_int("curve_iterations", cfg["curve_iterations"])
    _check_choice("estimator_mode", cfg["estimator_mode"], {"free", "constant"})
    _check_choice("curve_per_channel", cfg["curve_per_channel"], {True, False})
    _check_positive_int("policy_n_max", cfg["policy_n_max"], minimum=0)
    _check_number("policy_slope", cfg["policy_slope"], lo=0.0)
    _check_number("policy_ed_gain", cfg["policy_ed_gain"], lo=0.0, hi=0.1)
    _check_positive_int("phase_steps", cfg["phase_steps"])
    _check_choice("phase_per_channel", cfg["phase_per_channel"], {True, False})
    _check_choice("phase_symmetrize", cfg["phase_symmetrize"], {True, False})
    _check_number("strength_gain", cfg["strength_gain"], lo=0.0, hi=1.0)
    _check_number("mag_eps", cfg["mag_eps"], lo=0.0)
    _check_choice("phase_input", cfg["phase_input"], {"enhanced"})
    _check_number("exposure_base", cfg["exposure_base"], lo=0.0, hi=1.0)
    for key in ("exposure_weight", "entropy_weight", "contrast_weight", "tv_weight"):
        _check_number(key, cfg[key], lo=0.0)
    _check_choice("entropy_sign", cfg["entropy_sign"], {1.0, -1.0, 1, -1})
    _check_positive_int("histogram_bins", cfg["histogram_bins"], minimum=2)
    _check_choice("histogram_mode", cfg["histogram_mode"], {"soft", "hard"})
    if cfg["hist_range"] is not None:
        _check_number("hist_range", cfg["hist_range"])
        if cfg["hist_range"] <= 0:
            _fail("hist_range", cfg["hist_range"], "must be positive or null")
    _check_positive_int("patch_rows", cfg["patch_rows"])
    _check_positive_int("patch_cols", cfg["patch_cols"])
    _check_choice("rope_fusion_mode", cfg["rope_fusion_mode"], {"matrix", "angle"})
    _check_number("rope_base", cfg["rope_base"])
    if cfg["rope_base"] <= 0:
        _fail("rope_base", cfg["rope_base"], "must be positive")
    _check_positive_int("opt_steps", cfg["opt_steps"], minimum=0)
    _check_number("opt_lr", cfg["opt_lr"], lo=0.0)
    _check_number("opt_beta1", cfg["opt_beta1"], lo=0.0, hi=1.0)
    _check_number("opt_beta2", cfg["opt_beta2"], lo=0.0, hi=1.0)
    _check_number("opt_eps", cfg["opt_eps"], lo=0.0)
    _check_positive_int("opt_patience", cfg["opt_patience"])
    _check_positive_int("seed", cfg["seed"], minimum=0)
    return cfg


def resolve(overrides=None):
    """Defaults overlaid with the given (partial) dict, validated."""
    cfg = dict(DEFAULTS)
    if overrides:
        for key in overrides:
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
        cfg.update(overrides)
    return validate(cfg)


def load(path=None, overrides=None):
    """Load a JSON config file (if given) and apply overrides on top."""
    partial = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                partial = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(partial, dict):
            raise ConfigError("config file must hold a flat JSON object")
    if overrides:
        partial.update(overrides)
    return resolve(partial)


def loss_config(cfg):
    """LossConfig view of a validated run configuration."""
    return LossConfig(
        exposure_base=cfg["exposure_base"],
        exposure_weight=cfg["exposure_weight"],
        entropy_weight=cfg["entropy_weight"],
        contrast_weight=cfg["contrast_weight"],
        tv_weight=cfg["tv_weight"],
        bins=cfg["histogram_bins"],
        patch_grid=(cfg["patch_rows"], cfg["patch_cols"]),
        histogram_mode=cfg["histogram_mode"],
        hist_range=cfg["hist_range"],
        entropy_sign=float(cfg["entropy_sign"]),
    )


def policy(cfg):
    """IterationPolicy view of a validated run configuration."""
    return IterationPolicy(
        n_max=cfg["policy_n_max"],
        slope=cfg["policy_slope"],
        e_d_gain=cfg["policy_ed_gain"],
    )
