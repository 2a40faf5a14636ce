"""Reference-free per-image optimization of all free parameters.

Free parameters (curve fields, phase fields, the fusion coefficient) are
zero-initialized and updated by an Adam-style rule against the weighted
objective.  The score-derived quantities (active iteration count, exposure
offset, modulation strength) are computed once at setup and held fixed,
because the score-to-policy path contains a rounding step.

``gradient`` returns the exact reverse-mode gradient through the
squashings, both recursions and the DFTs; ``gradient_check`` compares it
against central finite differences of an independently composed
numpy-only forward pass.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff, config as config_mod, curves, losses, phasemod, spectral
from .autodiff import Tensor
from .curves import CurveParamStack, PerceptualScores
from .errors import ConfigError, NonFiniteGradientError, NonFiniteLossError
from .phasemod import PhaseModStack

TRACE_FIELDS = ("step", "total", "l_ex", "l_en", "l_con", "l_tv", "grad_norm", "lr")


@dataclass
class ParamSet:
    """Free raw parameters plus the score-derived fixed values.

    Raw arrays are pre-squash: curve fields pass through tanh into
    [-1, 1], phase fields through a sigmoid into [0, 1], the fusion
    coefficient through a sigmoid into [0, 1].
    """

    raw_curve: np.ndarray
    raw_phase: np.ndarray
    raw_lam: float
    n_v: int
    e_d: float
    strength: float
    mode: str = "free"

    def __post_init__(self):
        self.raw_curve = np.asarray(self.raw_curve, dtype=np.float64)
        self.raw_phase = np.asarray(self.raw_phase, dtype=np.float64)
        if not np.all(np.isfinite(self.raw_curve)) or not np.all(np.isfinite(self.raw_phase)):
            raise ValueError("raw parameters must be finite")
        if not math.isfinite(self.raw_lam):
            raise ValueError("raw_lam must be finite")


@dataclass
class OptTrace:
    """Per-step record of the optimization run."""

    rows: list = field(default_factory=list)

    def append(self, step, total, parts, grad_norm, lr):
        if self.rows and step <= self.rows[-1][0]:
            raise ValueError("trace steps must be strictly increasing")
        row = (
            int(step),
            float(total),
            float(parts["l_ex"]),
            float(parts["l_en"]),
            float(parts["l_con"]),
            float(parts["l_tv"]),
            float(grad_norm),
            float(lr),
        )
        if not all(math.isfinite(v) for v in row[1:]):
            raise ValueError(f"non-finite trace entry at step {step}: {row}")
        self.rows.append(row)

    @property
    def initial_total(self):
        return self.rows[0][1]

    @property
    def final_total(self):
        return self.rows[-1][1]

    def to_csv(self, path_or_file):
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
                self._write(fh)

    def _write(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])

    def to_csv_text(self):
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()


def _as_hwc(img):
    img = spectral.as_image(img)
    return img[:, :, None] if img.ndim == 2 else img


def init_params(x_lq, scores, cfg=None):
    """Zero-initialized ParamSet with score-derived fixed values."""
    cfg = config_mod.resolve(cfg) if not _is_resolved(cfg) else cfg
    x = _as_hwc(x_lq)
    h, w, c = x.shape
    n = cfg["curve_iterations"]
    t = cfg["phase_steps"]
    if cfg["estimator_mode"] == "free":
        curve_shape = (n, h, w, c if cfg["curve_per_channel"] else 1)
        phase_shape = (t, h, w, c if cfg["phase_per_channel"] else 1)
    else:
        curve_shape = (n, 1, 1, 1)
        phase_shape = (t, 1, 1, 1)
    policy = config_mod.policy(cfg)
    return ParamSet(
        raw_curve=np.zeros(curve_shape),
        raw_phase=np.zeros(phase_shape),
        raw_lam=0.0,
        n_v=curves.visibility_to_iterations(scores.v, policy),
        e_d=curves.exposure_offset(scores.v, policy),
        strength=phasemod.blur_to_strength(scores.b, cfg["strength_gain"]),
        mode=cfg["estimator_mode"],
    )


def _is_resolved(cfg):
    return isinstance(cfg, dict) and set(cfg) == set(config_mod.DEFAULTS)


def _resolve(cfg):
    return cfg if _is_resolved(cfg) else config_mod.resolve(cfg)


def _curve_mask(params, cfg):
    mask = np.zeros((cfg["curve_iterations"], 1, 1, 1))
    mask[: params.n_v] = 1.0
    return mask


def _graph(x_lq, params, cfg):
    """Differentiable forward pass; returns loss, terms, outputs and leaves."""
    x = _as_hwc(x_lq)
    curve_leaf = Tensor(params.raw_curve)
    phase_leaf = Tensor(params.raw_phase)
    lam_leaf = Tensor(np.float64(params.raw_lam))

    curve_maps = curves.squash_curve(curve_leaf) * _curve_mask(params, cfg)
    enhanced = curves.logistic_refine(
        Tensor(x), [curve_maps[i] for i in range(cfg["curve_iterations"])]
    )

    eps = cfg["mag_eps"]
    f_re = autodiff.fft2_re(enhanced)
    f_im = autodiff.fft2_im(enhanced)
    ph = autodiff.arctan2(f_im, f_re)
    mag = autodiff.sqrt(f_re * f_re + f_im * f_im + eps)
    nph = phasemod.normalize_phase(ph)
    phase_maps = phasemod.squash_unit(phase_leaf)
    steps = [params.strength * phase_maps[i] for i in range(cfg["phase_steps"])]
    modulated = curves.logistic_refine(nph, steps)
    ph_star = phasemod.denormalize_phase(modulated)
    if cfg["phase_symmetrize"]:
        ph_star = phasemod.symmetrize_phase(ph_star, ph)

    cos_ph = autodiff.cos(ph_star)
    sin_ph = autodiff.sin(ph_star)
    x_pre = autodiff.ifft2_re(mag * cos_ph, mag * sin_ph)
    s_re = autodiff.ifft2_re(cos_ph, sin_ph)
    s_im = autodiff.ifft2_im(cos_ph, sin_ph)
    s_phase = autodiff.sqrt(s_re * s_re + s_im * s_im + spectral.MAG_EPS_DEFAULT)

    total, parts = losses.total_loss(x_pre, s_phase, params.e_d, config_mod.loss_config(cfg))
    return {
        "loss": total,
        "parts": parts,
        "x_pre": x_pre,
        "s_phase": s_phase,
        "leaves": {"curve": curve_leaf, "phase": phase_leaf, "lam": lam_leaf},
    }


def _check_setup(params, scores, cfg):
    """The fixed values in params must match what the scores would derive."""
    if scores is None:
        return
    policy = config_mod.policy(cfg)
    expected = (
        curves.visibility_to_iterations(scores.v, policy),
        curves.exposure_offset(scores.v, policy),
        phasemod.blur_to_strength(scores.b, cfg["strength_gain"]),
    )
    if (params.n_v, params.e_d, params.strength) != expected:
        raise ValueError(
            f"params fixed values {(params.n_v, params.e_d, params.strength)} "
            f"do not match the scores-derived {expected}"
        )


def forward(x_lq, params, scores=None, cfg=None):
    """Run the pipeline; returns (clamped output, structure map, loss terms).

    The loss breakdown is computed on the pre-clamp output.  Deterministic:
    identical inputs produce bit-identical results.
    """
    cfg = _resolve(cfg)
    _check_setup(params, scores, cfg)
    g = _graph(x_lq, params, cfg)
    breakdown = {k: float(v.value) for k, v in g["parts"].items()}
    breakdown["total"] = float(g["loss"].value)
    return np.clip(g["x_pre"].value, 0.0, 1.0), g["s_phase"].value, breakdown


def _require_differentiable(cfg):
    if cfg["histogram_mode"] != "soft":
        raise ConfigError(
            "gradient-based optimization needs histogram_mode='soft'; the hard "
            "counting histogram is not differentiable"
        )
    if cfg["mag_eps"] <= 0:
        raise ConfigError(
            "gradient-based optimization needs mag_eps > 0; the magnitude is "
            "not differentiable at zero bins otherwise"
        )


def gradient(x_lq, params, scores=None, cfg=None):
    """Exact reverse-mode gradient of the objective for every raw parameter."""
    cfg = _resolve(cfg)
    _require_differentiable(cfg)
    _check_setup(params, scores, cfg)
    g = _graph(x_lq, params, cfg)
    g["loss"].backward()
    out = {}
    for name, leaf in g["leaves"].items():
        grad = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.value)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(f"non-finite gradient for {name!r}")
        out[name] = grad
    out["lam"] = float(out["lam"])
    return out


def loss_value_numpy(x_lq, params, cfg=None):
    """Objective evaluated through the plain-numpy modules (no autodiff).

    Used as the primal for the finite-difference oracle; composes the
    public curve, phase and loss operations directly.
    """
    cfg = _resolve(cfg)
    x = _as_hwc(x_lq)
    maps = np.tanh(params.raw_curve)
    maps[params.n_v :] = 0.0
    stack = CurveParamStack(maps=maps, n_v=params.n_v)
    enhanced = curves.apply_curves(x, stack)
    phase_stack = PhaseModStack(maps=phasemod.squash_unit(params.raw_phase), strength=1.0)
    x_pre, ph_star, _ = phasemod.phase_modulation_forward(
        enhanced,
        phase_stack,
        b=params.strength,
        gain=1.0,
        mag_eps=cfg["mag_eps"],
        symmetrize=cfg["phase_symmetrize"],
    )
    s_phase = spectral.phase_only_reconstruction(ph_star)
    total, _ = losses.total_loss(x_pre, s_phase, params.e_d, config_mod.loss_config(cfg))
    return float(total)


def optimize_image(x_lq, scores, cfg=None):
    """Optimize all free parameters for one image; returns (output, trace).

    Runs Adam from zero-initialized raw parameters.  A monitored rule
    halves the learning rate after ``opt_patience`` consecutive loss
    increases, so the rate never exceeds its initial value.
    """
    cfg = _resolve(cfg)
    _require_differentiable(cfg)
    params = init_params(x_lq, scores, cfg)
    lr = cfg["opt_lr"]
    beta1, beta2, adam_eps = cfg["opt_beta1"], cfg["opt_beta2"], cfg["opt_eps"]
    arrays = {
        "curve": params.raw_curve,
        "phase": params.raw_phase,
        "lam": np.zeros(()),
    }
    moment1 = {k: np.zeros_like(v) for k, v in arrays.items()}
    moment2 = {k: np.zeros_like(v) for k, v in arrays.items()}
    trace = OptTrace()
    prev_total = None
    rising = 0
    graph = None
    for step in range(cfg["opt_steps"] + 1):
        graph = _graph(x_lq, params, cfg)
        total = float(graph["loss"].value)
        parts = {k: float(v.value) for k, v in graph["parts"].items()}
        if not math.isfinite(total) or not all(math.isfinite(v) for v in parts.values()):
            raise NonFiniteLossError(f"objective became non-finite at step {step}", trace)
        graph["loss"].backward()
        grads = {}
        for name, leaf in graph["leaves"].items():
            grad = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.value)
            if not np.all(np.isfinite(grad)):
                raise NonFiniteLossError(f"non-finite gradient at step {step}", trace)
            grads[name] = grad
        grad_norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        trace.append(step, total, parts, grad_norm, lr)
        if step == cfg["opt_steps"]:
            break
        if prev_total is not None and total > prev_total:
            rising += 1
            if rising >= cfg["opt_patience"]:
                lr *= 0.5
                rising = 0
        else:
            rising = 0
        prev_total = total
        t = step + 1
        for name in arrays:
            g = grads[name]
            moment1[name] = beta1 * moment1[name] + (1.0 - beta1) * g
            moment2[name] = beta2 * moment2[name] + (1.0 - beta2) * g * g
            m_hat = moment1[name] / (1.0 - beta1**t)
            v_hat = moment2[name] / (1.0 - beta2**t)
            arrays[name] = arrays[name] - lr * m_hat / (np.sqrt(v_hat) + adam_eps)
        params.raw_curve = arrays["curve"]
        params.raw_phase = arrays["phase"]
        params.raw_lam = float(arrays["lam"])
    x_out = np.clip(graph["x_pre"].value, 0.0, 1.0)
    return x_out, trace


def _flat_coordinates(params):
    """Addressable coordinates: ('curve', idx...), ('phase', idx...), ('lam',)."""
    coords = [("curve", idx) for idx in np.ndindex(params.raw_curve.shape)]
    coords += [("phase", idx) for idx in np.ndindex(params.raw_phase.shape)]
    coords.append(("lam", ()))
    return coords


def finite_difference_gradient(x_lq, params, cfg, name, idx, h=1e-4):
    """Central finite difference of the numpy-path objective at one coordinate."""

    def evaluate(delta):
        p = ParamSet(
            raw_curve=params.raw_curve.copy(),
            raw_phase=params.raw_phase.copy(),
            raw_lam=params.raw_lam,
            n_v=params.n_v,
            e_d=params.e_d,
            strength=params.strength,
            mode=params.mode,
        )
        if name == "curve":
            p.raw_curve[idx] += delta
        elif name == "phase":
            p.raw_phase[idx] += delta
        else:
            p.raw_lam += delta
        return loss_value_numpy(x_lq, p, cfg)

    return (evaluate(h) - evaluate(-h)) / (2.0 * h)


def gradient_check(seed=0, size=8, cfg=None, n_coords=20, h=1e-4, param_scale=0.25):
    """Compare reverse-mode and finite-difference gradients on a random fixture.

    Builds a random image and scores from the seed, perturbs the raw
    parameters away from zero, samples coordinates and returns
    (max relative error, per-coordinate records).  Relative error uses a
    1e-6 denominator floor so that genuinely zero gradients compare clean.
    """
    cfg = _resolve(cfg)
    rng = np.random.default_rng(seed)
    x_lq = rng.uniform(0.05, 0.95, size=(size, size, 3))
    scores = PerceptualScores(v=float(rng.uniform(0.1, 0.9)), b=float(rng.uniform(0.2, 1.0)))
    params = init_params(x_lq, scores, cfg)
    params.raw_curve = param_scale * rng.standard_normal(params.raw_curve.shape)
    params.raw_phase = param_scale * rng.standard_normal(params.raw_phase.shape)
    params.raw_lam = float(param_scale * rng.standard_normal())

    analytic = gradient(x_lq, params, scores, cfg)
    coords = _flat_coordinates(params)
    picks = rng.choice(len(coords), size=min(n_coords, len(coords)), replace=False)
    records = []
    for pick in picks:
        name, idx = coords[pick]
        a = analytic[name][idx] if name != "lam" else analytic["lam"]
        f = finite_difference_gradient(x_lq, params, cfg, name, idx, h)
        rel = abs(a - f) / max(abs(a), abs(f), 1e-6)
        records.append({"name": name, "idx": idx, "analytic": float(a), "fd": float(f), "rel": float(rel)})
    max_rel = max(r["rel"] for r in records)
    return max_rel, records
