"""Command-line interface.

Subcommands: enhance (full restoration pipeline), degrade (synthetic
low-quality generation), score (heuristic proxy scores), eval (PSNR),
rope-demo (attention-logit dump), gradcheck (gradient-vs-finite-difference
verification).  Exit codes: 0 success, 1 verification failure, 3 image or
file I/O failure, 4 configuration/score error, 5 non-finite objective.
"""

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import config as config_mod
from . import degradations as degrade_mod
from . import image_io, optimize, rope
from .errors import ConfigError, LumiphaseError, NonFiniteLossError
from .image_io import ImageIOError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_IO = 3
EXIT_CONFIG = 4
EXIT_NONFINITE = 5

GRADCHECK_TOL = 1e-4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lumiphase",
        description="Reference-free low-light enhancement and deblurring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="restore an image (or directory of images)")
    p.add_argument("input", help="input image file or directory")
    p.add_argument("--out", required=True, help="output image file (or directory)")
    p.add_argument("--scores", help="score file (CSV: image,v,b)")
    p.add_argument("--proxy", action="store_true", help="derive scores with the built-in proxy")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="seed recorded in the run config")
    p.add_argument("--trace", help="optimization trace CSV (default: <out>.trace.csv)")
    p.add_argument("--manifest", help="run manifest JSON (default: <out>.manifest.json)")
    p.add_argument("--reference", help="clean reference image; adds PSNR to the manifest")

    p = sub.add_parser("degrade", help="synthesize a degraded image")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--kernel", choices=["delta", "gaussian", "motion"], default="gaussian")
    p.add_argument("--kernel-size", type=int, default=5)
    p.add_argument("--kernel-sigma", type=float, default=1.0)
    p.add_argument("--kernel-length", type=float, default=5.0)
    p.add_argument("--kernel-angle", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("score", help="proxy visibility/blurriness scores")
    p.add_argument("input", help="image file or directory")
    p.add_argument("--out", help="write a score file instead of printing")

    p = sub.add_parser("eval", help="PSNR between two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--peak", type=float, default=1.0)

    p = sub.add_parser("rope-demo", help="dump attention logits for a rotary field")
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--heads", type=int, default=1)
    p.add_argument("--field", choices=["spatial", "frequency", "fused"], default="fused")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--fusion-mode", choices=["matrix", "angle"], default="matrix")
    p.add_argument("--base", type=float, default=10000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV file for the logit matrix")

    p = sub.add_parser("gradcheck", help="verify gradients against finite differences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--coords", type=int, default=20)
    p.add_argument("--config", help="JSON config file")
    return parser


def _list_images(path):
    if os.path.isdir(path):
        names = sorted(
            n for n in os.listdir(path) if n.lower().endswith(image_io.IMAGE_EXTENSIONS)
        )
        return [os.path.join(path, n) for n in names]
    return [path]


def _score_for(image_path, img, args):
    if args.proxy:
        return degrade_mod.proxy_scores(img)
    if not args.scores:
        raise ConfigError("no score source: pass --scores FILE or --proxy")
    table = image_io.read_scores(args.scores)
    key = image_io.image_id(image_path)
    if key not in table:
        raise ConfigError(f"score file has no record for image id {key!r}")
    return table[key]


def _manifest(cfg, scores, params, trace, psnr_block):
    first = dict(zip(optimize.TRACE_FIELDS, trace.rows[0]))
    last = dict(zip(optimize.TRACE_FIELDS, trace.rows[-1]))
    doc = {
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg,
        "scores": {"v": scores.v, "b": scores.b, "provenance": scores.provenance},
        "n_v": params.n_v,
        "e_d": params.e_d,
        "strength": params.strength,
        "initial_loss": {k: first[k] for k in ("total", "l_ex", "l_en", "l_con", "l_tv")},
        "final_loss": {k: last[k] for k in ("total", "l_ex", "l_en", "l_con", "l_tv")},
        "steps": last["step"],
    }
    if psnr_block is not None:
        doc["psnr"] = psnr_block
    return doc


def _cmd_enhance(args):
    cfg = config_mod.load(args.config, {"seed": args.seed} if args.seed is not None else None)
    inputs = _list_images(args.input)
    if not inputs:
        raise ImageIOError(f"no images found under {args.input}")
    directory_mode = os.path.isdir(args.input)
    if directory_mode:
        os.makedirs(args.out, exist_ok=True)
    for path in inputs:
        img = image_io.read_image(path)
        scores = _score_for(path, img, args)
        params = optimize.init_params(img, scores, cfg)
        x_out, trace = optimize.optimize_image(img, scores, cfg)
        if directory_mode:
            out_path = os.path.join(args.out, os.path.basename(path))
        else:
            out_path = args.out
        trace_path = args.trace if (args.trace and not directory_mode) else out_path + ".trace.csv"
        manifest_path = (
            args.manifest if (args.manifest and not directory_mode) else out_path + ".manifest.json"
        )
        image_io.write_image(out_path, x_out)
        trace.to_csv(trace_path)
        psnr_block = None
        if args.reference:
            ref = image_io.read_image(args.reference)
            psnr_in = degrade_mod.psnr(img, ref)
            psnr_out = degrade_mod.psnr(x_out, ref)
            # keep the manifest strict JSON even for infinite PSNR
            def _jsonable(value):
                return value if np.isfinite(value) else str(value)

            psnr_block = {
                "input_db": _jsonable(psnr_in),
                "output_db": _jsonable(psnr_out),
                "gain_db": _jsonable(psnr_out - psnr_in),
            }
        doc = _manifest(cfg, scores, params, trace, psnr_block)
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"enhanced {path} -> {out_path} (final loss {trace.final_total:.6g})")
    return EXIT_OK


def _cmd_degrade(args):
    img = image_io.read_image(args.input)
    if args.kernel == "gaussian":
        kernel = degrade_mod.gaussian_kernel(args.kernel_size, args.kernel_sigma)
    elif args.kernel == "motion":
        kernel = degrade_mod.motion_kernel(args.kernel_length, args.kernel_angle)
    else:
        kernel = degrade_mod.gaussian_kernel(1, 0.0)
    cfg = degrade_mod.DegradationConfig(
        gamma=args.gamma, kernel=kernel, noise_sigma=args.noise_sigma, seed=args.seed
    )
    image_io.write_image(args.out, degrade_mod.degrade(img, cfg))
    print(f"degraded {args.input} -> {args.out}")
    return EXIT_OK


def _cmd_score(args):
    table = {}
    for path in _list_images(args.input):
        scores = degrade_mod.proxy_scores(image_io.read_image(path))
        table[image_io.image_id(path)] = scores
    if args.out:
        image_io.write_scores(args.out, table)
    else:
        print("image,v,b")
        for key, s in table.items():
            print(f"{key},{s.v!r},{s.b!r}")
    return EXIT_OK


def _cmd_eval(args):
    a = image_io.read_image(args.image_a)
    b = image_io.read_image(args.image_b)
    print(degrade_mod.psnr(a, b, peak=args.peak))
    return EXIT_OK


def _cmd_rope_demo(args):
    rng = np.random.default_rng(args.seed)
    grid = args.grid
    q = rng.standard_normal((grid, grid, args.channels))
    k = rng.standard_normal((grid, grid, args.channels))
    content = rng.standard_normal((grid, grid, args.channels))
    spatial = rope.build_spatial_rope(grid, grid, grid, grid, args.channels, base=args.base)
    if args.field == "spatial":
        field = spatial
    else:
        angles = rope.phase_angles(content)
        frequency = rope.build_frequency_rope(angles, args.channels)
        if args.field == "frequency":
            field = frequency
        else:
            field = rope.fuse_rope(frequency, spatial, args.lam, mode=args.fusion_mode)
    logits = rope.attention_logits(q, k, field, heads=args.heads)
    with open(args.out, "w", encoding="utf-8") as fh:
        for head in range(logits.shape[0]):
            for row in logits[head]:
                fh.write(",".join(repr(v) for v in row))
                fh.write("\n")
    print(f"wrote {logits.shape[0]}x{logits.shape[1]}x{logits.shape[2]} logits to {args.out}")
    return EXIT_OK


def _cmd_gradcheck(args):
    cfg = config_mod.load(args.config)
    max_rel, _ = optimize.gradient_check(
        seed=args.seed, size=args.size, cfg=cfg, n_coords=args.coords
    )
    print(f"max relative error: {max_rel:.3e} (tolerance {GRADCHECK_TOL:.1e})")
    return EXIT_OK if max_rel <= GRADCHECK_TOL else EXIT_CHECK_FAILED


_HANDLERS = {
    "enhance": _cmd_enhance,
    "degrade": _cmd_degrade,
    "score": _cmd_score,
    "eval": _cmd_eval,
    "rope-demo": _cmd_rope_demo,
    "gradcheck": _cmd_gradcheck,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ImageIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONFINITE
    except LumiphaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
