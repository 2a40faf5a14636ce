"""The reference-free objective, term by term.

No ground truth is consulted anywhere: exposure compares the global mean
against a score-shifted target, entropy and contrast read a phase-only
structure map, and total variation penalizes roughness.  The demo sweeps
simple families of images so each term's preference is visible.
"""

import numpy as np

from lumiphase import (
    LossConfig,
    contrast_loss,
    entropy_loss,
    exposure_loss,
    phase_only_reconstruction,
    soft_histogram,
    total_loss,
    tv_loss,
    fft2,
    phase,
)


def main():
    rng = np.random.default_rng(4)
    cfg = LossConfig()

    print("=== exposure: distance of the mean from the shifted target ===")
    for mean in (0.1, 0.35, 0.45, 0.6):
        img = np.full((8, 8, 3), mean)
        print(f"  mean {mean:4.2f}: l_ex = {float(exposure_loss(img, 0.45, 0.0)):.3f}")

    print("\n=== soft histogram: differentiable, still sums to one ===")
    values = rng.uniform(0, 1, size=256)
    p = soft_histogram(values, bins=16, range_max=1.0)
    print(f"  16 bins over 256 values: total mass {p.sum():.12f}, max bin {p.max():.4f}")

    print("\n=== entropy and contrast on phase-only structure maps ===")
    flat = np.full((16, 16), 0.5)
    textured = rng.uniform(0, 1, size=(16, 16))
    for name, img in (("flat", flat), ("textured", textured)):
        s_map = phase_only_reconstruction(phase(fft2(img)))
        print(
            f"  {name:9s}: entropy {float(entropy_loss(s_map, cfg)):6.3f}   "
            f"contrast {float(contrast_loss(s_map, cfg)):+.5f}"
        )

    print("\n=== total variation: zero exactly on constants ===")
    step = np.zeros((8, 8))
    step[:, 4:] = 1.0
    print(f"  constant: {float(tv_loss(flat)):.1f}")
    print(f"  step edge: {float(tv_loss(step)):.1f} (one unit jump per row)")
    print(f"  noise:     {float(tv_loss(textured)):.1f}")

    print("\n=== the weighted objective ===")
    img = rng.uniform(0.1, 0.5, size=(16, 16, 3))
    s_map = phase_only_reconstruction(phase(fft2(img)))
    total, parts = total_loss(img, s_map, e_d=-0.04, cfg=cfg)
    print(f"  total {float(total):.4f} with parts:")
    for key, value in parts.items():
        print(f"    {key}: {float(value):+.4f}")


if __name__ == "__main__":
    main()
