"""Recursive Fourier-phase modulation.

The blur-targeting module rewrites only the phase of the spectrum through
a bounded recursion; the magnitude passes through untouched.  The demo
verifies the identity paths (sharp score, zero fields), the exact
magnitude preservation, and shows the phase-only structure map that the
entropy and contrast objectives consume.
"""

import numpy as np

from lumiphase import PhaseModStack, fft2, phase, phase_only_reconstruction, apply_phase_modulation
from lumiphase.phasemod import phase_modulation_forward


def texture(n=32, seed=2):
    rng = np.random.default_rng(seed)
    base = rng.uniform(0, 1, size=(n, n))
    for _ in range(2):  # cheap smoothing for a natural-ish texture
        base = (base + np.roll(base, 1, 0) + np.roll(base, 1, 1)) / 3
    return base


def main():
    img = texture()
    stack = PhaseModStack(np.full((8, 32, 32), 0.2), strength=1.0)

    print("=== identity paths ===")
    sharp = apply_phase_modulation(img, stack, b=0.0)
    print(f"  b = 0 (sharp input):      max |out - in| = {np.abs(sharp - img).max():.2e}")
    zero = apply_phase_modulation(img, PhaseModStack(np.zeros((8, 32, 32))), b=1.0)
    print(f"  all-zero step fields:     max |out - in| = {np.abs(zero - img).max():.2e}")

    print("\n=== magnitude is preserved exactly, only phase moves ===")
    x_pre, ph_star, residual = phase_modulation_forward(img, stack, b=0.9)
    mag_in = np.abs(fft2(img))
    mag_out = np.abs(fft2(x_pre))
    print(f"  max relative magnitude drift: {np.max(np.abs(mag_out - mag_in)) / mag_in.max():.2e}")
    print(f"  imaginary residue of the inverse: {residual:.2e}")
    moved = np.abs(np.angle(np.exp(1j * (ph_star - phase(fft2(img)))))).max()
    print(f"  largest phase shift applied: {moved:.3f} rad")

    print("\n=== the phase-only structure map ===")
    s_map = phase_only_reconstruction(ph_star)
    print(f"  range [{s_map.min():.4f}, {s_map.max():.4f}] (provably within [0, 1])")
    print(f"  mean {s_map.mean():.4f}; the objectives score its histogram and patch variance")

    print("\n=== strength scales with the blurriness score ===")
    for b in (0.0, 0.25, 0.5, 1.0):
        out = apply_phase_modulation(img, stack, b=b)
        print(f"  b = {b:4.2f}: mean absolute change = {np.abs(out - img).mean():.5f}")


if __name__ == "__main__":
    main()
