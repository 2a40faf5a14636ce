"""Shared fixtures and independent oracles.

The DFT oracles below evaluate the transform definition by direct
summation (via explicitly constructed exponential matrices), never
touching numpy.fft, so they can vouch for the library's transforms.
"""

import numpy as np
import pytest


def dft2_direct(x):
    """O(N^2) direct-summation 2-D DFT: F[u,v] = sum_mn x[m,n] e^{-2pi i(um/H+vn/W)}."""
    x = np.asarray(x, dtype=np.complex128)
    h, w = x.shape[:2]
    wh = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    ww = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    if x.ndim == 2:
        return np.einsum("um,vn,mn->uv", wh, ww, x)
    return np.einsum("um,vn,mnc->uvc", wh, ww, x)


def idft2_direct(spec):
    """Direct-summation inverse DFT with the 1/(H*W) factor."""
    spec = np.asarray(spec, dtype=np.complex128)
    h, w = spec.shape[:2]
    wh = np.exp(2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    ww = np.exp(2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    if spec.ndim == 2:
        return np.einsum("um,vn,mn->uv", wh, ww, spec) / (h * w)
    return np.einsum("um,vn,mnc->uvc", wh, ww, spec) / (h * w)


def numeric_gradient(f, x, h=1e-6):
    """Central-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        grad[idx] = (f(xp) - f(xm)) / (2.0 * h)
        it.iternext()
    return grad


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
