"""Minimal reverse-mode automatic differentiation over numpy arrays.

Only the operations the enhancement pipeline needs are implemented.  A
``Tensor`` wraps a float64 ndarray together with the parent nodes and the
vector-Jacobian products that route an upstream gradient to them.  The
DFT primitives exploit the symmetry of the transform matrix, so their
adjoints are again plain FFT calls; every vjp is checked against central
finite differences in the test suite.

The module-level helpers (``log``, ``sqrt``, ``arctan2``, ...) dispatch on
the argument type, which lets the numerical pipeline code be written once
and run both on raw arrays and on tracked tensors.
"""

import numpy as np


def _unbroadcast(grad, shape):
    """Sum-reduce ``grad`` back to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def _sigmoid_np(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Tensor:
    """A node in the computation graph."""

    __slots__ = ("value", "grad", "_parents", "_vjps")

    # Let python fall back to Tensor.__r*__ instead of numpy elementwise ops.
    __array_ufunc__ = None

    def __init__(self, value, parents=(), vjps=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self._parents = tuple(parents)
        self._vjps = tuple(vjps)

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def __repr__(self):
        return f"Tensor(shape={self.value.shape})"

    # -- graph traversal ------------------------------------------------

    def backward(self):
        """Accumulate gradients of this (scalar) node into the graph."""
        if self.value.size != 1:
            raise ValueError("backward() requires a scalar node")
        order = []
        seen = set()
        stack = [(self, 0)]
        while stack:
            node, state = stack.pop()
            if state == 0:
                if id(node) in seen:
                    continue
                seen.add(id(node))
                stack.append((node, 1))
                for p in node._parents:
                    if id(p) not in seen:
                        stack.append((p, 0))
            else:
                order.append(node)
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node.grad is None:
                continue
            for parent, vjp in zip(node._parents, node._vjps):
                contrib = vjp(node.grad)
                parent.grad = contrib if parent.grad is None else parent.grad + contrib

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor(
            a.value + b.value,
            parents=(a, b),
            vjps=(
                lambda g: _unbroadcast(g, a.value.shape),
                lambda g: _unbroadcast(g, b.value.shape),
            ),
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor(
            a.value - b.value,
            parents=(a, b),
            vjps=(
                lambda g: _unbroadcast(g, a.value.shape),
                lambda g: _unbroadcast(-g, b.value.shape),
            ),
        )

    def __rsub__(self, other):
        return as_tensor(other).__sub__(self)

    def __mul__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor(
            a.value * b.value,
            parents=(a, b),
            vjps=(
                lambda g: _unbroadcast(g * b.value, a.value.shape),
                lambda g: _unbroadcast(g * a.value, b.value.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor(
            a.value / b.value,
            parents=(a, b),
            vjps=(
                lambda g: _unbroadcast(g / b.value, a.value.shape),
                lambda g: _unbroadcast(-g * a.value / b.value**2, b.value.shape),
            ),
        )

    def __rtruediv__(self, other):
        return as_tensor(other).__truediv__(self)

    def __neg__(self):
        a = self
        return Tensor(-a.value, parents=(a,), vjps=(lambda g: -g,))

    def __pow__(self, p):
        if not np.isscalar(p):
            raise TypeError("only scalar exponents are supported")
        a = self
        return Tensor(
            a.value**p,
            parents=(a,),
            vjps=(lambda g: g * p * a.value ** (p - 1),),
        )

    def __abs__(self):
        a = self
        return Tensor(np.abs(a.value), parents=(a,), vjps=(lambda g: g * np.sign(a.value),))

    # -- elementwise functions -------------------------------------------

    def log(self):
        a = self
        return Tensor(np.log(a.value), parents=(a,), vjps=(lambda g: g / a.value,))

    def exp(self):
        a = self
        out = np.exp(a.value)
        return Tensor(out, parents=(a,), vjps=(lambda g: g * out,))

    def sqrt(self):
        a = self
        out = np.sqrt(a.value)
        return Tensor(out, parents=(a,), vjps=(lambda g: g * 0.5 / out,))

    def cos(self):
        a = self
        return Tensor(np.cos(a.value), parents=(a,), vjps=(lambda g: -g * np.sin(a.value),))

    def sin(self):
        a = self
        return Tensor(np.sin(a.value), parents=(a,), vjps=(lambda g: g * np.cos(a.value),))

    def tanh(self):
        a = self
        out = np.tanh(a.value)
        return Tensor(out, parents=(a,), vjps=(lambda g: g * (1.0 - out**2),))

    def sigmoid(self):
        a = self
        out = _sigmoid_np(a.value)
        return Tensor(out, parents=(a,), vjps=(lambda g: g * out * (1.0 - out),))

    def relu(self):
        a = self
        return Tensor(
            np.maximum(a.value, 0.0),
            parents=(a,),
            vjps=(lambda g: g * (a.value > 0.0),),
        )

    # -- reductions and shaping -------------------------------------------

    def sum(self, axis=None, keepdims=False):
        a = self
        out = a.value.sum(axis=axis, keepdims=keepdims)

        def vjp(g):
            if axis is None:
                return np.broadcast_to(g, a.value.shape).copy()
            if not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, a.value.shape).copy()

        return Tensor(out, parents=(a,), vjps=(vjp,))

    def mean(self, axis=None, keepdims=False):
        count = self.value.size if axis is None else np.prod(
            [self.value.shape[ax] for ax in np.atleast_1d(axis)]
        )
        return self.sum(axis=axis, keepdims=keepdims) / float(count)

    def reshape(self, shape):
        a = self
        return Tensor(
            a.value.reshape(shape),
            parents=(a,),
            vjps=(lambda g: g.reshape(a.value.shape),),
        )

    def __getitem__(self, idx):
        a = self

        def vjp(g):
            full = np.zeros_like(a.value)
            np.add.at(full, idx, g)
            return full

        return Tensor(a.value[idx], parents=(a,), vjps=(vjp,))


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


# -- type-dispatching helpers (work on Tensor and on plain arrays) ---------


def _dispatch(x, method, np_func):
    return getattr(x, method)() if isinstance(x, Tensor) else np_func(np.asarray(x, dtype=np.float64))


def log(x):
    return _dispatch(x, "log", np.log)


def exp(x):
    return _dispatch(x, "exp", np.exp)


def sqrt(x):
    return _dispatch(x, "sqrt", np.sqrt)


def cos(x):
    return _dispatch(x, "cos", np.cos)


def sin(x):
    return _dispatch(x, "sin", np.sin)


def tanh(x):
    return _dispatch(x, "tanh", np.tanh)


def sigmoid(x):
    return x.sigmoid() if isinstance(x, Tensor) else _sigmoid_np(x)


def relu(x):
    return x.relu() if isinstance(x, Tensor) else np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def absolute(x):
    return abs(x) if isinstance(x, Tensor) else np.abs(np.asarray(x, dtype=np.float64))


def arctan2(y, x):
    """Elementwise atan2 with gradients; the gradient at the origin is 0."""
    if not isinstance(y, Tensor) and not isinstance(x, Tensor):
        return np.arctan2(y, x)
    y = as_tensor(y)
    x = as_tensor(x)
    denom = x.value**2 + y.value**2
    safe = np.where(denom == 0.0, 1.0, denom)
    mask = denom != 0.0
    return Tensor(
        np.arctan2(y.value, x.value),
        parents=(y, x),
        vjps=(
            lambda g: _unbroadcast(g * mask * x.value / safe, y.value.shape),
            lambda g: _unbroadcast(-g * mask * y.value / safe, x.value.shape),
        ),
    )


def detached_round(x):
    """round(x) treated as a constant (it is locally constant a.e.)."""
    if isinstance(x, Tensor):
        return np.round(x.value)
    return np.round(np.asarray(x, dtype=np.float64))


# -- DFT primitives ----------------------------------------------------------
#
# With W the unnormalized DFT matrix (symmetric), Re(W) and Im(W) are real
# symmetric, so the adjoint of each projection is the same projection of a
# forward transform of the gradient.  The inverse transform matrix is
# conj(W)/(H*W), also symmetric.


def fft2_re(x):
    """Real part of the unnormalized forward DFT over the first two axes."""
    if not isinstance(x, Tensor):
        return np.fft.fft2(np.asarray(x, dtype=np.float64), axes=(0, 1)).real
    a = x
    return Tensor(
        np.fft.fft2(a.value, axes=(0, 1)).real,
        parents=(a,),
        vjps=(lambda g: np.fft.fft2(g, axes=(0, 1)).real,),
    )


def fft2_im(x):
    """Imaginary part of the unnormalized forward DFT."""
    if not isinstance(x, Tensor):
        return np.fft.fft2(np.asarray(x, dtype=np.float64), axes=(0, 1)).imag
    a = x
    return Tensor(
        np.fft.fft2(a.value, axes=(0, 1)).imag,
        parents=(a,),
        vjps=(lambda g: np.fft.fft2(g, axes=(0, 1)).imag,),
    )


def ifft2_re(xr, xi):
    """Real part of the inverse DFT of the complex array xr + i*xi."""
    if not isinstance(xr, Tensor) and not isinstance(xi, Tensor):
        return np.fft.ifft2(np.asarray(xr) + 1j * np.asarray(xi), axes=(0, 1)).real
    xr = as_tensor(xr)
    xi = as_tensor(xi)
    out = np.fft.ifft2(xr.value + 1j * xi.value, axes=(0, 1)).real
    return Tensor(
        out,
        parents=(xr, xi),
        vjps=(
            lambda g: np.fft.ifft2(g, axes=(0, 1)).real,
            lambda g: -np.fft.ifft2(g, axes=(0, 1)).imag,
        ),
    )


def ifft2_im(xr, xi):
    """Imaginary part of the inverse DFT of xr + i*xi."""
    if not isinstance(xr, Tensor) and not isinstance(xi, Tensor):
        return np.fft.ifft2(np.asarray(xr) + 1j * np.asarray(xi), axes=(0, 1)).imag
    xr = as_tensor(xr)
    xi = as_tensor(xi)
    out = np.fft.ifft2(xr.value + 1j * xi.value, axes=(0, 1)).imag
    return Tensor(
        out,
        parents=(xr, xi),
        vjps=(
            lambda g: np.fft.ifft2(g, axes=(0, 1)).imag,
            lambda g: np.fft.ifft2(g, axes=(0, 1)).real,
        ),
    )


def flip_conj(x):
    """Index map (u, v) -> (-u mod H, -v mod W); its own adjoint and inverse."""
    from . import spectral

    if not isinstance(x, Tensor):
        return spectral.conjugate_flip(x)
    a = x
    return Tensor(
        spectral.conjugate_flip(a.value),
        parents=(a,),
        vjps=(lambda g: spectral.conjugate_flip(g),),
    )
