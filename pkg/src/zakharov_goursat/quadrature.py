"""Product-integration rules for causal convolutions with exponential weights.

Every Duhamel integral in the package has the form

    out(x_j) = int_0^{x_j} exp(mu x') K(x') D(x_j - x') dx'

on a uniform grid, where ``exp(mu x')`` carries a fast phase that is
integrated exactly and ``K(x') D(x_j - x')`` is interpolated linearly between
nodes. The exponential weights are the usual hat-function moments, summed with
FFT convolutions so that a full grid costs O(N log N) per axis.
"""

import numpy as np
from scipy.signal import fftconvolve

_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 14


def _right_moment(x):
    """int_0^1 exp(x s) (1 - s) ds, vectorized and stable near x = 0."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUTOFF
    xs = x[small]
    acc = np.zeros_like(xs)
    fact = 2.0
    power = np.ones_like(xs)
    for m in range(_SERIES_TERMS):
        acc = acc + power / fact
        power = power * xs
        fact *= m + 3
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.expm1(xl) - xl) / xl**2
    return out


def hat_moments(x):
    """Return ``(L, R)``, the left/right hat moments of ``exp(x s)``.

    ``R(x) = int_0^1 e^{xs}(1-s) ds`` and ``L(x) = int_{-1}^0 e^{xs}(1+s) ds
    = R(-x)``.
    """
    x = np.asarray(x, dtype=complex)
    return _right_moment(-x), _right_moment(x)


def prodint_weights(n, h, mu):
    """Weights of the exponential product-trapezoid rule.

    Returns ``(alpha, beta, gamma)`` such that

        out[j] = sum_{m=0}^{j} w_{j,m} K[m] D[j-m],
        w_{j,m} = alpha[m] - [m == 0] beta - [m == j] gamma[j].

    ``mu`` may be an array; the node index is prepended to its shape.
    """
    mu = np.asarray(mu, dtype=complex)
    L, R = hat_moments(mu * h)
    x = h * np.arange(n).reshape((n,) + (1,) * mu.ndim)
    phase = np.exp(mu * x)
    alpha = phase * h * (L + R)
    beta = h * L
    gamma = phase * h * R
    return alpha, beta, gamma


def causal_convolve(a, b, axis):
    """First ``n`` terms of the discrete convolution of ``a`` and ``b`` along ``axis``.

    Other axes broadcast.
    """
    n = a.shape[axis]
    full = fftconvolve(a, b, axes=axis)
    index = [slice(None)] * full.ndim
    index[axis] = slice(0, n)
    return full[tuple(index)]


def _along(vec, axis, ndim):
    """Reshape a 1-D weight vector so that it runs along ``axis``."""
    shape = [1] * ndim
    shape[axis] = vec.shape[0]
    return vec.reshape(shape)


def _take(arr, idx, axis):
    return np.take(arr, [idx], axis=axis)


def prodint1(K, D, h, mu, axis=0):
    """Lag convolution ``int_0^x exp(mu x') K(x') D(x - x') dx'`` along one axis.

    ``K`` and ``D`` must broadcast against each other; ``mu`` is a scalar.
    """
    K = np.asarray(K)
    D = np.asarray(D)
    ndim = max(K.ndim, D.ndim)
    K = K.reshape((1,) * (ndim - K.ndim) + K.shape)
    D = D.reshape((1,) * (ndim - D.ndim) + D.shape)
    n = max(K.shape[axis], D.shape[axis])
    alpha, beta, gamma = prodint_weights(n, h, mu)
    alpha = _along(alpha.reshape(n), axis, ndim)
    gamma = _along(gamma.reshape(n), axis, ndim)
    beta = complex(beta)
    out = causal_convolve(alpha * K, D, axis)
    out = out - beta * _take(K, 0, axis) * D
    out = out - gamma * K * _take(D, 0, axis)
    return out


def prodint_modes(D, h, mu, axis=0):
    """Lag convolution with unit kernel and a per-mode rate ``mu``.

    Computes ``int_0^x exp(mu x') D(x - x') dx'`` where ``mu`` broadcasts
    against ``D`` with the lag axis removed (e.g. one rate per Fourier mode).
    """
    D = np.asarray(D)
    n = D.shape[axis]
    mu = np.asarray(mu, dtype=complex)
    mu_b = np.expand_dims(mu, axis) if mu.ndim == D.ndim else mu
    L, R = hat_moments(mu_b * h)
    shape = [1] * D.ndim
    shape[axis] = n
    x = h * np.arange(n).reshape(shape)
    phase = np.exp(mu_b * x)
    alpha = phase * h * (L + R)
    beta = h * L
    gamma = phase * h * R
    out = causal_convolve(alpha, D, axis)
    out = out - beta * D
    out = out - gamma * _take(D, 0, axis)
    return out


def prodint2(K, D, ht, hz, mu_t, mu_z):
    """Two-dimensional lag convolution over the first two axes.

    Computes ``int_0^t int_0^z exp(mu_t t' + mu_z z') K(t',z') D(t-t', z-z')``
    with bilinear interpolation of ``K D`` and exact exponential weights.
    Trailing axes broadcast.
    """
    K = np.asarray(K)
    D = np.asarray(D)
    nt, nz = K.shape[0], K.shape[1]
    at, bt, gt = (np.asarray(w) for w in prodint_weights(nt, ht, mu_t))
    az, bz, gz = (np.asarray(w) for w in prodint_weights(nz, hz, mu_z))
    extra = (1,) * (max(K.ndim, D.ndim) - 2)
    at = at.reshape((nt, 1) + extra)
    gt = gt.reshape((nt, 1) + extra)
    az = az.reshape((1, nz) + extra)
    gz = gz.reshape((1, nz) + extra)
    bt = complex(bt)
    bz = complex(bz)

    aK = at * az * K
    out = fftconvolve(aK, D, axes=(0, 1))[:nt, :nz]
    # t-lag endpoint corrections
    row0 = az * K[:1]
    out -= bt * causal_convolve(row0, D, 1)
    out -= gt * causal_convolve(az * K, D[:1], 1)
    # z-lag endpoint corrections
    col0 = at * K[:, :1]
    out -= bz * causal_convolve(col0, D, 0)
    out -= gz * causal_convolve(at * K, D[:, :1], 0)
    # corners
    out += bt * bz * K[:1, :1] * D
    out += bt * gz * K[:1] * D[:, :1]
    out += gt * bz * K[:, :1] * D[:1]
    out += gt * gz * K * D[:1, :1]
    return out
