"""Even-cosine and full Fourier transforms on uniform periodic grids.

Grids always start at the left end of the period, x_j = -L/2 + j L / n, so
for the fundamental domain [-pi/k0, pi/k0) the points x = -pi/k0 and x = 0
(j = n/2) are grid nodes.
"""

import numpy as np


def grid(k0, n):
    """Uniform grid with `n` points on [-pi/k0, pi/k0)."""
    length = 2.0 * np.pi / k0
    return -0.5 * length + length * np.arange(n) / n


def cosine_samples(coeffs, k0, n, order=0):
    """Evaluate d^order/dx^order of sum_l a_l cos(l k0 x) on `grid(k0, n)`.

    Needs n > 2 * len(coeffs) to avoid aliasing.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    nmodes = coeffs.size
    if n <= 2 * nmodes:
        raise ValueError(f"grid of {n} points aliases {nmodes} cosine modes")
    ell = np.arange(1, nmodes + 1)
    # shift to x_0 = -pi/k0 contributes (-1)^l
    spec = np.zeros(n // 2 + 1, dtype=complex)
    spec[1:nmodes + 1] = coeffs * (-1.0) ** ell * (1j * ell * k0) ** order
    return np.fft.irfft(spec, n) * (n / 2.0)


def cosine_coefficients(samples, nmodes):
    """Project grid samples onto cos(l k0 x), l = 1..nmodes (trapezoid rule)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    ell = np.arange(1, nmodes + 1)
    spec = np.fft.rfft(samples)[1:nmodes + 1]
    return (2.0 / n) * (-1.0) ** ell * spec.real


def cosine_matrix(k0, nmodes, n):
    """Dense collocation matrix C[j, l-1] = cos(l k0 x_j)."""
    x = grid(k0, n)
    return np.cos(np.outer(x, k0 * np.arange(1, nmodes + 1)))


def wavenumbers(n, length, odd=False):
    """FFT wavenumbers for a period `length`; Nyquist zeroed for odd derivatives."""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    if odd and n % 2 == 0:
        k[n // 2] = 0.0
    return k


def derivative(f, length, order):
    """Spectral derivative of real periodic samples."""
    f = np.asarray(f, dtype=float)
    n = f.size
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(mult * np.fft.rfft(f), n)


def differentiation_matrix(n, length, order, shift=0.0):
    """Dense physical-space Fourier differentiation matrix.

    `shift` adds a Bloch wavenumber, i.e. the matrix represents
    (d/dx + i*shift)^order acting on the periodic part of e^{i shift x} p(x).
    """
    k = wavenumbers(n, length, odd=(order % 2 == 1 and shift == 0.0)) + shift
    eye = np.eye(n)
    fwd = np.fft.fft(eye, axis=0)
    return np.fft.ifft((1j * k)[:, None] ** order * fwd, axis=0)
