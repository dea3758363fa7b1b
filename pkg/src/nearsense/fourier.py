"""Iterative radix-2 decimation-in-time FFT.

The transform behind the spectral features is implemented here directly so it
can be tested on its own against a naive DFT. It accepts stacks of signals
(any leading axes) and transforms along the last axis in one vectorized pass.
"""

from __future__ import annotations

import numpy as np

from ._validation import is_power_of_two
from .errors import DataError

__all__ = ["fft_radix2", "fft_magnitudes"]


def _bit_reverse_indices(n: int) -> np.ndarray:
    """Index permutation that orders 0..n-1 by reversed bit pattern."""
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft_radix2(x) -> np.ndarray:
    """Unnormalized discrete Fourier transform along the last axis.

    The length of the last axis must be a power of two. Real or complex
    input is accepted; the result is complex128 with the same shape.
    """
    x = np.asarray(x)
    if x.ndim == 0:
        raise DataError("FFT input must have at least one axis")
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise DataError(f"FFT length must be a power of two, got {n}")
    out = np.ascontiguousarray(x[..., _bit_reverse_indices(n)], dtype=np.complex128)
    half = 1
    while half < n:
        step = half * 2
        twiddle = np.exp(-1j * np.pi * np.arange(half) / half)
        blocks = out.reshape(*out.shape[:-1], n // step, step)
        odd = blocks[..., half:] * twiddle
        upper = blocks[..., :half] - odd
        blocks[..., :half] += odd
        blocks[..., half:] = upper
        half = step
    return out


def fft_magnitudes(series) -> np.ndarray:
    """Magnitude spectrum |FFT(series)| along the last axis."""
    return np.abs(fft_radix2(series))
