"""Shared constellation lookup tables for the demodulation kernels.

Both the compiled kernel and the numpy fallback consume the exact same
arrays (built once here with the scalar libm cos/sin), so their
decision arithmetic is bit-identical: no kernel ever re-derives a
constellation point through its own transcendental calls.
"""

from __future__ import annotations

import math

import numpy as np

# Largest constellation the kernels handle; matches the adaptation
# module's MAX_ORDERS = 8 (2^8-PSK).
MAX_CONSTELLATION = 256

_SIZES = [2 ** j for j in range(1, MAX_CONSTELLATION.bit_length())]  # 2..256


def _build() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    total = sum(_SIZES)
    re = np.empty(total)
    im = np.empty(total)
    offsets = np.full(MAX_CONSTELLATION + 1, -1, dtype=np.int64)
    pos = 0
    for m in _SIZES:
        offsets[m] = pos
        for k in range(m):
            phase = (2.0 * math.pi * k) / m
            re[pos + k] = math.cos(phase)
            im[pos + k] = math.sin(phase)
        pos += m
    popcount = np.array([bin(v).count("1") for v in range(MAX_CONSTELLATION)], dtype=np.int64)
    for arr in (re, im, offsets, popcount):
        arr.setflags(write=False)
    return re, im, offsets, popcount


TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT = _build()
