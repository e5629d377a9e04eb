"""Numpy implementation of the Gray-PSK demodulation/error-count kernel.

This is the portable fallback; the Cython extension `_psk_kernel`
implements the same contract.  Given pre-drawn randomness the two are
bit-identical: the received sample is formed from the shared
constellation tables with plain multiply/add (no fused contraction on
the compiled side), and the nearest-phase decision is an argmax of dot
products against the same tables, ties resolving to the lowest index in
both.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "numpy"

_SQRT_HALF = math.sqrt(0.5)  # per-dimension noise scale for unit total power
_ARGMAX_SLAB = 1 << 16  # bounds the (symbols x M) score matrix to ~16 MB


def count_bit_errors(
    amp: np.ndarray,
    m_per_block: np.ndarray,
    u: np.ndarray,
    noise: np.ndarray,
    symbols_per_block: int,
    tab_re: np.ndarray,
    tab_im: np.ndarray,
    tab_offset: np.ndarray,
    popcount: np.ndarray,
) -> int:
    """Count Gray-decoded bit errors over a batch of fading blocks.

    amp:      per-block signal amplitude sqrt(snr) * I, shape (nb,)
    m_per_block: per-block constellation size, 0/1 meaning "no
              transmission" (the block's randomness is skipped)
    u:        uniforms in [0,1), one per symbol slot, shape (nb * k,)
    noise:    standard normals, interleaved re/im, shape (2 * nb * k,)
    """
    k = symbols_per_block
    amp_sym = np.repeat(amp, k)
    m_sym = np.repeat(m_per_block, k)
    noise_re = noise[0::2]
    noise_im = noise[1::2]

    errors = 0
    for m in np.unique(m_sym):
        m = int(m)
        if m < 2:
            continue
        sel = np.flatnonzero(m_sym == m)
        base = int(tab_offset[m])
        idx = (u[sel] * m).astype(np.int64)  # exact: m is a power of two
        re = amp_sym[sel] * tab_re[base + idx] + _SQRT_HALF * noise_re[sel]
        im = amp_sym[sel] * tab_im[base + idx] + _SQRT_HALF * noise_im[sel]
        if m == 2:
            decided = (re < 0.0).astype(np.int64)
        else:
            points_re = tab_re[base : base + m]
            points_im = tab_im[base : base + m]
            decided = np.empty(sel.size, dtype=np.int64)
            for start in range(0, sel.size, _ARGMAX_SLAB):
                stop = min(start + _ARGMAX_SLAB, sel.size)
                scores = (
                    re[start:stop, None] * points_re[None, :]
                    + im[start:stop, None] * points_im[None, :]
                )
                decided[start:stop] = np.argmax(scores, axis=1)
        sent_gray = idx ^ (idx >> 1)
        decided_gray = decided ^ (decided >> 1)
        errors += int(popcount[sent_gray ^ decided_gray].sum())
    return errors
