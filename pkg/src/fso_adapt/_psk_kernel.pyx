# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gray-PSK demodulation/error-count kernel.

Same contract as `_psk_kernel_py.count_bit_errors`, and bit-identical
to it on the same inputs: constellation points come from the shared
tables, the received sample is plain multiply/add (the build disables
FP contraction), and nearest-phase decisions are strict-greater argmax
scans resolving ties to the lowest index.
"""

from libc.math cimport sqrt

BACKEND = "compiled"


def count_bit_errors(
    const double[::1] amp,
    const long long[::1] m_per_block,
    const double[::1] u,
    const double[::1] noise,
    Py_ssize_t symbols_per_block,
    const double[::1] tab_re,
    const double[::1] tab_im,
    const long long[::1] tab_offset,
    const long long[::1] popcount,
):
    cdef double sqrt_half = sqrt(0.5)
    cdef Py_ssize_t nb = amp.shape[0]
    cdef Py_ssize_t k = symbols_per_block
    cdef long long errors = 0
    cdef Py_ssize_t block, sym, slot
    cdef long long m, base, sent, decided, cand, xor_bits
    cdef double a, re, im, best, score

    with nogil:
        for block in range(nb):
            m = m_per_block[block]
            if m < 2:
                continue
            a = amp[block]
            base = tab_offset[m]
            for sym in range(k):
                slot = block * k + sym
                sent = <long long>(u[slot] * m)
                re = a * tab_re[base + sent] + sqrt_half * noise[2 * slot]
                im = a * tab_im[base + sent] + sqrt_half * noise[2 * slot + 1]
                if m == 2:
                    decided = 1 if re < 0.0 else 0
                else:
                    decided = 0
                    best = re * tab_re[base] + im * tab_im[base]
                    for cand in range(1, m):
                        score = re * tab_re[base + cand] + im * tab_im[base + cand]
                        if score > best:
                            best = score
                            decided = cand
                xor_bits = (sent ^ (sent >> 1)) ^ (decided ^ (decided >> 1))
                errors += popcount[xor_bits]
    return int(errors)
