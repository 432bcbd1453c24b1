# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel for Monte-Carlo phase averaging.

Accumulates exp(i * angle) terms over a fixed fan-in-2 binary tree so the
summation order is independent of vectorization details.  Real and imaginary
parts are carried in separate buffers; complex addition is componentwise, so
the reduction performs bit-identical float operations to the numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

BACKEND = "cython"


def tree_phase_sum(double[::1] angles):
    """Sum of exp(i * angles[k]) with a fan-in-2 pairwise reduction."""
    cdef Py_ssize_t k = angles.shape[0]
    if k == 0:
        raise ValueError("cannot average an empty sample block")
    cdef Py_ssize_t m = 1
    while m < k:
        m <<= 1
    re_arr = np.zeros(m, dtype=np.float64)
    im_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    cdef Py_ssize_t i, n, half
    with nogil:
        for i in range(k):
            re[i] = cos(angles[i])
            im[i] = sin(angles[i])
        n = m
        while n > 1:
            half = n >> 1
            for i in range(half):
                re[i] = re[2 * i] + re[2 * i + 1]
                im[i] = im[2 * i] + im[2 * i + 1]
            n = half
    return complex(re[0], im[0])
