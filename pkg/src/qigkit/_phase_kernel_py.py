"""Pure-numpy fallback for the compiled phase-averaging kernel.

Mirrors qigkit._phase_kernel: the fan-in-2 reduction pairs the same elements
at every level, so both backends perform the same float additions in the same
order.
"""

import numpy as np

BACKEND = "python"


def tree_phase_sum(angles):
    """Sum of exp(i * angles[k]) with a fan-in-2 pairwise reduction."""
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    k = len(angles)
    if k == 0:
        raise ValueError("cannot average an empty sample block")
    m = 1
    while m < k:
        m <<= 1
    buf = np.zeros(m, dtype=np.complex128)
    buf[:k] = np.cos(angles) + 1j * np.sin(angles)
    n = m
    while n > 1:
        buf = buf[0:n:2] + buf[1:n:2]
        n >>= 1
    return complex(buf[0])
