# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels.

Both kernels consume uniforms one at a time from a numpy BitGenerator in
exactly the order the pure-Python fallback does, so for a given generator
state the two backends produce bit-identical spin trajectories.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef inline bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def glauber_sweeps(signed char[::1] spins, const int[:, ::1] nbrs,
                   const double[::1] flip_prob, long n_sweeps, object rng):
    """Run n_sweeps Glauber sweeps in place; one sweep is N attempts at
    uniformly random sites.

    flip_prob is the flattened (2, 2d+1) acceptance table indexed by
    (spin, neighbor sum): entry [(s+1)/2 * (2d+1) + (m+2d)/2].
    """
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t n = spins.shape[0]
    cdef int twod = nbrs.shape[1]
    cdef Py_ssize_t attempt, site
    cdef long sweep
    cdef int a, m, s
    with nogil:
        for sweep in range(n_sweeps):
            for attempt in range(n):
                site = <Py_ssize_t>(bg.next_double(bg.state) * n)
                m = 0
                for a in range(twod):
                    m += spins[nbrs[site, a]]
                s = spins[site]
                if bg.next_double(bg.state) < flip_prob[((s + 1) >> 1) * (twod + 1) + ((m + twod) >> 1)]:
                    spins[site] = -s


def wolff_updates(signed char[::1] spins, const int[:, ::1] nbrs,
                  double p_add, long n_updates, object rng):
    """Run n_updates Wolff cluster flips in place; returns total flipped sites.

    Cluster members are flipped as they are added, which marks them
    visited; the stack is LIFO with neighbors pushed in table order.
    """
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t n = spins.shape[0]
    cdef int twod = nbrs.shape[1]
    stack_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t site, j, depth
    cdef long update, flipped = 0
    cdef int a
    cdef signed char cs
    with nogil:
        for update in range(n_updates):
            site = <Py_ssize_t>(bg.next_double(bg.state) * n)
            cs = spins[site]
            spins[site] = -cs
            flipped += 1
            stack[0] = site
            depth = 1
            while depth > 0:
                depth -= 1
                site = stack[depth]
                for a in range(twod):
                    j = nbrs[site, a]
                    if spins[j] == cs:
                        if bg.next_double(bg.state) < p_add:
                            spins[j] = -cs
                            flipped += 1
                            stack[depth] = j
                            depth += 1
    return flipped
