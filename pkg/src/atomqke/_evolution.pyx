# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepped propagator for blocked two-level drives.

Same contract as ``_evolution_py.evolve_stepped_blocked``: the step
Hamiltonian of a single-atom drive plus diagonal interaction is
block-diagonal over the spectator configuration, so each step applies a
closed-form 2x2 exponential per block.  No per-step Python or LAPACK
overhead remains.
"""

import numpy as np

from libc.math cimport cos, hypot, sin


def evolve_stepped_blocked(w_lo, w_hi, w_spectator, areas, phase, rhs):
    """Stepped evolution of a two-level drive on one atom of a 3-level chain."""
    w_lo_c = np.ascontiguousarray(w_lo, dtype=np.float64)
    w_hi_c = np.ascontiguousarray(w_hi, dtype=np.float64)
    w_sp_c = np.ascontiguousarray(w_spectator, dtype=np.float64)
    areas_c = np.ascontiguousarray(areas, dtype=np.float64)
    out = np.array(rhs, dtype=np.complex128, copy=True, order="C")

    cdef double[::1] wl = w_lo_c
    cdef double[::1] wh = w_hi_c
    cdef double[::1] ws = w_sp_c
    cdef double[::1] ar = areas_c
    cdef double complex[:, :, ::1] o = out

    cdef Py_ssize_t n_blocks = o.shape[0]
    cdef Py_ssize_t m = o.shape[2]
    cdef Py_ssize_t n_steps = ar.shape[0]
    if o.shape[1] != 3:
        raise ValueError("rhs must have shape (blocks, 3, columns)")
    if wl.shape[0] != n_blocks or wh.shape[0] != n_blocks or ws.shape[0] != n_blocks:
        raise ValueError("per-block phase arrays must match the block count")

    cdef double ph = phase
    cdef double complex off_lo = -1j * (cos(ph) + 1j * sin(ph))
    cdef double complex off_hi = -1j * (cos(ph) - 1j * sin(ph))

    cdef Py_ssize_t b, k, col
    cdef double mu, delta, kappa, rho, sinc, c_rho, spec_phase
    cdef double complex pre, u00, u01, u10, u11, lo_amp, hi_amp, spec_factor
    for b in range(n_blocks):
        mu = 0.5 * (wl[b] + wh[b])
        delta = 0.5 * (wl[b] - wh[b])
        pre = cos(mu) - 1j * sin(mu)
        for k in range(n_steps):
            kappa = 0.5 * ar[k]
            rho = hypot(delta, kappa)
            if rho > 0.0:
                sinc = sin(rho) / rho
            else:
                sinc = 1.0
            c_rho = cos(rho)
            u00 = pre * (c_rho - 1j * sinc * delta)
            u11 = pre * (c_rho + 1j * sinc * delta)
            u01 = pre * off_lo * sinc * kappa
            u10 = pre * off_hi * sinc * kappa
            for col in range(m):
                lo_amp = o[b, 0, col]
                hi_amp = o[b, 2, col]
                o[b, 0, col] = u00 * lo_amp + u01 * hi_amp
                o[b, 2, col] = u10 * lo_amp + u11 * hi_amp
        spec_phase = ws[b] * n_steps
        spec_factor = cos(spec_phase) - 1j * sin(spec_phase)
        for col in range(m):
            o[b, 1, col] = o[b, 1, col] * spec_factor
    return out
