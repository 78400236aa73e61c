# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hard-pulse rotation kernel (see _kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos, M_PI

cnp.import_array()


def propagate(const double[::1] b1x, const double[::1] b1y,
              const double[::1] offset, const double[::1] grad,
              const double[::1] z, double dt):
    cdef Py_ssize_t n = b1x.shape[0]
    cdef Py_ssize_t m = z.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((3, m))
    cdef double[:, ::1] o = out
    cdef double two_pi_dt = (2.0 * M_PI) * dt
    cdef double mx, my, mz, bx, by, bz, nrm, kx, ky, kz, theta, c, s, omc
    cdef double dot, crx, cry, crz, zi, nx, ny
    cdef Py_ssize_t i, k
    with nogil:
        for i in range(m):
            mx = 0.0
            my = 0.0
            mz = 1.0
            zi = z[i]
            for k in range(n):
                bx = b1x[k]
                by = b1y[k]
                bz = grad[k] * zi - offset[k]
                nrm = sqrt(bx * bx + by * by + bz * bz)
                if nrm > 0.0:
                    kx = bx / nrm
                    ky = by / nrm
                    kz = bz / nrm
                    theta = two_pi_dt * nrm
                    c = cos(theta)
                    s = sin(theta)
                    dot = kx * mx + ky * my + kz * mz
                    crx = ky * mz - kz * my
                    cry = kz * mx - kx * mz
                    crz = kx * my - ky * mx
                    omc = 1.0 - c
                    nx = c * mx + s * crx + omc * dot * kx
                    ny = c * my + s * cry + omc * dot * ky
                    mz = c * mz + s * crz + omc * dot * kz
                    mx = nx
                    my = ny
            o[0, i] = mx
            o[1, i] = my
            o[2, i] = mz
    return out
