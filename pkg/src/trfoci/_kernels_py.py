"""Pure numpy implementation of the hard-pulse rotation kernel.

Mirrors ``_bloch_ext.pyx`` operation for operation so the two backends agree
to rounding of the transcendental functions.
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def propagate(b1x, b1y, offset, grad, z, dt):
    """Rotate equilibrium magnetization through a piecewise-constant field.

    Args:
        b1x, b1y: transverse field per sample, Hz.
        offset: per-sample frequency subtracted from the position term, Hz.
        grad: per-sample position-dependent term, Hz/mm.
        z: positions, mm.
        dt: sample duration, s.

    Returns:
        (3, len(z)) array of final magnetization.
    """
    z = np.ascontiguousarray(z, dtype=float)
    mx = np.zeros_like(z)
    my = np.zeros_like(z)
    mz = np.ones_like(z)
    two_pi_dt = TWO_PI * dt
    for k in range(len(b1x)):
        bx = b1x[k]
        by = b1y[k]
        bz = grad[k] * z - offset[k]
        nrm = np.sqrt(bx * bx + by * by + bz * bz)
        live = nrm > 0.0
        safe = np.where(live, nrm, 1.0)
        kx = bx / safe
        ky = by / safe
        kz = bz / safe
        theta = two_pi_dt * nrm
        c = np.where(live, np.cos(theta), 1.0)
        s = np.where(live, np.sin(theta), 0.0)
        dot = kx * mx + ky * my + kz * mz
        crx = ky * mz - kz * my
        cry = kz * mx - kx * mz
        crz = kx * my - ky * mx
        omc = 1.0 - c
        mx, my, mz = (c * mx + s * crx + omc * dot * kx,
                      c * my + s * cry + omc * dot * ky,
                      c * mz + s * crz + omc * dot * kz)
    return np.stack([mx, my, mz])
