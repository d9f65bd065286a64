"""Compiled per-lambda scattering kernels.

Both kernels walk the D transfer steps of a commutator-free scheme with
real coefficient table, using the closed-form exponential of each traceless
step matrix.  The real-lambda kernel accumulates H (1,0)^T without any
boundary phases (the caller applies them); the complex-lambda kernel folds
the phase exp(i lambda h w_j) into every exponential so the running vector
is the bounded u = phi * exp(i lambda t), and can co-propagate the
lambda-derivative.
"""

import cmath
import math

import numpy as np
from numba import njit

SERIES_THRESHOLD = 1e-4


@njit(cache=True, nogil=True)
def scatter_real(lams, offdiag, wsum, h, kappa, out):
    """offdiag: (D, J) effective off-diagonal combinations o_j (without the
    h factor, which is applied here).  out: (M, 2) receives H (1,0)^T."""
    d_steps, j_exp = offdiag.shape
    for i in range(lams.size):
        lam = lams[i]
        u1 = 1.0 + 0.0j
        u2 = 0.0 + 0.0j
        for n in range(d_steps):
            for j in range(j_exp):
                dg = lam * h * wsum[j]
                o = offdiag[n, j] * h
                w2 = -dg * dg - kappa * (o.real * o.real + o.imag * o.imag)
                if w2 >= 0.0:
                    s = math.sqrt(w2)
                    if s > SERIES_THRESHOLD:
                        ch = math.cosh(s)
                        shc = math.sinh(s) / s
                    else:
                        ch = 1.0 + w2 / 2.0 + w2 * w2 / 24.0
                        shc = 1.0 + w2 / 6.0 + w2 * w2 / 120.0
                else:
                    s = math.sqrt(-w2)
                    if s > SERIES_THRESHOLD:
                        ch = math.cos(s)
                        shc = math.sin(s) / s
                    else:
                        ch = 1.0 + w2 / 2.0 + w2 * w2 / 24.0
                        shc = 1.0 + w2 / 6.0 + w2 * w2 / 120.0
                g11 = complex(ch, -dg * shc)
                g12 = o * shc
                v1 = g11 * u1 + g12 * u2
                v2 = -kappa * o.conjugate() * shc * u1 + g11.conjugate() * u2
                u1 = v1
                u2 = v2
        out[i, 0] = u1
        out[i, 1] = u2


@njit(cache=True, nogil=True)
def scatter_complex(lams, offdiag, wsum, h, kappa, want_deriv, out, dout):
    """Scaled propagation for complex lambda; out holds u(T+) = phi e^{i lam T+}
    given phi(T-) = (e^{-i lam T-}, 0); dout holds du/dlambda when requested."""
    d_steps, j_exp = offdiag.shape
    for i in range(lams.size):
        lam = lams[i]
        u1 = 1.0 + 0.0j
        u2 = 0.0 + 0.0j
        v1 = 0.0 + 0.0j
        v2 = 0.0 + 0.0j
        for n in range(d_steps):
            for j in range(j_exp):
                hw = h * wsum[j]
                dg = lam * hw
                o = offdiag[n, j] * h
                ob = -kappa * o.conjugate()
                w2 = -dg * dg + o * ob
                w = cmath.sqrt(w2)
                if abs(w) > SERIES_THRESHOLD:
                    ch = cmath.cosh(w)
                    shc = cmath.sinh(w) / w
                else:
                    ch = 1.0 + w2 / 2.0 + w2 * w2 / 24.0
                    shc = 1.0 + w2 / 6.0 + w2 * w2 / 120.0
                p = cmath.exp(1j * dg)
                g11 = p * (ch - 1j * dg * shc)
                g12 = p * (o * shc)
                g21 = p * (ob * shc)
                g22 = p * (ch + 1j * dg * shc)
                if want_deriv:
                    dw2 = -2.0 * dg * hw
                    dch = shc * dw2 / 2.0
                    if abs(w2) > SERIES_THRESHOLD * SERIES_THRESHOLD:
                        gf = (ch - shc) / w2
                    else:
                        gf = 1.0 / 3.0 + w2 / 30.0 + w2 * w2 / 840.0
                    dshc = gf * dw2 / 2.0
                    # d(pG)/dlambda = p*(i hw G + dG)
                    dg11 = p * (1j * hw * (ch - 1j * dg * shc)
                                + dch - 1j * hw * shc - 1j * dg * dshc)
                    dg12 = p * (1j * hw * o * shc + o * dshc)
                    dg21 = p * (1j * hw * ob * shc + ob * dshc)
                    dg22 = p * (1j * hw * (ch + 1j * dg * shc)
                                + dch + 1j * hw * shc + 1j * dg * dshc)
                    nv1 = g11 * v1 + g12 * v2 + dg11 * u1 + dg12 * u2
                    nv2 = g21 * v1 + g22 * v2 + dg21 * u1 + dg22 * u2
                    v1 = nv1
                    v2 = nv2
                nu1 = g11 * u1 + g12 * u2
                nu2 = g21 * u1 + g22 * u2
                u1 = nu1
                u2 = nu2
        out[i, 0] = u1
        out[i, 1] = u2
        if want_deriv:
            dout[i, 0] = v1
            dout[i, 1] = v2


@njit(cache=True, nogil=True)
def aberth_sweeps(coeffs, roots, max_sweeps, rtol):
    """Aberth-Ehrlich simultaneous root iteration, in place.

    coeffs: ascending, nonzero first and last entries.  roots holds the
    initial guesses and is updated sequentially (each root sees the latest
    positions of the others).  Points with modulus above one are handled
    through the reversed polynomial so Horner never overflows.  Returns the
    number of sweeps used.
    """
    n = coeffs.size - 1
    for sweep in range(max_sweeps):
        worst = 0.0
        for i in range(roots.size):
            z = roots[i]
            if abs(z) <= 1.0:
                p = coeffs[n]
                dp = 0.0 + 0.0j
                for k in range(n - 1, -1, -1):
                    dp = dp * z + p
                    p = p * z + coeffs[k]
                if p == 0.0 + 0.0j:
                    continue  # sitting on a root
                if dp == 0.0 + 0.0j:
                    continue
                newton = p / dp
            else:
                # p(z) = z^n q(1/z) with q the reversed polynomial, so
                # p/p' = z / (n - w q'(w)/q(w)) at w = 1/z
                w = 1.0 / z
                q = coeffs[0]
                dq = 0.0 + 0.0j
                for k in range(1, n + 1):
                    dq = dq * w + q
                    q = q * w + coeffs[k]
                if q == 0.0 + 0.0j:
                    continue
                denom = n - w * (dq / q)
                if denom == 0.0 + 0.0j:
                    continue
                newton = z / denom
            s = 0.0 + 0.0j
            for j in range(roots.size):
                if j != i:
                    diff = z - roots[j]
                    if diff != 0.0 + 0.0j:
                        s += 1.0 / diff
            d = 1.0 - newton * s
            if d == 0.0 + 0.0j:
                step = newton
            else:
                step = newton / d
            roots[i] = z - step
            rel = abs(step) / max(1.0, abs(z))
            if rel > worst:
                worst = rel
        if worst < rtol:
            return sweep + 1
    return max_sweeps
