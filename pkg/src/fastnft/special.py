"""Complex gamma function.

Lanczos approximation (g = 7, 9 terms) with the reflection formula for the
left half plane.  Relative accuracy is ~1e-14 over the argument ranges the
reference spectra need, which comfortably beats the 1e-13 budget of the
closed-form oracles.
"""

import numpy as np

# Godfrey's coefficients for g = 7.
_LANCZOS_G = 7.0
_LANCZOS_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def gamma(z):
    """Gamma(z) for complex (array) argument.

    Uses the reflection formula Gamma(z)Gamma(1-z) = pi/sin(pi z) for
    Re z < 0.5 so the Lanczos series is only ever evaluated in its stable
    half plane.
    """
    z = np.asarray(z, dtype=np.complex128)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)

    out = np.empty_like(z)
    left = z.real < 0.5
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (np.sin(np.pi * zl) * _lanczos(1.0 - zl))
    if np.any(~left):
        out[~left] = _lanczos(z[~left])
    return out[0] if scalar else out


def _lanczos(z):
    # series is written for Gamma(z) with Re z >= 0.5
    z = z - 1.0
    x = np.full_like(z, _LANCZOS_P[0])
    for i in range(1, len(_LANCZOS_P)):
        x = x + _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return np.sqrt(2.0 * np.pi) * t ** (z + 0.5) * np.exp(-t) * x
