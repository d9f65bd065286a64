"""Closed-form 2x2 exponentials and polynomial 2x2 matrices.

Matrices are plain ndarrays of shape (2, 2) (or batches (..., 2, 2)).
Polynomial matrices carry their four entries as coefficient rows in
ascending order together with a monomial denominator power, i.e. they
represent  z**(-denom_power) * P(z)  with P polynomial.
"""

from dataclasses import dataclass

import numpy as np

#: below this |w| the sinhc/coshc series are used instead of the ratios
SERIES_THRESHOLD = 1e-4


def _w_squared(b):
    # For traceless B = [[p, q], [r, -p]]:  B^2 = (p^2 + q r) I.
    return b[..., 0, 0] ** 2 + b[..., 0, 1] * b[..., 1, 0]


def _cosh_sinhc(w2):
    """cosh(w) and sinh(w)/w from w^2, with a series branch near w = 0.

    Accepts real or complex w2; the series 1 + w2/6 + w2^2/120 is used for
    |w| < SERIES_THRESHOLD where the ratio would lose accuracy.
    """
    w2 = np.asarray(w2)
    w = np.sqrt(w2.astype(np.complex128))
    small = np.abs(w) < SERIES_THRESHOLD
    ch = np.cosh(w)
    ws = np.where(small, 1.0, w)  # avoid 0/0 in the masked lane
    shc = np.sinh(ws) / ws
    if np.any(small):
        shc = np.where(small, 1.0 + w2 / 6.0 + w2 * w2 / 120.0, shc)
        ch = np.where(small, 1.0 + w2 / 2.0 + w2 * w2 / 24.0, ch)
    return ch, shc


def expm_traceless(b, tol=1e-12):
    """Matrix exponential of a traceless 2x2 (batch of) matrix(es).

    expm(B) = cosh(w) I + sinhc(w) B  with  w^2 = -det B.  The result has
    determinant exactly 1 up to roundoff.  Raises ValueError if the trace
    is not negligible compared to the matrix scale.
    """
    b = np.asarray(b, dtype=np.complex128)
    tr = b[..., 0, 0] + b[..., 1, 1]
    scale = np.max(np.abs(b), axis=(-2, -1))
    if np.any(np.abs(tr) > tol * np.maximum(scale, 1.0)):
        raise ValueError("expm_traceless requires a traceless matrix")
    ch, shc = _cosh_sinhc(_w_squared(b))
    eye = np.eye(2, dtype=np.complex128)
    return ch[..., None, None] * eye + shc[..., None, None] * b


def expm_traceless_derivative(b, db, tol=1e-12):
    """(expm(B), d expm(B))  for a traceless B and its differential dB.

    Chain rule through w^2 = -det B:
        d cosh(w)  = sinhc(w) * dw2 / 2
        d sinhc(w) = (cosh(w) - sinhc(w)) / w^2 * dw2 / 2
    both of which stay regular as w -> 0 (series branch).
    """
    b = np.asarray(b, dtype=np.complex128)
    db = np.asarray(db, dtype=np.complex128)
    tr = b[..., 0, 0] + b[..., 1, 1]
    if np.any(np.abs(tr) > tol * np.maximum(np.max(np.abs(b), axis=(-2, -1)), 1.0)):
        raise ValueError("expm_traceless requires a traceless matrix")
    w2 = _w_squared(b)
    dw2 = (2.0 * b[..., 0, 0] * db[..., 0, 0]
           + b[..., 0, 1] * db[..., 1, 0] + b[..., 1, 0] * db[..., 0, 1])
    ch, shc = _cosh_sinhc(w2)
    small = np.abs(w2) < SERIES_THRESHOLD ** 2
    w2_safe = np.where(small, 1.0, w2)
    g = np.where(small, 1.0 / 3.0 + w2 / 30.0 + w2 * w2 / 840.0,
                 (ch - shc) / w2_safe)
    dch = shc * dw2 / 2.0
    dshc = g * dw2 / 2.0
    eye = np.eye(2, dtype=np.complex128)
    e = ch[..., None, None] * eye + shc[..., None, None] * b
    de = (dch[..., None, None] * eye + dshc[..., None, None] * b
          + shc[..., None, None] * db)
    return e, de


# ---------------------------------------------------------------------------
# polynomial 2x2 matrices


@dataclass
class PolyMat2:
    """2x2 matrix of polynomials in z, divided by a common power of z.

    coeffs has shape (4, N+1) holding the entries (m11, m12, m21, m22) in
    ascending order; the represented object is z**(-denom_power) * P(z).
    """

    coeffs: np.ndarray
    denom_power: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != 4:
            raise ValueError("coeffs must have shape (4, N+1)")
        if not 0 <= self.denom_power <= self.degree:
            raise ValueError("denom_power must lie in [0, degree]")

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @classmethod
    def identity(cls):
        c = np.zeros((4, 1), dtype=np.complex128)
        c[0, 0] = 1.0
        c[3, 0] = 1.0
        return cls(c, 0)

    @classmethod
    def from_matrix(cls, m):
        """Degree-0 PolyMat2 wrapping a constant 2x2 matrix."""
        return cls(np.asarray(m, dtype=np.complex128).reshape(4, 1), 0)

    def eval(self, z):
        """Evaluate at points z; returns an array of shape z.shape + (2, 2)."""
        z = np.asarray(z, dtype=np.complex128)
        acc = np.zeros((4,) + z.shape, dtype=np.complex128)
        for k in range(self.degree, -1, -1):
            acc = acc * z + self.coeffs[:, k][(...,) + (None,) * z.ndim]
        acc = acc * z ** (-float(self.denom_power))
        return np.moveaxis(acc, 0, -1).reshape(z.shape + (2, 2))


def polymat_mul(a: PolyMat2, b: PolyMat2) -> PolyMat2:
    """Matrix product of two PolyMat2 via FFT polynomial multiplication.

    Each of the 8 entry products is done by pointwise multiplication of
    length >= degA+degB+1 FFTs; denominator powers add.
    """
    n = a.degree + b.degree + 1
    nfft = 1 << (n - 1).bit_length() if n > 1 else 1
    fa = np.fft.fft(a.coeffs, n=nfft, axis=1)
    fb = np.fft.fft(b.coeffs, n=nfft, axis=1)
    fc = np.empty_like(fa)
    # (a11 a12; a21 a22)(b11 b12; b21 b22)
    fc[0] = fa[0] * fb[0] + fa[1] * fb[2]
    fc[1] = fa[0] * fb[1] + fa[1] * fb[3]
    fc[2] = fa[2] * fb[0] + fa[3] * fb[2]
    fc[3] = fa[2] * fb[1] + fa[3] * fb[3]
    c = np.fft.ifft(fc, axis=1)[:, :n]
    return PolyMat2(c, a.denom_power + b.denom_power)
