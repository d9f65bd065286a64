"""Fast polynomial-scattering pipeline.

The transfer matrix of one integrator step is approximated by a 2x2 matrix of
polynomials in z = exp(i lambda h / m), divided by a power of z.  A
fourth-order splitting confines the lambda dependence of each CFQM
exponential to diagonal factors whose entries are integer powers of z, so the
polynomial degrees stay proportional to the step count.  The D per-step
matrices are multiplied up a binary tree with FFT convolutions (O(D log^2 D)
work in total) and the resulting scattering polynomials are evaluated on the
unit circle with a chirp-z transform, giving all M grid values at once.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .integrators import (CfqmScheme, SpectrumResult, lambda_grid,
                          node_samples, _effective_offdiag)
from .linalg import PolyMat2, expm_traceless, polymat_mul
from .signals import SampledSignal

#: elements per batched FFT call; keeps transient buffers around 128 MB
_FFT_ELEMENT_BUDGET = 1 << 23

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ZMapping:
    """The substitution z = exp(i lambda h / m) and its inverse."""

    h: float
    m: int = 4

    def __post_init__(self):
        if self.h <= 0 or self.m < 1:
            raise ValueError("need h > 0 and m >= 1")

    def z(self, lam):
        return np.exp(1j * np.asarray(lam) * self.h / self.m)

    def lam(self, z):
        """Principal inverse; real part lies in (-pi m / h, pi m / h]."""
        return self.m * np.log(z) / (1j * self.h)

    @property
    def lambda_band(self) -> float:
        """Half-width of the lambda interval the mapping resolves."""
        return np.pi * self.m / self.h


def _check_fast_eligibility(scheme: CfqmScheme, m: int) -> np.ndarray:
    """Integer z-powers P_j = m w_j of the diagonal factors, or a clear error."""
    if scheme.complex_coeffs:
        raise ValueError(
            f"scheme {scheme.name} has complex coefficients; the polynomial "
            f"pipeline needs real tables -- use the direct method instead")
    powers = m * scheme.row_sums.real
    rounded = np.round(powers)
    if np.any(np.abs(powers - rounded) > 1e-9) or np.any(rounded < 0):
        raise ValueError(
            f"scheme {scheme.name}: m * w_j = {powers} must be non-negative "
            f"integers; pick m so that every row sum times m is an integer")
    return rounded.astype(int)


def _split_coeff_matrices(u, v):
    """Z^0, Z^1, Z^2 coefficient matrices of the fourth-order splitting.

    u = expm(h Omega / 4) and v = expm(h Omega / 2), both shaped (..., 2, 2).
    The splitting combines a full Strang step with two half steps,
    (4 S2(1/2)^2 - S2(1)) / 3, with the off-diagonal factors outside; the
    diagonal factors contribute only the powers Z = z^{m w}.
    """
    outer_u = np.einsum("...ik,...kj->...kij", u, u)  # k-th: u[:,k] x u[k,:]
    outer_v = np.einsum("...ik,...kj->...kij", v, v)
    n0 = (4.0 * v[..., 0, 0, None, None] * outer_u[..., 0, :, :]
          - outer_v[..., 0, :, :]) / 3.0
    # the Z^1 coefficient mixes the two off-diagonal entries of v
    n1 = (4.0 / 3.0) * (
        v[..., 0, 1, None, None]
        * np.einsum("...i,...j->...ij", u[..., :, 0], u[..., 1, :])
        + v[..., 1, 0, None, None]
        * np.einsum("...i,...j->...ij", u[..., :, 1], u[..., 0, :]))
    n2 = (4.0 * v[..., 1, 1, None, None] * outer_u[..., 1, :, :]
          - outer_v[..., 1, :, :]) / 3.0
    return n0, n1, n2


def _omega_exponentials(offdiag_eff, h, kappa):
    """expm(h Omega / 4) and expm(h Omega / 2) for a batch of off-diagonals."""
    shape = offdiag_eff.shape + (2, 2)
    omega = np.zeros(shape, dtype=np.complex128)
    omega[..., 0, 1] = offdiag_eff
    omega[..., 1, 0] = -kappa * np.conj(offdiag_eff)
    return expm_traceless(0.25 * h * omega), expm_traceless(0.5 * h * omega)


def split_exponential(o_value, weight, h, kappa, m=4) -> PolyMat2:
    """Polynomial transfer matrix of one CFQM exponential.

    Approximates expm(h (w A + Omega)) with A = diag(-i lambda, i lambda) and
    off-diagonal Omega built from the effective node combination o, as a
    degree-2P polynomial in z over z^P, P = m w.  Exact for o = 0 and at
    lambda = 0; the splitting error is O(h^5) per exponential.
    """
    p = int(round(m * float(np.real(weight))))
    if abs(m * np.real(weight) - p) > 1e-9 or np.imag(weight) != 0 or p < 0:
        raise ValueError("m * weight must be a non-negative integer")
    u, v = _omega_exponentials(np.asarray(o_value, dtype=np.complex128), h, kappa)
    n0, n1, n2 = _split_coeff_matrices(u, v)
    coeffs = np.zeros((4, 2 * p + 1), dtype=np.complex128)
    for power, mat in ((0, n0), (p, n1), (2 * p, n2)):
        coeffs[:, power] += mat.reshape(4)
    return PolyMat2(coeffs, p)


def step_polymat(scheme: CfqmScheme, q_nodes, h, kappa, m=4) -> PolyMat2:
    """Polynomial transfer matrix of one full step (J exponentials)."""
    _check_fast_eligibility(scheme, m)
    q_nodes = np.asarray(q_nodes, dtype=np.complex128)
    result = None
    for j in range(scheme.j_exponentials):
        o = complex(np.dot(scheme.a[j].real, q_nodes))
        pm = split_exponential(o, scheme.row_sums[j].real, h, kappa, m)
        result = pm if result is None else polymat_mul(pm, result)
    return result


def _steps_polymat_batch(scheme, signal, m, node_values=None):
    """(D, 4, L) step polynomial coefficients plus the per-step denominator.

    Entry order along axis 1 is (11, 12, 21, 22), coefficients ascending in
    z.  All steps share degree 2 m sum(w_j) and denominator m sum(w_j).
    """
    powers = _check_fast_eligibility(scheme, m)
    nodes = node_samples(signal, scheme) if node_values is None \
        else np.asarray(node_values, dtype=np.complex128)
    if nodes.shape != (scheme.k_nodes, signal.grid.d):
        raise ValueError("node_values must have shape (K, D)")
    offdiag, _ = _effective_offdiag(scheme, nodes)  # (D, J); real table
    h = signal.h
    kappa = signal.kappa
    d = signal.grid.d

    acc = None  # (D, L, 2, 2) ascending coefficients
    acc_denom = 0
    for j in range(scheme.j_exponentials):
        p = powers[j]
        u, v = _omega_exponentials(offdiag[:, j], h, kappa)
        n0, n1, n2 = _split_coeff_matrices(u, v)
        if acc is None:
            acc = np.zeros((d, 2 * p + 1, 2, 2), dtype=np.complex128)
            for power, mat in ((0, n0), (p, n1), (2 * p, n2)):
                acc[:, power] += mat
        else:
            new = np.zeros((d, acc.shape[1] + 2 * p, 2, 2), dtype=np.complex128)
            for power, mat in ((0, n0), (p, n1), (2 * p, n2)):
                new[:, power:power + acc.shape[1]] += np.matmul(
                    mat[:, None], acc)
            acc = new
        acc_denom += p
    coeffs = acc.transpose(0, 2, 3, 1).reshape(d, 4, acc.shape[1])
    return np.ascontiguousarray(coeffs), acc_denom


def _chunked_fft(arr, n, inverse=False):
    """FFT along the last axis, processed in slabs to bound scratch memory."""
    flat = arr.reshape(-1, arr.shape[-1])
    out = np.empty((flat.shape[0], n), dtype=np.complex128)
    rows = max(1, _FFT_ELEMENT_BUDGET // n)
    fn = np.fft.ifft if inverse else np.fft.fft
    for i in range(0, flat.shape[0], rows):
        out[i:i + rows] = fn(flat[i:i + rows], n=n, axis=-1)
    return out.reshape(arr.shape[:-1] + (n,))


def _pair_mul(later, earlier, out_len):
    """Batched product later @ earlier of (P, 4, L) polynomial matrices."""
    n = 1 << (out_len - 1).bit_length()
    fa = _chunked_fft(earlier, n)
    fb = _chunked_fft(later, n)
    fc = np.empty_like(fa)
    fc[:, 0] = fb[:, 0] * fa[:, 0] + fb[:, 1] * fa[:, 2]
    fc[:, 1] = fb[:, 0] * fa[:, 1] + fb[:, 1] * fa[:, 3]
    fc[:, 2] = fb[:, 2] * fa[:, 0] + fb[:, 3] * fa[:, 2]
    fc[:, 3] = fb[:, 2] * fa[:, 1] + fb[:, 3] * fa[:, 3]
    return _chunked_fft(fc, n, inverse=True)[..., :out_len]


def _reduce_block(block):
    """Balanced tree product of a power-of-two run of steps (time order)."""
    arr = block
    while arr.shape[0] > 1:
        out_len = 2 * arr.shape[-1] - 1
        arr = _pair_mul(arr[1::2], arr[0::2], out_len)
    return arr[0]


def tree_multiply(mats) -> PolyMat2:
    """Product mats[-1] @ ... @ mats[0] of polynomial matrices, pairwise.

    Adjacent pairs are combined level by level (an odd leftover is carried
    up), so D matrices cost O(log D) levels of FFT convolutions instead of a
    linear sweep with ever-growing operands.
    """
    mats = list(mats)
    if not mats:
        return PolyMat2.identity()
    while len(mats) > 1:
        nxt = [polymat_mul(mats[i + 1], mats[i])
               for i in range(0, len(mats) - 1, 2)]
        if len(mats) % 2:
            nxt.append(mats[-1])
        mats = nxt
    return mats[0]


def _tree_reduce(steps, step_denom) -> PolyMat2:
    """Batched tree product of uniform (D, 4, L) steps, earliest first.

    D is split into power-of-two blocks (largest first, e.g. 13 -> 8+4+1);
    each block reduces as a balanced tree and the block results multiply
    left to right.
    """
    d = steps.shape[0]
    results = []  # (coeffs, count) in time order
    start = 0
    for bit in range(d.bit_length() - 1, -1, -1):
        size = 1 << bit
        if d & size:
            results.append((_reduce_block(steps[start:start + size]), size))
            start += size
    acc, count = results[0]
    acc = PolyMat2(acc, step_denom * count)
    for coeffs, count in results[1:]:
        acc = polymat_mul(PolyMat2(coeffs, step_denom * count), acc)
    return acc


def scattering_polymat(scheme, signal, m=4, node_values=None) -> PolyMat2:
    """Polynomial transfer matrix over the whole interval.

    The product of all D step matrices; degree 2 m D with denominator m D
    (for consistent schemes, sum(w_j) = 1).  Entry 11 evaluated at
    z = exp(i lambda h / m) approximates a(lambda) e^{-i lambda D h} times
    z^{m D}, i.e. the numerator polynomial of entry 11 alone approximates a.
    """
    steps, step_denom = _steps_polymat_batch(scheme, signal, m, node_values)
    return _tree_reduce(steps, step_denom)


# ---------------------------------------------------------------------------
# unit-circle evaluation


def _unit_phase(factor, indices):
    """exp(1j * factor * indices) with extended-precision argument reduction.

    The raw arguments can reach 1e5 for long polynomials; reducing them mod
    2 pi in long double keeps the phase error near round-off.
    """
    arg = np.mod(np.longdouble(factor) * indices, np.longdouble(_TWO_PI))
    return np.exp(1j * arg.astype(np.float64))


def evaluate_poly_unit_circle(coeffs, thetas):
    """p(e^{i theta_k}) on an equispaced angle grid via Bluestein's chirp-z.

    coeffs are ascending polynomial coefficients.  Three FFTs of length
    >= N + M - 1 replace the O(N M) direct evaluation.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    n, m_pts = coeffs.size, thetas.size
    if n == 0:
        raise ValueError("empty coefficient array")
    if m_pts == 1:
        return np.array([np.polyval(coeffs[::-1], np.exp(1j * thetas[0]))])
    theta0 = thetas[0]
    delta = (thetas[-1] - theta0) / (m_pts - 1)
    ref = theta0 + delta * np.arange(m_pts)
    if not np.allclose(thetas, ref, rtol=0.0,
                       atol=1e-9 * max(1.0, np.max(np.abs(thetas)))):
        raise ValueError("theta grid must be equispaced for the chirp-z "
                         "evaluation")
    half = delta / 2.0
    idx_n = np.arange(n, dtype=np.longdouble)
    idx_m = np.arange(m_pts, dtype=np.longdouble)
    u = coeffs * _unit_phase(theta0, idx_n) * _unit_phase(half, idx_n * idx_n)
    length = 1 << (n + m_pts - 2).bit_length()
    kernel = np.zeros(length, dtype=np.complex128)
    kernel[:m_pts] = _unit_phase(-half, idx_m * idx_m)
    if n > 1:
        tail = np.arange(1, n, dtype=np.longdouble)
        kernel[-(n - 1):] = _unit_phase(-half, tail * tail)[::-1]
    conv = np.fft.ifft(np.fft.fft(u, length) * np.fft.fft(kernel))
    return _unit_phase(half, idx_m * idx_m) * conv[:m_pts]


# ---------------------------------------------------------------------------
# spectrum drivers


def _band_check(lambda_max, h, m, what="grid"):
    limit = np.pi * m / h
    if lambda_max >= limit:
        raise ValueError(
            f"lambda_max = {lambda_max:g} exceeds the {what} band "
            f"pi m / h = {limit:g}; enlarge m or refine the grid")


def reflection_fast(scheme, signal, lambda_max, m_points=None, m=4,
                    node_values=None) -> SpectrumResult:
    """rho, a, b on the uniform lambda grid via the polynomial pipeline."""
    _band_check(lambda_max, signal.h, m)
    m_points = signal.grid.d if m_points is None else m_points
    lams = lambda_grid(lambda_max, m_points)
    poly = scattering_polymat(scheme, signal, m, node_values)
    thetas = lams * (signal.h / m)
    a_hat = evaluate_poly_unit_circle(poly.coeffs[0], thetas)
    b_hat = evaluate_poly_unit_circle(poly.coeffs[2], thetas)
    residual = m * signal.grid.d - poly.denom_power
    if residual:  # only for tables with sum(w_j) != 1
        shift = np.exp(1j * lams * signal.h * residual / m)
        a_hat = a_hat * shift
        b_hat = b_hat * shift
    b_hat = b_hat * np.exp(-2j * lams * signal.grid.t_plus)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = b_hat / a_hat
    bad = int(np.count_nonzero(~np.isfinite(rho))) if rho.size else 0
    if bad:
        warnings.warn(f"reflection_fast: {bad} grid points hit a = 0; "
                      f"flagged as non-finite")
    return SpectrumResult(lams, a_hat, b_hat, rho,
                          method=f"{scheme.name}+fft",
                          d=signal.grid.d, h=signal.h)


def b_coefficient_fast(scheme, signal, lambda_max, m_points=None, m=4,
                       node_values=None):
    """(lambdas, b) alone -- the 21 scattering polynomial on the grid."""
    res = reflection_fast(scheme, signal, lambda_max, m_points, m, node_values)
    return res.lambdas, res.b
