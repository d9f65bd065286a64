"""Commutator-free quasi-Magnus (CFQM) integrators for the scattering problem.

One step advances the eigenfunction phi across [t_n - h/2, t_n + h/2] by

    G_n(lambda) = expm(B_J) ... expm(B_1),
    B_j = h * sum_k a_jk C(t_n + (c_k - 1/2) h, lambda),

where C is the Zakharov-Shabat coefficient matrix.  The transfer matrix
over the whole interval is H = G_{D-1} ... G_0, applied to the canonical
left boundary value phi(T-) = (e^{-i lambda T-}, 0); the scattering
coefficients are then

    a = phi_1(T+) e^{+i lambda T+},    b = phi_2(T+) e^{-i lambda T+}.
"""

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .linalg import expm_traceless, expm_traceless_derivative
from .signals import SampledSignal

#: scaled propagation kicks in beyond this exponent (design headroom below
#: the ~709 overflow limit of exp)
OVERFLOW_EXPONENT = 300.0


@dataclass(frozen=True)
class CfqmScheme:
    """Coefficient table of a CFQM exponential integrator.

    a has shape (J, K): row j gives the weights of the K node matrices in
    exponential j.  c holds the quadrature nodes in [0, 1].  order is the
    classical convergence order r of the scheme.
    """

    name: str
    order: int
    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=np.complex128)))
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(self.c, dtype=float)))
        if self.a.shape[1] != self.c.shape[0]:
            raise ValueError("a must have one column per node")
        if np.any(self.c < 0.0) or np.any(self.c > 1.0):
            raise ValueError("nodes c_k must lie in [0, 1]")

    @property
    def j_exponentials(self) -> int:
        return self.a.shape[0]

    @property
    def k_nodes(self) -> int:
        return self.a.shape[1]

    @property
    def row_sums(self) -> np.ndarray:
        """Effective lambda weight w_j of each exponential."""
        return self.a.sum(axis=1)

    @property
    def complex_coeffs(self) -> bool:
        return bool(np.any(self.a.imag != 0.0))


_SQRT3_6 = np.sqrt(3.0) / 6.0

#: midpoint rule, one exponential -- classical order 2
CF1_2 = CfqmScheme("CF1[2]", 2, [[1.0]], [0.5])

#: two-exponential Gauss scheme -- classical order 4
CF2_4 = CfqmScheme(
    "CF2[4]", 4,
    [[0.25 + _SQRT3_6, 0.25 - _SQRT3_6],
     [0.25 - _SQRT3_6, 0.25 + _SQRT3_6]],
    [0.5 - _SQRT3_6, 0.5 + _SQRT3_6],
)


def load_scheme(a_path, c_path, order, name=None) -> CfqmScheme:
    """Load a user coefficient table from two CSVs: rows ``j,k,a_jk`` and
    ``k,c_k`` (1-based indices, values parsed as python complex/float)."""
    entries = {}
    with open(a_path, newline="") as f:
        for row in csv.reader(f):
            if not row or not row[0].strip().isdigit():
                continue  # header or blank
            j, k = int(row[0]), int(row[1])
            entries[(j, k)] = complex(row[2].strip())
    nodes = {}
    with open(c_path, newline="") as f:
        for row in csv.reader(f):
            if not row or not row[0].strip().isdigit():
                continue
            nodes[int(row[0])] = float(row[1])
    if not entries or not nodes:
        raise ValueError("empty coefficient table")
    jmax = max(j for j, _ in entries)
    kmax = max(k for _, k in entries)
    if kmax != max(nodes) or set(nodes) != set(range(1, kmax + 1)):
        raise ValueError("node table inconsistent with coefficient table")
    a = np.zeros((jmax, kmax), dtype=np.complex128)
    for (j, k), v in entries.items():
        a[j - 1, k - 1] = v
    c = np.array([nodes[k] for k in range(1, kmax + 1)])
    return CfqmScheme(name or f"user[{order}]", order, a, c)


@dataclass
class Eigenfunction:
    """phi(T+) for one or many lambda values.

    phi has shape lambdas.shape + (2,).  When ``scaled`` is true the stored
    values are u = phi * exp(i lambda T+) (used automatically once
    Im(lambda) * (T+ - T-) would overflow the direct representation).
    """

    lambdas: np.ndarray
    phi: np.ndarray
    phi_dlambda: Optional[np.ndarray] = None
    scaled: bool = False
    t_plus: float = 0.0


@dataclass
class SpectrumResult:
    """Continuous-spectrum output on a uniform lambda grid."""

    lambdas: np.ndarray
    a: np.ndarray
    b: np.ndarray
    rho: np.ndarray
    method: str = ""
    d: int = 0
    h: float = 0.0


# ---------------------------------------------------------------------------
# band-limited interpolation


def bandlimited_shift(samples, t_shift, h):
    """Samples of the band-limited interpolant of q at t_n - t_shift.

    DFT-based: multiplies bin f by exp(-2 pi i f t_shift / (N h)) with the
    frequency indices ordered [0..floor(N/2), -floor((N-1)/2)..-1], then
    inverts.  Exact for tones below the Nyquist rate.
    """
    q = np.asarray(samples, dtype=np.complex128)
    n = q.size
    if n == 0:
        raise ValueError("empty sample sequence")
    freq = np.concatenate([np.arange(n // 2 + 1), np.arange(-((n - 1) // 2), 0)])
    return np.fft.ifft(np.fft.fft(q) * np.exp(-2j * np.pi * freq * t_shift / (n * h)))


def node_samples(signal: SampledSignal, scheme: CfqmScheme) -> np.ndarray:
    """(K, D) array; row k holds q at the shifted grid t_n + (c_k - 1/2) h.

    Off-midpoint rows come from bandlimited_shift with t_shift =
    -(c_k - 1/2) h; the midpoint row is the samples themselves.
    """
    out = np.empty((scheme.k_nodes, signal.grid.d), dtype=np.complex128)
    for k, ck in enumerate(scheme.c):
        if ck == 0.5:
            out[k] = signal.samples
        else:
            out[k] = bandlimited_shift(signal.samples, -(ck - 0.5) * signal.h, signal.h)
    return out


def _effective_offdiag(scheme: CfqmScheme, nodes: np.ndarray):
    """Per-step effective off-diagonals o_j = sum_k a_jk q_k, shape (D, J);
    for complex tables also the independently combined conjugate row."""
    o = (scheme.a @ nodes).T.copy()
    obar = (scheme.a @ np.conj(nodes)).T.copy()
    return o, obar


# ---------------------------------------------------------------------------
# one transfer step


def transfer_step(scheme: CfqmScheme, q_nodes, lam, h, kappa):
    """Exact 2x2 transfer matrix of one CFQM step.

    q_nodes holds the K node values of q for this step.  Builds each
    B_j = h sum_k a_jk C_k and multiplies the closed-form exponentials
    right-to-left (j = 1 applied first).
    """
    q_nodes = np.asarray(q_nodes, dtype=np.complex128)
    if q_nodes.shape != (scheme.k_nodes,):
        raise ValueError("need one node value per quadrature node")
    g = np.eye(2, dtype=np.complex128)
    for j in range(scheme.j_exponentials):
        o = np.dot(scheme.a[j], q_nodes)
        obar = np.dot(scheme.a[j], np.conj(q_nodes))
        w = scheme.a[j].sum()
        b = h * np.array([[-1j * lam * w, o], [-kappa * obar, 1j * lam * w]])
        g = expm_traceless(b) @ g
    return g


# ---------------------------------------------------------------------------
# full scattering sweep


def _propagate_numpy(offdiag, obar, wsum, lambdas, h, kappa, with_derivative):
    """Reference implementation: scaled propagation vectorized over lambda."""
    m = lambdas.size
    u = np.zeros((m, 2), dtype=np.complex128)
    u[:, 0] = 1.0
    du = np.zeros((m, 2), dtype=np.complex128) if with_derivative else None
    eye_d = np.array([[-1j, 0.0], [0.0, 1j]], dtype=np.complex128)
    for n in range(offdiag.shape[0]):
        for j in range(offdiag.shape[1]):
            hw = h * wsum[j]
            b = np.zeros((m, 2, 2), dtype=np.complex128)
            b[:, 0, 0] = -1j * lambdas * hw
            b[:, 1, 1] = 1j * lambdas * hw
            b[:, 0, 1] = h * offdiag[n, j]
            b[:, 1, 0] = -kappa * h * obar[n, j]
            phase = np.exp(1j * lambdas * hw)
            if with_derivative:
                db = np.broadcast_to(hw * eye_d, (m, 2, 2))
                g, dg = expm_traceless_derivative(b, db)
                g = phase[:, None, None] * g
                dg = phase[:, None, None] * dg + 1j * hw * g
                du = np.einsum("nij,nj->ni", g, du) + np.einsum("nij,nj->ni", dg, u)
            else:
                g = phase[:, None, None] * expm_traceless(b)
            u = np.einsum("nij,nj->ni", g, u)
    return u, du


def _propagate(scheme, signal, lambdas, with_derivative, workers, node_values, backend):
    """u(T+) (= phi e^{i lambda T+}) and optionally du/dlambda, shape (M, 2)."""
    lambdas = np.asarray(lambdas, dtype=np.complex128)
    lam_flat = np.atleast_1d(lambdas).ravel()
    nodes = node_samples(signal, scheme) if node_values is None \
        else np.asarray(node_values, dtype=np.complex128)
    if nodes.shape != (scheme.k_nodes, signal.grid.d):
        raise ValueError("node_values must have shape (K, D)")
    offdiag, obar = _effective_offdiag(scheme, nodes)
    h = signal.h
    kappa = signal.kappa

    if backend == "numpy" or scheme.complex_coeffs:
        u, du = _propagate_numpy(offdiag, obar, scheme.row_sums.real
                                 if not scheme.complex_coeffs else scheme.row_sums,
                                 lam_flat, h, kappa, with_derivative)
    elif backend == "numba":
        wsum = scheme.row_sums.real
        u = np.empty((lam_flat.size, 2), dtype=np.complex128)
        du = np.empty((lam_flat.size, 2), dtype=np.complex128) if with_derivative else None
        real_path = (not with_derivative) and np.all(lam_flat.imag == 0.0)

        def run(lo, hi):
            if real_path:
                _kernels.scatter_real(lam_flat.real[lo:hi], offdiag, wsum,
                                      h, kappa, u[lo:hi])
            else:
                dummy = du[lo:hi] if with_derivative else u[lo:hi]
                _kernels.scatter_complex(lam_flat[lo:hi], offdiag, wsum, h,
                                         kappa, with_derivative, u[lo:hi], dummy)

        if workers <= 1 or lam_flat.size < 2 * workers:
            run(0, lam_flat.size)
        else:
            bounds = np.linspace(0, lam_flat.size, workers + 1).astype(int)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run, bounds[i], bounds[i + 1])
                           for i in range(workers)]
                for f in futures:
                    f.result()
        if real_path:
            # kernel returns H (1,0)^T; fold in the e^{i lambda D h} scaling
            u *= np.exp(1j * lam_flat * h * signal.grid.d)[:, None]
    else:
        raise ValueError(f"unknown backend '{backend}'")
    return lam_flat, u, du


def scatter_slow(scheme, signal, lambdas, with_derivative=False, workers=1,
                 node_values=None, backend="numba") -> Eigenfunction:
    """Propagate the left eigenfunction to T+ for each lambda.

    Returns phi(T+) (and d phi/d lambda on request).  When Im(lambda) times
    the interval span exceeds the overflow threshold, the scaled values
    u = phi e^{i lambda T+} are returned instead with ``scaled=True``.
    """
    lam_flat, u, du = _propagate(scheme, signal, lambdas, with_derivative,
                                 workers, node_values, backend)
    t_plus = signal.grid.t_plus
    span = signal.grid.t_plus - signal.grid.t_minus
    scaled = bool(np.max(lam_flat.imag, initial=0.0) * span > OVERFLOW_EXPONENT)
    if scaled:
        phi, dphi = u, du
    else:
        back = np.exp(-1j * lam_flat * t_plus)[:, None]
        phi = u * back
        dphi = (du - 1j * t_plus * u) * back if with_derivative else None
    lam_in = np.asarray(lambdas, dtype=np.complex128)
    shape = lam_in.shape + (2,)
    return Eigenfunction(lam_in, phi.reshape(shape),
                         dphi.reshape(shape) if dphi is not None else None,
                         scaled=scaled, t_plus=t_plus)


def scattering_to_coeffs(phi_at_tplus, lam, t_minus, t_plus):
    """(a, b) from phi(T+):  a = phi_1 e^{i lambda T+}, b = phi_2 e^{-i lambda T+}.

    Equivalently a = H11 e^{i lambda (T+ - T-)} for the transfer matrix H
    acting on the canonical boundary value at T-.  Accepts an Eigenfunction
    (honouring its ``scaled`` flag) or a plain (..., 2) phi array.
    """
    if isinstance(phi_at_tplus, Eigenfunction):
        ef = phi_at_tplus
        lam = ef.lambdas
        if ef.scaled:
            a = ef.phi[..., 0]
            b = ef.phi[..., 1] * np.exp(-2j * lam * t_plus)
            return a, b
        phi = ef.phi
    else:
        phi = np.asarray(phi_at_tplus, dtype=np.complex128)
        lam = np.asarray(lam, dtype=np.complex128)
    a = phi[..., 0] * np.exp(1j * lam * t_plus)
    b = phi[..., 1] * np.exp(-1j * lam * t_plus)
    return a, b


def coefficients_slow(scheme, signal, lambdas, with_derivative=False, workers=1,
                      node_values=None, backend="numba"):
    """(a, b) for each lambda, computed in the overflow-safe scaled form;
    with_derivative additionally returns (da, db)."""
    lam_flat, u, du = _propagate(scheme, signal, lambdas, with_derivative,
                                 workers, node_values, backend)
    t_plus = signal.grid.t_plus
    lam_in = np.asarray(lambdas, dtype=np.complex128)
    ph = np.exp(-2j * lam_flat * t_plus)
    a = u[:, 0].reshape(lam_in.shape)
    b = (u[:, 1] * ph).reshape(lam_in.shape)
    if not with_derivative:
        return a, b
    da = du[:, 0].reshape(lam_in.shape)
    db = ((du[:, 1] - 2j * t_plus * u[:, 1]) * ph).reshape(lam_in.shape)
    return a, b, da, db


def lambda_grid(lambda_max, m_points):
    """M equispaced points on [-lambda_max, lambda_max], endpoints included."""
    if lambda_max <= 0 or m_points < 1:
        raise ValueError("need lambda_max > 0 and at least one point")
    return np.linspace(-lambda_max, lambda_max, m_points)


def reflection_slow(scheme, signal, lambda_max, m_points=None, workers=1,
                    node_values=None, backend="numba") -> SpectrumResult:
    """rho, a, b on the uniform real lambda grid (M defaults to D)."""
    m_points = signal.grid.d if m_points is None else m_points
    lams = lambda_grid(lambda_max, m_points)
    a, b = coefficients_slow(scheme, signal, lams, workers=workers,
                             node_values=node_values, backend=backend)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = b / a
    bad = int(np.count_nonzero(~np.isfinite(rho))) if rho.size else 0
    if bad:
        warnings.warn(f"reflection_slow: {bad} grid points hit a = 0; "
                      f"flagged as non-finite")
    return SpectrumResult(lams, a, b, rho, method=scheme.name,
                          d=signal.grid.d, h=signal.h)
