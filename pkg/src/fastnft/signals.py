"""Benchmark signals, midpoint sampling grids, and exact reference spectra.

The scattering problem solved throughout this package is

    dV/dt = C(t, lambda) V,   C = [[-i lambda, q(t)], [-kappa conj(q(t)), i lambda]]

with kappa = +1 (focusing) or -1 (defocusing), and the scattering
coefficients a, b defined through the canonical left/right boundary
behaviour (see `fastnft.integrators`).  The reflection coefficient is
rho = b / a on the real axis.

Two of the closed forms commonly quoted for the frequency-shifted sech
signal contain typos (a sin(pi) numerator that is identically zero, and a
missing frequency shift in the gamma-quotient for a).  The forms below are
the corrected ones; tests validate them against an independent high-order
ODE integration of the scattering problem (`fastnft.bench.ode_oracle`).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .special import gamma


@dataclass(frozen=True)
class SignalGrid:
    """Uniform midpoint sampling grid over [t_minus, t_plus]."""

    t_minus: float
    t_plus: float
    d: int
    kappa: int = 1

    def __post_init__(self):
        if not self.t_plus > self.t_minus:
            raise ValueError("need t_plus > t_minus")
        if self.d < 1:
            raise ValueError("need at least one sample")
        if self.kappa not in (+1, -1):
            raise ValueError("kappa must be +1 or -1")

    @property
    def h(self) -> float:
        return (self.t_plus - self.t_minus) / self.d

    def midpoints(self) -> np.ndarray:
        """Sample times t_n = t_minus + (n + 1/2) h."""
        return self.t_minus + (np.arange(self.d) + 0.5) * self.h


@dataclass
class SampledSignal:
    """Signal samples q(t_n) on a midpoint grid."""

    grid: SignalGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.shape != (self.grid.d,):
            raise ValueError("samples must have shape (grid.d,)")

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def kappa(self) -> int:
        return self.grid.kappa


@dataclass
class AnalyticSpectrum:
    """Closed-form reference spectrum of a benchmark signal.

    rho/a/b are vectorized callables of real lambda; entries that are not
    known in closed form are None.  eigenvalues (upper half plane) and the
    matching b values follow the same ordering.
    """

    rho: Callable[[np.ndarray], np.ndarray]
    a: Optional[Callable[[np.ndarray], np.ndarray]] = None
    b: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eigenvalues: np.ndarray = field(default_factory=lambda: np.empty(0, complex))
    b_discrete: np.ndarray = field(default_factory=lambda: np.empty(0, complex))

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.complex128)
        if self.eigenvalues.size and np.any(self.eigenvalues.imag <= 0):
            raise ValueError("eigenvalues must lie in the open upper half plane")


# ---------------------------------------------------------------------------
# example 1: frequency-shifted sech (focusing)

def sech_focusing_q(t, q0=5.4, lam0=3.0):
    """q(t) = q0 * exp(-2i lam0 t) * sech(t)."""
    t = np.asarray(t, dtype=float)
    return q0 * np.exp(-2j * lam0 * t) / np.cosh(t)


def sample_sech_focusing(d, q0=5.4, lam0=3.0, t_minus=-32.0, t_plus=32.0):
    grid = SignalGrid(t_minus, t_plus, d, kappa=+1)
    return SampledSignal(grid, sech_focusing_q(grid.midpoints(), q0, lam0))


def oracle_sech_focusing(q0=5.4, lam0=3.0) -> AnalyticSpectrum:
    """Exact spectrum of the frequency-shifted sech.

    The widely quoted closed form has two typos; the corrected version used
    here replaces the identically-zero numerator sin(pi) by sin(pi*q0) and
    applies the frequency shift lambda -> lambda - lam0 inside the gamma
    quotient as well.  Both corrections are pinned against the brute-force
    ODE oracle in the test suite.
    """
    def a(lam):
        s = 0.5 - 1j * (np.asarray(lam, dtype=np.complex128) - lam0)
        return gamma(s) ** 2 / (gamma(s + q0) * gamma(s - q0))

    def b(lam):
        return -np.sin(np.pi * q0) / np.cosh(np.pi * (np.asarray(lam) - lam0))

    def rho(lam):
        return b(lam) / a(lam)

    k = np.arange(1, int(np.floor(q0 + 0.5)) + 1)
    k = k[q0 + 0.5 - k > 0]  # drop a bound state exactly at threshold
    eigenvalues = lam0 + 1j * (q0 + 0.5 - k)
    b_discrete = (-1.0) ** k
    return AnalyticSpectrum(rho=rho, a=a, b=b,
                            eigenvalues=eigenvalues, b_discrete=b_discrete)


# ---------------------------------------------------------------------------
# example 2: truncated sech with a one-pole rational reflection coefficient

def rational_onepole_q(t, alpha=1.0, beta=-1.0):
    """Piecewise signal whose reflection coefficient is alpha/(lambda - i beta).

    q(t) = -2i gamma (alpha/|alpha|) sech(2 gamma t + atanh(beta/gamma))
    for t <= 0 and 0 for t > 0, with gamma = sqrt(|alpha|^2 + beta^2).
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero (atanh argument would hit 1)")
    g = np.sqrt(abs(alpha) ** 2 + beta ** 2)
    delta = np.arctanh(beta / g)
    t = np.asarray(t, dtype=float)
    vals = -2j * g * (alpha / abs(alpha)) / np.cosh(2.0 * g * t + delta)
    return np.where(t <= 0.0, vals, 0.0)


def sample_rational_onepole(d, alpha=1.0, beta=-1.0, t_minus=-12.0, t_plus=0.0):
    grid = SignalGrid(t_minus, t_plus, d, kappa=+1)
    return SampledSignal(grid, rational_onepole_q(grid.midpoints(), alpha, beta))


def oracle_rational_onepole(alpha=1.0, beta=-1.0) -> AnalyticSpectrum:
    def rho(lam):
        return alpha / (np.asarray(lam, dtype=np.complex128) - 1j * beta)

    return AnalyticSpectrum(rho=rho)


# ---------------------------------------------------------------------------
# example 3: chirped sech (defocusing)

def sech_defocusing_q(t, big_g=1.5, big_l=0.04, big_q=5.5):
    """q(t) = (Q/L) sech(t/L)^(1 - 2iG); base is positive so the principal
    branch is just exp((1-2iG) log sech)."""
    t = np.asarray(t, dtype=float)
    return (big_q / big_l) * np.exp((1.0 - 2j * big_g) * np.log(1.0 / np.cosh(t / big_l)))


def sample_sech_defocusing(d, big_g=1.5, big_l=0.04, big_q=5.5,
                           t_minus=-1.5, t_plus=1.5):
    grid = SignalGrid(t_minus, t_plus, d, kappa=-1)
    return SampledSignal(grid, sech_defocusing_q(grid.midpoints(), big_g, big_l, big_q))


def oracle_sech_defocusing(big_g=1.5, big_l=0.04, big_q=5.5) -> AnalyticSpectrum:
    """Reflection coefficient of the chirped sech in the defocusing case.

    The widely quoted closed form for this signal uses the opposite chirp
    sign convention; for q = (Q/L) sech(t/L)^(1-2iG) as produced by
    sech_defocusing_q its value at lambda must be conjugate-reflected,
    rho(lambda) = -conj(rho_quoted(-lambda)).  The version below has that
    correction folded in (flip the sign of G outside the square root and
    drop the leading minus); it matches adaptive direct integration of the
    scattering problem to oracle accuracy, see the signal tests.

    Valid on the real axis (one factor takes the conjugate of another's
    argument, which is only meaningful for real lambda).
    """
    root = np.sqrt(big_g ** 2 + big_q ** 2)
    g_plus = gamma(1.0 + 1j * (big_g + root))
    g_minus = gamma(1.0 + 1j * (big_g - root))

    def rho(lam):
        lam = np.asarray(lam, dtype=float)
        d = 0.5 + 1j * (lam * big_l + big_g)
        f_minus = 0.5 - 1j * (lam * big_l - root)
        f_plus = 0.5 - 1j * (lam * big_l + root)
        num = gamma(d) * gamma(f_minus) * gamma(f_plus)
        den = gamma(np.conj(d)) * g_minus * g_plus
        return (2.0 ** (2j * big_g)) * big_q * num / den

    return AnalyticSpectrum(rho=rho)


# ---------------------------------------------------------------------------

def evolve_spectrum(a, b, lam, x):
    """Propagate scattering data a distance x >= 0: a is invariant and
    b picks up the phase exp(-4i lambda^2 x)."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    lam = np.asarray(lam, dtype=np.complex128)
    return np.asarray(a, dtype=np.complex128), \
        np.asarray(b, dtype=np.complex128) * np.exp(-4j * lam ** 2 * x)


# ---------------------------------------------------------------------------
# CSV exchange

def write_signal_csv(path, signal: SampledSignal):
    t = signal.grid.midpoints()
    with open(path, "w") as f:
        f.write("t,re_q,im_q\n")
        for tn, qn in zip(t, signal.samples):
            f.write(f"{tn:.17g},{qn.real:.17g},{qn.imag:.17g}\n")


def read_signal_csv(path, kappa=1) -> SampledSignal:
    """Read a t,re_q,im_q CSV of midpoint samples back into a SampledSignal.

    The sample times must be uniformly spaced; the grid boundaries are the
    midpoint grid's implied ones (t0 -/+ h/2).
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError("expected three columns: t,re_q,im_q")
    t = data[:, 0]
    if t.size < 2:
        raise ValueError("need at least two samples to infer the grid")
    h = t[1] - t[0]
    if h <= 0 or np.max(np.abs(np.diff(t) - h)) > 1e-9 * abs(h):
        raise ValueError("sample times must be uniformly increasing")
    grid = SignalGrid(t[0] - h / 2.0, t[-1] + h / 2.0, t.size, kappa=kappa)
    return SampledSignal(grid, data[:, 1] + 1j * data[:, 2])
