"""Richardson extrapolation of the continuous spectrum.

Running the same integrator on the native grid and on a twice-coarser grid
gives two approximations whose leading errors scale as h^r and (2h)^r; the
combination (2^r fine - coarse) / (2^r - 1) cancels that term and raises the
observed order by two for the schemes used here.
"""

import numpy as np

from .fast import _band_check, reflection_fast
from .integrators import SpectrumResult, bandlimited_shift
from .signals import SampledSignal, SignalGrid


def richardson_combine(fine, coarse, order, ratio=2.0):
    """(ratio^order * fine - coarse) / (ratio^order - 1), elementwise."""
    if order < 1:
        raise ValueError("order must be a positive integer")
    weight = float(ratio) ** order
    return (weight * np.asarray(fine) - np.asarray(coarse)) / (weight - 1.0)


def coarse_grid_signal(signal: SampledSignal) -> SampledSignal:
    """The same signal sampled at the D/2 midpoints of a twice-coarser grid.

    Coarse midpoints sit between fine ones, so the samples come from the
    band-limited interpolant shifted by half a fine step, decimated by two.
    """
    d = signal.grid.d
    if d < 2 or d % 2:
        raise ValueError("need an even number of samples to coarsen")
    shifted = bandlimited_shift(signal.samples, -0.5 * signal.h, signal.h)
    grid = SignalGrid(signal.grid.t_minus, signal.grid.t_plus, d // 2,
                      signal.grid.kappa)
    return SampledSignal(grid, shifted[0::2])


def reflection_fast_re(scheme, signal, lambda_max, m_points=None, m=4,
                       order=None, node_values=None,
                       coarse_node_values=None) -> SpectrumResult:
    """Extrapolated rho, a, b on the uniform lambda grid.

    order defaults to the scheme's classical order.  The lambda band is
    checked against the coarse grid (step 2h), the tighter of the two.
    coarse_node_values overrides band-limited coarsening for signals that
    violate its assumptions (e.g. a jump inside the window).
    """
    order = scheme.order if order is None else order
    if m_points is None:
        m_points = signal.grid.d  # resolve here: the coarse run must not
        # fall back to its own smaller default
    _band_check(lambda_max, 2.0 * signal.h, m, what="coarse-grid")
    fine = reflection_fast(scheme, signal, lambda_max, m_points, m,
                           node_values)
    coarse_signal = coarse_grid_signal(signal)
    coarse = reflection_fast(scheme, coarse_signal, lambda_max, m_points, m,
                             coarse_node_values)
    a = richardson_combine(fine.a, coarse.a, order)
    b = richardson_combine(fine.b, coarse.b, order)
    rho = richardson_combine(fine.rho, coarse.rho, order)
    return SpectrumResult(fine.lambdas, a, b, rho,
                          method=f"{scheme.name}+fft+re",
                          d=signal.grid.d, h=signal.h)
