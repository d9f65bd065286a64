"""Richardson extrapolation of the continuous spectrum."""

import numpy as np
import pytest

from fastnft.bench import error_rho
from fastnft.fast import reflection_fast
from fastnft.integrators import CF2_4
from fastnft.richardson import (coarse_grid_signal, reflection_fast_re,
                                richardson_combine)
from fastnft.signals import (SampledSignal, SignalGrid, oracle_sech_focusing,
                             sample_sech_focusing)


def test_combine_cancels_leading_error_term():
    x = np.array([1.0 + 2.0j, -0.5 + 0.1j])
    c = np.array([0.3 - 0.2j, 1.1 + 0.9j])
    h, r = 0.01, 4
    fine = x + c * h ** r
    coarse = x + c * (2 * h) ** r
    out = richardson_combine(fine, coarse, r)
    assert np.max(np.abs(out - x)) < 1e-14


def test_combine_general_ratio_and_validation():
    # ratio 3 with order 2: weight 9
    assert abs(richardson_combine(1.0, 9.0, 2, ratio=3.0) - 0.0) < 1e-15
    with pytest.raises(ValueError):
        richardson_combine(1.0, 2.0, 0)


def test_coarse_grid_signal_on_tone():
    d, t_minus, t_plus = 64, -8.0, 8.0
    grid = SignalGrid(t_minus, t_plus, d)
    omega = 2.0 * np.pi * 3 / (t_plus - t_minus)
    sig = SampledSignal(grid, np.exp(1j * omega * grid.midpoints()))
    coarse = coarse_grid_signal(sig)
    assert coarse.grid.d == d // 2
    assert coarse.grid.t_minus == t_minus and coarse.grid.t_plus == t_plus
    assert abs(coarse.h - 2 * sig.h) < 1e-15
    expect = np.exp(1j * omega * coarse.grid.midpoints())
    assert np.max(np.abs(coarse.samples - expect)) < 1e-12


def test_coarse_grid_signal_needs_even_d():
    grid = SignalGrid(-1.0, 1.0, 5)
    sig = SampledSignal(grid, np.zeros(5))
    with pytest.raises(ValueError):
        coarse_grid_signal(sig)


def test_extrapolated_run_is_the_manual_combination():
    sig = sample_sech_focusing(256)
    res = reflection_fast_re(CF2_4, sig, 8.0, m_points=64)
    fine = reflection_fast(CF2_4, sig, 8.0, m_points=64)
    coarse = reflection_fast(CF2_4, coarse_grid_signal(sig), 8.0, m_points=64)
    assert np.array_equal(res.a, richardson_combine(fine.a, coarse.a, 4))
    assert np.array_equal(res.b, richardson_combine(fine.b, coarse.b, 4))
    assert np.array_equal(res.rho, richardson_combine(fine.rho, coarse.rho, 4))
    assert res.method == "CF2[4]+fft+re"
    assert res.d == 256  # reported grid is the fine one


def test_default_m_points_follows_the_fine_grid():
    # both runs must share one lambda grid when m_points is left out
    sig = sample_sech_focusing(256)
    res = reflection_fast_re(CF2_4, sig, 8.0)
    explicit = reflection_fast_re(CF2_4, sig, 8.0, m_points=256)
    assert res.rho.shape == (256,)
    assert np.array_equal(res.rho, explicit.rho)


def test_band_checked_against_coarse_grid():
    sig = sample_sech_focusing(64)  # h = 1: fine band 4 pi, coarse band 2 pi
    with pytest.raises(ValueError, match="coarse"):
        reflection_fast_re(CF2_4, sig, 7.0, m_points=8)


def test_extrapolation_improves_the_error():
    # needs both grids in the asymptotic regime, hence the larger D
    sig = sample_sech_focusing(1024)
    oracle = oracle_sech_focusing()
    plain = reflection_fast(CF2_4, sig, 8.0, m_points=64)
    extra = reflection_fast_re(CF2_4, sig, 8.0, m_points=64)
    truth = oracle.rho(plain.lambdas)
    e_plain = error_rho(truth, plain.rho)
    e_extra = error_rho(truth, extra.rho)
    assert e_extra < e_plain / 10.0  # measured: ~90x at this size
