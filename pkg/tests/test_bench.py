"""Error metrics, ODE oracle, FLOP model, and the sweep drivers."""

import numpy as np
import pytest

import fastnft as fn
from fastnft.bench import (SweepConfig, error_b, error_rho, exact_node_values,
                           example_signal, fit_loglog_slope, flop_count,
                           flop_crossover, normalize_method, ode_oracle,
                           read_results_csv, run_eigen, run_sweep,
                           write_results_csv)
from fastnft.integrators import CF2_4
from fastnft.signals import sample_sech_focusing, sech_focusing_q

# ---------------------------------------------------------------------------
# error metrics


def test_error_metrics_basic():
    truth = np.array([3.0, 4.0])
    assert error_rho(truth, truth) == 0.0
    assert abs(error_rho(truth, np.zeros(2)) - 1.0) < 1e-15
    assert abs(error_b(truth, np.array([3.0, 4.0 + 5.0j])) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        error_rho(truth, np.zeros(3))
    with pytest.raises(ValueError):
        error_rho(np.zeros(2), truth)


def test_error_metrics_exclude_nonfinite():
    truth = np.array([1.0, 1.0])
    with pytest.warns(UserWarning, match="non-finite"):
        err = error_rho(truth, np.array([1.0, np.inf]))
    assert err == 0.0  # the surviving point agrees exactly


# ---------------------------------------------------------------------------
# brute-force oracle


def test_ode_oracle_zero_signal():
    a, b = ode_oracle(lambda t: 0.0, np.array([0.5, -1.0, 2.0 + 1.0j]),
                      t_minus=-1.0, t_plus=1.0, kappa=1)
    assert np.max(np.abs(a - 1.0)) < 1e-10
    assert np.max(np.abs(b)) < 1e-10


def test_ode_oracle_validation():
    lam = np.array([0.0])
    with pytest.raises(ValueError):
        ode_oracle(lambda t: 0.0, lam, t_minus=-1.0, t_plus=1.0, kappa=1,
                   tol=1e-5)
    with pytest.raises(ValueError):
        ode_oracle(lambda t: 0.0, lam)  # callable without interval data
    with pytest.raises(ValueError):
        ode_oracle(lambda t: 0.0, lam, t_minus=-1.0, t_plus=1.0, kappa=2)


def test_ode_oracle_accepts_sampled_signal():
    sig = sample_sech_focusing(512)
    a, b = ode_oracle(sig, np.array([0.3]))
    oracle = fn.oracle_sech_focusing()
    assert abs(a[0] - oracle.a(np.array([0.3]))[0]) < 1e-8
    assert abs(b[0] - oracle.b(np.array([0.3]))[0]) < 1e-8


# ---------------------------------------------------------------------------
# FLOP model


def test_flop_count_spot_values():
    total, br = flop_count("cf2", 4, 4)
    assert br["mult"] == 14 * 4 + 9 * 4 + 18 * 4 * 4 == 380
    assert total == 1520.0
    # totals apply the per-operation weights to the breakdown
    total2, br2 = flop_count("fcf2", 64, 64)
    assert {"czt", "fast_scattering", "sinc"} <= set(br2)
    weights = {"div": 4.0, "sqrt": 4.0, "cos": 8.0, "exp": 8.0, "sinc": 12.0}
    recomputed = sum(count * weights.get(op, 1.0) for op, count in br2.items())
    assert abs(total2 - recomputed) < 1e-9 * total2


def test_flop_count_validation():
    with pytest.raises(ValueError):
        flop_count("cf2", 4, 8)  # m > d
    with pytest.raises(ValueError):
        flop_count("cf2", 4.0, 4)  # non-integer
    with pytest.raises(ValueError):
        flop_count("cf1", 64, 64)  # no model for the order-2 pair


def test_flop_model_asymptotics():
    totals = [flop_count("cf2", 1 << k, 1 << k)[0] for k in range(4, 11)]
    assert all(b > a for a, b in zip(totals, totals[1:]))
    # quadratic term dominates the direct method; the fast model wins late
    assert flop_count("fcf2", 64, 64)[0] > flop_count("cf2", 64, 64)[0]
    assert flop_count("fcf2", 4096, 4096)[0] < flop_count("cf2", 4096, 4096)[0]


def test_flop_crossover_location():
    assert flop_crossover() == 362


def test_normalize_method():
    assert normalize_method("CF2[4]") == "cf2"
    assert normalize_method("FCF-RE1") == "fcf_re1"
    assert normalize_method("fcfre2") == "fcf_re2"
    assert normalize_method(" fcf1 ") == "fcf1"
    with pytest.raises(ValueError):
        normalize_method("bogus")


# ---------------------------------------------------------------------------
# slope fitting


def test_fit_loglog_slope_clean_power_law():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    slope = fit_loglog_slope(h, 3.0 * h ** 3)
    assert abs(slope - 3.0) < 1e-12


def test_fit_loglog_slope_stops_at_error_floor():
    h = np.array([0.4, 0.2, 0.1, 0.05, 0.025])
    e = 3.0 * h ** 3
    e[-2:] = [2.0e-3, 1.9e-3]  # floor: drops less than 2x per halving
    slope = fit_loglog_slope(h, e)
    assert abs(slope - 3.0) < 1e-12  # fitted over the three clean points


def test_fit_loglog_slope_needs_two_points():
    assert fit_loglog_slope([0.4, 0.2], [1.0e-9, 0.9e-9]) is None
    assert fit_loglog_slope([0.4, 0.2], [np.nan, 1.0]) is None


# ---------------------------------------------------------------------------
# example dispatch


def test_example_signal_dispatch(tmp_path):
    sig, oracle, q = example_signal("1", 32, amplitude=2.0)
    assert abs(sig.samples[16] - sech_focusing_q(sig.grid.midpoints()[16],
                                                 q0=2.0)) < 1e-14
    assert oracle.eigenvalues.size == 2  # floor(2.0 + 0.5)
    sig3, _, _ = example_signal("3", 32)
    assert sig3.kappa == -1
    path = tmp_path / "sig.csv"
    fn.write_signal_csv(path, sig)
    sig_csv, oracle_csv, q_csv = example_signal("csv", 32, signal_path=path)
    assert oracle_csv is None and q_csv is None
    assert np.max(np.abs(sig_csv.samples - sig.samples)) < 1e-16
    with pytest.raises(ValueError):
        example_signal("7", 32)


def test_exact_node_values():
    sig = sample_sech_focusing(64)
    rows = exact_node_values(sech_focusing_q, sig, CF2_4)
    assert rows.shape == (2, 64)
    t = sig.grid.midpoints()
    for k, ck in enumerate(CF2_4.c):
        expect = sech_focusing_q(t + (ck - 0.5) * sig.h)
        assert np.max(np.abs(rows[k] - expect)) < 1e-14


# ---------------------------------------------------------------------------
# sweeps


def test_run_sweep_rows_and_files(tmp_path, warm):
    out = tmp_path / "rows.csv"
    plot = tmp_path / "rows.svg"
    config = SweepConfig(example="1", methods=("cf1", "cf2", "fcf2"),
                         d_values=(64, 128), m_points=32, lambda_max=6.0,
                         repetitions=1, out=str(out), plot=str(plot))
    rows, slopes = run_sweep(config)
    assert len(rows) == 6
    for row in rows:
        assert row["e_rho"] is not None and row["e_b"] is not None
        assert row["time_s"] > 0.0
        assert row["m"] == 32 and row["lambda_max"] == 6.0
    flops = {r["method"]: r["flops"] for r in rows}
    assert flops["cf1"] is None  # the model only covers the order-4 pair
    assert flops["cf2"] is not None and flops["fcf2"] is not None
    assert set(slopes) == {("cf1", None), ("cf2", None), ("fcf2", None)}
    assert out.exists() and plot.stat().st_size > 0

    back = read_results_csv(out)
    assert len(back) == len(rows)
    for row, rback in zip(rows, back):
        for key, val in row.items():
            if isinstance(val, float):
                assert rback[key] == val  # 17 digits: bit-exact round trip
            else:
                assert rback[key] == (val if val is not None else None)


def test_results_csv_round_trip(tmp_path):
    rows = [{"example": "1", "method": "cf2", "amplitude": None, "d": 64,
             "m": 32, "h": 1.0, "lambda_max": 6.0, "e_rho": 1.0 / 3.0,
             "e_b": None, "time_s": 0.25, "flops": 1.5e9}]
    path = tmp_path / "one.csv"
    write_results_csv(path, rows)
    back = read_results_csv(path)
    assert back == rows


def test_run_sweep_amplitude_mode(tmp_path, warm):
    plot = tmp_path / "amp.svg"
    config = SweepConfig(example="1", methods=("cf2",), d_values=(64,),
                         m_points=16, lambda_max=6.0, repetitions=1,
                         amplitudes=(0.4, 1.4), plot=str(plot))
    rows, slopes = run_sweep(config)
    assert [r["amplitude"] for r in rows] == [0.4, 1.4]
    assert plot.stat().st_size > 0
    with pytest.raises(ValueError):
        SweepConfig(example="2", amplitudes=(0.5,))


def test_run_sweep_user_scheme(tmp_path, warm):
    a_path, c_path = tmp_path / "a.csv", tmp_path / "c.csv"
    a_path.write_text("j,k,a_jk\n" + "".join(
        f"{j + 1},{k + 1},{float(CF2_4.a[j, k].real)!r}\n"
        for j in range(2) for k in range(2)))
    c_path.write_text("k,c_k\n" + "".join(
        f"{k + 1},{float(CF2_4.c[k])!r}\n" for k in range(2)))
    config = SweepConfig(example="1", methods=("cf2", "user"), d_values=(64,),
                         m_points=16, lambda_max=6.0, repetitions=1,
                         scheme_a=str(a_path), scheme_c=str(c_path),
                         scheme_order=4)
    rows, _ = run_sweep(config)
    by_method = {r["method"]: r for r in rows}
    # same table, same numbers
    assert abs(by_method["user"]["e_rho"] - by_method["cf2"]["e_rho"]) < 1e-15


def test_run_sweep_skips_broken_user_table(warm):
    config = SweepConfig(example="1", methods=("cf2", "user"), d_values=(64,),
                         m_points=16, lambda_max=6.0, repetitions=1)
    with pytest.warns(UserWarning, match="skipping user coefficient table"):
        rows, _ = run_sweep(config)
    assert {r["method"] for r in rows} == {"cf2"}


def test_run_eigen_smoke(warm):
    config = SweepConfig(example="1", methods=("cf2",), d_values=(512,),
                         repetitions=1)
    rows, sets = run_eigen(config)
    assert len(rows) == 1 and sets[0][0] == 512
    row = rows[0]
    assert row["n_found"] == 5
    assert row["elambda"] < 1e-2
    assert row["elambda_refined"] < 1e-2
    assert abs(row["h_sub"] - 3 * row["h"]) < 1e-15


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(example="9")
    with pytest.raises(ValueError):
        SweepConfig(example="csv")  # needs signal_path
    with pytest.raises(ValueError):
        SweepConfig(d_values=())
    with pytest.raises(ValueError):
        SweepConfig(d_values=(1,))
    with pytest.raises(ValueError):
        SweepConfig(repetitions=0)
