"""2x2 exponentials and polynomial-matrix arithmetic."""

import numpy as np
import pytest
import scipy.linalg

from fastnft.linalg import (PolyMat2, expm_traceless, expm_traceless_derivative,
                            polymat_mul)


def random_traceless(rng, scale=1.0):
    x = scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    return np.array([[x[0], x[1]], [x[2], -x[0]]])


def as_dense(p, length=None):
    n = p.coeffs.shape[1] if length is None else length
    out = np.zeros((4, n), dtype=complex)
    out[:, : p.coeffs.shape[1]] = p.coeffs
    return out


# --- closed-form exponential ------------------------------------------------

def test_rotation_block():
    th = np.pi / 3
    b = np.array([[0.0, th], [-th, 0.0]], dtype=complex)
    expect = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    assert np.max(np.abs(expm_traceless(b) - expect)) < 1e-15


def test_diagonal_block():
    b = np.diag([1.0 + 0j, -1.0 + 0j])
    expect = np.diag([np.e, 1.0 / np.e])
    assert np.max(np.abs(expm_traceless(b) - expect)) < 1e-15


def test_zakharov_shabat_step_against_scipy():
    q, lam, h, kappa = 2 + 1j, 0.7, 0.1, 1
    b = h * np.array([[-1j * lam, q], [-kappa * np.conj(q), 1j * lam]])
    ours = expm_traceless(b)
    ref = scipy.linalg.expm(b)
    assert np.max(np.abs(ours - ref)) < 1e-14


def test_matches_scipy_randomized(rng):
    worst = 0.0
    for _ in range(50):
        b = random_traceless(rng, scale=1.5)  # ||B|| up to ~5
        ours = expm_traceless(b)
        ref = scipy.linalg.expm(b)
        worst = max(worst, np.linalg.norm(ours - ref) / np.linalg.norm(ref))
    assert worst < 1e-13


def test_determinant_one(rng):
    # exponents kept small enough that the det's cancellation stays benign
    for _ in range(50):
        b = random_traceless(rng, scale=1.0)
        if np.linalg.norm(b) > 4:
            continue
        g = expm_traceless(b)
        assert abs(np.linalg.det(g) - 1.0) < 1e-12


def test_rejects_nonzero_trace():
    with pytest.raises(ValueError):
        expm_traceless(np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex))


def test_small_argument_series_branch():
    b = np.array([[1e-6, 2e-6], [3e-6, -1e-6]], dtype=complex)
    ref = scipy.linalg.expm(b)
    assert np.max(np.abs(expm_traceless(b) - ref)) < 1e-15


def test_derivative_matches_finite_differences(rng):
    b = random_traceless(rng)
    db = random_traceless(rng)
    eps = 1e-7
    _, dg = expm_traceless_derivative(b, db)
    fd = (expm_traceless(b + eps * db) - expm_traceless(b - eps * db)) / (2 * eps)
    assert np.max(np.abs(dg - fd)) < 1e-6


# --- polynomial matrices ----------------------------------------------------

def test_identity_is_neutral(rng):
    c = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    p = PolyMat2(c, denom_power=2)
    out = polymat_mul(PolyMat2.identity(), p)
    assert np.allclose(as_dense(out, 5), c, atol=1e-14)
    assert out.denom_power == 2


def test_diagonal_difference_of_squares():
    up = PolyMat2(np.array([[1, 1], [0, 0], [0, 0], [1, 1]], dtype=complex))
    dn = PolyMat2(np.array([[1, -1], [0, 0], [0, 0], [1, -1]], dtype=complex))
    out = polymat_mul(up, dn)
    assert np.allclose(out.coeffs[0], [1, 0, -1])
    assert np.allclose(out.coeffs[3], [1, 0, -1])
    assert np.allclose(out.coeffs[1], 0) and np.allclose(out.coeffs[2], 0)


def schoolbook_mul(a, b):
    na, nb = a.coeffs.shape[1], b.coeffs.shape[1]
    out = np.zeros((2, 2, na + nb - 1), dtype=complex)
    am = a.coeffs.reshape(2, 2, na)
    bm = b.coeffs.reshape(2, 2, nb)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                out[i, j] += np.convolve(am[i, k], bm[k, j])
    return out.reshape(4, na + nb - 1)


def test_fft_product_equals_schoolbook(rng):
    for _ in range(10):
        a = PolyMat2(rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8)))
        b = PolyMat2(rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8)))
        out = polymat_mul(a, b)
        ref = schoolbook_mul(a, b)
        assert np.max(np.abs(as_dense(out, 15) - ref)) < 1e-12


def test_degrees_and_denominators_add(rng):
    a = PolyMat2(rng.standard_normal((4, 4)) + 0j, denom_power=1)
    b = PolyMat2(rng.standard_normal((4, 6)) + 0j, denom_power=3)
    out = polymat_mul(a, b)
    assert out.degree == a.degree + b.degree
    assert out.denom_power == 4


def test_associativity(rng):
    mats = [PolyMat2(rng.standard_normal((4, 33)) + 1j * rng.standard_normal((4, 33)))
            for _ in range(3)]
    left = polymat_mul(polymat_mul(mats[0], mats[1]), mats[2])
    right = polymat_mul(mats[0], polymat_mul(mats[1], mats[2]))
    scale = np.max(np.abs(left.coeffs))
    assert np.max(np.abs(left.coeffs - right.coeffs)) < 1e-10 * scale


def test_eval_includes_denominator():
    # p(z) = z^2 / z  evaluated at z = 2i -> 2i
    c = np.zeros((4, 3), dtype=complex)
    c[0, 2] = 1.0
    c[3, 0] = 1.0
    p = PolyMat2(c, denom_power=1)
    val = p.eval(np.array([2j]))
    assert abs(val[0, 0, 0] - 2j) < 1e-14
