"""Discrete-spectrum computation: eigenvalues of the scattering problem.

Eigenvalues are the zeros of a(lambda) in the upper half-plane.  The
numerator polynomial of the fast pipeline's 11 entry approximates a up to a
root-free monomial factor, so its roots inside the unit circle are
eigenvalue candidates.  The cost stays near O(D log^2 D) by building that
polynomial from a subsampled signal (about sqrt(D) log2 D samples), refining
the mapped roots with Newton's method on the full signal, and extrapolating
each (initial, refined) pair in the step size.
"""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .fast import ZMapping, scattering_polymat
from .integrators import CfqmScheme, bandlimited_shift, coefficients_slow
from .signals import SampledSignal, SignalGrid

#: status values an EigenCandidate moves through
STATUS_RAW = "raw"
STATUS_REFINED = "refined"
STATUS_FILTERED = "filtered_out"
STATUS_DUPLICATE = "duplicate_discarded"
STATUS_DIVERGED = "diverged"

#: spurious roots cluster at the edge of the resolvable band; keep this
#: fraction of it
BAND_FRACTION = 0.9

#: companion-matrix root finding is used up to this degree
DIRECT_ROOTS_MAX_DEGREE = 2000

PAIRING_TOL = 1e-9
NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 15


@dataclass
class EigenCandidate:
    lambda_init: complex
    lambda_refined: Optional[complex] = None
    lambda_extrapolated: Optional[complex] = None
    status: str = STATUS_RAW
    iterations: int = 0

    @property
    def value(self) -> complex:
        """Best available approximation."""
        if self.lambda_extrapolated is not None:
            return self.lambda_extrapolated
        if self.lambda_refined is not None:
            return self.lambda_refined
        return self.lambda_init


@dataclass
class EigenSet:
    """All candidates of one run plus the grid data needed to interpret them."""

    candidates: list = field(default_factory=list)
    h: float = 0.0
    h_sub: float = 0.0
    r: int = 0

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([c.value for c in self.candidates
                         if c.status == STATUS_REFINED], dtype=np.complex128)


# ---------------------------------------------------------------------------
# subsampling


def subsample_count(d: int) -> int:
    """Sample count that keeps O(N^2) root finding within O(D log^2 D)."""
    return min(d, max(1, int(round(np.sqrt(d) * np.log2(d)))))


def subsample(signal: SampledSignal, d_sub=None) -> SampledSignal:
    """Every s-th sample, s = round(D / D_sub), as its own midpoint grid.

    The chosen samples q_{j s} sit at the midpoints of a grid with step
    s h whose window starts at T- + (1 - s) h / 2, so downstream code can
    treat the result like any other sampled signal.  D_sub shrinks a little
    when rounding would push the last index past the data.
    """
    d = signal.grid.d
    if d < 4:
        raise ValueError("need at least 4 samples to subsample")
    d_sub = subsample_count(d) if d_sub is None else int(d_sub)
    if not 1 <= d_sub <= d:
        raise ValueError("d_sub must lie in [1, D]")
    stride = max(1, int(round(d / d_sub)))
    d_sub = min(d_sub, (d - 1) // stride + 1)
    h = signal.h
    t_minus = signal.grid.t_minus + (1 - stride) * h / 2.0
    grid = SignalGrid(t_minus, t_minus + d_sub * stride * h, d_sub,
                      signal.grid.kappa)
    return SampledSignal(grid, signal.samples[::stride][:d_sub].copy())


def subsample_nodes(signal: SampledSignal, scheme: CfqmScheme,
                    sub_signal: SampledSignal) -> np.ndarray:
    """(K, D_sub) node values for the subsampled grid, interpolated from the
    original D samples rather than the D_sub kept ones."""
    stride = int(round(sub_signal.h / signal.h))
    d_sub = sub_signal.grid.d
    out = np.empty((scheme.k_nodes, d_sub), dtype=np.complex128)
    for k, ck in enumerate(scheme.c):
        if ck == 0.5:
            out[k] = sub_signal.samples
        else:
            shifted = bandlimited_shift(signal.samples,
                                        -(ck - 0.5) * sub_signal.h, signal.h)
            out[k] = shifted[::stride][:d_sub]
    return out


# ---------------------------------------------------------------------------
# polynomial roots


def a_num_poly(scheme, signal, m=4, node_values=None) -> np.ndarray:
    """Ascending coefficients of the a-coefficient numerator polynomial.

    The monomial denominator of the scattering polynomial matrix is dropped;
    it has no roots away from z = 0.
    """
    poly = scattering_polymat(scheme, signal, m=m, node_values=node_values)
    return poly.coeffs[0].copy()


def _strip_negligible(coeffs, rel=1e-220):
    """Trim both ends below rel * max|c|; returns (trimmed, origin_roots).

    The top coefficients of long scattering polynomials underflow (they are
    products of O(h^2) terms over all steps); trimming them perturbs the
    polynomial by less than rel on the closed unit disk.
    """
    mags = np.abs(coeffs)
    top = mags.max() if mags.size else 0.0
    if not np.isfinite(top):
        raise FloatingPointError(
            "polynomial has non-finite coefficients (non-finite or "
            "overflowing signal samples?)")
    if top == 0.0:
        raise ValueError("all-zero polynomial")
    keep = np.nonzero(mags > rel * top)[0]
    return coeffs[keep[0]:keep[-1] + 1], int(keep[0])


def _initial_guesses(coeffs) -> np.ndarray:
    """Per-annulus starting points from the Newton polygon of |c_k|.

    The upper convex hull of (k, log|c_k|) splits the degree into runs whose
    root moduli are estimated by |c_i / c_j|^(1/(j-i)); each run starts on
    a circle of that radius with a deterministic per-annulus angle offset.
    """
    n = coeffs.size - 1
    mags = np.abs(coeffs)
    hull = []
    for k in range(n + 1):
        if mags[k] == 0.0:
            continue
        y = np.log(mags[k])
        while len(hull) >= 2:
            (xi, yi), (xj, yj) = hull[-2], hull[-1]
            if (y - yi) * (xj - xi) >= (yj - yi) * (k - xi):
                hull.pop()
            else:
                break
        hull.append((k, y))
    guesses = np.empty(n, dtype=np.complex128)
    pos = 0
    for seg, ((xi, yi), (xj, yj)) in enumerate(zip(hull[:-1], hull[1:])):
        count = xj - xi
        radius = np.exp((yi - yj) / count)
        angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count + 0.4 * seg
        guesses[pos:pos + count] = radius * np.exp(1j * angles)
        pos += count
    return guesses


def find_roots(coeffs) -> np.ndarray:
    """All roots of a polynomial given by ascending coefficients.

    Companion-matrix eigenvalues (with balancing) up to degree 2000; above
    that, Aberth-Ehrlich simultaneous iteration with Newton-polygon starting
    points, whose O(N^2) sweeps stay tractable at subsampled degrees.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.size < 2:
        raise ValueError("need a polynomial of degree >= 1")
    trimmed, origin_roots = _strip_negligible(coeffs)
    roots = [np.zeros(origin_roots, dtype=np.complex128)]
    degree = trimmed.size - 1
    if degree > 0:
        if degree <= DIRECT_ROOTS_MAX_DEGREE:
            roots.append(np.roots(trimmed[::-1]))
        else:
            scaled = trimmed / np.abs(trimmed).max()
            guesses = _initial_guesses(scaled)
            _kernels.aberth_sweeps(scaled, guesses, 120, 1e-13)
            roots.append(guesses)
    return np.concatenate(roots)


def map_and_filter(roots, mapping: ZMapping, h_sub=None) -> list:
    """Map roots z -> lambda and keep plausible eigenvalue candidates.

    Principal branch of the mapping; retains Im(lambda) > 0 (strictly inside
    the unit circle) and |Re(lambda)| below 0.9 of the resolvable band
    pi / h_sub, where the spurious near-circle roots pile up.
    """
    h_sub = mapping.h if h_sub is None else h_sub
    band = BAND_FRACTION * np.pi / h_sub
    roots = np.asarray(roots, dtype=np.complex128)
    roots = roots[roots != 0]
    lams = mapping.lam(roots)
    keep = (lams.imag > 0.0) & (np.abs(lams.real) < band)
    return [EigenCandidate(lam) for lam in lams[keep]]


# ---------------------------------------------------------------------------
# refinement


def newton_refine(candidates, signal, scheme, workers=1,
                  node_values=None) -> list:
    """Newton iteration on the full-signal a(lambda) for each candidate.

    All candidates advance together (one batched scattering evaluation per
    iteration); a candidate stops once its update drops below 1e-15, and
    everything stops after 15 iterations.  Non-finite values or a vanishing
    derivative mark a candidate diverged; survivors are re-filtered against
    Im(lambda) > 0 and the fine-grid band.
    """
    if not candidates:
        return []
    lam = np.array([c.lambda_init for c in candidates], dtype=np.complex128)
    active = np.ones(lam.size, dtype=bool)
    diverged = np.zeros(lam.size, dtype=bool)
    iterations = np.zeros(lam.size, dtype=int)
    for _ in range(NEWTON_MAX_ITER):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        # Spurious candidates far up the half-plane can overflow the
        # e^{-2 i lambda T+} factor of b; they are caught by the finiteness
        # check below, so the evaluation itself need not warn.
        with np.errstate(over="ignore", invalid="ignore"):
            a, _, da, _ = coefficients_slow(scheme, signal, lam[idx],
                                            with_derivative=True,
                                            workers=workers,
                                            node_values=node_values)
        step = np.empty_like(a)
        bad = (da == 0) | ~np.isfinite(a) | ~np.isfinite(da)
        step[~bad] = a[~bad] / da[~bad]
        step[bad] = 0.0
        lam[idx] -= step
        iterations[idx] += 1
        blown = bad | ~np.isfinite(lam[idx]) | (np.abs(lam[idx]) > 1e8)
        diverged[idx[blown]] = True
        active[idx[blown]] = False
        active[idx[np.abs(step) < NEWTON_TOL]] = False
    band = BAND_FRACTION * np.pi / signal.h
    for i, cand in enumerate(candidates):
        cand.iterations = int(iterations[i])
        if diverged[i]:
            cand.status = STATUS_DIVERGED
            continue
        cand.lambda_refined = complex(lam[i])
        if lam[i].imag > 0.0 and abs(lam[i].real) < band:
            cand.status = STATUS_REFINED
        else:
            cand.status = STATUS_FILTERED
    return candidates


def dedupe_and_pair(candidates) -> list:
    """Merge refined values closer than the pairing tolerance.

    When several initial guesses converge to one refined value, the guess
    closest to it is kept (it carries the meaningful coarse-grid error for
    extrapolation) and the rest are marked duplicates.
    """
    refined = [c for c in candidates if c.status == STATUS_REFINED]
    refined.sort(key=lambda c: abs(c.lambda_refined - c.lambda_init))
    kept = []
    for cand in refined:
        for other in kept:
            if abs(cand.lambda_refined - other.lambda_refined) < PAIRING_TOL:
                cand.status = STATUS_DUPLICATE
                break
        else:
            kept.append(cand)
    kept.sort(key=lambda c: (c.lambda_refined.real, c.lambda_refined.imag))
    return kept


def eigen_richardson(pairs, r, h_sub, h) -> np.ndarray:
    """Extrapolate each (init, refined) pair in step size; fills
    lambda_extrapolated and returns the extrapolated values."""
    if h_sub <= h:
        raise ValueError("extrapolation needs h_sub > h")
    weight = (h_sub / h) ** r
    out = np.empty(len(pairs), dtype=np.complex128)
    for i, cand in enumerate(pairs):
        val = (weight * cand.lambda_refined - cand.lambda_init) / (weight - 1.0)
        cand.lambda_extrapolated = complex(val)
        out[i] = val
    return out


def eigen_error(truth, found) -> float:
    """Two-sided max-min set distance; penalizes missed and spurious values.

    Empty found set against non-empty truth gives +inf.
    """
    truth = np.asarray(list(truth), dtype=np.complex128)
    found = np.asarray(list(found), dtype=np.complex128)
    if truth.size == 0:
        raise ValueError("truth set must be non-empty")
    if found.size == 0:
        return np.inf
    dist = np.abs(truth[:, None] - found[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


# ---------------------------------------------------------------------------
# driver


def find_eigenvalues(scheme, signal, m=4, d_sub=None, extrapolate=True,
                     workers=1, node_values=None,
                     sub_node_values=None) -> EigenSet:
    """Full subsample / root-find / refine / extrapolate pipeline.

    node_values overrides the fine-grid nodes used in Newton refinement,
    sub_node_values those used to build the subsampled polynomial (both
    default to band-limited interpolation of the given samples).
    """
    sub = subsample(signal, d_sub)
    if sub_node_values is None:
        sub_node_values = subsample_nodes(signal, scheme, sub)
    coeffs = a_num_poly(scheme, sub, m=m, node_values=sub_node_values)
    roots = find_roots(coeffs)
    candidates = map_and_filter(roots, ZMapping(sub.h, m))
    newton_refine(candidates, signal, scheme, workers=workers,
                  node_values=node_values)
    kept = dedupe_and_pair(candidates)
    if extrapolate and sub.h > signal.h:
        eigen_richardson(kept, scheme.order, sub.h, signal.h)
    return EigenSet(candidates, h=signal.h, h_sub=sub.h, r=scheme.order)


def write_eigen_csv(path, results):
    """Eigenvalue report: re_lambda, im_lambda, status, re_init, im_init.

    results is one EigenSet or a sequence of (d, EigenSet); in the latter
    case a leading d column distinguishes the runs.
    """
    if isinstance(results, EigenSet):
        rows = [(None, results)]
        header = ["re_lambda", "im_lambda", "status", "re_init", "im_init"]
    else:
        rows = [(int(d), es) for d, es in results]
        header = ["d", "re_lambda", "im_lambda", "status", "re_init",
                  "im_init"]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for d, es in rows:
            for cand in es.candidates:
                val = cand.value
                rec = [f"{val.real:.17g}", f"{val.imag:.17g}", cand.status,
                       f"{cand.lambda_init.real:.17g}",
                       f"{cand.lambda_init.imag:.17g}"]
                writer.writerow(rec if d is None else [d] + rec)
