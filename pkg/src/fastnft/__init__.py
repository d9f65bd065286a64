"""Forward nonlinear Fourier transform of the Zakharov-Shabat problem.

Continuous spectrum (reflection coefficient and b-coefficient) via
commutator-free exponential integrators, either step by step or through the
fast polynomial-scattering pipeline, plus Richardson extrapolation, the
discrete-spectrum (eigenvalue) pipeline, and benchmarking utilities.
"""

from .bench import (SweepConfig, error_b, error_rho, example_signal,
                    flop_count, flop_crossover, normalize_method, ode_oracle,
                    run_eigen, run_sweep)
from .discrete import (EigenCandidate, EigenSet, eigen_error,
                       eigen_richardson, find_eigenvalues, find_roots,
                       subsample, write_eigen_csv)
from .fast import (ZMapping, evaluate_poly_unit_circle, reflection_fast,
                   scattering_polymat, split_exponential, step_polymat,
                   tree_multiply)
from .integrators import (CF1_2, CF2_4, CfqmScheme, Eigenfunction,
                          SpectrumResult, bandlimited_shift,
                          coefficients_slow, lambda_grid, load_scheme,
                          node_samples, reflection_slow, scatter_slow,
                          scattering_to_coeffs, transfer_step)
from .linalg import PolyMat2, expm_traceless, polymat_mul
from .richardson import (coarse_grid_signal, reflection_fast_re,
                         richardson_combine)
from .signals import (AnalyticSpectrum, SampledSignal, SignalGrid,
                      evolve_spectrum, oracle_rational_onepole,
                      oracle_sech_defocusing, oracle_sech_focusing,
                      read_signal_csv, sample_rational_onepole,
                      sample_sech_defocusing, sample_sech_focusing,
                      write_signal_csv)
from .special import gamma

__version__ = "0.1.0"

__all__ = [
    "AnalyticSpectrum", "CF1_2", "CF2_4", "CfqmScheme", "EigenCandidate",
    "EigenSet", "Eigenfunction", "PolyMat2", "SampledSignal", "SignalGrid",
    "SpectrumResult", "SweepConfig", "ZMapping", "bandlimited_shift",
    "coarse_grid_signal", "coefficients_slow", "eigen_error",
    "eigen_richardson", "error_b", "error_rho", "evaluate_poly_unit_circle",
    "evolve_spectrum", "example_signal", "expm_traceless", "find_eigenvalues",
    "find_roots", "flop_count", "flop_crossover", "gamma", "lambda_grid",
    "load_scheme", "node_samples", "normalize_method", "ode_oracle",
    "oracle_rational_onepole", "oracle_sech_defocusing",
    "oracle_sech_focusing", "polymat_mul", "read_signal_csv",
    "reflection_fast", "reflection_fast_re", "reflection_slow", "run_eigen",
    "run_sweep", "richardson_combine", "sample_rational_onepole",
    "sample_sech_defocusing", "sample_sech_focusing", "scatter_slow",
    "scattering_polymat", "scattering_to_coeffs", "split_exponential",
    "step_polymat", "subsample", "transfer_step", "tree_multiply",
    "write_eigen_csv", "write_signal_csv",
]
