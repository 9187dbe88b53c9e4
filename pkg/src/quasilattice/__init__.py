"""Perturbed integer lattices with prescribed transform behavior on a window.

The package solves for small offsets alpha_n so that the counting measure
of Lambda = {n + alpha_n} has, on a chosen frequency window, a transform
equal to a unit mass at zero plus a prescribed smooth profile.  On top of
the solver sit verdict tools (two-route translate-sum evaluation), a
construction that lifts a verdict pair to everywhere-positive functions,
and a level-zero variant whose spectrum vanishes at the origin except for
the unit mass.
"""

from .errors import (
    CalibrationError,
    ConfigurationError,
    ConstructionError,
    ContractViolation,
    ConvergenceError,
    GeometryError,
    QuasilatticeError,
)
from .grids import DEFAULT_NODE_COUNT, QuadratureGrid
from .spectra import TrigSpectrum, eval_trig_poly, windowed_coefficients
from .windows import (
    BumpComponent,
    SmoothWindow,
    SpectralTarget,
    WindowGeometry,
    build_Tr,
)
from .perturbation import (
    PerturbationSequence,
    PerturbedLattice,
    eval_F,
    eval_F_hat,
)
from .solver import (
    LatticeBuild,
    SolveDiagnostics,
    SolverConfig,
    WindowSpectrum,
    addendum_lattice,
    apply_R,
    build_lattice_with_spectrum,
    calibrated_window_lattice,
    contraction_probe,
    difference_bound_check,
    fixed_point_solve,
    solve_prescribed_transform,
    term_bound_check,
    term_spectrum,
)
from .tiling import (
    DensityFunction,
    DichotomyPair,
    PositivePair,
    ScanReport,
    TilingReport,
    ZeroSetDescriptor,
    assess_tiling,
    construct_pair,
    envelope_bounds,
    make_density,
    min_value_scan,
    positive_pair,
    translate_sum_direct,
    translate_sum_spectral,
)
from .probes import (
    AddendumProbeReport,
    ConvolutionCheckReport,
    LemmaSuiteReport,
    ProbeResult,
    TestFunction,
    addendum_spectrum_probe,
    comb_decay_constant,
    convolution_transform_check,
    even_test,
    lemma_bound_suite,
    make_test_family,
    odd_test,
    pair_with_lattice,
    poisson_check,
    verify_window_spectrum,
)
from .config import (
    DEFAULT_CONFIG,
    ExperimentConfig,
    RunManifest,
    load_build,
    save_build,
)

__version__ = "1.0.0"

__all__ = [
    "QuasilatticeError",
    "ConfigurationError",
    "GeometryError",
    "ContractViolation",
    "ConvergenceError",
    "CalibrationError",
    "ConstructionError",
    "QuadratureGrid",
    "DEFAULT_NODE_COUNT",
    "TrigSpectrum",
    "windowed_coefficients",
    "eval_trig_poly",
    "WindowGeometry",
    "BumpComponent",
    "SmoothWindow",
    "SpectralTarget",
    "build_Tr",
    "PerturbationSequence",
    "PerturbedLattice",
    "eval_F",
    "eval_F_hat",
    "SolverConfig",
    "SolveDiagnostics",
    "LatticeBuild",
    "WindowSpectrum",
    "apply_R",
    "term_spectrum",
    "term_bound_check",
    "difference_bound_check",
    "contraction_probe",
    "fixed_point_solve",
    "solve_prescribed_transform",
    "build_lattice_with_spectrum",
    "calibrated_window_lattice",
    "addendum_lattice",
    "DensityFunction",
    "make_density",
    "ZeroSetDescriptor",
    "TilingReport",
    "translate_sum_direct",
    "translate_sum_spectral",
    "assess_tiling",
    "DichotomyPair",
    "construct_pair",
    "PositivePair",
    "positive_pair",
    "envelope_bounds",
    "ScanReport",
    "min_value_scan",
    "TestFunction",
    "make_test_family",
    "even_test",
    "odd_test",
    "ProbeResult",
    "poisson_check",
    "pair_with_lattice",
    "verify_window_spectrum",
    "AddendumProbeReport",
    "addendum_spectrum_probe",
    "ConvolutionCheckReport",
    "convolution_transform_check",
    "comb_decay_constant",
    "LemmaSuiteReport",
    "lemma_bound_suite",
    "DEFAULT_CONFIG",
    "ExperimentConfig",
    "RunManifest",
    "save_build",
    "load_build",
    "__version__",
]
