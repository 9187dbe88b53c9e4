"""Fixed-point construction of lattices with prescribed window spectra.

The machinery realizes one idea: the transform of the interval field of a
perturbed lattice splits into a linear part (the trig polynomial of the
offsets) plus a quadratically small remainder R(alpha) supported, after
windowing, on the frequency cutoff. Prescribing the transform on the window
therefore reduces to the fixed-point equation T + R(F(T)) = S1, solved by
plain Picard iteration whenever the prescription is small enough to keep R a
contraction on the relevant ball.

All operator inputs live on a shared quadrature grid; coefficients beyond the
truncation are measured (the FFT yields them for free) and carried as an
explicit tail budget rather than silently discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CalibrationError,
    ConfigurationError,
    ConstructionError,
    ContractViolation,
    ConvergenceError,
    GeometryError,
)
from .grids import DEFAULT_NODE_COUNT, QuadratureGrid
from .perturbation import SMALL_PHASE, PerturbationSequence, PerturbedLattice, eval_F_hat
from .spectra import TrigSpectrum, pm_norm, windowed_coefficients
from .windows import SmoothWindow, SpectralTarget, WindowGeometry, build_Tr

__all__ = [
    "SolverConfig",
    "SolveDiagnostics",
    "WindowSpectrum",
    "LatticeBuild",
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
]

# Coarse analytic per-term bound: a term with offset s contributes at most
# ~1.4 s^2 to any coefficient (|kernel| <= pi s^2 |t| e^{2 pi |s t|} on
# |t| <= 1/2, |s| <= 1, integrated against a unit-height cutoff).
_TERM_PM_BOUND = 1.4


@dataclass(frozen=True)
class SolverConfig:
    """Truncation sizes, tolerances, and probe policy for the solver."""

    max_freq: int = 512            # coefficient truncation K
    half_width: int = 2048         # lattice index truncation N
    node_count: int = DEFAULT_NODE_COUNT
    decay_order: int = 2           # m in the 1/(1+|k|^m) envelopes
    epsilon: float = 0.1           # admissible ball ratio and offset sup bound
    contraction_target: float = 0.5
    residual_tol: float = 1e-12
    max_iterations: int = 200
    admissible_delta: Optional[float] = None
    term_drop_budget: float = 1e-15
    alpha_zero_tol: float = 1e-12
    probe_half_width: int = 128
    probe_sample_count: int = 6
    probe_seed: int = 0x5EED
    check_point_count: int = 321
    transform_check_tol: float = 1e-6
    max_calibration_halvings: int = 24

    def __post_init__(self):
        if not (0 < self.epsilon < 0.25):
            raise ConfigurationError("epsilon must lie in (0, 1/4)")
        if not (0 < self.contraction_target < 1):
            raise ConfigurationError("contraction_target must lie in (0, 1)")
        if self.max_freq < 1 or self.half_width < 1:
            raise ConfigurationError("truncations must be positive")
        if self.residual_tol <= 0 or self.max_iterations < 1:
            raise ConfigurationError("iteration policy must be positive")
        if self.decay_order < 1:
            raise ConfigurationError("decay_order must be at least 1")

    def grid(self) -> QuadratureGrid:
        return QuadratureGrid.uniform_grid(self.node_count)


@dataclass
class SolveDiagnostics:
    """Everything a rerun needs to audit one fixed-point solve."""

    iterations: int = 0
    converged: bool = False
    residual_history: Tuple[float, ...] = ()
    final_residual: float = 0.0
    empirical_lipschitz: float = 0.0
    ball_ratio: float = 0.0
    alpha_sup: float = 0.0
    imag_residue: float = 0.0
    dropped_alpha_mass: float = 0.0
    operator_tail: float = 0.0
    prescription_norm: float = 0.0
    transform_residual: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residualHistory": [float(r) for r in self.residual_history],
            "finalResidual": float(self.final_residual),
            "empiricalLipschitz": float(self.empirical_lipschitz),
            "ballRatio": float(self.ball_ratio),
            "alphaSup": float(self.alpha_sup),
            "imagResidue": float(self.imag_residue),
            "droppedAlphaMass": float(self.dropped_alpha_mass),
            "operatorTail": float(self.operator_tail),
            "prescriptionNorm": float(self.prescription_norm),
            "transformResidual": float(self.transform_residual),
        }


# ---------------------------------------------------------------------------
# the quadratic remainder operator


def _accumulate_terms(ns: np.ndarray, alphas: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """sum_n e^{2 pi i n t} (e^{2 pi i a_n t} - 1 - 2 pi i a_n t)/(2 pi i t) on the nodes."""
    acc = np.zeros(nodes.size, dtype=complex)
    chunk = 256
    for start in range(0, ns.size, chunk):
        nc = ns[start : start + chunk].astype(float)[:, None]
        ac = alphas[start : start + chunk][:, None]
        w = 2.0 * np.pi * ac * nodes[None, :]
        z = 1j * w
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (np.exp(z) - 1.0 - z) / (2j * np.pi * nodes[None, :])
        small = np.abs(w) < SMALL_PHASE
        if np.any(small):
            zs = z[small]
            poly = 0.5 + zs * (
                1.0 / 6.0 + zs * (1.0 / 24.0 + zs * (1.0 / 120.0 + zs / 720.0))
            )
            a2t = (ac * ac) * nodes[None, :]
            q[small] = 2j * np.pi * a2t[small] * poly
        phases = np.exp(2j * np.pi * nc * nodes[None, :])
        acc += np.einsum("ct,ct->t", phases, q)
    return acc


def _uniform_coeffs_and_tail(
    weighted: np.ndarray, node_count: int, max_freq: int
) -> Tuple[np.ndarray, float]:
    """All-frequency DFT of the weighted samples; returns |k|<=K block and the rest's l1 mass."""
    dft = np.fft.fft(weighted)
    ks = np.arange(-max_freq, max_freq + 1)
    coeffs = dft[np.mod(ks, node_count)] * np.where(ks % 2 == 0, 1.0, -1.0)
    mags = np.abs(dft)
    kept = float(np.sum(mags[np.mod(ks, node_count)]))
    tail = float(np.sum(mags) - kept)
    return coeffs, tail


def apply_R(
    alpha: PerturbationSequence,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    _window_values: Optional[np.ndarray] = None,
) -> TrigSpectrum:
    """The quadratic remainder: windowed coefficients of the stacked kernels.

    Terms whose coarse bound 1.4 alpha_n^2 cannot move any coefficient by more
    than its share of config.term_drop_budget are skipped; the skipped bound
    and the measured beyond-cutoff coefficient mass are both recorded as
    tail_mass on the result. apply_R(0) is exactly zero.
    """
    if grid is None:
        grid = config.grid()
    grid.check_resolves(config.max_freq)
    ns, alphas = alpha.nonzero_items()
    dropped = 0.0
    if ns.size and config.term_drop_budget > 0:
        theta = math.sqrt(config.term_drop_budget / (_TERM_PM_BOUND * ns.size))
        keep = np.abs(alphas) > theta
        if not np.all(keep):
            dropped = _TERM_PM_BOUND * float(np.sum(alphas[~keep] ** 2))
            ns, alphas = ns[keep], alphas[keep]
    support = window.support
    if ns.size == 0:
        return TrigSpectrum.zero(
            config.max_freq, support_hint=support, tail_mass=dropped
        )
    window_values = window(grid.nodes) if _window_values is None else _window_values
    acc = _accumulate_terms(ns, alphas, grid.nodes)
    weighted = acc * window_values * grid.weights
    if grid.uniform:
        coeffs, beyond = _uniform_coeffs_and_tail(weighted, grid.node_count, config.max_freq)
    else:
        ks = np.arange(-config.max_freq, config.max_freq + 1)
        coeffs = np.empty(ks.size, dtype=complex)
        for start in range(0, ks.size, 256):
            kc = ks[start : start + 256]
            coeffs[start : start + 256] = (
                np.exp(-2j * np.pi * np.outer(kc, grid.nodes)) @ weighted
            )
        beyond = 0.0
    return TrigSpectrum(
        coeffs=coeffs,
        max_freq=config.max_freq,
        support_hint=support,
        tail_mass=dropped + beyond,
    )


def term_spectrum(
    s: float,
    n: int,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
) -> TrigSpectrum:
    """Coefficients of the single n-term of the remainder operator (tests/diagnostics)."""
    width = max(abs(n), 1)
    offsets = np.zeros(2 * width + 1)
    offsets[n + width] = s
    seq = PerturbationSequence(offsets, width)
    cfg = replace(config, term_drop_budget=0.0)
    return apply_R(seq, window, cfg, grid)


# ---------------------------------------------------------------------------
# lemma-style empirical constants


def _phi_remainder_values(u: np.ndarray) -> np.ndarray:
    """phi(u) = (e^{2 pi i u} - 1 - 2 pi i u)/(2 pi i u), series-protected, phi(0)=0."""
    z = 2j * np.pi * np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.exp(z) - 1.0 - z) / z
    small = np.abs(z) < SMALL_PHASE
    if np.any(small):
        zs = z[small]
        out[small] = zs * (
            0.5 + zs * (1.0 / 6.0 + zs * (1.0 / 24.0 + zs * (1.0 / 120.0 + zs / 720.0)))
        )
    return out


def term_bound_check(
    s: float,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    decay_order: Optional[int] = None,
) -> float:
    """Smallest C with |coeff_k of phi(s t) * window| <= C |s| / (1 + |k|^m)."""
    if s == 0.0:
        return 0.0
    if grid is None:
        grid = config.grid()
    m = config.decay_order if decay_order is None else decay_order

    def profile(t):
        return _phi_remainder_values(s * t) * window(t)

    spec = windowed_coefficients(profile, grid, config.max_freq, support_hint=window.support)
    ks = np.abs(spec.k_values).astype(float)
    return float(np.max(np.abs(spec.coeffs) * (1.0 + ks**m) / abs(s)))


def difference_bound_check(
    u: float,
    v: float,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    decay_order: Optional[int] = None,
) -> float:
    """Smallest C with |coeff_k| <= C max(|u|,|v|) |v-u| / (1 + |k|^m) for the
    difference kernel (phi2(v t) - phi2(u t))/t, phi2(x) = (e^{2 pi i x} - 2 pi i x)/(2 pi i).

    phi2'(0) = 0, so the kernel is smooth through t = 0 and quadratically small
    in the pair; u = v returns exactly 0.
    """
    if u == v:
        return 0.0
    if grid is None:
        grid = config.grid()
    m = config.decay_order if decay_order is None else decay_order
    scale = max(abs(u), abs(v))

    def profile(t):
        t_arr = np.asarray(t, dtype=float)
        big = 2.0 * np.pi * scale * np.abs(t_arr) >= 1e-3
        out = np.empty(t_arr.shape, dtype=complex)
        if np.any(big):
            tb = t_arr[big]
            out[big] = (
                np.exp(2j * np.pi * v * tb)
                - np.exp(2j * np.pi * u * tb)
                - 2j * np.pi * tb * (v - u)
            ) / (2j * np.pi * tb)
        if np.any(~big):
            ts = t_arr[~big]
            w = 2j * np.pi * ts
            total = np.zeros(ts.shape, dtype=complex)
            # sum_{j>=2} (2 pi i t)^{j-1} (v^j - u^j) / j!
            power = w  # (2 pi i t)^{j-1} at j = 2
            fact = 2.0
            for j in range(2, 8):
                total += power * (v**j - u**j) / fact
                power = power * w
                fact *= j + 1
            out[~big] = total
        return out * window(t_arr)

    spec = windowed_coefficients(profile, grid, config.max_freq, support_hint=window.support)
    ks = np.abs(spec.k_values).astype(float)
    return float(np.max(np.abs(spec.coeffs) * (1.0 + ks**m) / (scale * abs(v - u))))


def contraction_probe(
    radius: float,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> float:
    """Empirical Lipschitz ratio of the remainder operator on the radius ball.

    Pairs are drawn once from the seed in standardized form and scaled by the
    radius, so probes at r and r/2 compare the same directions; for the
    quadratic operator the ratio of the two probes sits near 1/2.
    """
    if radius < 0:
        raise ConfigurationError("radius must be nonnegative")
    if radius == 0.0:
        return 0.0
    if radius > 0.24999:
        raise ConfigurationError("probe radius must stay below 1/4")
    if grid is None:
        grid = config.grid()
    count = config.probe_sample_count if sample_count is None else sample_count
    rng = np.random.default_rng(config.probe_seed if seed is None else seed)
    width = config.probe_half_width
    window_values = window(grid.nodes)
    best = 0.0
    for _ in range(count):
        u = rng.uniform(-1.0, 1.0, 2 * width + 1)
        v = rng.uniform(-1.0, 1.0, 2 * width + 1)
        seq_u = PerturbationSequence(radius * u, width)
        seq_v = PerturbationSequence(radius * v, width)
        ru = apply_R(seq_u, window, config, grid, _window_values=window_values)
        rv = apply_R(seq_v, window, config, grid, _window_values=window_values)
        num = float(np.max(np.abs(rv.coeffs - ru.coeffs)))
        den = radius * float(np.max(np.abs(v - u)))
        if den > 0:
            best = max(best, num / den)
    return best


# ---------------------------------------------------------------------------
# the fixed point


def _extract_offsets(
    coeffs: np.ndarray, max_freq: int, config: SolverConfig, zero_tol: float = 0.0
) -> Tuple[PerturbationSequence, float]:
    """Real offset sequence alpha_n = Re c_n on |n| <= min(K, N); optionally sparsified."""
    width = config.half_width
    span = min(max_freq, width)
    offsets = np.zeros(2 * width + 1)
    block = coeffs[max_freq - span : max_freq + span + 1].real
    dropped = 0.0
    if zero_tol > 0:
        small = np.abs(block) <= zero_tol
        dropped = float(np.sum(np.abs(block[small])))
        block = np.where(small, 0.0, block)
    offsets[width - span : width + span + 1] = block
    try:
        seq = PerturbationSequence(offsets, width, dropped_mass=dropped)
    except ConfigurationError as exc:
        raise ConvergenceError(f"offsets left the admissible ball: {exc}") from exc
    return seq, dropped


def fixed_point_solve(
    s1: TrigSpectrum,
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
) -> Tuple[TrigSpectrum, SolveDiagnostics]:
    """Picard iteration T <- S1 - R(F(T)) from T = S1.

    Residuals (successive pm-norm steps) must trend down; three consecutive
    expansions or an iteration cap raise ConvergenceError with the measured
    expansion rate, which calibration interprets as "prescription too large".
    """
    if s1.max_freq != config.max_freq:
        raise ContractViolation("prescription truncation must match config.max_freq")
    if s1.imag_residue() > 1e-12 * max(1.0, pm_norm(s1)):
        raise ContractViolation("prescription must have real coefficients")
    delta = pm_norm(s1)
    if config.admissible_delta is not None and delta > config.admissible_delta:
        raise ConfigurationError(
            f"prescription norm {delta!r} exceeds admissible delta {config.admissible_delta!r}"
        )
    if grid is None:
        grid = config.grid()
    window_values = window(grid.nodes)
    current = np.asarray(s1.coeffs, dtype=complex).copy()
    residuals = []
    strikes = 0
    converged = False
    iterations = 0
    for _ in range(config.max_iterations):
        seq, _ = _extract_offsets(current, config.max_freq, config)
        r_spec = apply_R(seq, window, config, grid, _window_values=window_values)
        nxt = s1.coeffs - r_spec.coeffs
        step = float(np.max(np.abs(nxt - current)))
        iterations += 1
        if residuals and step > residuals[-1] and residuals[-1] > config.residual_tol:
            strikes += 1
        else:
            strikes = 0
        residuals.append(step)
        current = nxt
        if step > 10.0 * delta + 1.0 or strikes >= 3:
            rate = residuals[-1] / residuals[-2] if len(residuals) > 1 and residuals[-2] > 0 else float("inf")
            raise ConvergenceError(
                "iteration is expanding; the prescription is too large for a contraction",
                lipschitz_estimate=rate,
            )
        if step <= config.residual_tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"no convergence within {config.max_iterations} iterations",
            lipschitz_estimate=(residuals[-1] / residuals[-2]) if len(residuals) > 1 and residuals[-2] > 0 else None,
        )
    seq, dropped = _extract_offsets(current, config.max_freq, config, config.alpha_zero_tol)
    final_r = apply_R(seq, window, config, grid, _window_values=window_values)
    final_residual = float(np.max(np.abs(current + final_r.coeffs - s1.coeffs)))
    ratios = [
        residuals[j] / residuals[j - 1]
        for j in range(1, len(residuals))
        if residuals[j - 1] > config.residual_tol and residuals[j] > 0
    ]
    diag = SolveDiagnostics(
        iterations=iterations,
        converged=True,
        residual_history=tuple(residuals),
        final_residual=final_residual,
        empirical_lipschitz=max(ratios) if ratios else 0.0,
        ball_ratio=(float(np.max(np.abs(current - s1.coeffs))) / delta) if delta > 0 else 0.0,
        alpha_sup=seq.sup_norm,
        imag_residue=float(np.max(np.abs(current.imag))),
        dropped_alpha_mass=dropped,
        operator_tail=final_r.tail_mass,
        prescription_norm=delta,
    )
    solution = TrigSpectrum(
        coeffs=current,
        max_freq=config.max_freq,
        support_hint=s1.support_hint,
    )
    return solution, diag


def solve_prescribed_transform(
    target: Callable[[np.ndarray], np.ndarray],
    target_support: Sequence[Tuple[float, float]],
    window: SmoothWindow,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
) -> Tuple[PerturbationSequence, SolveDiagnostics]:
    """Offsets whose interval-field transform equals the target on the window plateau.

    The prescription is flipped (rhs(t) = target(-t)), solved by Picard, and
    the synthesized transform is re-checked against the target on a plateau
    grid; the residual is recorded and must clear config.transform_check_tol.
    """
    if window.plateau is None:
        raise ContractViolation("the solve window needs an explicit plateau")
    if grid is None:
        grid = config.grid()
    intervals = tuple(target_support)
    hint = None
    if intervals:
        lo = min(i[0] for i in intervals)
        hi = max(i[1] for i in intervals)
        hint = (-hi, -lo)

    def rhs(t):
        return np.asarray(target(-np.asarray(t, dtype=float)), dtype=complex)

    s1 = windowed_coefficients(
        rhs, grid, config.max_freq, support_hint=hint, real_coefficients=True
    )
    solution, diag = fixed_point_solve(s1, window, config, grid)
    seq, dropped = _extract_offsets(solution.coeffs, config.max_freq, config, config.alpha_zero_tol)
    if seq.sup_norm > config.epsilon:
        raise ConvergenceError(
            f"offset sup {seq.sup_norm!r} exceeds epsilon={config.epsilon}; scale the target down"
        )
    if diag.ball_ratio > config.epsilon:
        raise ConvergenceError(
            f"solution strayed {diag.ball_ratio!r} of the prescription norm; scale the target down"
        )
    p0, p1 = window.plateau
    pts = np.linspace(p0, p1, config.check_point_count)
    synthesized = eval_F_hat(seq, pts)
    prescribed = np.asarray(target(pts), dtype=complex)
    diag.transform_residual = float(np.max(np.abs(synthesized - prescribed)))
    if diag.transform_residual > config.transform_check_tol:
        raise ConstructionError(
            f"synthesized transform misses the prescription by {diag.transform_residual!r}"
        )
    return seq, diag


# ---------------------------------------------------------------------------
# certified lattice constructions


@dataclass
class WindowSpectrum:
    """delta-mass plus smooth part of a lattice spectrum, valid on the window."""

    mass: float
    window: Tuple[float, float]
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support: Tuple[Tuple[float, float], ...] = ()
    description: str = ""

    def smooth_values(self, t) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if self.profile is None:
            out = np.zeros(t_arr.shape, dtype=complex)
        else:
            out = np.asarray(self.profile(t_arr), dtype=complex)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return complex(out[0])
        return out

    def support_samples(self, count: int = 64) -> np.ndarray:
        pts = []
        for lo, hi in self.support:
            margin = 0.05 * (hi - lo)
            pts.append(np.linspace(lo + margin, hi - margin, max(2, count // max(1, len(self.support)))))
        return np.concatenate(pts) if pts else np.empty(0)


@dataclass
class LatticeBuild:
    """A constructed lattice with its certified window spectrum and audit data."""

    lattice: PerturbedLattice
    spectrum: WindowSpectrum
    diagnostics: SolveDiagnostics
    geometry: WindowGeometry
    scale: float = 1.0
    chain_residual: float = 0.0
    probe_value: Optional[float] = None
    target_json: Optional[dict] = None

    @property
    def offsets(self) -> PerturbationSequence:
        return self.lattice.offsets


def _validate_annulus_support(target: SpectralTarget, geometry: WindowGeometry) -> None:
    a, b = geometry.a, geometry.b
    for lo, hi in target.support:
        inside_pos = a < lo < hi < b
        inside_neg = -b < lo < hi < -a
        if not (inside_pos or inside_neg):
            raise GeometryError(
                f"target component ({lo}, {hi}) must sit strictly inside "
                f"({a}, {b}) or ({-b}, {-a})"
            )


def build_lattice_with_spectrum(
    target: SpectralTarget,
    geometry: WindowGeometry,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    slope_window: Optional[SmoothWindow] = None,
    cutoff_window: Optional[SmoothWindow] = None,
) -> LatticeBuild:
    """Lattice whose spectrum is delta_0 + target on the window (-b, b).

    The prescription for the interval-field transform is target * slope,
    where the slope window equals -1/(2 pi i t) on the annulus; the identity
    chain 2 pi i t * hat F(t) = -target(t) is re-measured on a window grid and
    recorded as chain_residual.
    """
    if target.symmetry_class != "hermitian-even":
        raise ContractViolation("window prescription must be hermitian-even")
    _validate_annulus_support(target, geometry)
    if grid is None:
        grid = config.grid()
    slope = slope_window or SmoothWindow.inverse_slope(geometry)
    cutoff = cutoff_window or SmoothWindow.frequency_cutoff(geometry)

    def product(t):
        return np.asarray(target(t), dtype=complex) * np.asarray(slope(t), dtype=complex)

    seq, diag = solve_prescribed_transform(product, target.support, cutoff, config, grid)
    lattice = PerturbedLattice(seq)
    pts = np.linspace(-geometry.b, geometry.b, config.check_point_count)
    fhat = eval_F_hat(seq, pts)
    chain = float(np.max(np.abs(2j * np.pi * pts * fhat + target(pts))))
    spectrum = WindowSpectrum(
        mass=1.0,
        window=(-geometry.b, geometry.b),
        profile=lambda t: np.asarray(target(t), dtype=complex),
        support=target.support,
        description="delta_0 plus the prescribed annulus profile",
    )
    return LatticeBuild(
        lattice=lattice,
        spectrum=spectrum,
        diagnostics=diag,
        geometry=geometry,
        scale=1.0,
        chain_residual=chain,
        target_json=target.to_json_dict(),
    )


def _initial_scale(norm_at_unit: float, config: SolverConfig) -> float:
    """Power-of-two scale bringing the unit-norm prescription near epsilon."""
    if norm_at_unit <= 0:
        return 1.0
    return 2.0 ** math.floor(math.log2(config.epsilon / norm_at_unit))


def calibrated_window_lattice(
    one_sided: SpectralTarget,
    geometry: WindowGeometry,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    start_scale: Optional[float] = None,
) -> LatticeBuild:
    """Halve the prescription scale until the remainder contracts and the solve lands.

    Returns the build at the accepted scale r, with the contraction probe
    value recorded; raises CalibrationError when no admissible scale remains.
    """
    if grid is None:
        grid = config.grid()
    slope = SmoothWindow.inverse_slope(geometry)
    cutoff = SmoothWindow.frequency_cutoff(geometry)
    unit = build_Tr(one_sided, 1.0)

    def rhs_at_unit(t):
        t_arr = np.asarray(t, dtype=float)
        return np.asarray(unit(-t_arr), dtype=complex) * np.asarray(slope(-t_arr), dtype=complex)

    unit_norm = pm_norm(
        windowed_coefficients(rhs_at_unit, grid, config.max_freq, real_coefficients=True)
    )
    scale = start_scale if start_scale is not None else _initial_scale(unit_norm, config)
    for _ in range(config.max_calibration_halvings):
        ball = (1.0 + config.epsilon) * unit_norm * scale
        probe = contraction_probe(min(ball, 0.2), cutoff, config, grid)
        if probe < config.contraction_target:
            target = build_Tr(one_sided, scale, name=one_sided.name or "window-target")
            try:
                build = build_lattice_with_spectrum(
                    target, geometry, config, grid, slope_window=slope, cutoff_window=cutoff
                )
                build.scale = scale
                build.probe_value = probe
                return build
            except (ConvergenceError, ConstructionError):
                pass
        scale *= 0.5
    raise CalibrationError("no admissible prescription scale found")


def addendum_lattice(
    even_profile: SpectralTarget,
    geometry: WindowGeometry,
    config: SolverConfig,
    grid: Optional[QuadratureGrid] = None,
    start_scale: Optional[float] = None,
) -> LatticeBuild:
    """Lattice whose spectrum on the window is delta_0 - 2 pi i r t psi(t).

    psi must be an even profile, strictly positive on the interior of its
    support inside (-a, a); the scale r is auto-calibrated downward. The
    resulting spectrum has no nonzero multiple of the delta alone matching it,
    which is what the zero-level tiling probes certify downstream.
    """
    if even_profile.symmetry_class != "hermitian-even":
        raise ContractViolation("addendum profile must be even")
    if len(even_profile.support) != 1:
        raise ContractViolation("addendum profile must be a single even component")
    lo, hi = even_profile.support[0]
    if not (np.isclose(lo, -hi) and hi <= geometry.a + 1e-12):
        raise GeometryError(f"addendum support ({lo}, {hi}) must be symmetric inside (-a, a)")
    amp = max(c.amplitude for c in even_profile.components)
    if amp <= 0:
        raise ConfigurationError("addendum profile needs positive amplitude")
    interior = np.linspace(0.9 * lo, 0.9 * hi, 33)
    if np.any(even_profile(interior) <= 0):
        raise ConfigurationError("addendum profile must be strictly positive inside its support")
    if grid is None:
        grid = config.grid()
    cutoff = SmoothWindow.frequency_cutoff(geometry)
    unit_norm = pm_norm(
        windowed_coefficients(
            lambda t: np.asarray(even_profile(-np.asarray(t)), dtype=complex),
            grid, config.max_freq, real_coefficients=True,
        )
    )
    scale = start_scale if start_scale is not None else _initial_scale(unit_norm, config)
    for _ in range(config.max_calibration_halvings):
        ball = (1.0 + config.epsilon) * unit_norm * scale
        probe = contraction_probe(min(ball, 0.2), cutoff, config, grid)
        if probe < config.contraction_target:
            r = scale

            def target(t, _r=r):
                return _r * np.asarray(even_profile(t), dtype=complex)

            try:
                seq, diag = solve_prescribed_transform(
                    target, even_profile.support, cutoff, config, grid
                )
            except (ConvergenceError, ConstructionError):
                seq = None
            if seq is not None:
                lattice = PerturbedLattice(seq)
                pts = np.linspace(-geometry.b, geometry.b, config.check_point_count)
                # sup over the window of |transform - profile|; the extra
                # 2 pi |t| converts the division-form residual back
                chain = float(
                    np.max(
                        2.0 * np.pi * np.abs(pts)
                        * np.abs(eval_F_hat(seq, pts) - r * even_profile(pts))
                    )
                )
                spectrum = WindowSpectrum(
                    mass=1.0,
                    window=(-geometry.b, geometry.b),
                    profile=lambda t, _r=r: -2j * np.pi * _r * np.asarray(t) * even_profile(t),
                    support=even_profile.support,
                    description="delta_0 minus the slope of the even profile",
                )
                return LatticeBuild(
                    lattice=lattice,
                    spectrum=spectrum,
                    diagnostics=diag,
                    geometry=geometry,
                    scale=r,
                    chain_residual=chain,
                    probe_value=probe,
                    target_json=even_profile.to_json_dict(),
                )
        scale *= 0.5
    raise CalibrationError("no admissible addendum scale found")
