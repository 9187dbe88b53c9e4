"""Truncated Fourier data of compactly supported distributions.

A TrigSpectrum holds coefficients c_k = integral profile(t) e^{-2 pi i k t} dt
for |k| <= max_freq, together with a support hint and the two norms used
throughout: the sup norm of the coefficients (the pseudomeasure scale) and
their l1 norm (the absolutely convergent scale). Products of a distribution
with a smooth factor are coefficient convolutions, bounded by the product of
those two norms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, ContractViolation
from .grids import QuadratureGrid

__all__ = [
    "TrigSpectrum",
    "windowed_coefficients",
    "eval_trig_poly",
    "reflect",
    "pm_norm",
    "a_norm",
    "multiply",
    "spectrum_to_csv",
    "spectrum_from_csv",
]

# Tolerance for asserting that coefficients are genuinely real.
_REAL_TOL = 1e-13


@dataclass(frozen=True)
class TrigSpectrum:
    """Coefficients c_k, k = -max_freq .. max_freq, of a windowed distribution.

    Attributes:
        coeffs: complex array of length 2*max_freq + 1, index 0 <-> k = -max_freq.
        max_freq: truncation half-width K.
        support_hint: declared support interval of the underlying profile,
            contained in [-l, l] with l < 1/2, or None when unknown.
        real_coefficients: asserts Im c_k = 0 for all k (the symmetry
            T(-t) = conj T(t)); validated at construction.
        tail_mass: recorded l1 mass dropped by truncations upstream.
    """

    coeffs: np.ndarray
    max_freq: int
    support_hint: Optional[Tuple[float, float]] = None
    real_coefficients: bool = False
    tail_mass: float = 0.0

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size != 2 * self.max_freq + 1:
            raise ConfigurationError(
                f"need {2 * self.max_freq + 1} coefficients, got {coeffs.size}"
            )
        if self.support_hint is not None:
            lo, hi = self.support_hint
            if not (-0.5 < lo < hi < 0.5):
                raise ConfigurationError(f"support hint {self.support_hint} escapes (-1/2, 1/2)")
        if self.real_coefficients:
            resid = float(np.max(np.abs(coeffs.imag))) if coeffs.size else 0.0
            scale = max(1.0, float(np.max(np.abs(coeffs)))) if coeffs.size else 1.0
            if resid > _REAL_TOL * scale:
                raise ConfigurationError(
                    f"real_coefficients asserted but imaginary residue {resid!r} found"
                )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if self.tail_mass < 0:
            raise ConfigurationError("tail_mass must be nonnegative")

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.max_freq, self.max_freq + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.max_freq:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.max_freq])

    def imag_residue(self) -> float:
        """Largest |Im c_k|; should stay at roundoff for real-coefficient data."""
        return float(np.max(np.abs(self.coeffs.imag)))

    def with_tail(self, extra: float) -> "TrigSpectrum":
        return replace(self, tail_mass=self.tail_mass + float(extra))

    @classmethod
    def zero(cls, max_freq: int, **kwargs) -> "TrigSpectrum":
        return cls(np.zeros(2 * max_freq + 1, dtype=complex), max_freq, **kwargs)


def pm_norm(s: TrigSpectrum) -> float:
    """sup_k |c_k| — the pseudomeasure norm of the truncated data."""
    return float(np.max(np.abs(s.coeffs)))


def a_norm(s: TrigSpectrum) -> float:
    """sum_k |c_k| — the absolutely convergent (Wiener) norm of the truncation."""
    return float(np.sum(np.abs(s.coeffs)))


def windowed_coefficients(
    profile: Callable[[np.ndarray], np.ndarray],
    grid: QuadratureGrid,
    max_freq: int,
    support_hint: Optional[Tuple[float, float]] = None,
    real_coefficients: bool = False,
) -> TrigSpectrum:
    """Quadrature coefficients c_k = sum_j w_j profile(t_j) e^{-2 pi i k t_j}.

    On a uniform grid this is computed with one FFT (identical sum, fixed
    reduction order); general grids use a chunked direct sum. The grid must
    resolve frequencies up to 2*max_freq (Nyquist-style guard).
    """
    grid.check_resolves(max_freq)
    values = np.asarray(profile(grid.nodes), dtype=complex)
    if values.shape != grid.nodes.shape:
        raise ContractViolation("profile must evaluate elementwise on the grid nodes")
    if real_coefficients:
        # Symmetry will be validated by the TrigSpectrum constructor; enforce
        # it exactly so downstream real-sequence extraction is clean.
        coeffs = _node_sum_coefficients(values * grid.weights, grid, max_freq)
        resid = float(np.max(np.abs(coeffs.imag)))
        scale = max(1.0, float(np.max(np.abs(coeffs))))
        if resid > _REAL_TOL * scale:
            raise ConfigurationError(
                f"profile declared real-coefficient but residue {resid!r} found"
            )
        coeffs = coeffs.real.astype(complex)
    else:
        coeffs = _node_sum_coefficients(values * grid.weights, grid, max_freq)
    return TrigSpectrum(
        coeffs=coeffs,
        max_freq=max_freq,
        support_hint=support_hint,
        real_coefficients=real_coefficients,
    )


def _node_sum_coefficients(weighted: np.ndarray, grid: QuadratureGrid, max_freq: int) -> np.ndarray:
    if grid.uniform:
        m = grid.node_count
        # nodes are -1/2 + j/m, weights 1/m already folded into `weighted`:
        # c_k = (-1)^k * DFT(weighted)[k mod m].
        dft = np.fft.fft(weighted)
        ks = np.arange(-max_freq, max_freq + 1)
        coeffs = dft[np.mod(ks, m)]
        signs = np.where(ks % 2 == 0, 1.0, -1.0)
        return coeffs * signs
    ks = np.arange(-max_freq, max_freq + 1)
    out = np.empty(ks.size, dtype=complex)
    chunk = 128
    for start in range(0, ks.size, chunk):
        kc = ks[start : start + chunk]
        phases = np.exp(-2j * np.pi * np.outer(kc, grid.nodes))
        out[start : start + chunk] = phases @ weighted
    return out


def eval_trig_poly(s: TrigSpectrum, t) -> np.ndarray:
    """Evaluate sum_k c_k e^{2 pi i k t} at scalar or array t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ks = s.k_values
    out = np.zeros(t_arr.shape, dtype=complex)
    chunk = 256
    for start in range(0, ks.size, chunk):
        kc = ks[start : start + chunk]
        cc = s.coeffs[start : start + chunk]
        out += np.exp(2j * np.pi * np.outer(t_arr, kc)) @ cc
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return complex(out[0])
    return out


def reflect(s: TrigSpectrum) -> TrigSpectrum:
    """The spectrum of t -> conj(T(-t)): c_k -> conj(c_k).

    Real-coefficient data is a fixed point; applying reflect twice is the
    identity. The support hint mirrors.
    """
    hint = None
    if s.support_hint is not None:
        lo, hi = s.support_hint
        hint = (-hi, -lo)
    return TrigSpectrum(
        coeffs=np.conj(s.coeffs),
        max_freq=s.max_freq,
        support_hint=hint,
        real_coefficients=s.real_coefficients,
        tail_mass=s.tail_mass,
    )


def multiply(
    s: TrigSpectrum,
    factor: TrigSpectrum,
    out_max_freq: Optional[int] = None,
) -> TrigSpectrum:
    """Coefficient convolution: the spectrum of the product distribution.

    The full convolution lives on |k| <= s.max_freq + factor.max_freq; it is
    re-truncated to out_max_freq (default: max of the inputs) and the dropped
    l1 mass is recorded on the result. The pseudomeasure norm of the output
    obeys pm(out) <= pm(s) * a(factor) + tail.
    """
    if out_max_freq is None:
        out_max_freq = max(s.max_freq, factor.max_freq)
    full = np.convolve(s.coeffs, factor.coeffs)
    full_max = s.max_freq + factor.max_freq
    center = full_max
    lo = center - out_max_freq
    hi = center + out_max_freq + 1
    if lo < 0:
        pad = -lo
        full = np.concatenate([np.zeros(pad, dtype=complex), full, np.zeros(pad, dtype=complex)])
        lo += pad
        hi += pad
    kept = full[lo:hi]
    dropped = float(np.sum(np.abs(full[:lo])) + np.sum(np.abs(full[hi:])))
    hint = None
    if s.support_hint is not None and factor.support_hint is not None:
        lo_h = max(s.support_hint[0], factor.support_hint[0])
        hi_h = min(s.support_hint[1], factor.support_hint[1])
        if lo_h < hi_h:
            hint = (lo_h, hi_h)
    real_out = s.real_coefficients and factor.real_coefficients
    if real_out:
        kept = kept.real.astype(complex)
    return TrigSpectrum(
        coeffs=kept,
        max_freq=out_max_freq,
        support_hint=hint,
        real_coefficients=real_out,
        tail_mass=s.tail_mass + factor.tail_mass + dropped,
    )


def spectrum_to_csv(s: TrigSpectrum, path) -> None:
    """Write rows (k, re, im) with shortest-round-trip float formatting."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "re", "im"])
        for k, c in zip(s.k_values, s.coeffs):
            writer.writerow([int(k), repr(float(c.real)), repr(float(c.imag))])


def spectrum_from_csv(path, **kwargs) -> TrigSpectrum:
    path = Path(path)
    ks = []
    vals = []
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["k", "re", "im"]:
            raise ConfigurationError(f"unexpected spectrum CSV header {header!r}")
        for row in reader:
            ks.append(int(row[0]))
            vals.append(complex(float(row[1]), float(row[2])))
    if not ks:
        raise ConfigurationError("empty spectrum CSV")
    max_freq = max(abs(k) for k in ks)
    coeffs = np.zeros(2 * max_freq + 1, dtype=complex)
    for k, v in zip(ks, vals):
        coeffs[k + max_freq] = v
    return TrigSpectrum(coeffs=coeffs, max_freq=max_freq, **kwargs)
