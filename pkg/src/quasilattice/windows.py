"""Smooth window profiles and closed-form spectral targets.

Everything here is built from one C-infinity primitive: the quotient step
s(u) = g(u) / (g(u) + g(1-u)) with g(u) = exp(-1/u) on u > 0. It is exactly 0
for u <= 0 and exactly 1 for u >= 1, so plateaus and supports are exact, not
approximate. Bumps are exp(1 - 1/(1-u^2)) normalized to peak 1. The template
id is recorded in reports so reruns can verify they used the same shapes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, ContractViolation, GeometryError
from .grids import QuadratureGrid
from .spectra import TrigSpectrum, windowed_coefficients

__all__ = [
    "TEMPLATE_ID",
    "WindowGeometry",
    "smooth_step",
    "bump_values",
    "BumpComponent",
    "SmoothWindow",
    "SpectralTarget",
    "build_Tr",
]

TEMPLATE_ID = "expstep-quotient"


def smooth_step(u) -> np.ndarray:
    """C-infinity step: exactly 0 for u <= 0, exactly 1 for u >= 1."""
    u_arr = np.asarray(u, dtype=float)
    out = np.zeros(u_arr.shape)
    out[u_arr >= 1.0] = 1.0
    mid = (u_arr > 0.0) & (u_arr < 1.0)
    if np.any(mid):
        um = u_arr[mid]
        g1 = np.exp(-1.0 / um)
        g2 = np.exp(-1.0 / (1.0 - um))
        out[mid] = g1 / (g1 + g2)
    return out


def bump_values(t, lo: float, hi: float) -> np.ndarray:
    """Normalized bump on (lo, hi): peak 1 at the midpoint, exactly 0 outside."""
    t_arr = np.asarray(t, dtype=float)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    u = (t_arr - center) / half
    out = np.zeros(t_arr.shape)
    mask = np.abs(u) < 1.0
    if np.any(mask):
        um = u[mask]
        out[mask] = np.exp(1.0 - 1.0 / (1.0 - um * um))
    return out


@dataclass(frozen=True)
class WindowGeometry:
    """The nested scales 0 < a < b < l < 1/2.

    (-b, b) is the window on which spectra are prescribed, (a, b) hosts the
    annulus targets, and all profiles vanish outside (-l, l).
    """

    a: float = 0.15
    b: float = 0.30
    l: float = 0.40

    def __post_init__(self):
        if not (0.0 < self.a < self.b < self.l < 0.5):
            raise ConfigurationError(
                f"geometry must satisfy 0 < a < b < l < 1/2, got a={self.a}, b={self.b}, l={self.l}"
            )

    @property
    def annulus(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return ((-self.b, -self.a), (self.a, self.b))


@dataclass(frozen=True)
class BumpComponent:
    """One scaled bump: amplitude * (normalized bump on (lo, hi))."""

    lo: float
    hi: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigurationError(f"bump needs lo < hi, got ({self.lo}, {self.hi})")

    def __call__(self, t) -> np.ndarray:
        return self.amplitude * bump_values(t, self.lo, self.hi)


class SmoothWindow:
    """A smooth profile with exact plateau/support behavior.

    Modes:
        cutoff: 1 exactly on [plateau], 0 exactly outside (support), smooth
            monotone transitions (real, even when centered).
        inverse_slope: equals -1/(2 pi i t) exactly on (-b,-a) u (a,b), is
            smooth through 0, vanishes outside (-l, l); purely imaginary and
            odd, hence Hermitian (w(-t) = conj w(t)).
        bump: a single scaled bump.
        mollifier: an autocorrelation bump chi = gamma * gamma (so its
            transform is a square, nonnegative by construction) scaled so the
            transform is >= 1 on [-1/2, 1/2].
        profile: any caller-supplied smooth profile (used for composite
            envelopes).
    """

    def __init__(
        self,
        mode: str,
        evaluator: Callable[[np.ndarray], np.ndarray],
        support: Tuple[float, float],
        plateau: Optional[Tuple[float, float]] = None,
        amplitude: float = 1.0,
        meta: Optional[dict] = None,
    ):
        self.mode = mode
        self._evaluator = evaluator
        self.support = (float(support[0]), float(support[1]))
        self.plateau = None if plateau is None else (float(plateau[0]), float(plateau[1]))
        self.amplitude = float(amplitude)
        self.meta = dict(meta or {})
        if not (-0.5 < self.support[0] < self.support[1] < 0.5):
            raise GeometryError(f"window support {self.support} escapes (-1/2, 1/2)")
        if self.plateau is not None:
            p0, p1 = self.plateau
            s0, s1 = self.support
            if not (s0 < p0 < p1 < s1):
                raise GeometryError(
                    f"plateau {self.plateau} must sit strictly inside support {self.support}"
                )

    def __call__(self, t):
        scalar = np.isscalar(t) or np.asarray(t).ndim == 0
        vals = self._evaluator(np.atleast_1d(np.asarray(t, dtype=float)))
        if scalar:
            return vals[0]
        return vals

    # -- constructors -------------------------------------------------------

    @classmethod
    def cutoff(cls, plateau: Tuple[float, float], support: Tuple[float, float]) -> "SmoothWindow":
        p0, p1 = float(plateau[0]), float(plateau[1])
        s0, s1 = float(support[0]), float(support[1])

        def evaluator(t):
            out = np.zeros(t.shape)
            rising = (t > s0) & (t < p0)
            falling = (t > p1) & (t < s1)
            out[(t >= p0) & (t <= p1)] = 1.0
            if np.any(rising):
                out[rising] = smooth_step((t[rising] - s0) / (p0 - s0))
            if np.any(falling):
                out[falling] = smooth_step((s1 - t[falling]) / (s1 - p1))
            return out

        return cls("cutoff", evaluator, (s0, s1), plateau=(p0, p1))

    @classmethod
    def frequency_cutoff(cls, geometry: WindowGeometry) -> "SmoothWindow":
        """The standard even cutoff: 1 on [-b, b], 0 outside (-l, l)."""
        return cls.cutoff(plateau=(-geometry.b, geometry.b), support=(-geometry.l, geometry.l))

    @classmethod
    def bump(cls, support: Tuple[float, float], amplitude: float = 1.0) -> "SmoothWindow":
        comp = BumpComponent(float(support[0]), float(support[1]), float(amplitude))
        return cls("bump", comp, (comp.lo, comp.hi), amplitude=amplitude)

    @classmethod
    def inverse_slope(
        cls,
        geometry: WindowGeometry,
        inner_cut: Optional[float] = None,
        outer_cut: Optional[float] = None,
    ) -> "SmoothWindow":
        """The odd window with w(t) = -1/(2 pi i t) exactly on the annulus.

        Built as -B(t)/(2 pi i t) where B is an even cutoff equal to 1 on
        [a, b] (mirrored), 0 near the origin and outside (-l, l); deleting a
        neighborhood of 0 keeps the quotient smooth.
        """
        a, b, l = geometry.a, geometry.b, geometry.l
        a0 = 0.5 * a if inner_cut is None else float(inner_cut)
        l0 = 0.5 * (b + l) if outer_cut is None else float(outer_cut)
        if not (0.0 < a0 < a and b < l0 < l):
            raise GeometryError(f"inverse_slope cuts a0={a0}, l0={l0} incompatible with {geometry}")
        carrier = cls.cutoff(plateau=(a, b), support=(a0, l0))

        def evaluator(t):
            mag = carrier(np.abs(t))
            out = np.zeros(t.shape, dtype=complex)
            nz = mag != 0.0
            # on the carrier support, |t| >= a0 > 0, so the division is safe
            out[nz] = mag[nz] / (-2j * np.pi * t[nz])
            return out

        return cls(
            "inverse_slope",
            evaluator,
            (-l0, l0),
            meta={"inner_cut": a0, "outer_cut": l0, "plateau_abs": (a, b)},
        )

    @classmethod
    def mollifier(
        cls,
        support: Tuple[float, float],
        grid: Optional[QuadratureGrid] = None,
        transform_floor_on: float = 0.5,
    ) -> "SmoothWindow":
        """Autocorrelation bump with transform >= 1 on [-floor_on, floor_on].

        chi = gamma correlated with itself, gamma a bump on the half-support;
        the transform is gamma_hat^2 >= 0 everywhere, and the construction is
        rescaled so it clears 1 on the requested interval.
        """
        s0, s1 = float(support[0]), float(support[1])
        if not np.isclose(s0, -s1):
            raise GeometryError("mollifier support must be symmetric")
        half = 0.5 * s1
        gamma = BumpComponent(-half, half, 1.0)
        if grid is None:
            grid = QuadratureGrid.uniform_grid(1 << 12)
        g_nodes = grid.nodes
        g_weights = grid.weights
        g_vals = gamma(g_nodes)

        def gamma_hat(x):
            x_arr = np.atleast_1d(np.asarray(x, dtype=float))
            phases = np.exp(-2j * np.pi * np.outer(x_arr, g_nodes))
            return (phases @ (g_weights * g_vals)).real

        probe = np.linspace(-transform_floor_on, transform_floor_on, 257)
        floor = float(np.min(gamma_hat(probe) ** 2))
        if floor <= 0:
            raise ConfigurationError("mollifier transform vanished on the floor interval")
        scale = 1.0 / floor

        def evaluator(t):
            # chi(t) = scale * integral gamma(u) gamma(u + t) du
            shifted = gamma(g_nodes[None, :] + t[:, None])
            return scale * (shifted * (g_weights * g_vals)[None, :]).sum(axis=1)

        win = cls("mollifier", evaluator, (s0, s1), meta={"scale": scale, "half": half})
        win.meta["transform"] = lambda x: scale * gamma_hat(x) ** 2
        win.meta["transform_floor_on"] = transform_floor_on
        return win

    @classmethod
    def from_profile(
        cls,
        evaluator: Callable[[np.ndarray], np.ndarray],
        support: Tuple[float, float],
        mode: str = "profile",
        **kwargs,
    ) -> "SmoothWindow":
        return cls(mode, evaluator, support, **kwargs)

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "plateau": list(self.plateau) if self.plateau else None,
            "support": list(self.support),
            "amplitude": self.amplitude,
            "template": TEMPLATE_ID,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SmoothWindow":
        mode = data.get("mode")
        if mode == "cutoff":
            return cls.cutoff(tuple(data["plateau"]), tuple(data["support"]))
        if mode == "bump":
            return cls.bump(tuple(data["support"]), data.get("amplitude", 1.0))
        if mode == "mollifier":
            return cls.mollifier(tuple(data["support"]))
        raise ConfigurationError(f"cannot build window mode {mode!r} from JSON")


class SpectralTarget:
    """A closed-form smooth profile with a cached truncated spectrum.

    The profile is a sum of scaled bumps (components); it vanishes exactly
    outside the declared support intervals. symmetry_class is either
    "one-sided" (all components on one side of 0) or "hermitian-even"
    (w(-t) = conj w(t), which for these real profiles means even), in which
    case the cached coefficients are validated to be real.
    """

    def __init__(
        self,
        components: Sequence[BumpComponent],
        symmetry_class: str,
        grid: Optional[QuadratureGrid] = None,
        max_freq: int = 512,
        name: str = "",
    ):
        if symmetry_class not in ("one-sided", "hermitian-even"):
            raise ConfigurationError(f"unknown symmetry class {symmetry_class!r}")
        self.components = tuple(components)
        self.symmetry_class = symmetry_class
        self.name = name
        intervals = sorted((c.lo, c.hi) for c in self.components)
        for (lo1, hi1), (lo2, hi2) in zip(intervals, intervals[1:]):
            if hi1 > lo2:
                raise GeometryError("target components must not overlap")
        self.support = tuple(intervals)
        if self.support:
            lo = self.support[0][0]
            hi = self.support[-1][1]
            if not (-0.5 < lo < hi < 0.5):
                raise GeometryError("target support escapes (-1/2, 1/2)")
        if symmetry_class == "hermitian-even":
            mirrored = sorted((-hi, -lo) for lo, hi in intervals)
            if not all(
                np.isclose(x[0], y[0]) and np.isclose(x[1], y[1])
                for x, y in zip(intervals, mirrored)
            ):
                raise GeometryError("hermitian-even target must have mirror-symmetric support")
        if grid is None:
            grid = QuadratureGrid.uniform_grid()
        self.grid = grid
        self.max_freq = int(max_freq)
        hint = (self.support[0][0], self.support[-1][1]) if self.support else None
        self.spectrum: TrigSpectrum = windowed_coefficients(
            self, grid, self.max_freq,
            support_hint=hint,
            real_coefficients=(symmetry_class == "hermitian-even"),
        )

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(t_arr.shape)
        for comp in self.components:
            out = out + comp(t_arr)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(out[0])
        return out

    def scaled(self, factor: float, name: str = "") -> "SpectralTarget":
        comps = [BumpComponent(c.lo, c.hi, c.amplitude * factor) for c in self.components]
        return SpectralTarget(
            comps, self.symmetry_class, grid=self.grid, max_freq=self.max_freq,
            name=name or self.name,
        )

    def support_points(self, count: int = 64) -> np.ndarray:
        """Sample points spread over the open support intervals."""
        pts = []
        for lo, hi in self.support:
            margin = 0.05 * (hi - lo)
            pts.append(np.linspace(lo + margin, hi - margin, max(2, count // max(1, len(self.support)))))
        return np.concatenate(pts) if pts else np.empty(0)

    @classmethod
    def one_sided_bump(
        cls,
        interval: Tuple[float, float],
        amplitude: float = 1.0,
        geometry: Optional[WindowGeometry] = None,
        **kwargs,
    ) -> "SpectralTarget":
        lo, hi = float(interval[0]), float(interval[1])
        if geometry is not None and not (geometry.a < lo < hi < geometry.b):
            raise GeometryError(
                f"one-sided bump ({lo}, {hi}) must sit strictly inside (a, b) = "
                f"({geometry.a}, {geometry.b})"
            )
        return cls([BumpComponent(lo, hi, amplitude)], "one-sided", **kwargs)

    @classmethod
    def even_bump(
        cls,
        half_width: float,
        amplitude: float = 1.0,
        **kwargs,
    ) -> "SpectralTarget":
        """An even bump on (-half_width, half_width), strictly positive inside."""
        return cls([BumpComponent(-half_width, half_width, amplitude)], "hermitian-even", **kwargs)

    @classmethod
    def from_json_dict(cls, data: dict, geometry: Optional[WindowGeometry] = None) -> "SpectralTarget":
        mode = data.get("mode", "bump")
        support = tuple(data["support"])
        amplitude = float(data.get("amplitude", 1.0))
        max_freq = int(data.get("frequencyCutoff", 512))
        if mode == "bump":
            return cls.one_sided_bump(support, amplitude, geometry=geometry, max_freq=max_freq)
        if mode == "even-bump":
            if not np.isclose(support[0], -support[1]):
                raise GeometryError("even-bump support must be symmetric")
            return cls.even_bump(support[1], amplitude, max_freq=max_freq)
        raise ConfigurationError(f"cannot build target mode {mode!r} from JSON")

    @classmethod
    def from_components_json(cls, data: dict) -> "SpectralTarget":
        """Rebuild a target stored by to_json_dict (mode 'components')."""
        if data.get("mode") != "components":
            raise ConfigurationError("expected a components-mode target description")
        comps = [
            BumpComponent(float(c["support"][0]), float(c["support"][1]), float(c["amplitude"]))
            for c in data["components"]
        ]
        return cls(
            comps,
            data.get("symmetryClass", "hermitian-even"),
            max_freq=int(data.get("frequencyCutoff", 512)),
        )

    def to_json_dict(self) -> dict:
        return {
            "mode": "components",
            "symmetryClass": self.symmetry_class,
            "components": [
                {"support": [c.lo, c.hi], "amplitude": c.amplitude} for c in self.components
            ],
            "frequencyCutoff": self.max_freq,
            "template": TEMPLATE_ID,
        }


def build_Tr(one_sided: SpectralTarget, r: float, name: str = "") -> SpectralTarget:
    """The Hermitian-even combination r * (S + reflected conj S).

    For the real one-sided profiles here this is r*(S(t) + S(-t)): the
    diffraction part of a window spectrum delta_0 + r(S + S~). Coefficients
    come out real (2 r Re c_k of the one-sided spectrum).
    """
    if one_sided.symmetry_class != "one-sided":
        raise ContractViolation("build_Tr expects a one-sided target")
    comps = []
    for c in one_sided.components:
        comps.append(BumpComponent(c.lo, c.hi, r * c.amplitude))
        comps.append(BumpComponent(-c.hi, -c.lo, r * c.amplitude))
    return SpectralTarget(
        comps,
        "hermitian-even",
        grid=one_sided.grid,
        max_freq=one_sided.max_freq,
        name=name or (one_sided.name + "-symmetrized" if one_sided.name else ""),
    )
