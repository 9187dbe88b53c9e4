"""Perturbed integer lattices and the interval-field they induce.

A perturbation sequence alpha assigns each integer n in [-N, N] an offset
alpha_n with sup norm below 1/4; the lattice is lambda_n = n + alpha_n (and
lambda_n = n beyond the stored range). The signed indicator field F stacks
the intervals between n and n + alpha_n; its transform has the closed form

    hat F(t) = sum_n e^{-2 pi i n t} (1 - e^{-2 pi i alpha_n t}) / (2 pi i t),

one formula for both signs of alpha_n, with hat F_n(0) = alpha_n. Only the
finitely many nonzero offsets contribute, so the sum is exact, not truncated.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, ContractViolation

__all__ = [
    "PerturbationSequence",
    "PerturbedLattice",
    "eval_F",
    "eval_F_hat",
]

# Below this phase magnitude |2 pi alpha t| the transform kernels switch to
# their Taylor form; direct evaluation would lose digits to cancellation.
SMALL_PHASE = 1e-4


@dataclass(frozen=True)
class PerturbationSequence:
    """Offsets alpha_n for n in [-half_width, half_width], sup-bounded.

    dropped_mass records the l1 mass of offsets zeroed by sparsification so
    consumers can fold it into their error budgets.
    """

    offsets: np.ndarray
    half_width: int
    sup_limit: float = 0.25
    dropped_mass: float = 0.0

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float)
        if offsets.ndim != 1 or offsets.size != 2 * self.half_width + 1:
            raise ConfigurationError(
                f"need {2 * self.half_width + 1} offsets, got {offsets.size}"
            )
        # below 1/2 keeps the point sequence strictly increasing; the
        # tighter 1/4 solver ball is enforced where solves happen
        if not (0.0 < self.sup_limit < 0.5):
            raise ConfigurationError("sup_limit must lie in (0, 1/2)")
        sup = float(np.max(np.abs(offsets))) if offsets.size else 0.0
        if sup > self.sup_limit:
            raise ConfigurationError(
                f"offset sup norm {sup!r} exceeds the declared limit {self.sup_limit!r}"
            )
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.offsets)))

    def offset(self, n: int) -> float:
        if abs(n) > self.half_width:
            return 0.0
        return float(self.offsets[n + self.half_width])

    def nonzero_items(self) -> Tuple[np.ndarray, np.ndarray]:
        """(indices n, offsets alpha_n) of the exactly-nonzero entries."""
        mask = self.offsets != 0.0
        return self.indices[mask], self.offsets[mask]

    @classmethod
    def zero(cls, half_width: int, sup_limit: float = 0.25) -> "PerturbationSequence":
        return cls(np.zeros(2 * half_width + 1), half_width, sup_limit)


@dataclass(frozen=True)
class PerturbedLattice:
    """Points lambda_n = n + alpha_n; exactly the integers beyond half_width."""

    offsets: PerturbationSequence

    @property
    def half_width(self) -> int:
        return self.offsets.half_width

    @property
    def points(self) -> np.ndarray:
        return self.offsets.indices + self.offsets.offsets

    def point(self, n: int) -> float:
        return n + self.offsets.offset(n)

    def perturbed_items(self) -> Tuple[np.ndarray, np.ndarray]:
        """(n, lambda_n) for the entries that actually moved."""
        ns, alphas = self.offsets.nonzero_items()
        return ns, ns + alphas

    def gap_stats(self) -> dict:
        gaps = np.diff(self.points)
        return {
            "min_gap": float(np.min(gaps)),
            "max_gap": float(np.max(gaps)),
            "mean_gap": float(np.mean(gaps)),
        }

    def check_separation(self) -> None:
        """Gaps stay in [1 - 2 sup, 1 + 2 sup] and the points increase strictly."""
        sup = self.offsets.sup_norm
        gaps = np.diff(self.points)
        lo, hi = 1.0 - 2.0 * sup, 1.0 + 2.0 * sup
        if np.any(gaps <= 0):
            raise ContractViolation("lattice points must increase strictly")
        if np.any(gaps < lo - 1e-12) or np.any(gaps > hi + 1e-12):
            raise ContractViolation("lattice gaps escape the sup-norm bounds")

    def max_points_per_unit(self) -> int:
        """Largest number of lattice points in any closed unit interval."""
        pts = self.points
        best = 0
        j = 0
        for i in range(pts.size):
            while pts[i] - pts[j] > 1.0:
                j += 1
            best = max(best, i - j + 1)
        return best

    def density_bound(self) -> int:
        sup = self.offsets.sup_norm
        return math.ceil(1.0 / (1.0 - 2.0 * sup)) + 1

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "alpha_n", "lambda_n"])
            for n, alpha, lam in zip(self.offsets.indices, self.offsets.offsets, self.points):
                writer.writerow([int(n), repr(float(alpha)), repr(float(lam))])

    @classmethod
    def from_csv(cls, path, sup_limit: Optional[float] = None) -> "PerturbedLattice":
        """Load a lattice file; offsets may fill the whole admissible (-1/2, 1/2).

        The declared limit adapts to the data (floor 1/4) so that a file
        outside the solver ball still loads and can fail its certificates
        honestly rather than being rejected at parse time.
        """
        path = Path(path)
        rows = []
        with path.open() as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:3] != ["n", "alpha_n", "lambda_n"]:
                raise ConfigurationError(f"unexpected lattice CSV header {header!r}")
            for row in reader:
                rows.append((int(row[0]), float(row[1])))
        if not rows:
            raise ConfigurationError("empty lattice CSV")
        ns = [n for n, _ in rows]
        half_width = max(abs(n) for n in ns)
        if sorted(ns) != list(range(-half_width, half_width + 1)):
            raise ConfigurationError("lattice CSV must cover a contiguous symmetric index range")
        offsets = np.zeros(2 * half_width + 1)
        for n, alpha in rows:
            offsets[n + half_width] = alpha
        if sup_limit is None:
            sup = float(np.max(np.abs(offsets)))
            if sup >= 0.5:
                raise ConfigurationError(
                    f"lattice offsets reach {sup!r}; points would collide"
                )
            sup_limit = max(0.25, math.nextafter(sup, 1.0))
        return cls(PerturbationSequence(offsets, half_width, sup_limit))

    @classmethod
    def integers(cls, half_width: int) -> "PerturbedLattice":
        return cls(PerturbationSequence.zero(half_width))


def eval_F(alpha: PerturbationSequence, x) -> np.ndarray:
    """The signed indicator field at x: +1 on [n, n+alpha_n), -1 on [n+alpha_n, n).

    With sup |alpha| < 1/2 the intervals are disjoint, so the value is always
    in {-1, 0, +1}.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x_arr.shape)
    base = np.floor(x_arr).astype(int)
    for shift in (-1, 0, 1):
        ns = base + shift
        inside = np.abs(ns) <= alpha.half_width
        if not np.any(inside):
            continue
        a = np.zeros(x_arr.shape)
        a[inside] = alpha.offsets[ns[inside] + alpha.half_width]
        pos = (a > 0) & (x_arr >= ns) & (x_arr < ns + a)
        neg = (a < 0) & (x_arr >= ns + a) & (x_arr < ns)
        out[pos] += 1.0
        out[neg] -= 1.0
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


def eval_F_hat(alpha: PerturbationSequence, t) -> np.ndarray:
    """Closed-form transform of the interval field; exact for the finite offsets."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ns, alphas = alpha.nonzero_items()
    out = np.zeros(t_arr.shape, dtype=complex)
    chunk = 256
    for start in range(0, ns.size, chunk):
        nc = ns[start : start + chunk][:, None].astype(float)
        ac = alphas[start : start + chunk][:, None]
        w = 2.0 * np.pi * ac * t_arr[None, :]
        z = -1j * w
        kernel = np.empty(z.shape, dtype=complex)
        small = np.abs(w) < SMALL_PHASE
        with np.errstate(divide="ignore", invalid="ignore"):
            kernel = (1.0 - np.exp(z)) / (2j * np.pi * t_arr[None, :])
        if np.any(small):
            # (1 - e^{-i w})/(2 pi i t) = alpha * sum_{j>=0} (-z)^j / (j+1)!, z = i w... expanded below
            zs = (-z)[small]
            series = 1.0 + zs * (-0.5 + zs * (1.0 / 6.0 + zs * (-1.0 / 24.0 + zs / 120.0)))
            a_mat = np.broadcast_to(ac, z.shape)
            kernel[small] = a_mat[small] * series
        phases = np.exp(-2j * np.pi * nc * t_arr[None, :])
        out += np.einsum("ct,ct->t", phases, kernel)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return complex(out[0])
    return out
