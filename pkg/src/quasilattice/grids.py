"""Quadrature grids on the fundamental period [-1/2, 1/2].

All spectral quantities in the toolkit are integrals of smooth, compactly
supported profiles over one period, so a uniform grid is spectrally accurate
and doubles as an FFT-compatible sampling. Non-uniform grids are accepted
too; they just lose the fast coefficient path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = ["QuadratureGrid", "DEFAULT_NODE_COUNT"]

# 2^14 nodes: enough for exact (to roundoff) integration of e^{2 pi i k t}
# far beyond the default frequency cutoff, cheap enough to use everywhere.
DEFAULT_NODE_COUNT = 1 << 14


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights for integrals over [-1/2, 1/2].

    Invariants: nodes strictly increasing inside [-1/2, 1/2], weights
    positive, total weight 1 (the period length).
    """

    nodes: np.ndarray
    weights: np.ndarray
    uniform: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ConfigurationError("nodes and weights must be matching 1-d arrays")
        if nodes.size < 2:
            raise ConfigurationError("grid needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("nodes must be strictly increasing")
        if nodes[0] < -0.5 or nodes[-1] > 0.5:
            raise ConfigurationError("nodes must lie in [-1/2, 1/2]")
        if np.any(weights <= 0):
            raise ConfigurationError("weights must be positive")
        total = float(np.sum(weights))
        if abs(total - 1.0) > 1e-12:
            raise ConfigurationError(f"weights must sum to 1, got {total!r}")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform_grid(cls, node_count: int = DEFAULT_NODE_COUNT) -> "QuadratureGrid":
        """Left-endpoint uniform grid; equals the trapezoid rule for periodic profiles."""
        if node_count < 2:
            raise ConfigurationError("node_count must be at least 2")
        step = 1.0 / node_count
        nodes = -0.5 + step * np.arange(node_count)
        weights = np.full(node_count, step)
        return cls(nodes=nodes, weights=weights, uniform=True)

    @property
    def node_count(self) -> int:
        return self.nodes.size

    def check_resolves(self, max_freq: int) -> None:
        """Nyquist-style guard: the grid must resolve e^{2 pi i k t} up to 2*max_freq."""
        if self.node_count < 4 * max_freq + 2:
            raise ConfigurationError(
                f"grid with {self.node_count} nodes too coarse for max_freq={max_freq}"
            )
