"""Finite discrete probability measures and joint laws."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WEIGHT_TOL = 1e-12
JOINT_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure on a finite, strictly increasing support.

    The support may hold state indices (integers) or real points; weights
    are nonnegative and sum to one within ``WEIGHT_TOL``.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if support.ndim != 1 or weights.shape != support.shape:
            raise ValueError("support and weights must be 1-d arrays of equal length")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support points must be strictly increasing")
        if np.any(weights < -WEIGHT_TOL):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")

    @classmethod
    def from_weights(cls, weights, support=None) -> "DiscreteMeasure":
        weights = np.asarray(weights, dtype=float)
        if support is None:
            support = np.arange(len(weights), dtype=float)
        return cls(support=np.asarray(support, dtype=float), weights=weights)

    @classmethod
    def point_mass(cls, x: float) -> "DiscreteMeasure":
        return cls(support=np.array([float(x)]), weights=np.array([1.0]))

    def mean(self) -> float:
        return float(self.support @ self.weights)

    def expect(self, f) -> float:
        return float(np.sum(self.weights * np.asarray([f(x) for x in self.support])))

    def cdf_breakpoints(self):
        """Support points together with the cumulative weights at each point."""
        return self.support, np.cumsum(self.weights)

    def on_union_support(self, other: "DiscreteMeasure"):
        """Re-express both measures on the union of the two supports."""
        common = np.union1d(self.support, other.support)
        w_self = np.zeros_like(common)
        w_other = np.zeros_like(common)
        w_self[np.searchsorted(common, self.support)] = self.weights
        w_other[np.searchsorted(common, other.support)] = other.weights
        return common, w_self, w_other


@dataclass(frozen=True)
class JointLaw:
    """Law of ``dimension`` consecutive states of a finite chain.

    Weights are indexed by state tuples: ``weights[x1, ..., xj]``.
    """

    weights: np.ndarray = field()

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if np.any(weights < -JOINT_TOL):
            raise ValueError("joint weights must be nonnegative")
        if abs(weights.sum() - 1.0) > JOINT_TOL:
            raise ValueError(f"joint weights sum to {weights.sum()!r}, expected 1")

    @property
    def dimension(self) -> int:
        return self.weights.ndim

    def marginalize_last(self) -> "JointLaw":
        if self.dimension == 1:
            raise ValueError("cannot marginalize a one-dimensional law")
        return JointLaw(self.weights.sum(axis=-1))

    def first_marginal(self) -> DiscreteMeasure:
        w = self.weights
        while w.ndim > 1:
            w = w.sum(axis=-1)
        return DiscreteMeasure.from_weights(w)
