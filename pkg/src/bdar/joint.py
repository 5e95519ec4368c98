"""Joint pmfs of two discrete variables built from marginals plus a copula.

Two table shapes appear in the model: the 2x2 joint pmf of the keep/innovate
Bernoulli indicators, and the d1 x d2 joint pmf of the innovation pair.
Both come from the same rectangle (inclusion-exclusion) construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copulas import CopulaSpec, _cdf_core

PROB_SUM_TOL = 1e-10


@dataclass(frozen=True)
class CategoricalMarginal:
    """Probability vector over the ordered states 1..d."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in np.asarray(self.probs, dtype=float).ravel())
        if len(probs) < 2:
            raise ValueError("a marginal needs at least 2 states")
        if any(p <= 0.0 or p > 1.0 for p in probs):
            raise ValueError(f"state probabilities must lie in (0, 1]: {probs}")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"state probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def d(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def cdf(self) -> np.ndarray:
        """Cumulative probabilities F(1)..F(d), with F(d) forced to exactly 1."""
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c


@dataclass(frozen=True, eq=False)
class MechanismTable:
    """Joint pmf of the two keep/innovate Bernoulli indicators.

    ``pi[i, j]`` is the probability the first indicator equals i and the
    second equals j, for i, j in {0, 1}. ``pi[1, 1]`` is the joint keep
    probability (the cross moment of the two indicators).
    """

    pi: np.ndarray
    phi1: float
    phi2: float
    max_clamp: float = 0.0

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        if pi.shape != (2, 2) or np.any(pi < 0.0):
            raise ValueError("mechanism table must be a nonnegative 2x2 matrix")
        if abs(pi.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"mechanism table sums to {pi.sum()}, not 1")
        if abs(pi[1].sum() - self.phi1) > PROB_SUM_TOL:
            raise ValueError("row margin does not reproduce phi1")
        if abs(pi[:, 1].sum() - self.phi2) > PROB_SUM_TOL:
            raise ValueError("column margin does not reproduce phi2")
        object.__setattr__(self, "pi", pi)

    @property
    def cells(self) -> np.ndarray:
        return self.pi

    @property
    def row_states(self) -> np.ndarray:
        return np.array([0, 1])

    @property
    def col_states(self) -> np.ndarray:
        return np.array([0, 1])

    def to_json_dict(self) -> dict:
        return {
            "states1": [0, 1],
            "states2": [0, 1],
            "cells": [float(x) for x in self.pi.ravel()],
        }


@dataclass(frozen=True, eq=False)
class InnovationTable:
    """Joint pmf of the innovation pair on the d1 x d2 state grid."""

    p: np.ndarray
    marginal1: CategoricalMarginal
    marginal2: CategoricalMarginal
    max_clamp: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        d1, d2 = self.marginal1.d, self.marginal2.d
        if p.shape != (d1, d2) or np.any(p < 0.0):
            raise ValueError("innovation table shape/sign mismatch with marginals")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"innovation table sums to {p.sum()}, not 1")
        if np.max(np.abs(p.sum(axis=1) - self.marginal1.as_array())) > PROB_SUM_TOL:
            raise ValueError("row sums do not reproduce the first marginal")
        if np.max(np.abs(p.sum(axis=0) - self.marginal2.as_array())) > PROB_SUM_TOL:
            raise ValueError("column sums do not reproduce the second marginal")
        object.__setattr__(self, "p", p)

    @property
    def cells(self) -> np.ndarray:
        return self.p

    @property
    def row_states(self) -> np.ndarray:
        return np.arange(1, self.marginal1.d + 1)

    @property
    def col_states(self) -> np.ndarray:
        return np.arange(1, self.marginal2.d + 1)

    def to_json_dict(self) -> dict:
        return {
            "states1": [int(s) for s in self.row_states],
            "states2": [int(s) for s in self.col_states],
            "cells": [float(x) for x in self.p.ravel()],
        }


def _mechanism_cells(phi1: float, phi2: float, spec: CopulaSpec) -> tuple[np.ndarray, float]:
    """Raw 2x2 mechanism cells plus the clamp applied to negative rounding."""
    p00 = float(_cdf_core(spec, np.float64(1.0 - phi1), np.float64(1.0 - phi2)))
    cells = np.array(
        [
            [p00, (1.0 - phi1) - p00],
            [(1.0 - phi2) - p00, phi1 + phi2 - 1.0 + p00],
        ]
    )
    max_clamp = float(max(0.0, -cells.min()))
    return np.clip(cells, 0.0, None), max_clamp


def _innovation_cells(p1: np.ndarray, p2: np.ndarray, spec: CopulaSpec) -> tuple[np.ndarray, float]:
    """Raw d1 x d2 innovation cells: rectangle masses over the marginal CDF grids."""
    f1 = np.empty(len(p1) + 1)
    f1[0] = 0.0
    np.cumsum(p1, out=f1[1:])
    f1[-1] = 1.0
    f2 = np.empty(len(p2) + 1)
    f2[0] = 0.0
    np.cumsum(p2, out=f2[1:])
    f2[-1] = 1.0
    grid = _cdf_core(spec, f1[:, None], f2[None, :])
    cells = grid[1:, 1:] - grid[:-1, 1:] - grid[1:, :-1] + grid[:-1, :-1]
    max_clamp = float(max(0.0, -cells.min()))
    return np.clip(cells, 0.0, None), max_clamp


def bernoulli_joint(phi1: float, phi2: float, spec: CopulaSpec) -> MechanismTable:
    """Joint pmf of two Bernoulli indicators coupled by a copula.

    The (0, 0) cell is the copula at the two failure probabilities; the other
    cells follow from the margins, so row/column sums reproduce phi1 and phi2
    to machine precision.
    """
    for name, phi in (("phi1", phi1), ("phi2", phi2)):
        if not 0.0 <= phi < 1.0:
            raise ValueError(f"{name}={phi} outside [0, 1)")
    cells, max_clamp = _mechanism_cells(float(phi1), float(phi2), spec)
    return MechanismTable(pi=cells, phi1=float(phi1), phi2=float(phi2), max_clamp=max_clamp)


def comonotone_mechanism(phi: float) -> MechanismTable:
    """Mechanism table for a single shared keep/innovate indicator."""
    if not 0.0 <= phi < 1.0:
        raise ValueError(f"phi={phi} outside [0, 1)")
    cells = np.array([[1.0 - phi, 0.0], [0.0, phi]])
    return MechanismTable(pi=cells, phi1=float(phi), phi2=float(phi))


def innovation_joint(
    m1: CategoricalMarginal, m2: CategoricalMarginal, spec: CopulaSpec
) -> InnovationTable:
    """Joint innovation pmf: rectangle masses over the marginal CDF grids."""
    cells, max_clamp = _innovation_cells(m1.as_array(), m2.as_array(), spec)
    return InnovationTable(p=cells, marginal1=m1, marginal2=m2, max_clamp=max_clamp)


def sample_joint(table, rng: np.random.Generator, size: int | None = None):
    """Draw state pairs from a joint table by inverse CDF.

    The table is flattened row-major and a single uniform indexes the
    cumulative cells, so draws are reproducible given a seeded generator.
    Returns a (i, j) pair of ints, or a pair of arrays when ``size`` is set.
    """
    cells = table.cells.ravel()
    cum = np.cumsum(cells)
    cum[-1] = 1.0
    n_col = table.cells.shape[1]
    u = rng.random() if size is None else rng.random(size)
    k = np.searchsorted(cum, u, side="right")
    rows, cols = k // n_col, k % n_col
    i = table.row_states[rows]
    j = table.col_states[cols]
    if size is None:
        return int(i), int(j)
    return i, j
