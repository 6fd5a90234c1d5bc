"""Multiparameter Fisher information: effective scalar information along a
direction, two-parameter synergy, the equicorrelated family, and the
data-processing inequality under classical coarse-graining.

The effective Fisher information for estimating the linear combination
u . theta is F_eff = (u^T F^+ u)^(-1), a harmonic-type projection of the
matrix onto the direction u.  When u has a component outside the row space
of F the combination is unidentifiable and F_eff = 0 (infinite resistance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateModelError, NonStochasticChannelError,
                     NotPositiveDefiniteError)
from .models import CategoricalModel

# Relative eigenvalue cutoff for the pseudoinverse, and the relative mass of
# u allowed outside the row space before the direction counts as lost.
PINV_RCOND = 1e-12
ROWSPACE_TOL = 1e-9


@dataclass(frozen=True)
class FisherMatrix:
    """Validated symmetric PSD matrix wrapper."""

    mat: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        if np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError("matrix is not symmetric within 1e-12")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise NotPositiveDefiniteError(
                "matrix has an eigenvalue below -1e-10")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def effective_fi(fisher: FisherMatrix | np.ndarray, u: np.ndarray) -> float:
    """Scalar information (u^T F^+ u)^(-1) for the combination u . theta.

    Uses an eigendecomposition pseudoinverse with relative cutoff
    PINV_RCOND; returns 0.0 when u lies outside the row space of F.
    """
    if not isinstance(fisher, FisherMatrix):
        fisher = FisherMatrix(np.asarray(fisher))
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != fisher.dim:
        raise ValueError(f"direction has shape {u.shape}, matrix is "
                         f"{fisher.dim}x{fisher.dim}")
    norm_u = np.linalg.norm(u)
    if norm_u == 0.0 or not np.all(np.isfinite(u)):
        raise ValueError("direction must be finite and nonzero")

    w, vecs = np.linalg.eigh(fisher.mat)
    cutoff = PINV_RCOND * max(w.max(), 0.0)
    live = w > cutoff
    coords = vecs.T @ u
    if np.linalg.norm(coords[~live]) > ROWSPACE_TOL * norm_u:
        return 0.0
    resistance = float(np.sum(coords[live] ** 2 / w[live]))
    return 1.0 / resistance


def synergy_effective_fi(f1: float, f2: float, j: float) -> float:
    """Effective FI (f1 f2 - j^2) / (f1 + f2 - 2 j) of the 2x2 matrix
    [[f1, j], [j, f2]] along u = (1, 1)."""
    if f1 <= 0.0 or f2 <= 0.0 or f1 * f2 - j * j <= 0.0:
        raise NotPositiveDefiniteError(
            f"(f1={f1}, f2={f2}, j={j}) is not positive definite")
    return (f1 * f2 - j * j) / (f1 + f2 - 2.0 * j)


def synergy_window(f1: float, f2: float) -> tuple[float, float]:
    """Open interval of couplings j for which the coupled pair beats the
    uncoupled harmonic benchmark: (0, 2 f1 f2 / (f1 + f2))."""
    if f1 <= 0.0 or f2 <= 0.0:
        raise NotPositiveDefiniteError("marginal informations must be positive")
    return 0.0, 2.0 * f1 * f2 / (f1 + f2)


def equicorrelated_effective_fi(f: float, eps: float, k: int) -> float:
    """Closed-form effective FI f * (eps + (1 - eps)/k) of the K-module
    equicorrelated matrix f * [(1 - eps) I + eps J] along the all-ones
    direction."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if f < 0.0:
        raise ValueError(f"f must be >= 0, got {f}")
    return f * (eps + (1.0 - eps) / k)


def equicorrelated_matrix(f: float, eps: float, k: int) -> np.ndarray:
    """The explicit K x K matrix f * [(1 - eps) I + eps J]."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return f * ((1.0 - eps) * np.eye(k) + eps * np.ones((k, k)))


def coarse_grain_fi(model: CategoricalModel, channel: np.ndarray) -> float:
    """Fisher information of the pushforward through a row-stochastic
    channel: q = channel^T p, qdot = channel^T pdot.

    Never exceeds the input FI (data-processing inequality).
    """
    c = np.asarray(channel, dtype=float)
    if c.ndim != 2 or c.shape[0] != model.m:
        raise ValueError(f"channel shape {c.shape} does not match "
                         f"{model.m} input outcomes")
    if np.any(c < 0.0):
        raise NonStochasticChannelError("channel entries must be nonnegative")
    if np.max(np.abs(c.sum(axis=1) - 1.0)) > 1e-9:
        raise NonStochasticChannelError("channel rows must sum to 1")

    q = c.T @ model.p
    qdot = c.T @ model.pdot
    dead = q == 0.0
    if np.any(dead & (qdot != 0.0)):
        raise DegenerateModelError(
            "irregular pushforward: zero probability with nonzero derivative")
    live = ~dead
    return float(np.sum(qdot[live] ** 2 / q[live]))
