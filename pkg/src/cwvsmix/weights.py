"""Sum-to-one mixture weights from the latent field, and the weighted exposures.

Components within a period are ordered mains first (pollutant order), then
pairwise interactions in lexicographic (j, k) order, j < k. The same order is
used by the latent field, the expanded exposure tensor and every output file.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError


def n_components(q: int) -> int:
    return q * (q + 1) // 2


@lru_cache(maxsize=None)
def pair_index(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Parent pollutant indices (j, k) of each interaction, lexicographic."""
    j, k = np.triu_indices(q, k=1)
    j.flags.writeable = False
    k.flags.writeable = False
    return j, k


def component_labels(pollutants) -> list[str]:
    pollutants = list(pollutants)
    j, k = pair_index(len(pollutants))
    return pollutants + [f"{pollutants[a]}:{pollutants[b]}" for a, b in zip(j, k)]


def q_from_components(r: int) -> int:
    q = int(round((np.sqrt(8 * r + 1) - 1) / 2))
    if n_components(q) != r:
        raise InputError(f"{r} is not a valid component count q(q+1)/2")
    return q


@dataclass(frozen=True)
class LatentWeightField:
    """Latent weights, one row of length q(q+1)/2 per exposure period."""

    lambda_star: np.ndarray

    @property
    def m(self) -> int:
        return self.lambda_star.shape[0]

    @property
    def r(self) -> int:
        return self.lambda_star.shape[1]

    @property
    def q(self) -> int:
        return q_from_components(self.r)


@dataclass(frozen=True)
class WeightVector:
    main: np.ndarray
    inter: np.ndarray
    active_flags: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.main, self.inter])


def transform_rows(lambda_star: np.ndarray, q: int) -> np.ndarray:
    """Vectorised weight transform over the leading axes; last axis has length r.

    Numerators are the positive parts of the latent values, with interactions
    also zeroed unless both parent mains are positive. Rows whose numerators
    are all zero map to all-zero weights.
    """
    lambda_star = np.asarray(lambda_star, dtype=float)
    r = n_components(q)
    if lambda_star.shape[-1] != r:
        raise InputError(f"length mismatch: q={q} needs {r} components, got {lambda_star.shape[-1]}")
    num = np.maximum(lambda_star, 0.0)
    if q > 1:
        j, k = pair_index(q)
        live = (lambda_star[..., j] > 0) & (lambda_star[..., k] > 0)
        num[..., q:] = np.where(live, num[..., q:], 0.0)
    d = num.sum(axis=-1, keepdims=True)
    return np.divide(num, d, out=np.zeros_like(num), where=d > 0)


def transform_weights(lambda_star_t, q: int) -> WeightVector:
    w = transform_rows(np.asarray(lambda_star_t, dtype=float).ravel(), q)
    return WeightVector(w[:q].copy(), w[q:].copy(), w > 0)


def expand_exposures(z: np.ndarray) -> np.ndarray:
    """Append pairwise products to the pollutant axis: (..., q) -> (..., q(q+1)/2)."""
    z = np.asarray(z, dtype=float)
    q = z.shape[-1]
    j, k = pair_index(q)
    return np.concatenate([z, z[..., j] * z[..., k]], axis=-1)


def mixture_exposure(weights: WeightVector, z_t) -> float:
    z_t = np.asarray(z_t, dtype=float)
    if z_t.shape != weights.main.shape:
        raise InputError(f"dimension mismatch: {z_t.shape} exposures for {weights.main.size} pollutants")
    return float(expand_exposures(z_t) @ weights.full)


def weighted_design_matrix(field: LatentWeightField, exposures: np.ndarray) -> np.ndarray:
    """G[i, t] = mixture exposure of subject i in period t."""
    exposures = np.asarray(exposures, dtype=float)
    if exposures.ndim != 3 or exposures.shape[1] != field.m:
        raise InputError(f"exposure tensor {exposures.shape} does not match {field.m} periods")
    if n_components(exposures.shape[2]) != field.r:
        raise InputError("pollutant count does not match the latent field")
    w = transform_rows(field.lambda_star, exposures.shape[2])
    return np.einsum("itc,tc->it", expand_exposures(exposures), w)


class DesignCache:
    """Holds G and recomputes only the periods whose latent block changed."""

    def __init__(self, expanded: np.ndarray, lambda_star: np.ndarray, frozen_weights: np.ndarray | None = None):
        self.expanded = expanded  # n x m x r
        self.q = q_from_components(expanded.shape[2])
        self.frozen = frozen_weights is not None
        if self.frozen:
            self.weights = np.array(frozen_weights, dtype=float)
        else:
            self.weights = transform_rows(lambda_star, self.q)
        self.G = np.einsum("itc,tc->it", expanded, self.weights)

    def column(self, t: int, weights_t: np.ndarray) -> np.ndarray:
        return self.expanded[:, t, :] @ weights_t

    def set_column(self, t: int, weights_t: np.ndarray, col: np.ndarray | None = None):
        self.weights[t] = weights_t
        self.G[:, t] = self.column(t, weights_t) if col is None else col
