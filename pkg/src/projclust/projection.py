"""Random 1-D projections of datasets and mixtures.

Directions are vectors of i.i.d. standard normals, so the normalised
direction is uniform on the unit sphere.  Projection of an n x p dataset
onto one direction is a single O(np) matrix-vector product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .mathkit import RngStream
from .model import Dataset, Mixture1D, MixtureSpec, clamped_mixture1d, quadratic_form

# Above this dimension dot products accumulate in extended precision to
# keep relative rounding error comfortably below the 1e-9 contract.
_LONGDOUBLE_DIM = 100_000


@dataclass(frozen=True, eq=False)
class Projection1D:
    """A sampled direction with the projected values of one dataset."""

    direction: np.ndarray
    values: np.ndarray
    direction_norm: float


def sample_direction(p: int, rng: RngStream) -> np.ndarray:
    """Draw a direction of p i.i.d. standard normal coordinates."""
    if p < 1:
        raise DomainError(f"dimension must be >= 1, got {p}")
    return rng.generator().standard_normal(p)


def project(data: Dataset, direction: np.ndarray) -> Projection1D:
    """Project every data point onto ``direction`` (no normalisation)."""
    direction = np.asarray(direction, dtype=float)
    if direction.ndim != 1 or direction.size != data.p:
        raise DimensionMismatchError(
            f"direction length {direction.size} != data dimension {data.p}"
        )
    if data.p > _LONGDOUBLE_DIM:
        values = (
            data.points.astype(np.longdouble) @ direction.astype(np.longdouble)
        ).astype(float)
    else:
        values = data.points @ direction
    return Projection1D(
        direction=direction,
        values=values,
        direction_norm=float(np.linalg.norm(direction)),
    )


def projected_mixture(
    spec: MixtureSpec, direction: np.ndarray, i: int = 0, j: int = 1
) -> Mixture1D:
    """Exact 1-D pushforward of components i and j along a direction.

    Means and sigmas are divided by ||direction|| so the result does not
    depend on the direction's length; the pair weight is renormalised to
    w_i / (w_i + w_j).
    """
    if i == j:
        raise DomainError("component indices must differ")
    direction = np.asarray(direction, dtype=float)
    if direction.size != spec.p:
        raise DimensionMismatchError("direction length != spec dimension")
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise DomainError("direction must be nonzero")
    mu_i = float(spec.means[i] @ direction) / norm
    mu_j = float(spec.means[j] @ direction) / norm
    var_i = quadratic_form(spec.covs[i], direction) / (norm * norm)
    var_j = quadratic_form(spec.covs[j], direction) / (norm * norm)
    w = float(spec.weights[i]) / float(spec.weights[i] + spec.weights[j])
    return clamped_mixture1d(
        mu_i, mu_j, math.sqrt(max(var_i, 0.0)), math.sqrt(max(var_j, 0.0)), w
    )


def separability_1d(mix: Mixture1D) -> float:
    """1-D separation |mu1 - mu2| / (sigma1 + sigma2)."""
    return abs(mix.mu1 - mix.mu2) / (mix.sigma1 + mix.sigma2)
