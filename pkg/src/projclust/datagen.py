"""Synthetic mixture generators and dataset file I/O.

Generators place the mean difference along a single populated coordinate
so the requested high-dimensional separation is achieved exactly and
sampling stays O(np).

The rank-controlled generator reserves a shared block of ceil(zeta*p)
unit-variance coordinates common to both components, plus one further
disjoint block of the same size per component (disjoint from the shared
block and from each other, truncated when the blocks run out of
coordinates).  The rank of the summed covariances is therefore exactly
min(3*ceil(zeta*p), p) and is returned alongside the spec.

Dataset files are a raw little-endian float64 row-major payload plus a
JSON sidecar header ``{n, p, k, seed, generator, labels?}``.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .errors import DimensionMismatchError, DomainError, UnsupportedError
from .mathkit import RngStream
from .model import (
    CovarianceSpec,
    Dataset,
    MixtureSpec,
    Provenance,
)

NONGAUSSIAN_SHAPES = ("uniform", "laplace", "rademacher")


def make_spherical_spec(
    p: int, c: float, sigma: float = 1.0, w: float = 0.5
) -> MixtureSpec:
    """Two spherical components with separation exactly c.

    Means are 0 and (2*c*sqrt(p)*sigma, 0, ..., 0); both covariances are
    sigma^2 * I.
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if c < 0.0:
        raise DomainError("c must be nonnegative")
    if sigma <= 0.0:
        raise DomainError("sigma must be positive")
    if not 0.0 < w < 1.0:
        raise DomainError("w must lie in (0, 1)")
    means = np.zeros((2, p))
    means[1, 0] = 2.0 * c * math.sqrt(p) * sigma
    cov = CovarianceSpec.spherical(sigma * sigma)
    return MixtureSpec.create(means, (cov, cov), np.array([w, 1.0 - w]))


def make_rank_spec(
    p: int, c: float, zeta: float, rng: RngStream | None = None
) -> tuple[MixtureSpec, int]:
    """Rank-controlled two-component spec; returns (spec, rank(S1+S2)).

    A fraction ``zeta`` of the coordinates is shared by both components
    with unit variance; each component additionally populates a disjoint
    uniformly drawn block of the same size.  The mean difference lies
    along the first shared coordinate so the separation is exactly c
    (both components have lambda_max = 1).
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if c < 0.0:
        raise DomainError("c must be nonnegative")
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    block = math.ceil(zeta * p)
    if block < 1:
        raise DomainError("zeta * p must be at least 1")
    if rng is None:
        rng = RngStream(0, 0)
    perm = rng.generator().permutation(p)
    shared = perm[:block]
    own1 = perm[block: min(2 * block, p)]
    own2 = perm[min(2 * block, p): min(3 * block, p)]

    eig1 = np.zeros(p)
    eig1[shared] = 1.0
    eig1[own1] = 1.0
    eig2 = np.zeros(p)
    eig2[shared] = 1.0
    eig2[own2] = 1.0
    rank = int(np.count_nonzero(eig1 + eig2))

    means = np.zeros((2, p))
    means[1, shared[0]] = 2.0 * c * math.sqrt(p)
    spec = MixtureSpec.create(
        means,
        (CovarianceSpec.eigen(eig1), CovarianceSpec.eigen(eig2)),
        np.array([0.5, 0.5]),
    )
    return spec, rank


def _component_transform(cov: CovarianceSpec, p: int):
    """Map a (rows, p) block of i.i.d. unit-variance draws to the
    component's covariance."""
    if cov.kind == "spherical":
        sd = math.sqrt(cov.variance)
        return lambda z: sd * z
    if cov.kind == "eigen":
        sd = np.sqrt(cov.eigenvalues)
        if cov.basis is None:
            return lambda z: z * sd
        basis = cov.basis
        return lambda z: (z * sd) @ basis.T
    vals, vecs = np.linalg.eigh(cov.matrix)
    factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return lambda z: z @ factor.T


def _draw_base(gen: np.random.Generator, n: int, p: int, shape: str) -> np.ndarray:
    if shape == "gaussian":
        return gen.standard_normal((n, p))
    if shape == "uniform":
        half = math.sqrt(3.0)
        return gen.uniform(-half, half, size=(n, p))
    if shape == "laplace":
        return gen.laplace(0.0, 1.0 / math.sqrt(2.0), size=(n, p))
    if shape == "rademacher":
        return gen.integers(0, 2, size=(n, p)).astype(float) * 2.0 - 1.0
    raise DomainError(f"unknown coordinate shape {shape!r}")


def _sample(spec: MixtureSpec, n: int, rng: RngStream, shape: str) -> Dataset:
    if n < 1:
        raise DomainError("n must be >= 1")
    gen = rng.generator()
    labels = gen.choice(spec.k, size=n, p=spec.weights)
    z = _draw_base(gen, n, spec.p, shape)
    points = np.empty((n, spec.p))
    for i in range(spec.k):
        rows = labels == i
        if not np.any(rows):
            continue
        transform = _component_transform(spec.covs[i], spec.p)
        points[rows] = spec.means[i] + transform(z[rows])
    generator_id = f"{shape}:stream={rng.stream_index}"
    return Dataset(
        n=n, p=spec.p, points=points, labels=labels,
        provenance=Provenance(seed=rng.master_seed, generator=generator_id),
    )


def sample_dataset(spec: MixtureSpec, n: int, rng: RngStream) -> Dataset:
    """Draw n labelled points from the Gaussian mixture."""
    return _sample(spec, n, rng, "gaussian")


def sample_nongaussian_dataset(
    spec: MixtureSpec, shape: str, n: int, rng: RngStream
) -> Dataset:
    """Draw n labelled points with non-Gaussian coordinates.

    Coordinates follow the named zero-mean unit-variance shape and are
    scaled and shifted so the mixture's first two moments match the spec
    exactly.  Supported for spherical and eigen covariances.
    """
    if shape not in NONGAUSSIAN_SHAPES:
        raise DomainError(f"shape must be one of {NONGAUSSIAN_SHAPES}")
    for cov in spec.covs:
        if cov.kind == "full":
            raise UnsupportedError(
                "non-Gaussian coordinates require spherical or eigen covariances"
            )
    return _sample(spec, n, rng, shape)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _base_path(path: str) -> str:
    return path[:-4] if path.endswith(".bin") else path


def write_dataset(dataset: Dataset, path: str, k: int | None = None) -> tuple[str, str]:
    """Write ``<path>.bin`` (little-endian float64, row-major) and
    ``<path>.json`` (sidecar header).  Returns the two file names."""
    base = _base_path(path)
    bin_path, json_path = base + ".bin", base + ".json"
    payload = np.ascontiguousarray(dataset.points, dtype="<f8")
    with open(bin_path, "wb") as fh:
        fh.write(payload.tobytes())
    if k is None:
        k = int(dataset.labels.max()) + 1 if dataset.labels is not None else 2
    header = {
        "n": dataset.n,
        "p": dataset.p,
        "k": k,
        "seed": dataset.provenance.seed if dataset.provenance else None,
        "generator": dataset.provenance.generator if dataset.provenance else None,
    }
    if dataset.labels is not None:
        header["labels"] = dataset.labels.tolist()
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, sort_keys=True)
        fh.write("\n")
    return bin_path, json_path


def read_dataset(path: str) -> Dataset:
    """Read a dataset written by :func:`write_dataset`."""
    base = _base_path(path)
    bin_path, json_path = base + ".bin", base + ".json"
    if not os.path.exists(json_path):
        raise FileNotFoundError(json_path)
    with open(json_path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    n, p = int(header["n"]), int(header["p"])
    raw = np.fromfile(bin_path, dtype="<f8")
    if raw.size != n * p:
        raise DimensionMismatchError(
            f"payload holds {raw.size} values, header says {n}x{p}"
        )
    labels = header.get("labels")
    labels = None if labels is None else np.asarray(labels, dtype=int)
    seed = header.get("seed")
    provenance = None
    if seed is not None:
        provenance = Provenance(seed=int(seed), generator=header.get("generator") or "")
    return Dataset(
        n=n, p=p, points=raw.reshape(n, p).astype(float),
        labels=labels, provenance=provenance,
    )


def export_csv(dataset: Dataset, path: str) -> str:
    """Full-precision CSV export (header row, one point per row)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = [f"x{j}" for j in range(dataset.p)]
        if dataset.labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.points[i]]
            if dataset.labels is not None:
                row.append(int(dataset.labels[i]))
            writer.writerow(row)
    return path
