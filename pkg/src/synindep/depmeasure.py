"""Dependence measures between two scalar samples.

Two families are provided, both as biased V-statistics over a paired
sample ``{(e_i, n_i)}``:

* ``hsic_v`` -- the Hilbert-Schmidt independence criterion with Gaussian
  or linear kernels.  With Gram matrices ``K`` and ``L`` the value is
  ``mean(K * L) + K.sum() * L.sum() / n**4 - 2 * (k . l) / n**3`` where
  ``k``, ``l`` are row sums; equivalently ``tr(K H L H) / n**2`` with the
  centering matrix ``H``.
* ``dcov_sq`` -- squared distance covariance, the mean elementwise
  product of the doubly centered pairwise-distance matrices.

Both vanish exactly when one coordinate is constant, are non-negative up
to round-off, and are invariant to jointly permuting the pairs.  Gaussian
bandwidths default to the median heuristic: the median of the nonzero
pairwise absolute differences of the coordinate the kernel acts on.
Callers running a permutation test resolve bandwidths once, on the
original sample, and reuse them everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .linsys import as_series

#: Sentinel bandwidth: resolve via the median heuristic before use.
MEDIAN = "median"


class DegenerateSampleError(ValueError):
    """Bandwidth requested for a sample whose points are all identical."""


@dataclass(frozen=True)
class PairedSample:
    """Synchronised pair of scalar series of equal length ``>= 1``."""

    e: np.ndarray
    n: np.ndarray

    def __post_init__(self) -> None:
        e = as_series(self.e, "coordinate e")
        n = as_series(self.n, "coordinate n")
        if e.size != n.size:
            raise ValueError(f"length mismatch: len(e)={e.size}, len(n)={n.size}")
        if e.size == 0:
            raise ValueError("paired sample must contain at least one pair")
        e.flags.writeable = False
        n.flags.writeable = False
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "n", n)

    @property
    def n_pairs(self) -> int:
        return self.e.size


@dataclass(frozen=True)
class GaussianKernel:
    """``k(x, y) = exp(-(x - y)^2 / (2 sigma^2))``; ``sigma`` may be deferred."""

    bandwidth: float | str = MEDIAN

    def __post_init__(self) -> None:
        if self.bandwidth != MEDIAN:
            bw = float(self.bandwidth)
            if not np.isfinite(bw) or bw <= 0.0:
                raise ValueError(f"bandwidth must be positive and finite, got {bw}")
            object.__setattr__(self, "bandwidth", bw)

    @property
    def resolved(self) -> bool:
        return self.bandwidth != MEDIAN


@dataclass(frozen=True)
class LinearKernel:
    """``k(x, y) = x * y``."""

    @property
    def resolved(self) -> bool:
        return True


Kernel = GaussianKernel | LinearKernel


def resolve_bandwidth(x) -> float:
    """Median of the nonzero pairwise absolute differences of ``x``.

    Requires at least two points; raises ``DegenerateSampleError`` when
    every pair of points coincides, since no scale can be inferred.
    """
    x = as_series(x, "bandwidth sample")
    if x.size < 2:
        raise ValueError("bandwidth resolution needs at least two points")
    iu = np.triu_indices(x.size, k=1)
    diffs = np.abs(x[:, None] - x[None, :])[iu]
    nonzero = diffs[diffs > 0.0]
    if nonzero.size == 0:
        raise DegenerateSampleError("all sample points are identical")
    return float(np.median(nonzero))


def resolve_kernel(kernel: Kernel, x) -> Kernel:
    """Return ``kernel`` with any deferred bandwidth fixed from ``x``."""
    if isinstance(kernel, GaussianKernel) and not kernel.resolved:
        return GaussianKernel(bandwidth=resolve_bandwidth(x))
    return kernel


def gram_matrix(kernel: Kernel, x) -> np.ndarray:
    """Symmetric ``n x n`` kernel matrix of ``x``; the kernel must be resolved."""
    x = as_series(x, "gram input")
    if isinstance(kernel, LinearKernel):
        return np.outer(x, x)
    if not kernel.resolved:
        raise ValueError("Gaussian kernel bandwidth must be resolved before use")
    d = x[:, None] - x[None, :]
    return np.exp(d * d / (-2.0 * kernel.bandwidth**2))


def hsic_v(sample: PairedSample, kernel_e: Kernel, kernel_n: Kernel) -> float:
    """Biased HSIC V-statistic of ``sample`` under the given kernels.

    Deferred bandwidths are resolved from the sample's own coordinates.
    """
    ke = resolve_kernel(kernel_e, sample.e)
    kn = resolve_kernel(kernel_n, sample.n)
    k_mat = gram_matrix(ke, sample.e)
    l_mat = gram_matrix(kn, sample.n)
    n = float(sample.n_pairs)
    term1 = float((k_mat * l_mat).sum()) / n**2
    term2 = float(k_mat.sum()) * float(l_mat.sum()) / n**4
    term3 = 2.0 * float(k_mat.sum(axis=1) @ l_mat.sum(axis=1)) / n**3
    return term1 + term2 - term3


def double_center(m: np.ndarray) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    return m - m.mean(axis=0)[None, :] - m.mean(axis=1)[:, None] + m.mean()


def dcov_sq(sample: PairedSample) -> float:
    """Squared distance covariance V-statistic of ``sample``."""
    a = double_center(np.abs(sample.e[:, None] - sample.e[None, :]))
    b = double_center(np.abs(sample.n[:, None] - sample.n[None, :]))
    return float((a * b).mean())


@dataclass(frozen=True)
class Hsic:
    """HSIC estimator choice: one kernel per coordinate."""

    kernel_e: Kernel = GaussianKernel()
    kernel_n: Kernel = GaussianKernel()


@dataclass(frozen=True)
class DistanceCovariance:
    """Squared distance covariance estimator choice."""


DependenceEstimator = Hsic | DistanceCovariance


def resolve_estimator(estimator: DependenceEstimator, e, n) -> DependenceEstimator:
    """Fix any deferred bandwidths of ``estimator`` from the series ``e``, ``n``."""
    if isinstance(estimator, Hsic):
        return replace(
            estimator,
            kernel_e=resolve_kernel(estimator.kernel_e, e),
            kernel_n=resolve_kernel(estimator.kernel_n, n),
        )
    return estimator


def estimator_bandwidths(estimator: DependenceEstimator) -> dict[str, float | None]:
    """Gaussian bandwidths of a resolved estimator, ``None`` where not applicable."""
    out: dict[str, float | None] = {"e": None, "n": None}
    if isinstance(estimator, Hsic):
        for side, kern in (("e", estimator.kernel_e), ("n", estimator.kernel_n)):
            if isinstance(kern, GaussianKernel) and kern.resolved:
                out[side] = float(kern.bandwidth)
    return out


def estimate(estimator: DependenceEstimator, sample: PairedSample) -> float:
    """Evaluate ``estimator`` on ``sample``."""
    if isinstance(estimator, Hsic):
        return hsic_v(sample, estimator.kernel_e, estimator.kernel_n)
    if isinstance(estimator, DistanceCovariance):
        return dcov_sq(sample)
    raise TypeError(f"unknown estimator {estimator!r}")


def side_matrix(estimator: DependenceEstimator, side: str, x: np.ndarray) -> np.ndarray:
    """Raw pairwise matrix of one coordinate for ``estimator`` (no centering)."""
    if isinstance(estimator, Hsic):
        kern = estimator.kernel_e if side == "e" else estimator.kernel_n
        return gram_matrix(kern, x)
    if isinstance(estimator, DistanceCovariance):
        return np.abs(x[:, None] - x[None, :])
    raise TypeError(f"unknown estimator {estimator!r}")


class PairedStatEngine:
    """Evaluates one estimator across many reindexings of the second coordinate.

    Both statistics reduce to ``mean(A * B[p][:, p])`` where ``A`` is the
    doubly centered first-coordinate matrix, ``B`` the raw
    second-coordinate matrix and ``p`` the reindexing: row and column
    constants of ``B`` drop out against the centered ``A``, and for HSIC
    ``mean((HKH) * L) == tr(KHLH) / n**2``.  This matches evaluating the
    estimator on the permuted sample to within round-off while touching
    ``O(n^2)`` memory once.
    """

    def __init__(self, estimator: DependenceEstimator, e: np.ndarray, n: np.ndarray):
        estimator = resolve_estimator(estimator, e, n)
        self.estimator = estimator
        self.a = double_center(side_matrix(estimator, "e", np.asarray(e, dtype=np.float64)))
        self.b = side_matrix(estimator, "n", np.asarray(n, dtype=np.float64))

    def value(self, perm: np.ndarray | None = None) -> float:
        """Statistic with the second coordinate reindexed by ``perm``."""
        b = self.b if perm is None else self.b[np.ix_(perm, perm)]
        return float(np.vdot(self.a, b)) / self.a.size

    def values(self, perms: np.ndarray) -> np.ndarray:
        """Identity-first vector: original statistic then one value per row of ``perms``."""
        out = np.empty(len(perms) + 1)
        out[0] = self.value()
        for j, perm in enumerate(perms):
            out[j + 1] = self.value(perm)
        return out
