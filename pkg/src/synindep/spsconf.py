"""Finite-sample confidence regions for AR/ARX parameters via sign perturbation.

A candidate parameter ``theta`` is scored by comparing the reference
correlation sum ``S_0 = mean(phi_t * eps_t(theta))`` against ``M - 1``
sign-perturbed counterparts: the residuals are flipped by independent
Rademacher signs, the output is re-simulated at ``theta`` from the
flipped noise, regressors are rebuilt from that output, and the sum is
recomputed.  At the true parameter all ``M`` sums are exchangeable for
symmetric innovations, so excluding candidates whose reference sum ranks
among the ``q`` largest yields exact coverage ``1 - q / M``.

All ``M`` sums, including the reference, go through the same rebuild
path (the reference uses all-plus signs), which makes the exchangeability
argument hold bit for bit; a hypothetical variant with all-plus signs
equals the reference exactly.

One sign block and one tie-break order are drawn per region and reused
across every grid point, as required for the accepted set to be a valid
simultaneous confidence region.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import lfilter

from . import rng
from .linsys import ArxStructure, as_series


class InvalidCandidateError(ValueError):
    """Candidate model cannot be evaluated (unstable or not invertible)."""


@dataclass(frozen=True)
class SpsConfig:
    """Sign-perturbation setup: ``variants`` total sums, ``q`` excluded ranks.

    Confidence ``1 - q / variants``; ``q == variants`` is rejected since
    it would empty the region almost surely.
    """

    variants: int
    q: int
    sign_seed: int = 0
    tie_seed: int = 1

    def __post_init__(self) -> None:
        if self.variants < 2:
            raise ValueError("need at least two variants")
        if not 1 <= self.q < self.variants:
            raise ValueError(
                f"q must satisfy 1 <= q < variants, got q={self.q}, variants={self.variants}"
            )

    @property
    def beta(self) -> Fraction:
        """Exact miss probability ``q / variants`` of the region."""
        return Fraction(self.q, self.variants)


def _sign_block(config: SpsConfig, n: int) -> np.ndarray:
    """``(variants, n)`` signs with an all-plus reference row first."""
    gen = rng.stream(config.sign_seed, "sps-sign")
    signs = np.empty((config.variants, n))
    signs[0] = 1.0
    signs[1:] = gen.integers(0, 2, size=(config.variants - 1, n)) * 2.0 - 1.0
    return signs


def _tie_order(config: SpsConfig) -> np.ndarray:
    return rng.stream(config.tie_seed, "sps-tie").permutation(config.variants)


def _shift_rows(x: np.ndarray, lag: int) -> np.ndarray:
    out = np.zeros_like(x)
    out[:, lag:] = x[:, :-lag]
    return out


def _squared_norms(
    structure: ArxStructure, theta: np.ndarray, u: np.ndarray, y: np.ndarray, signs: np.ndarray
) -> np.ndarray | None:
    """Ranking scores of all variants at ``theta``; ``None`` if invalid there.

    Scalar parameters are ranked by the plain squared sum.  For vector
    parameters each coordinate is divided by the root-mean-square of the
    variant's own rebuilt regressor column before taking the norm, so the
    score stays the same measurable function of each sign row.
    """
    model = structure.model(theta)
    if not (model.is_stable and model.is_invertible):
        return None
    eps = structure.residuals(theta, u, y)
    pert = signs * eps[None, :]
    ybar = lfilter(model.b, model.f, u)[None, :] + lfilter(model.c, model.d, pert, axis=1)
    n = u.size
    p = structure.n_params
    sums = np.empty((signs.shape[0], p))
    scales = np.empty_like(sums)
    for k in range(structure.na):
        col = _shift_rows(ybar, k + 1)
        sums[:, k] = (col * pert).mean(axis=1)
        scales[:, k] = np.sqrt((col * col).mean(axis=1))
    for j in range(structure.nb):
        col_u = np.zeros_like(u)
        lag = structure.delay + j
        col_u[lag:] = u[: n - lag]
        sums[:, structure.na + j] = pert @ col_u / n
        scales[:, structure.na + j] = np.sqrt((col_u * col_u).mean())
    if p == 1:
        return sums[:, 0] ** 2
    ratio = np.where(scales > 0.0, sums / np.where(scales > 0.0, scales, 1.0), 0.0)
    return (ratio * ratio).sum(axis=1)


def _reference_rank(scores: np.ndarray, tau: np.ndarray) -> int:
    """Ascending tie-broken rank of the reference score among all variants."""
    below = (scores[1:] < scores[0]) | ((scores[1:] == scores[0]) & (tau[1:] < tau[0]))
    return int(1 + np.count_nonzero(below))


def sps_accepts(theta, structure: ArxStructure, u, y, config: SpsConfig) -> bool:
    """Membership of one candidate in the confidence region.

    Raises ``InvalidCandidateError`` for structurally invalid candidates,
    which is distinct from a statistical rejection.
    """
    u = as_series(u, "input u")
    y = as_series(y, "output y")
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    scores = _squared_norms(structure, theta, u, y, _sign_block(config, u.size))
    if scores is None:
        raise InvalidCandidateError(f"candidate {theta.tolist()} is unstable or not invertible")
    rank = _reference_rank(scores, _tie_order(config))
    return rank <= config.variants - config.q


@dataclass(frozen=True)
class ConfidenceGrid:
    """Accepted mask of a confidence region over a rectangular grid.

    ``accepted`` and ``invalid`` are boolean arrays with one axis per
    parameter; invalid points (structurally unusable candidates) are
    never accepted and are reported separately.
    """

    axes: tuple[np.ndarray, ...]
    accepted: np.ndarray
    invalid: np.ndarray
    variants: int
    q: int
    sign_seed: int
    tie_seed: int
    data_digest: str

    @property
    def beta(self) -> Fraction:
        return Fraction(self.q, self.variants)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.accepted.shape

    @property
    def is_vacuous(self) -> bool:
        return not bool(self.accepted.any())

    @property
    def n_invalid(self) -> int:
        return int(np.count_nonzero(self.invalid))

    def accepted_indices(self) -> np.ndarray:
        """``(k, n_axes)`` grid indices of accepted points, in index order."""
        return np.argwhere(self.accepted)

    def accepted_points(self) -> np.ndarray:
        """``(k, n_axes)`` parameter vectors of accepted points."""
        idx = self.accepted_indices()
        return np.column_stack([ax[idx[:, i]] for i, ax in enumerate(self.axes)]) if idx.size else np.empty((0, len(self.axes)))

    def center_of_mass(self) -> np.ndarray | None:
        """Mean of accepted parameter vectors, ``None`` for a vacuous region."""
        pts = self.accepted_points()
        return pts.mean(axis=0) if pts.size else None

    def axis_diameters(self) -> np.ndarray:
        """Per-axis spread (max minus min) of the accepted set; zeros if vacuous."""
        pts = self.accepted_points()
        if pts.size == 0:
            return np.zeros(len(self.axes))
        return pts.max(axis=0) - pts.min(axis=0)

    def to_dict(self) -> dict:
        return {
            "axes": [[float(v) for v in ax] for ax in self.axes],
            "mask": self.accepted.astype(int).tolist(),
            "invalid": self.invalid.astype(int).tolist(),
            "beta": float(self.beta),
            "q": int(self.q),
            "variants": int(self.variants),
            "seeds": {"signs": int(self.sign_seed), "tie": int(self.tie_seed)},
            "data_digest": self.data_digest,
        }


def data_digest(u: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(u, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(y, dtype=np.float64).tobytes())
    return h.hexdigest()


def stability_axis(points: int = 41, margin: float = 0.05) -> np.ndarray:
    """Default AR(1) search axis: evenly spaced inside the stability interval."""
    return np.linspace(-1.0 + margin, 1.0 - margin, points)


def sps_region(structure: ArxStructure, u, y, axes, config: SpsConfig) -> ConfidenceGrid:
    """Evaluate membership over the product grid spanned by ``axes``.

    The sign block and tie-break order are drawn once and shared by all
    grid points, so the mask is a pure per-point function of the data and
    is independent of evaluation order.
    """
    u = as_series(u, "input u")
    y = as_series(y, "output y")
    if u.size != y.size:
        raise ValueError(f"length mismatch: len(u)={u.size}, len(y)={y.size}")
    axes = tuple(as_series(ax, "grid axis") for ax in axes)
    if len(axes) != structure.n_params:
        raise ValueError(f"expected {structure.n_params} grid axes, got {len(axes)}")
    if any(ax.size == 0 for ax in axes):
        raise ValueError("grid axes must be non-empty")
    signs = _sign_block(config, u.size)
    tau = _tie_order(config)
    limit = config.variants - config.q
    shape = tuple(ax.size for ax in axes)
    accepted = np.zeros(shape, dtype=bool)
    invalid = np.zeros(shape, dtype=bool)
    for idx in np.ndindex(shape):
        theta = np.array([ax[i] for ax, i in zip(axes, idx)])
        scores = _squared_norms(structure, theta, u, y, signs)
        if scores is None:
            invalid[idx] = True
        else:
            accepted[idx] = _reference_rank(scores, tau) <= limit
    accepted.flags.writeable = False
    invalid.flags.writeable = False
    return ConfidenceGrid(
        axes=axes,
        accepted=accepted,
        invalid=invalid,
        variants=config.variants,
        q=config.q,
        sign_seed=config.sign_seed,
        tie_seed=config.tie_seed,
        data_digest=data_digest(u, y),
    )
