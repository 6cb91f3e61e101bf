"""Independence test that is robust to unknown system parameters.

When the true parameters of the two systems are unknown, residuals can
only be formed at candidate parameters.  The procedure builds a
finite-sample confidence region per system, evaluates the rank statistic
of the permutation test at every accepted candidate pair (sharing one
permutation block and one tie-break order across the whole grid), and
rejects independence only if the rank is at most ``r`` uniformly over
the region.  The certified level is ``r / m + 2 beta`` where ``beta`` is
the common miss probability of the two regions.

Candidates that are structurally unusable (unstable or non-invertible)
are excluded by the region construction and reported; if either region
is empty the test accepts with a warning flag rather than guessing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .depmeasure import (
    DependenceEstimator,
    PairedSample,
    double_center,
    estimator_bandwidths,
    resolve_estimator,
    side_matrix,
)
from .linsys import ArxStructure, as_series, residuals
from .ranktest import generate_permutations, rank_of_original, tie_breaker
from .spsconf import ConfidenceGrid, SpsConfig, sps_region


@dataclass(frozen=True)
class SystemPair:
    """Observed input/output data of two synchronously driven systems."""

    structure_y: ArxStructure
    structure_z: ArxStructure
    u: np.ndarray
    y: np.ndarray
    v: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        for name in ("u", "y", "v", "z"):
            arr = as_series(getattr(self, name), name)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.u.size == self.y.size == self.v.size == self.z.size):
            raise ValueError("all four series must have the same length")

    @property
    def n_samples(self) -> int:
        return self.u.size


def residual_pair(pair: SystemPair, theta, gamma) -> PairedSample:
    """Paired residual series of both systems at candidate ``(theta, gamma)``."""
    e = residuals(pair.structure_y.model(theta), pair.u, pair.y)
    n = residuals(pair.structure_z.model(gamma), pair.v, pair.z)
    return PairedSample(e=e, n=n)


@dataclass(frozen=True)
class RobustConfig:
    """Complete setup of the robust test.

    ``alpha`` is the target certified level; construction checks the
    budget ``r / m <= alpha - 2 beta`` exactly in rational arithmetic and
    requires both regions to share one ``beta``.
    """

    alpha: Fraction
    m: int
    r: int
    sps_y: SpsConfig
    sps_z: SpsConfig
    grid_y: tuple
    grid_z: tuple
    estimator: DependenceEstimator
    perm_seed: int = 0
    tie_seed: int = 1

    def __post_init__(self) -> None:
        alpha = self.alpha if isinstance(self.alpha, Fraction) else Fraction(str(self.alpha))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(
            self, "grid_y", tuple(np.asarray(ax, dtype=np.float64) for ax in self.grid_y)
        )
        object.__setattr__(
            self, "grid_z", tuple(np.asarray(ax, dtype=np.float64) for ax in self.grid_z)
        )
        if self.m < 2 or not 1 <= self.r <= self.m:
            raise ValueError(f"need 1 <= r <= m with m >= 2, got r={self.r}, m={self.m}")
        if self.sps_y.beta != self.sps_z.beta:
            raise ValueError(
                f"regions must share one miss probability, got {self.sps_y.beta} and {self.sps_z.beta}"
            )
        if Fraction(self.r, self.m) > alpha - 2 * self.beta:
            raise ValueError(
                f"threshold too large: r/m = {Fraction(self.r, self.m)} exceeds "
                f"alpha - 2*beta = {alpha - 2 * self.beta}"
            )

    @property
    def beta(self) -> Fraction:
        return self.sps_y.beta

    @property
    def certified_level(self) -> Fraction:
        """Finite-sample bound ``r / m + 2 beta`` on the rejection probability."""
        return Fraction(self.r, self.m) + 2 * self.beta

    @staticmethod
    def max_threshold(alpha, m: int, beta: Fraction) -> int:
        """Largest ``r`` whose certified level stays within ``alpha``."""
        alpha = alpha if isinstance(alpha, Fraction) else Fraction(str(alpha))
        r = int(m * (alpha - 2 * beta))
        if r < 1:
            raise ValueError(f"no valid threshold: m*(alpha - 2*beta) = {m * (alpha - 2 * beta)} < 1")
        return r


@dataclass(frozen=True)
class RankField:
    """Rank statistic evaluated at every accepted candidate pair.

    ``ranks`` has the first region's grid axes followed by the second
    region's; entries are 0 where the pair was not evaluated, with the
    matching raw statistic of the unpermuted pairing in ``ref_values``
    (NaN where unevaluated).
    """

    theta_axes: tuple
    gamma_axes: tuple
    ranks: np.ndarray
    ref_values: np.ndarray
    evaluated: np.ndarray
    bandwidths: dict
    vacuous: bool

    def max_rank(self) -> int | None:
        if self.vacuous:
            return None
        return int(self.ranks[self.evaluated].max())

    def argmax(self) -> tuple[np.ndarray, np.ndarray, int] | None:
        """First grid point (lexicographic index order) attaining the max rank."""
        top = self.max_rank()
        if top is None:
            return None
        hits = np.argwhere(self.evaluated & (self.ranks == top))
        idx = tuple(hits[0])
        n_theta = len(self.theta_axes)
        theta = np.array([ax[i] for ax, i in zip(self.theta_axes, idx[:n_theta])])
        gamma = np.array([ax[i] for ax, i in zip(self.gamma_axes, idx[n_theta:])])
        return theta, gamma, top


def _bandwidth_candidate(region: ConfidenceGrid, structure: ArxStructure) -> np.ndarray:
    """Center of mass of the accepted set, or the nearest accepted point if
    the center itself is not a usable model."""
    com = region.center_of_mass()
    if com is None:
        raise ValueError("cannot pick a bandwidth candidate from a vacuous region")
    model = structure.model(com)
    if model.is_stable and model.is_invertible:
        return com
    pts = region.accepted_points()
    return pts[np.argmin(((pts - com[None, :]) ** 2).sum(axis=1))]


def rank_field(
    pair: SystemPair,
    region_y: ConfidenceGrid,
    region_z: ConfidenceGrid,
    config: RobustConfig,
) -> RankField:
    """Evaluate the shared-randomness rank statistic over the product region.

    One permutation block and one tie-break order serve every candidate
    pair.  Gaussian bandwidths are resolved once, from the residuals at
    each region's center-of-mass candidate, and frozen across the field.
    """
    shape = region_y.shape + region_z.shape
    ranks = np.zeros(shape, dtype=np.int64)
    ref = np.full(shape, np.nan)
    evaluated = np.zeros(shape, dtype=bool)
    if region_y.is_vacuous or region_z.is_vacuous:
        return RankField(
            theta_axes=region_y.axes,
            gamma_axes=region_z.axes,
            ranks=ranks,
            ref_values=ref,
            evaluated=evaluated,
            bandwidths=estimator_bandwidths(config.estimator),
            vacuous=True,
        )
    e_bw = residuals(pair.structure_y.model(_bandwidth_candidate(region_y, pair.structure_y)), pair.u, pair.y)
    n_bw = residuals(pair.structure_z.model(_bandwidth_candidate(region_z, pair.structure_z)), pair.v, pair.z)
    resolved = resolve_estimator(config.estimator, e_bw, n_bw)

    n = pair.n_samples
    perms = generate_permutations(config.m - 1, n, config.perm_seed)
    tie = tie_breaker(config.m, config.tie_seed)

    theta_idx = region_y.accepted_indices()
    gamma_idx = region_z.accepted_indices()
    a_mats = []
    for t_idx in theta_idx:
        theta = np.array([ax[i] for ax, i in zip(region_y.axes, t_idx)])
        e_series = residuals(pair.structure_y.model(theta), pair.u, pair.y)
        a_mats.append(double_center(side_matrix(resolved, "e", e_series)))
    n_sq = float(n * n)
    vals = np.empty((len(a_mats), config.m))
    for g_idx in gamma_idx:
        gamma = np.array([ax[i] for ax, i in zip(region_z.axes, g_idx)])
        n_series = residuals(pair.structure_z.model(gamma), pair.v, pair.z)
        b_raw = side_matrix(resolved, "n", n_series)
        for t, a in enumerate(a_mats):
            vals[t, 0] = np.vdot(a, b_raw) / n_sq
        for j, perm in enumerate(perms.perms):
            b_perm = b_raw[np.ix_(perm, perm)]
            for t, a in enumerate(a_mats):
                vals[t, j + 1] = np.vdot(a, b_perm) / n_sq
        for t, t_idx in enumerate(theta_idx):
            full_idx = tuple(t_idx) + tuple(g_idx)
            ranks[full_idx] = rank_of_original(np.abs(vals[t]), tie)
            ref[full_idx] = vals[t, 0]
            evaluated[full_idx] = True
    return RankField(
        theta_axes=region_y.axes,
        gamma_axes=region_z.axes,
        ranks=ranks,
        ref_values=ref,
        evaluated=evaluated,
        bandwidths=estimator_bandwidths(resolved),
        vacuous=False,
    )


@dataclass(frozen=True)
class RobustReport:
    """Decision, certificate and full diagnostics of one robust test run."""

    reject: bool
    vacuous: bool
    max_rank: int | None
    argmax_theta: np.ndarray | None
    argmax_gamma: np.ndarray | None
    config: RobustConfig
    field: RankField
    region_y: ConfidenceGrid
    region_z: ConfidenceGrid
    elapsed_seconds: float

    @property
    def certified_level(self) -> Fraction:
        return self.config.certified_level

    def to_dict(self, include_timing: bool = False) -> dict:
        ranks = [
            [int(r) if ev else None for r, ev in zip(row, ev_row)]
            for row, ev_row in zip(
                self.field.ranks.reshape(self.field.ranks.shape[0], -1),
                self.field.evaluated.reshape(self.field.evaluated.shape[0], -1),
            )
        ]
        refs = [
            [float(max(v, 0.0)) if ev else None for v, ev in zip(row, ev_row)]
            for row, ev_row in zip(
                self.field.ref_values.reshape(self.field.ref_values.shape[0], -1),
                self.field.evaluated.reshape(self.field.evaluated.shape[0], -1),
            )
        ]
        argmax = None
        if self.max_rank is not None:
            argmax = {
                "theta": [float(x) for x in self.argmax_theta],
                "gamma": [float(x) for x in self.argmax_gamma],
                "rank": int(self.max_rank),
            }
        out = {
            "decision": {
                "reject": bool(self.reject),
                "vacuous": bool(self.vacuous),
                "max_rank": None if self.max_rank is None else int(self.max_rank),
                "argmax": argmax,
            },
            "alpha": float(self.config.alpha),
            "certified_level": float(self.certified_level),
            "m": int(self.config.m),
            "r": int(self.config.r),
            "beta": float(self.config.beta),
            "estimator_bandwidths": {
                k: (None if v is None else float(v)) for k, v in self.field.bandwidths.items()
            },
            "rank_field": {
                "theta_axes": [[float(x) for x in ax] for ax in self.field.theta_axes],
                "gamma_axes": [[float(x) for x in ax] for ax in self.field.gamma_axes],
                "ranks": ranks,
                "ref_values": refs,
            },
            "regions": {"y": self.region_y.to_dict(), "z": self.region_z.to_dict()},
            "excluded": {"y": self.region_y.n_invalid, "z": self.region_z.n_invalid},
            "seeds": {"perm": int(self.config.perm_seed), "tie": int(self.config.tie_seed)},
        }
        if include_timing:
            out["elapsed_seconds"] = float(self.elapsed_seconds)
        return out

    def field_rows(self) -> list[tuple]:
        """Evaluated grid points as ``(theta..., gamma..., rank, ref_value)`` rows."""
        rows = []
        n_theta = len(self.field.theta_axes)
        for idx in np.argwhere(self.field.evaluated):
            idx = tuple(idx)
            theta = [float(ax[i]) for ax, i in zip(self.field.theta_axes, idx[:n_theta])]
            gamma = [float(ax[i]) for ax, i in zip(self.field.gamma_axes, idx[n_theta:])]
            rows.append(
                tuple(theta)
                + tuple(gamma)
                + (int(self.field.ranks[idx]), float(max(self.field.ref_values[idx], 0.0)))
            )
        return rows


def robust_decision(
    field: RankField,
    config: RobustConfig,
    region_y: ConfidenceGrid,
    region_z: ConfidenceGrid,
    elapsed_seconds: float = 0.0,
) -> RobustReport:
    """Turn a rank field into the uniform-over-the-region decision.

    Rejects only when every accepted pair has rank at most ``r``; a
    vacuous region yields acceptance with the ``vacuous`` flag set.
    """
    top = field.max_rank()
    if top is None:
        return RobustReport(
            reject=False,
            vacuous=True,
            max_rank=None,
            argmax_theta=None,
            argmax_gamma=None,
            config=config,
            field=field,
            region_y=region_y,
            region_z=region_z,
            elapsed_seconds=elapsed_seconds,
        )
    theta, gamma, top = field.argmax()
    return RobustReport(
        reject=top <= config.r,
        vacuous=False,
        max_rank=top,
        argmax_theta=theta,
        argmax_gamma=gamma,
        config=config,
        field=field,
        region_y=region_y,
        region_z=region_z,
        elapsed_seconds=elapsed_seconds,
    )


def run_robust_test(pair: SystemPair, config: RobustConfig) -> RobustReport:
    """Full pipeline: one region per system, rank field, uniform decision."""
    t0 = time.perf_counter()
    region_y = sps_region(pair.structure_y, pair.u, pair.y, config.grid_y, config.sps_y)
    region_z = sps_region(pair.structure_z, pair.v, pair.z, config.grid_z, config.sps_z)
    field = rank_field(pair, region_y, region_z, config)
    return robust_decision(
        field, config, region_y, region_z, elapsed_seconds=time.perf_counter() - t0
    )
