"""Exact-level permutation rank test of independence for paired samples.

The original sample is compared against ``m - 1`` copies whose second
coordinate has been uniformly re-permuted.  Under independence the ``m``
datasets are exchangeable, so the rank of the original dependence
statistic among all ``m`` values is uniform on ``{1..m}`` and rejecting
when the rank is at most ``r`` has exact level ``r / m`` in finite
samples, for any sample distribution.  Ties are broken by a random total
order drawn once per test, which keeps the uniformity exact even for
atomic data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng
from .depmeasure import (
    DependenceEstimator,
    PairedSample,
    PairedStatEngine,
    estimator_bandwidths,
    resolve_estimator,
)


@dataclass(frozen=True)
class PermutationSet:
    """``m - 1`` permutations of ``{0..n-1}``, one per comparison dataset."""

    perms: np.ndarray
    seed: int


def generate_permutations(m_minus_1: int, n: int, seed: int) -> PermutationSet:
    """Draw ``m_minus_1`` uniform permutations of ``{0..n-1}``.

    Fisher-Yates draws from the ``("perm",)`` substream of ``seed``;
    the result is a pure function of ``(seed, n, m_minus_1)``.
    """
    if m_minus_1 < 0:
        raise ValueError("number of permutations must be non-negative")
    if n < 1:
        raise ValueError("permutation length must be at least 1")
    gen = rng.stream(seed, "perm")
    perms = np.empty((m_minus_1, n), dtype=np.int64)
    for j in range(m_minus_1):
        perms[j] = gen.permutation(n)
    perms.flags.writeable = False
    return PermutationSet(perms=perms, seed=int(seed))


@dataclass(frozen=True)
class TieBreaker:
    """Random total order on dataset indices ``{0..m-1}``."""

    sigma: np.ndarray
    seed: int


def tie_breaker(m: int, seed: int) -> TieBreaker:
    if m < 1:
        raise ValueError("tie breaker needs at least one dataset")
    sigma = rng.stream(seed, "tie").permutation(m)
    sigma.flags.writeable = False
    return TieBreaker(sigma=sigma, seed=int(seed))


def permute_sample(sample: PairedSample, perm: np.ndarray) -> PairedSample:
    """Reindex the second coordinate of ``sample`` by ``perm``."""
    return PairedSample(e=sample.e, n=sample.n[np.asarray(perm)])


def rank_of_original(values, tie: TieBreaker) -> int:
    """Descending tie-broken rank of ``values[0]`` among all entries.

    The rank is ``1 + #{j >= 1 : values[0] < values[j]}`` where equal
    values compare through the tie-break order, so rank 1 means the
    original statistic is the strict maximum.
    """
    v = np.asarray(values, dtype=np.float64)
    sigma = tie.sigma
    if v.ndim != 1 or v.size != sigma.size:
        raise ValueError(f"expected {sigma.size} values, got shape {v.shape}")
    above = (v[1:] > v[0]) | ((v[1:] == v[0]) & (sigma[1:] > sigma[0]))
    return int(1 + np.count_nonzero(above))


@dataclass(frozen=True)
class RankConfig:
    """Size and threshold of the rank test plus its two seed values.

    ``m`` is the total number of datasets (original plus ``m - 1``
    permuted), ``r`` the one-sided rejection threshold (level ``r / m``)
    and ``p >= r`` the upper end of the exposed acceptance interval
    ``[r, p]``, which holds the rank with probability ``(p - r + 1) / m``
    under independence; ``p`` defaults to ``m``.
    """

    m: int
    r: int
    p: int | None = None
    perm_seed: int = 0
    tie_seed: int = 1

    def __post_init__(self) -> None:
        p = self.m if self.p is None else self.p
        object.__setattr__(self, "p", int(p))
        if not 1 <= self.r <= self.p <= self.m:
            raise ValueError(
                f"rank test needs 1 <= r <= p <= m, got r={self.r}, p={self.p}, m={self.m}"
            )

    @classmethod
    def from_level(
        cls, alpha: float | str | Fraction, m: int, perm_seed: int = 0, tie_seed: int = 1
    ) -> "RankConfig":
        """Build a one-sided config for exact level ``alpha = r / m``.

        ``alpha`` is read at decimal face value (``0.15`` means ``3/20``)
        and rejected unless ``alpha * m`` is an integer; no rounding.
        """
        frac = alpha if isinstance(alpha, Fraction) else Fraction(str(alpha))
        r_exact = frac * m
        if r_exact.denominator != 1:
            raise ValueError(
                f"level {frac} is not exactly representable with m={m} datasets: "
                f"alpha * m = {r_exact} is not an integer"
            )
        return cls(m=m, r=int(r_exact), perm_seed=perm_seed, tie_seed=tie_seed)

    @property
    def alpha(self) -> Fraction:
        """Exact one-sided level ``r / m``."""
        return Fraction(self.r, self.m)

    @property
    def interval_coverage(self) -> Fraction:
        """Exact probability that the rank falls in ``[r, p]`` under independence."""
        return Fraction(self.p - self.r + 1, self.m)

    def covers(self, rank: int) -> bool:
        """Whether ``rank`` lies in the acceptance interval ``[r, p]``."""
        return self.r <= rank <= self.p


def _estimator_label(estimator: DependenceEstimator) -> str:
    from .depmeasure import DistanceCovariance, GaussianKernel, Hsic

    if isinstance(estimator, DistanceCovariance):
        return "dcov"
    if isinstance(estimator, Hsic):
        parts = []
        for kern in (estimator.kernel_e, estimator.kernel_n):
            parts.append("gaussian" if isinstance(kern, GaussianKernel) else "linear")
        return f"hsic[{parts[0]},{parts[1]}]"
    return type(estimator).__name__


@dataclass(frozen=True)
class TestReport:
    """Outcome of one rank test, serialisable with stable content.

    ``measure_values`` holds the per-dataset statistics with index 0 the
    original sample.  ``to_dict`` omits wall time by default so that file
    outputs are reproducible byte for byte; negative round-off values are
    clamped to zero there, while ranking always used the raw values.
    """

    estimator: str
    n_pairs: int
    m: int
    r: int
    p: int
    rank: int
    reject: bool
    measure_values: np.ndarray
    perm_seed: int
    tie_seed: int
    bandwidths: dict
    elapsed_seconds: float

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.r, self.m)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "estimator": self.estimator,
            "n_pairs": int(self.n_pairs),
            "m": int(self.m),
            "r": int(self.r),
            "p": int(self.p),
            "alpha": float(self.alpha),
            "rank": int(self.rank),
            "reject": bool(self.reject),
            "measure_values": [float(max(v, 0.0)) for v in self.measure_values],
            "seeds": {"perm": int(self.perm_seed), "tie": int(self.tie_seed)},
            "bandwidths": {k: (None if v is None else float(v)) for k, v in self.bandwidths.items()},
        }
        if include_timing:
            out["elapsed_seconds"] = float(self.elapsed_seconds)
        return out


def iid_independence_test(
    sample: PairedSample, estimator: DependenceEstimator, config: RankConfig
) -> TestReport:
    """Run the permutation rank test on ``sample`` at level ``r / m``.

    Bandwidths are resolved once on the original sample and reused for
    every permuted dataset; the comparison uses the absolute value of
    each statistic.
    """
    t0 = time.perf_counter()
    resolved = resolve_estimator(estimator, sample.e, sample.n)
    perms = generate_permutations(config.m - 1, sample.n_pairs, config.perm_seed)
    tie = tie_breaker(config.m, config.tie_seed)
    engine = PairedStatEngine(resolved, sample.e, sample.n)
    raw = engine.values(perms.perms)
    rank = rank_of_original(np.abs(raw), tie)
    return TestReport(
        estimator=_estimator_label(resolved),
        n_pairs=sample.n_pairs,
        m=config.m,
        r=config.r,
        p=config.p,
        rank=rank,
        reject=rank <= config.r,
        measure_values=raw,
        perm_seed=config.perm_seed,
        tie_seed=config.tie_seed,
        bandwidths=estimator_bandwidths(resolved),
        elapsed_seconds=time.perf_counter() - t0,
    )
