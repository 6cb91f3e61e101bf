"""Seeded generators of paired innovation processes.

Each generator draws ``n`` i.i.d. pairs ``(e_t, n_t)`` from one of the
benchmark joint distributions.  All draws come from the ``("innov",)``
substream of the given seed, with a fixed draw order per generator, so
a ``(generator, n, seed)`` triple always produces the same sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .depmeasure import PairedSample


@dataclass(frozen=True)
class IndependentGaussian:
    """Independent coordinates, each ``N(0, cov_scale)``."""

    cov_scale: float = 0.25


@dataclass(frozen=True)
class RotatedMixture:
    """Four-cluster Gaussian mixture rotated by ``angle`` radians.

    A centred Gaussian pair with covariance ``cov_scale * I`` is shifted
    by ``(s1 * shift, s2 * shift)`` with independent uniform signs, then
    rotated.  Coordinates are independent exactly at angles 0 and pi/2;
    intermediate angles tilt the cluster pattern and induce dependence.
    """

    angle: float
    shift: float = 1.0
    cov_scale: float = 0.25


@dataclass(frozen=True)
class ExtinctGaussian:
    """Gaussian pairs conditioned on lying outside a centred disk.

    Draws ``N(0, cov_scale * I)`` pairs and keeps those with Euclidean
    norm at least ``radius``; coordinates are independent exactly at
    radius 0.
    """

    radius: float
    cov_scale: float = 0.25


@dataclass(frozen=True)
class CustomSampler:
    """Named independent-coordinate sampler from the registry."""

    name: str
    scale: float = 0.5


InnovationGenerator = IndependentGaussian | RotatedMixture | ExtinctGaussian | CustomSampler


def _gaussian(gen: np.random.Generator, n: int, scale: float) -> np.ndarray:
    return gen.normal(0.0, scale, size=(n, 2))


def _laplace(gen: np.random.Generator, n: int, scale: float) -> np.ndarray:
    return gen.laplace(0.0, scale, size=(n, 2))


def _student_t3(gen: np.random.Generator, n: int, scale: float) -> np.ndarray:
    return gen.standard_t(3, size=(n, 2)) * scale


SAMPLERS = {
    "gaussian": _gaussian,
    "laplace": _laplace,
    "student_t3": _student_t3,
}


def _extinct(gen: np.random.Generator, n: int, radius: float, std: float) -> tuple[np.ndarray, int]:
    """Accepted pairs plus the number of raw draws consumed."""
    kept: list[np.ndarray] = []
    total_kept = 0
    raw = 0
    batch = max(4096, 2 * n)
    while total_kept < n:
        pts = gen.normal(0.0, std, size=(batch, 2))
        raw += batch
        ok = pts[np.hypot(pts[:, 0], pts[:, 1]) >= radius]
        kept.append(ok)
        total_kept += ok.shape[0]
    return np.concatenate(kept)[:n], raw


def draw(generator: InnovationGenerator, n: int, seed: int) -> PairedSample:
    """Draw ``n`` innovation pairs from ``generator``."""
    if n < 1:
        raise ValueError("need at least one pair")
    gen = rng.stream(seed, "innov")
    if isinstance(generator, IndependentGaussian):
        pts = _gaussian(gen, n, np.sqrt(generator.cov_scale))
    elif isinstance(generator, RotatedMixture):
        base = gen.normal(0.0, np.sqrt(generator.cov_scale), size=(n, 2))
        signs = gen.integers(0, 2, size=(n, 2)) * 2.0 - 1.0
        pts = base + generator.shift * signs
        c, s = np.cos(generator.angle), np.sin(generator.angle)
        pts = pts @ np.array([[c, s], [-s, c]])
    elif isinstance(generator, ExtinctGaussian):
        if generator.radius < 0:
            raise ValueError("extinction radius must be non-negative")
        pts, _ = _extinct(gen, n, generator.radius, np.sqrt(generator.cov_scale))
    elif isinstance(generator, CustomSampler):
        try:
            sampler = SAMPLERS[generator.name]
        except KeyError:
            raise ValueError(
                f"unknown sampler {generator.name!r}; available: {sorted(SAMPLERS)}"
            ) from None
        pts = sampler(gen, n, generator.scale)
    else:
        raise TypeError(f"unknown generator {generator!r}")
    return PairedSample(e=pts[:, 0], n=pts[:, 1])


def extinct_discard_stats(generator: ExtinctGaussian, n: int, seed: int) -> tuple[PairedSample, int]:
    """Like ``draw`` but also reports how many raw pairs were consumed."""
    gen = rng.stream(seed, "innov")
    pts, raw = _extinct(gen, n, generator.radius, np.sqrt(generator.cov_scale))
    return PairedSample(e=pts[:, 0], n=pts[:, 1]), raw
