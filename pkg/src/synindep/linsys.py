"""Scalar stochastic linear systems in transfer-function form.

A system is ``Y_t = G(q)U_t + H(q)E_t`` where ``G = b/f`` and ``H = c/d``
are ratios of polynomials in the backward shift ``q^{-1}``, the input
``U`` is observed and the innovation ``E`` is unobserved white noise.
``f``, ``c`` and ``d`` are monic at lag 0, which pins ``H(0) = 1``.

Filtering is the direct difference equation with zero prehistory: outputs
have the same length as their inputs and sample ``t`` depends only on
samples up to ``t``.  Residual computation inverts the noise filter,
``E = (d/c)(Y - (b/f)U)``, and therefore requires the roots of ``c`` to
lie outside the closed unit disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

#: Stability / invertibility margin: companion spectral radii must stay
#: below ``1 - STABILITY_MARGIN``.
STABILITY_MARGIN = 1e-9


class StructuralModelError(ValueError):
    """Malformed model: wrong shapes, non-monic or non-finite polynomials."""


class UnstableModelError(ValueError):
    """Simulation requested for a model with an unstable denominator."""


class NonInvertibleModelError(ValueError):
    """Residuals requested for a model whose noise filter is not invertible."""


def as_series(values, name: str = "series") -> np.ndarray:
    """Validate and return a 1-D float64 copy of ``values``."""
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def _poly(coeffs, name: str, monic: bool) -> np.ndarray:
    p = np.array(coeffs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise StructuralModelError(f"polynomial {name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(p)):
        raise StructuralModelError(f"polynomial {name} has non-finite coefficients")
    if monic and p[0] != 1.0:
        raise StructuralModelError(f"polynomial {name} must be monic at lag 0, got {p[0]!r}")
    p.flags.writeable = False
    return p


def spectral_radius(coeffs) -> float:
    """Companion-matrix spectral radius of a lag polynomial.

    For ``p(q^{-1}) = p_0 + p_1 q^{-1} + ... + p_k q^{-k}`` this is the
    largest modulus among reciprocals of the roots of ``p``; it is below
    one exactly when all roots lie outside the closed unit disk.  A
    constant polynomial has radius 0.
    """
    a = np.asarray(coeffs, dtype=np.float64)
    k = a.size - 1
    if k == 0:
        return 0.0
    comp = np.zeros((k, k))
    comp[0, :] = -a[1:] / a[0]
    if k > 1:
        comp[np.arange(1, k), np.arange(k - 1)] = 1.0
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


@dataclass(frozen=True)
class TransferModel:
    """Rational model ``(b/f, c/d)`` with ``f``, ``c``, ``d`` monic at lag 0.

    Construction validates shapes and monicity only; stability and
    invertibility are enforced where they matter (``simulate`` and
    ``residuals``), so that candidate models on a search grid can be
    represented and reported as invalid instead of being unconstructible.
    """

    b: np.ndarray
    f: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", _poly(self.b, "b", monic=False))
        object.__setattr__(self, "f", _poly(self.f, "f", monic=True))
        object.__setattr__(self, "c", _poly(self.c, "c", monic=True))
        object.__setattr__(self, "d", _poly(self.d, "d", monic=True))

    @property
    def is_stable(self) -> bool:
        limit = 1.0 - STABILITY_MARGIN
        return spectral_radius(self.f) < limit and spectral_radius(self.d) < limit

    @property
    def is_invertible(self) -> bool:
        return spectral_radius(self.c) < 1.0 - STABILITY_MARGIN


@dataclass(frozen=True)
class InvertibilityReport:
    """Spectral radii of a model's denominators and the verdicts they imply."""

    c_radius: float
    f_radius: float
    d_radius: float
    margin: float = STABILITY_MARGIN

    @property
    def invertible(self) -> bool:
        return self.c_radius < 1.0 - self.margin

    @property
    def stable(self) -> bool:
        limit = 1.0 - self.margin
        return self.f_radius < limit and self.d_radius < limit

    @property
    def ok(self) -> bool:
        return self.invertible and self.stable


def check_invertibility(model: TransferModel) -> InvertibilityReport:
    """Report spectral radii of ``c`` (invertibility) and ``f``, ``d`` (stability)."""
    return InvertibilityReport(
        c_radius=spectral_radius(model.c),
        f_radius=spectral_radius(model.f),
        d_radius=spectral_radius(model.d),
    )


def apply_rational_filter(num, den, x) -> np.ndarray:
    """Apply the rational filter ``num/den`` to ``x`` with zero prehistory.

    ``den`` must be monic at lag 0.  The output satisfies
    ``y_t = sum_i num_i x_{t-i} - sum_{i>=1} den_i y_{t-i}`` with all
    samples before ``t = 0`` taken as zero, so ``len(y) == len(x)``.
    """
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    if den.size == 0 or den[0] != 1.0:
        raise StructuralModelError("filter denominator must be monic at lag 0")
    x = as_series(x, "filter input")
    if x.size == 0:
        return x
    return lfilter(num, den, x)


def simulate(model: TransferModel, u, e) -> np.ndarray:
    """Drive ``model`` with input ``u`` and innovations ``e``.

    Both series must have equal length; the model must be stable.
    """
    u = as_series(u, "input u")
    e = as_series(e, "innovations e")
    if u.size != e.size:
        raise ValueError(f"length mismatch: len(u)={u.size}, len(e)={e.size}")
    if not model.is_stable:
        raise UnstableModelError(
            "model is unstable: spectral radius of f or d is not below "
            f"{1.0 - STABILITY_MARGIN}"
        )
    return apply_rational_filter(model.b, model.f, u) + apply_rational_filter(
        model.c, model.d, e
    )


def residuals(model: TransferModel, u, y) -> np.ndarray:
    """Recover innovations from observed ``(u, y)`` under ``model``.

    Computes ``(d/c)(y - (b/f)u)``; requires the noise numerator ``c`` to
    have all roots outside the closed unit disk.
    """
    u = as_series(u, "input u")
    y = as_series(y, "output y")
    if u.size != y.size:
        raise ValueError(f"length mismatch: len(u)={u.size}, len(y)={y.size}")
    if not model.is_invertible:
        raise NonInvertibleModelError(
            "noise filter is not invertible: spectral radius of c is not below "
            f"{1.0 - STABILITY_MARGIN}"
        )
    return apply_rational_filter(
        model.d, model.c, y - apply_rational_filter(model.b, model.f, u)
    )


def _shifted(x: np.ndarray, lag: int) -> np.ndarray:
    """``x`` delayed by ``lag`` samples with zero prehistory."""
    if lag == 0:
        return x
    out = np.zeros_like(x)
    out[lag:] = x[:-lag]
    return out


@dataclass(frozen=True)
class ArxStructure:
    """AR/ARX model family ``y_t = sum a_i y_{t-i} + sum b_j u_{t-j} + e_t``.

    The parameter vector is ``(a_1..a_na, b_delay..b_{delay+nb-1})``.  The
    family maps into transfer form as ``G = b/A`` and ``H = 1/A`` with
    ``A = 1 - a_1 q^{-1} - ... - a_na q^{-na}``, so the noise filter is
    always invertible and candidate validity reduces to stability of ``A``.
    """

    na: int
    nb: int = 0
    delay: int = 1

    def __post_init__(self) -> None:
        if self.na < 0 or self.nb < 0 or self.na + self.nb == 0:
            raise ValueError("structure needs na >= 0, nb >= 0 and na + nb >= 1")
        if self.nb > 0 and self.delay < 1:
            raise ValueError("input delay must be at least 1")

    @property
    def n_params(self) -> int:
        return self.na + self.nb

    def _params(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=np.float64).reshape(-1)
        if p.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {p.size}")
        return p

    def model(self, params) -> TransferModel:
        p = self._params(params)
        a_poly = np.concatenate(([1.0], -p[: self.na]))
        if self.nb > 0:
            b_poly = np.concatenate((np.zeros(self.delay), p[self.na :]))
            return TransferModel(b=b_poly, f=a_poly, c=[1.0], d=a_poly)
        return TransferModel(b=[0.0], f=[1.0], c=[1.0], d=a_poly)

    def regressors(self, u, y) -> np.ndarray:
        """Stack lagged outputs and inputs into an ``(n, na + nb)`` matrix."""
        u = as_series(u, "input u")
        y = as_series(y, "output y")
        if u.size != y.size:
            raise ValueError(f"length mismatch: len(u)={u.size}, len(y)={y.size}")
        cols = [_shifted(y, k) for k in range(1, self.na + 1)]
        cols += [_shifted(u, self.delay + j) for j in range(self.nb)]
        return np.column_stack(cols)

    def residuals(self, params, u, y) -> np.ndarray:
        """Prediction errors ``y - Phi @ params``; pure FIR, valid for any params."""
        p = self._params(params)
        return as_series(y, "output y") - self.regressors(u, y) @ p
