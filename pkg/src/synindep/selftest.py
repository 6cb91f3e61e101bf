"""Fast built-in checks of hand-derivable values.

Runs in well under a second with no Monte Carlo; used by the ``selftest``
CLI subcommand and service endpoint to verify an installation.
"""

from __future__ import annotations

import math

import numpy as np

from .depmeasure import (
    DistanceCovariance,
    GaussianKernel,
    Hsic,
    LinearKernel,
    PairedSample,
    dcov_sq,
    gram_matrix,
    hsic_v,
    resolve_bandwidth,
)
from .linsys import TransferModel, apply_rational_filter, check_invertibility, residuals, simulate
from .ranktest import generate_permutations, rank_of_original, tie_breaker
from .spsconf import _reference_rank, _squared_norms
from .linsys import ArxStructure


def _close(a, b, tol=1e-12) -> bool:
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= tol))


def run_selftest() -> list[dict]:
    """Return one ``{name, passed, detail}`` entry per check."""
    checks: list[dict] = []

    def check(name: str, fn) -> None:
        try:
            passed, detail = fn()
        except Exception as exc:  # surface the failure, never crash the suite
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        checks.append({"name": name, "passed": bool(passed), "detail": str(detail)})

    def filter_identity():
        y = apply_rational_filter([1.0], [1.0], [3.0, 1.0, 4.0])
        return _close(y, [3, 1, 4]), f"identity filter -> {y.tolist()}"

    def filter_geometric():
        y = apply_rational_filter([1.0], [1.0, -0.5], [1.0, 0.0, 0.0])
        return _close(y, [1.0, 0.5, 0.25]), f"impulse response -> {y.tolist()}"

    def filter_inverse():
        y = apply_rational_filter([1.0, -0.5], [1.0], [1.0, 0.5, 0.25])
        return _close(y, [1.0, 0.0, 0.0]), f"inverse filter -> {y.tolist()}"

    def simulate_ar1():
        model = TransferModel(b=[0.0], f=[1.0], c=[1.0], d=[1.0, -0.5])
        y = simulate(model, np.zeros(3), [1.0, 1.0, 0.5])
        return _close(y, [1.0, 1.5, 1.25]), f"AR(1) output -> {y.tolist()}"

    def simulate_ma():
        model = TransferModel(b=[0.0, 1.0], f=[1.0], c=[1.0, 0.3], d=[1.0])
        y = simulate(model, [1.0, 1.0], [1.0, 0.0])
        return _close(y, [1.0, 1.3]), f"input+MA output -> {y.tolist()}"

    def residual_roundtrip():
        model = TransferModel(b=[0.0], f=[1.0], c=[1.0], d=[1.0, -0.5])
        e = residuals(model, np.zeros(3), [1.0, 1.5, 1.25])
        return _close(e, [1.0, 1.0, 0.5]), f"recovered innovations -> {e.tolist()}"

    def invertibility_radii():
        good = check_invertibility(TransferModel(b=[0.0], f=[1.0], c=[1.0, -0.5], d=[1.0]))
        bad = check_invertibility(TransferModel(b=[0.0], f=[1.0], c=[1.0, -1.0], d=[1.0]))
        ok = good.invertible and not bad.invertible and _close(good.c_radius, 0.5)
        return ok, f"radii {good.c_radius:.3f} / {bad.c_radius:.3f}"

    def gram_values():
        lin = gram_matrix(LinearKernel(), [0.0, 1.0])
        gau = gram_matrix(GaussianKernel(1.0), [0.0, math.sqrt(2.0)])
        ok = _close(lin, [[0, 0], [0, 1]]) and _close(gau[0, 1], math.exp(-1.0))
        return ok, f"linear {lin.tolist()}, gaussian off-diag {gau[0, 1]:.6f}"

    def hsic_hand_value():
        s = PairedSample(e=[0.0, 1.0], n=[0.0, 1.0])
        v = hsic_v(s, LinearKernel(), LinearKernel())
        return v == 0.0625, f"linear-kernel value -> {v!r}"

    def hsic_constant():
        s = PairedSample(e=[1.0, 2.0, 3.0], n=[4.0, 4.0, 4.0])
        v = hsic_v(s, GaussianKernel(1.0), GaussianKernel(1.0))
        return abs(v) <= 1e-12, f"constant coordinate -> {v!r}"

    def dcov_hand_value():
        v = dcov_sq(PairedSample(e=[0.0, 1.0], n=[0.0, 1.0]))
        return v == 0.25, f"two-point value -> {v!r}"

    def bandwidth_median():
        bw = resolve_bandwidth([0.0, 1.0, 2.0])
        return bw == 1.0, f"median heuristic -> {bw!r}"

    def rank_all_ties():
        tie = tie_breaker(5, seed=0)
        sigma0 = int(np.argwhere(tie.sigma == tie.sigma[0])[0][0])
        rank = rank_of_original([0.3] * 5, tie)
        expect = 1 + int(np.count_nonzero(tie.sigma[1:] > tie.sigma[0]))
        return rank == expect, f"all-ties rank {rank} (expected {expect}, sigma0={sigma0})"

    def permutation_determinism():
        a = generate_permutations(5, 7, seed=11).perms
        b = generate_permutations(5, 7, seed=11).perms
        return bool((a == b).all()), "same seed reproduces the block"

    def sps_plus_sign_neutrality():
        structure = ArxStructure(na=1)
        gen = np.random.Generator(np.random.Philox(key=7))
        e = gen.normal(size=50)
        y = simulate(structure.model([0.4]), np.zeros(50), e)
        signs = np.ones((3, 50))
        scores = _squared_norms(structure, np.array([0.4]), np.zeros(50), y, signs)
        rank = _reference_rank(scores, np.array([1, 0, 2]))
        ok = scores[0] == scores[1] == scores[2]
        return ok, f"all-plus variants identical (scores {scores.tolist()}, rank {rank})"

    check("filter identity", filter_identity)
    check("filter geometric impulse", filter_geometric)
    check("filter FIR inverse", filter_inverse)
    check("simulate AR(1)", simulate_ar1)
    check("simulate input plus MA noise", simulate_ma)
    check("residual round trip", residual_roundtrip)
    check("invertibility radii", invertibility_radii)
    check("gram matrices", gram_values)
    check("hsic hand value", hsic_hand_value)
    check("hsic constant coordinate", hsic_constant)
    check("dcov hand value", dcov_hand_value)
    check("median bandwidth", bandwidth_median)
    check("all-ties rank", rank_all_ties)
    check("permutation determinism", permutation_determinism)
    check("sign-perturbation neutrality", sps_plus_sign_neutrality)
    return checks
