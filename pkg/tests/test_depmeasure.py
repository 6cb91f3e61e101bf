import numpy as np
import numpy.testing as npt
import pytest

from synindep.depmeasure import (
    DegenerateSampleError,
    DistanceCovariance,
    GaussianKernel,
    Hsic,
    LinearKernel,
    PairedSample,
    PairedStatEngine,
    dcov_sq,
    double_center,
    estimate,
    estimator_bandwidths,
    gram_matrix,
    hsic_v,
    resolve_bandwidth,
    resolve_estimator,
)


def reference_hsic(k_mat, l_mat):
    """Population-form V-statistic written as explicit sums."""
    n = k_mat.shape[0]
    t1 = sum(k_mat[i, j] * l_mat[i, j] for i in range(n) for j in range(n)) / n**2
    t2 = k_mat.sum() * l_mat.sum() / n**4
    t3 = 2.0 * sum(k_mat[i, :].sum() * l_mat[i, :].sum() for i in range(n)) / n**3
    return t1 + t2 - t3


def trace_form_hsic(k_mat, l_mat):
    """Same statistic through the centering-matrix identity tr(KHLH) / n^2."""
    n = k_mat.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return np.trace(k_mat @ h @ l_mat @ h) / n**2


def reference_dcov_sq(e, n_coord):
    """Double centering and averaging written out index by index."""
    n = len(e)
    a = np.abs(np.subtract.outer(e, e))
    b = np.abs(np.subtract.outer(n_coord, n_coord))

    def centered(m, i, j):
        return m[i, j] - m[i, :].mean() - m[:, j].mean() + m.mean()

    return sum(centered(a, i, j) * centered(b, i, j) for i in range(n) for j in range(n)) / n**2


def test_hsic_linear_hand_value():
    # e = n = (0, 1) with linear kernels: K = L = [[0,0],[0,1]],
    # so the three terms are 1/4 + 1/16 - 2/8 = 1/16.
    sample = PairedSample(e=[0.0, 1.0], n=[0.0, 1.0])
    assert hsic_v(sample, LinearKernel(), LinearKernel()) == 0.0625


def test_dcov_hand_value():
    # Pairs (0,0) and (1,1): both centered distance matrices are
    # [[-1/2, 1/2], [1/2, -1/2]], giving mean of products 1/4.
    assert dcov_sq(PairedSample(e=[0.0, 1.0], n=[0.0, 1.0])) == 0.25


def test_hsic_matches_both_reference_forms():
    gen = np.random.default_rng(5)
    for _ in range(50):
        n = int(gen.integers(2, 7))
        sample = PairedSample(e=gen.normal(size=n), n=gen.normal(size=n))
        for kern in (LinearKernel(), GaussianKernel(1.0), GaussianKernel(0.3)):
            k_mat = gram_matrix(kern, sample.e)
            l_mat = gram_matrix(kern, sample.n)
            got = hsic_v(sample, kern, kern)
            assert abs(got - reference_hsic(k_mat, l_mat)) <= 1e-12
            assert abs(got - trace_form_hsic(k_mat, l_mat)) <= 1e-12


def test_dcov_matches_reference_form():
    gen = np.random.default_rng(7)
    for _ in range(50):
        n = int(gen.integers(2, 7))
        e = gen.normal(size=n)
        m = gen.normal(size=n)
        got = dcov_sq(PairedSample(e=e, n=m))
        assert abs(got - reference_dcov_sq(e, m)) <= 1e-12


def test_gram_matrix_hand_values():
    npt.assert_array_equal(gram_matrix(LinearKernel(), [0.0, 1.0]), [[0.0, 0.0], [0.0, 1.0]])
    g = gram_matrix(GaussianKernel(1.0), [0.0, np.sqrt(2.0)])
    npt.assert_allclose(g, [[1.0, np.exp(-1.0)], [np.exp(-1.0), 1.0]])


def test_gram_matrix_requires_resolved_bandwidth():
    with pytest.raises(ValueError):
        gram_matrix(GaussianKernel(), [0.0, 1.0])


def test_gaussian_kernel_rejects_bad_bandwidth():
    for bad in (0.0, -1.0, np.inf, np.nan):
        with pytest.raises(ValueError):
            GaussianKernel(bad)


def test_median_bandwidth_hand_values():
    # Points (0, 1, 3): pairwise gaps 1, 3, 2, median 2.
    assert resolve_bandwidth([0.0, 1.0, 3.0]) == 2.0
    # Zero gaps are dropped before taking the median.
    assert resolve_bandwidth([0.0, 0.0, 1.0]) == 1.0


def test_median_bandwidth_degenerate_sample():
    with pytest.raises(DegenerateSampleError):
        resolve_bandwidth([2.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        resolve_bandwidth([2.0])


def test_constant_coordinate_gives_zero():
    sample = PairedSample(e=np.ones(6), n=np.arange(6.0))
    assert abs(hsic_v(sample, LinearKernel(), LinearKernel())) <= 1e-12
    assert abs(hsic_v(sample, GaussianKernel(1.0), GaussianKernel(1.0))) <= 1e-12
    assert abs(dcov_sq(sample)) <= 1e-12


def test_statistics_are_nonnegative():
    gen = np.random.default_rng(13)
    for _ in range(30):
        n = int(gen.integers(2, 30))
        sample = PairedSample(e=gen.normal(size=n), n=gen.normal(size=n))
        assert hsic_v(sample, GaussianKernel("median"), GaussianKernel("median")) >= -1e-12
        assert hsic_v(sample, LinearKernel(), LinearKernel()) >= -1e-12
        assert dcov_sq(sample) >= -1e-12


def test_joint_permutation_invariance():
    gen = np.random.default_rng(19)
    e = gen.normal(size=25)
    n = gen.normal(size=25)
    perm = gen.permutation(25)
    a = PairedSample(e=e, n=n)
    b = PairedSample(e=e[perm], n=n[perm])
    for est in (Hsic(GaussianKernel(0.7), GaussianKernel(1.3)), DistanceCovariance()):
        npt.assert_allclose(estimate(est, a), estimate(est, b), atol=1e-12)


def test_translation_invariance():
    gen = np.random.default_rng(23)
    e = gen.normal(size=20)
    n = gen.normal(size=20)
    a = PairedSample(e=e, n=n)
    b = PairedSample(e=e + 100.0, n=n - 42.0)
    npt.assert_allclose(
        hsic_v(a, GaussianKernel(1.0), GaussianKernel(1.0)),
        hsic_v(b, GaussianKernel(1.0), GaussianKernel(1.0)),
        atol=1e-9,
    )
    npt.assert_allclose(dcov_sq(a), dcov_sq(b), atol=1e-10)


def test_scaling_laws():
    gen = np.random.default_rng(29)
    e = gen.normal(size=15)
    n = gen.normal(size=15)
    base = PairedSample(e=e, n=n)
    scaled = PairedSample(e=3.0 * e, n=3.0 * n)
    # Linear-kernel HSIC picks up c^2 from each Gram matrix.
    npt.assert_allclose(
        hsic_v(scaled, LinearKernel(), LinearKernel()),
        81.0 * hsic_v(base, LinearKernel(), LinearKernel()),
        rtol=1e-10,
    )
    # Distance covariance picks up |c| from each distance matrix.
    npt.assert_allclose(dcov_sq(scaled), 9.0 * dcov_sq(base), rtol=1e-10)


def test_resolve_estimator_freezes_bandwidths():
    e = np.array([0.0, 1.0, 3.0])
    n = np.array([0.0, 2.0, 6.0])
    resolved = resolve_estimator(Hsic(), e, n)
    assert resolved.kernel_e.bandwidth == 2.0
    assert resolved.kernel_n.bandwidth == 4.0
    assert estimator_bandwidths(resolved) == {"e": 2.0, "n": 4.0}
    assert estimator_bandwidths(DistanceCovariance()) == {"e": None, "n": None}
    mixed = resolve_estimator(Hsic(kernel_n=LinearKernel()), e, n)
    assert estimator_bandwidths(mixed) == {"e": 2.0, "n": None}


def test_double_center_zero_margins():
    gen = np.random.default_rng(31)
    m = gen.normal(size=(7, 7))
    c = double_center(m)
    npt.assert_allclose(c.mean(axis=0), 0.0, atol=1e-12)
    npt.assert_allclose(c.mean(axis=1), 0.0, atol=1e-12)


def test_engine_matches_direct_evaluation():
    gen = np.random.default_rng(37)
    e = gen.normal(size=30)
    n = gen.normal(size=30)
    perms = np.stack([gen.permutation(30) for _ in range(20)])
    for est in (
        Hsic(GaussianKernel("median"), GaussianKernel("median")),
        Hsic(LinearKernel(), LinearKernel()),
        DistanceCovariance(),
    ):
        resolved = resolve_estimator(est, e, n)
        engine = PairedStatEngine(est, e, n)
        vals = engine.values(perms)
        assert abs(vals[0] - estimate(resolved, PairedSample(e=e, n=n))) <= 1e-12
        for j, perm in enumerate(perms):
            direct = estimate(resolved, PairedSample(e=e, n=n[perm]))
            assert abs(vals[j + 1] - direct) <= 1e-12


def test_engine_resolves_bandwidth_from_original_sample():
    # The engine must not re-resolve bandwidths per permutation; its
    # estimator field records what was frozen from the unpermuted data.
    e = np.array([0.0, 1.0, 3.0, 7.0])
    n = np.array([0.0, 2.0, 6.0, 14.0])
    engine = PairedStatEngine(Hsic(), e, n)
    assert engine.estimator.kernel_e.bandwidth == resolve_bandwidth(e)
    assert engine.estimator.kernel_n.bandwidth == resolve_bandwidth(n)


def test_paired_sample_validation():
    with pytest.raises(ValueError):
        PairedSample(e=[1.0, 2.0], n=[1.0])
    with pytest.raises(ValueError):
        PairedSample(e=[], n=[])
    with pytest.raises(ValueError):
        PairedSample(e=[np.inf], n=[0.0])
