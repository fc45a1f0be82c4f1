import math

import numpy as np
import pytest

from simplexbo.kernels import (
    GramFactorizationError,
    KernelSpec,
    PrecomputedPairs,
    chol_with_jitter,
    euclid_kernel,
    gegenbauer,
    gram,
    kernel_diag,
    kernel_matrix,
    simplex_kernel,
    spectral_coeff,
    sphere_kernel,
)
from simplexbo.simplex import sample_uniform


def sphere_points(rng, d, n):
    return np.array([np.sqrt(sample_uniform(rng, d)) for _ in range(n)])


def spherical_spec(d, kappa=0.5, sigma2=1.0, nu=math.inf, n_trunc=64):
    family = "spherical_se" if math.isinf(nu) else "spherical_matern"
    return KernelSpec(family=family, kappa=kappa, sigma2=sigma2, dim=d, nu=nu, n_trunc=n_trunc)


class TestGegenbauer:
    def test_degree_zero(self):
        for lam in (0.5, 1.0, 4.5):
            assert gegenbauer(0, lam, 0.3) == 1.0

    def test_degree_one(self):
        assert gegenbauer(1, 1.0, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_legendre_closed_form(self):
        # C_3^{1/2} is the Legendre polynomial P_3(t) = (5 t^3 - 3 t) / 2
        for t in (-1.0, 0.0, 0.3, 1.0):
            want = (5 * t**3 - 3 * t) / 2
            got = gegenbauer(3, 0.5, t)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_lam_zero_rejected(self):
        with pytest.raises(ValueError):
            gegenbauer(2, 0.0, 0.5)


class TestSpectralCoeff:
    def test_se_at_zero(self):
        spec = spherical_spec(3)
        assert spectral_coeff(0, spec) == 1.0

    def test_monotone_decrease(self):
        # grid chosen so exp(-kappa^2 lam_n / 2) stays above the float64
        # underflow threshold through n = 101 (Matern power laws always do)
        for d in (1, 2, 5, 10):
            for nu, kappas in ((math.inf, (0.05, 0.1, 0.25)), (2.5, (0.1, 0.5, 2.0)),
                               (0.5, (0.5,)), (1.5, (0.5,))):
                for kappa in kappas:
                    spec = spherical_spec(d, kappa=kappa, nu=nu)
                    rho = spectral_coeff(np.arange(102), spec)
                    assert np.all(rho > 0.0)
                    assert np.all(np.diff(rho) < 0.0)

    def test_underflowed_tail_is_monotone_nonstrict(self):
        rho = spectral_coeff(np.arange(102), spherical_spec(10, kappa=2.0))
        assert np.all(np.diff(rho) <= 0.0) and rho[0] == 1.0

    def test_smaller_kappa_decays_slower(self):
        d, n = 3, 10
        lo = spectral_coeff(n, spherical_spec(d, kappa=0.2))
        hi = spectral_coeff(n, spherical_spec(d, kappa=1.0))
        assert lo / spectral_coeff(0, spherical_spec(d, kappa=0.2)) > hi


class TestSphereKernel:
    def test_diag_is_sigma2(self):
        rng = np.random.default_rng(0)
        for sigma2 in (0.5, 1.0, 3.7):
            spec = spherical_spec(3, sigma2=sigma2)
            for _ in range(20):
                s = sphere_points(rng, 3, 1)[0]
                assert abs(sphere_kernel(s, s, spec) - sigma2) <= 1e-10

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        spec = spherical_spec(4)
        for _ in range(1000):
            s, s2 = sphere_points(rng, 4, 2)
            assert abs(sphere_kernel(s, s2, spec) - sphere_kernel(s2, s, spec)) <= 1e-12

    def test_gram_psd_on_s5(self):
        rng = np.random.default_rng(2)
        pts = sphere_points(rng, 5, 50)
        g = gram(pts, spherical_spec(5, kappa=0.5), domain="sphere")
        eig = np.linalg.eigvalsh(g.values)
        assert eig.min() >= -1e-8 * eig.max()

    def test_psd_sweep(self):
        rng = np.random.default_rng(3)
        for d in (2, 5, 10):
            for nu in (math.inf, 2.5):
                for _ in range(10):
                    kappa = float(np.exp(rng.uniform(np.log(0.1), np.log(2.0))))
                    sigma2 = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
                    spec = spherical_spec(d, kappa=kappa, sigma2=sigma2, nu=nu)
                    pts = sphere_points(rng, d, 50)
                    K = kernel_matrix(pts, pts, spec, "sphere")
                    eig = np.linalg.eigvalsh(0.5 * (K + K.T))
                    assert eig.min() >= -1e-8 * eig.max()
                    assert np.max(np.abs(np.diag(K) - sigma2)) <= 1e-10

    def test_stationary_under_rotation(self):
        rng = np.random.default_rng(4)
        spec = spherical_spec(3, kappa=0.8)
        Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        for _ in range(100):
            s, s2 = sphere_points(rng, 3, 2)
            k1 = sphere_kernel(s, s2, spec)
            k2 = sphere_kernel(Q @ s / np.linalg.norm(Q @ s), Q @ s2 / np.linalg.norm(Q @ s2), spec)
            assert abs(k1 - k2) <= 1e-10

    def test_truncation_convergence(self):
        rng = np.random.default_rng(5)
        for d in (2, 5, 10):
            for kappa in (0.3, 0.6, 1.0):
                s64 = spherical_spec(d, kappa=kappa, n_trunc=64)
                s128 = spherical_spec(d, kappa=kappa, n_trunc=128)
                for _ in range(20):
                    s, s2 = sphere_points(rng, d, 2)
                    assert abs(sphere_kernel(s, s2, s64) - sphere_kernel(s, s2, s128)) <= 1e-6

    def test_lengthscale_monotone(self):
        rng = np.random.default_rng(6)
        s, s2 = sphere_points(rng, 3, 2)
        vals = [
            sphere_kernel(s, s2, spherical_spec(3, kappa=k))
            for k in np.linspace(0.1, 3.0, 12)
        ]
        assert np.all(np.diff(vals) >= -1e-12)

    def test_circle_case(self):
        # d = 1 falls back to the Chebyshev limit of the vanishing-lam terms
        rng = np.random.default_rng(7)
        spec = spherical_spec(1, kappa=0.5)
        pts = sphere_points(rng, 1, 20)
        assert abs(sphere_kernel(pts[0], pts[0], spec) - 1.0) <= 1e-10
        K = kernel_matrix(pts, pts, spec, "sphere")
        eig = np.linalg.eigvalsh(0.5 * (K + K.T))
        assert eig.min() >= -1e-8 * eig.max()

    def test_euclid_family_rejected(self):
        spec = KernelSpec(family="euclid_se", kappa=1.0, sigma2=1.0, dim=2)
        with pytest.raises(ValueError):
            sphere_kernel(np.array([1.0, 0.0]), np.array([0.0, 1.0]), spec)


class TestSimplexKernel:
    def test_diag(self):
        rng = np.random.default_rng(8)
        spec = spherical_spec(3, sigma2=2.5)
        x = sample_uniform(rng, 3)
        assert abs(simplex_kernel(x, x, spec) - 2.5) <= 1e-10

    def test_permutation_invariance(self):
        rng = np.random.default_rng(9)
        spec = spherical_spec(3)
        for _ in range(100):
            x, x2 = sample_uniform(rng, 3), sample_uniform(rng, 3)
            perm = rng.permutation(4)
            assert abs(simplex_kernel(x, x2, spec) - simplex_kernel(x[perm], x2[perm], spec)) <= 1e-12

    def test_equals_sphere_kernel_on_mapped_points(self):
        rng = np.random.default_rng(10)
        spec = spherical_spec(4)
        for _ in range(50):
            x, x2 = sample_uniform(rng, 4), sample_uniform(rng, 4)
            assert simplex_kernel(x, x2, spec) == sphere_kernel(np.sqrt(x), np.sqrt(x2), spec)


class TestEuclidKernel:
    def test_diag(self):
        spec = KernelSpec(family="euclid_matern", kappa=2.0, sigma2=1.5, dim=3, nu=2.5)
        a = np.array([0.3, 0.3, 0.4])
        assert euclid_kernel(a, a, spec) == 1.5

    def test_se_value(self):
        spec = KernelSpec(family="euclid_se", kappa=1.0, sigma2=2.0, dim=2)
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        assert euclid_kernel(a, b, spec) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-15)

    def test_matern52_value(self):
        spec = KernelSpec(family="euclid_matern", kappa=0.7, sigma2=1.0, dim=2, nu=2.5)
        a, b = np.zeros(3), np.array([0.3, -0.2, 0.1])
        r = np.linalg.norm(a - b)
        s = math.sqrt(5) * r / 0.7
        want = (1 + s + s**2 / 3) * math.exp(-s)
        assert euclid_kernel(a, b, spec) == pytest.approx(want, rel=1e-14)

    def test_gram_psd(self):
        rng = np.random.default_rng(11)
        for nu in (math.inf, 2.5):
            family = "euclid_se" if math.isinf(nu) else "euclid_matern"
            spec = KernelSpec(family=family, kappa=0.5, sigma2=1.0, dim=4, nu=nu)
            pts = np.array([sample_uniform(rng, 4) for _ in range(50)])
            K = kernel_matrix(pts, pts, spec, "ambient")
            eig = np.linalg.eigvalsh(0.5 * (K + K.T))
            assert eig.min() >= -1e-8 * eig.max()

    def test_length_mismatch(self):
        spec = KernelSpec(family="euclid_se", kappa=1.0, sigma2=1.0, dim=2)
        with pytest.raises(ValueError):
            euclid_kernel(np.zeros(3), np.zeros(4), spec)


class TestGram:
    def test_single_point(self):
        spec = spherical_spec(2, sigma2=2.0)
        x = np.full(3, 1 / 3)
        g = gram(np.array([x]), spec, domain="simplex")
        assert g.values.shape == (1, 1)
        assert abs(g.values[0, 0] - 2.0) <= 1e-10
        assert abs(g.with_jitter[0, 0] - (g.values[0, 0] + g.jitter)) <= 1e-18

    def test_duplicate_point_needs_jitter(self):
        rng = np.random.default_rng(12)
        spec = spherical_spec(3)
        x = sample_uniform(rng, 3)
        pts = np.array([x, x])
        g = gram(pts, spec, domain="simplex")
        # rank-deficient before jitter, factorizable after
        assert np.linalg.matrix_rank(g.values, tol=1e-10) == 1
        assert np.all(np.isfinite(g.chol))

    def test_matches_elementwise(self):
        rng = np.random.default_rng(13)
        spec = spherical_spec(3)
        pts = np.array([sample_uniform(rng, 3) for _ in range(6)])
        g = gram(pts, spec, domain="simplex")
        for i in range(6):
            for j in range(6):
                assert abs(g.values[i, j] - simplex_kernel(pts[i], pts[j], spec)) <= 1e-15

    def test_escalation_failure(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
        with pytest.raises(GramFactorizationError):
            chol_with_jitter(bad, sigma2=1.0)


class TestSpecValidation:
    def test_bad_family(self):
        with pytest.raises(ValueError):
            KernelSpec(family="wasserstein", kappa=1.0, sigma2=1.0, dim=2)

    def test_bad_nu(self):
        with pytest.raises(ValueError):
            KernelSpec(family="spherical_matern", kappa=1.0, sigma2=1.0, dim=2, nu=2.0)

    def test_se_requires_inf_nu(self):
        with pytest.raises(ValueError):
            KernelSpec(family="spherical_se", kappa=1.0, sigma2=1.0, dim=2, nu=2.5)

    def test_positive_params(self):
        for kw in (dict(kappa=0.0), dict(sigma2=-1.0), dict(n_trunc=0), dict(dim=0)):
            with pytest.raises(ValueError):
                KernelSpec(**{**dict(family="spherical_se", kappa=1.0, sigma2=1.0, dim=2), **kw})


class TestNormalizationSweep:
    def test_kxx_equals_sigma2(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            d = int(rng.integers(1, 8))
            nu = float(rng.choice([0.5, 1.5, 2.5, math.inf]))
            kappa = float(np.exp(rng.uniform(np.log(0.1), np.log(3.0))))
            sigma2 = float(np.exp(rng.uniform(np.log(0.01), np.log(100.0))))
            if math.isinf(nu):
                spec = spherical_spec(d, kappa=kappa, sigma2=sigma2)
            else:
                spec = spherical_spec(d, kappa=kappa, sigma2=sigma2, nu=nu)
            x = sample_uniform(rng, d)
            assert abs(simplex_kernel(x, x, spec) - sigma2) <= 1e-10 * max(1.0, sigma2)


class TestPrecomputedPairs:
    def test_matches_kernel_matrix(self):
        rng = np.random.default_rng(15)
        for domain, family in (("simplex", "spherical_se"), ("sphere", "spherical_matern"),
                               ("ambient", "euclid_se")):
            d = 3
            nu = 2.5 if family.endswith("matern") else math.inf
            spec = KernelSpec(family=family, kappa=0.6, sigma2=1.3, dim=d, nu=nu)
            if domain == "sphere":
                pts = sphere_points(rng, d, 12)
            else:
                pts = np.array([sample_uniform(rng, d) for _ in range(12)])
            pre = PrecomputedPairs(pts, spec, domain)
            for kappa, sigma2 in ((0.3, 0.5), (1.1, 2.0)):
                fast = pre.gram_values(kappa, sigma2)
                slow = kernel_matrix(pts, pts, spec.with_params(kappa=kappa, sigma2=sigma2), domain)
                assert np.max(np.abs(fast - 0.5 * (slow + slow.T))) <= 1e-12 * sigma2

    def test_diag_terms_match_normalization(self):
        rng = np.random.default_rng(16)
        spec = spherical_spec(4, kappa=0.4, sigma2=2.0)
        pts = sphere_points(rng, 4, 5)
        pre = PrecomputedPairs(pts, spec, "sphere")
        fast = pre.gram_values(0.4, 2.0)
        assert np.max(np.abs(np.diag(fast) - 2.0)) <= 1e-10


class TestKernelDiag:
    def test_matches_pairwise(self):
        rng = np.random.default_rng(17)
        spec = spherical_spec(3, kappa=0.7, sigma2=1.9)
        pts = np.array([sample_uniform(rng, 3) for _ in range(7)])
        diag = kernel_diag(pts, spec, "simplex")
        K = kernel_matrix(pts, pts, spec, "simplex")
        assert np.max(np.abs(diag - np.diag(K))) <= 1e-12
