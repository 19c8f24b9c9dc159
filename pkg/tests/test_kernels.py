"""Kernel spectrum, inverse-operator identity, and duality tests."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import roots_jacobi, roots_legendre

from gjmslab.errors import DomainError
from gjmslab.kernels import (
    ball_volume,
    funk_hecke_spectrum,
    green_apply,
    green_constant,
    hls_dual_ratio,
    hls_functional,
)
from gjmslab.spectral import (
    SphereParams,
    ZonalFunction,
    basis_values,
    build_quadrature,
    gjms_eigenvalues,
    gjms_lambda0,
    sphere_area,
)


def kernel_eigenvalue_bruteforce(params, k):
    # adaptive oracle on the raw singular integrand, no Jacobi-weight shortcut
    n, m = params.n, params.m
    at_one = basis_values(n, k, np.array([1.0]))[0][k]

    def f(t):
        gk = basis_values(n, k, np.array([t]))[0][k] / at_one
        return (2 - 2 * t) ** (-(n - 2 * m) / 2) * (1 - t * t) ** ((n - 2) / 2) * gk

    val, err = quad(f, -1, 1, points=[1.0 - 1e-12], limit=400)
    return sphere_area(n - 1) * val


class TestKernelSpectrum:
    def test_mu0_n3_bruteforce_and_beta(self):
        params = SphereParams(n=3, m=1)
        spec = funk_hecke_spectrum(params, 8)
        # analytic Beta-function oracle: |S^{n-1}| 2^{2m-1} Gamma(m)Gamma(n/2)/Gamma(m+n/2)
        beta = (
            sphere_area(2)
            * 2.0
            * math.gamma(1)
            * math.gamma(1.5)
            / math.gamma(2.5)
        )
        assert beta == pytest.approx(16 * math.pi / 3, rel=1e-14)
        assert spec.mu[0] == pytest.approx(beta, rel=1e-12)
        assert spec.mu[0] == pytest.approx(kernel_eigenvalue_bruteforce(params, 0), rel=1e-9)

    @pytest.mark.parametrize("m,n", [(1, 3), (1, 5), (2, 5), (3, 7)])
    def test_monotone_decreasing(self, m, n):
        spec = funk_hecke_spectrum(SphereParams(n=n, m=m), 16)
        assert np.all(np.diff(spec.mu) < 0)

    def test_n3_product_with_conformal_spectrum_constant(self):
        # mu_k (k+1/2)(k+3/2) should be degree-independent on S^3 at order two
        spec = funk_hecke_spectrum(SphereParams(n=3, m=1), 24)
        k = np.arange(25, dtype=float)
        prod = spec.mu * (k + 0.5) * (k + 1.5)
        assert np.max(np.abs(prod / prod[0] - 1)) <= 1e-8

    def test_low_degrees_against_bruteforce(self):
        params = SphereParams(n=5, m=2)
        spec = funk_hecke_spectrum(params, 6)
        for k in range(4):
            assert spec.mu[k] == pytest.approx(
                kernel_eigenvalue_bruteforce(params, k), rel=1e-8
            )


class TestGreenConstants:
    def test_laplace_green_constant_n3(self):
        gc = green_constant(SphereParams(n=3, m=1), K=8)
        assert ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
        assert gc.c_n == pytest.approx(1 / (4 * math.pi), rel=1e-14)

    def test_identity_at_zero_by_construction(self):
        params = SphereParams(n=5, m=2)
        kernel = funk_hecke_spectrum(params, 8)
        gjms = gjms_eigenvalues(params, 8)
        gc = green_constant(params, kernel=kernel, gjms=gjms)
        assert gc.g_mn * kernel.mu[0] * gjms.lam[0] == pytest.approx(1.0, rel=1e-15)

    def test_identity_through_degree_32(self):
        params = SphereParams(n=5, m=2)
        kernel = funk_hecke_spectrum(params, 32)
        gjms = gjms_eigenvalues(params, 32)
        gc = green_constant(params, kernel=kernel, gjms=gjms)
        dev = np.abs(gc.g_mn * kernel.mu * gjms.lam - 1)
        assert np.max(dev) <= 1e-8

    def test_order_two_normalization_matches_euclidean(self):
        # at order two the sphere kernel normalization equals the Euclidean
        # Laplace Green constant (conformal invariance of the Green kernel)
        for n in (3, 5, 7):
            gc = green_constant(SphereParams(n=n, m=1), K=8)
            assert gc.g_mn == pytest.approx(gc.c_n, rel=1e-11)


class TestGreenApply:
    def test_constant_mode(self):
        params = SphereParams(n=3, m=1)
        gjms = gjms_eigenvalues(params, 4)
        v = ZonalFunction(params, np.array([1.0]))
        out = green_apply(v, gjms)
        assert out.coeffs[0] == pytest.approx(1 / gjms.lam[0], rel=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        params = SphereParams(n=7, m=3)
        gjms = gjms_eigenvalues(params, 12)
        v = ZonalFunction(params, rng.standard_normal(13))
        back = green_apply(v, gjms).coeffs * gjms.lam
        assert np.max(np.abs(back - v.coeffs)) <= 1e-12 * np.max(np.abs(v.coeffs))

    def test_matches_kernel_integral(self):
        # oracle: apply the kernel by quadrature to each basis mode and compare
        # g_mn * (kernel integral) with the spectral inverse
        params = SphereParams(n=5, m=2)
        K = 8
        kernel = funk_hecke_spectrum(params, K)
        gjms = gjms_eigenvalues(params, K)
        gc = green_constant(params, kernel=kernel, gjms=gjms)
        for k in range(K + 1):
            mu_k = kernel_eigenvalue_bruteforce(params, k)
            inv = green_apply(ZonalFunction(params, np.eye(K + 1)[k]), gjms)
            assert gc.g_mn * mu_k == pytest.approx(inv.coeffs[k], rel=1e-8)


class TestHlsFunctional:
    def test_single_mode(self):
        params = SphereParams(n=3, m=1)
        kernel = funk_hecke_spectrum(params, 4)
        v = ZonalFunction(params, np.array([1.0]))
        assert hls_functional(v, kernel) == pytest.approx(kernel.mu[0], rel=1e-15)

    def test_constant_function(self):
        params = SphereParams(n=3, m=1)
        kernel = funk_hecke_spectrum(params, 4)
        one = ZonalFunction(params, np.array([math.sqrt(sphere_area(3))]))
        assert hls_functional(one, kernel) == pytest.approx(
            kernel.mu[0] * sphere_area(3), rel=1e-13
        )

    def test_double_quadrature_oracle(self):
        # Brute-force double surface integral for zonal v on S^3, never touching
        # the basis diagonalization.  Coordinates centered at the outer point:
        # c = cosine of the separation angle, x = cosine within the orthogonal
        # S^2 orbit, so the inner point has polar cosine t c + sqrt(1-t^2)
        # sqrt(1-c^2) x and the kernel depends on c alone.  With the kernel
        # exponent -1/2 the c-weight reduces to 2^{-1/2} (1+c)^{1/2}; every
        # remaining integrand is polynomial, so each Gauss rule is exact.
        params = SphereParams(n=3, m=1)
        K = 4
        rng = np.random.default_rng(9)
        v = ZonalFunction(params, rng.standard_normal(K + 1))
        kernel = funk_hecke_spectrum(params, K)
        spectral = hls_functional(v, kernel)

        tg, tw = roots_jacobi(24, 0.5, 0.5)  # outer polar cosine, weight (1-t^2)^{1/2}
        cg, cw = roots_jacobi(24, 0.0, 0.5)  # separation cosine after cancelling (1-c)^{1/2}
        xg, xw = roots_legendre(24)  # uniform orbit average (factor 1/2)

        total = 0.0
        for ti, wi in zip(tg, tw):
            s = math.sqrt(1 - ti * ti)
            inner = 0.0
            for cj, wj in zip(cg, cw):
                arg = ti * cj + s * math.sqrt(1 - cj * cj) * xg
                inner += wj * 0.5 * float(np.dot(xw, v.evaluate(arg)))
            inner *= 2.0 ** (-0.5) * sphere_area(2)
            total += wi * float(v.evaluate(np.array([ti]))[0]) * inner
        total *= sphere_area(2)
        assert spectral == pytest.approx(total, rel=1e-6)

    def test_upper_bound_equality_iff_constant(self):
        rng = np.random.default_rng(21)
        params = SphereParams(n=5, m=2)
        kernel = funk_hecke_spectrum(params, 10)
        for _ in range(20):
            v = ZonalFunction(params, rng.standard_normal(11))
            bound = kernel.mu[0] * v.l2_norm() ** 2
            val = hls_functional(v, kernel)
            assert val <= bound + 1e-12 * bound
        one = ZonalFunction(params, np.array([2.5]))
        assert hls_functional(one, kernel) == pytest.approx(
            kernel.mu[0] * one.l2_norm() ** 2, rel=1e-14
        )


class TestDualRatio:
    def test_constant_value_formula(self):
        # at v = const the quotient is exactly 1/(Lambda_0 |S^n|^(1-2/p))
        params = SphereParams(n=3, m=1)
        p = 4.0
        predicted = 1.0 / (gjms_lambda0(1, 3) * sphere_area(3) ** (1 - 2 / p))
        best = hls_dual_ratio(params, p, trials=1, seed=0, K=16)
        assert best == pytest.approx(predicted, rel=1e-10)

    def test_multistart_does_not_beat_constant(self):
        params = SphereParams(n=3, m=1)
        p = 4.0
        predicted = 1.0 / (gjms_lambda0(1, 3) * sphere_area(3) ** (1 - 2 / p))
        best = hls_dual_ratio(params, p, trials=6, seed=3, K=16)
        assert best >= predicted * (1 - 1e-10)
        assert best == pytest.approx(predicted, rel=1e-5)

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            hls_dual_ratio(SphereParams(n=3, m=1), 7.0)
        with pytest.raises(DomainError):
            hls_dual_ratio(SphereParams(n=3, m=1), 2.0)
