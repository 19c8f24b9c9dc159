"""Surface Riesz kernel |xi - eta|^(2m-n) on S^n: spectrum, inverse operator, duality.

A rotation-invariant kernel acts diagonally on spherical harmonics; for the
Riesz kernel the degree-k eigenvalue reduces to a one-dimensional Jacobi-type
integral because the singularity exponents combine as
(2 - 2t)^((2m-n)/2) (1 - t^2)^((n-2)/2) = 2^((2m-n)/2) (1-t)^(m-1) (1+t)^((n-2)/2).
The kernel inverts the order-2m conformal operator up to one normalization
g_mn, fixed here spectrally and then certified degree by degree.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import AccuracyError, DomainError, InconsistencyError
from .spectral import (
    GjmsSpectrum,
    SphereParams,
    ZonalFunction,
    basis_values,
    build_quadrature,
    default_rule_size,
    gjms_eigenvalues,
    sphere_area,
    zonal_basis,
)


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise DomainError(f"ball dimension must be >= 1, got n={n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass
class KernelSpectrum:
    """Eigenvalues mu_k of convolution with |xi - eta|^(2m-n) on degree-k harmonics."""

    params: SphereParams
    mu: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if np.any(~np.isfinite(mu)) or np.any(mu <= 0):
            raise InconsistencyError("kernel spectrum must be positive and finite")
        if np.any(np.diff(mu) >= 0):
            raise InconsistencyError("kernel spectrum must be strictly decreasing")
        self.mu = mu

    @property
    def K(self) -> int:
        return len(self.mu) - 1

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "m": self.params.m,
            "K": self.K,
            "mu": [float(v) for v in self.mu],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _kernel_moments(params: SphereParams, K: int, nodes: int) -> np.ndarray:
    # mu_k = |S^{n-1}| 2^((2m-n)/2) * int G_k(t) (1-t)^(m-1) (1+t)^((n-2)/2) dt
    # with G_k the degree-k ultraspherical polynomial normalized to 1 at t=1.
    n, m = params.n, params.m
    x, w = roots_jacobi(nodes, m - 1.0, (n - 2.0) / 2.0)
    B = basis_values(n, K, x)
    at_one = basis_values(n, K, np.array([1.0]))[0]
    scale = sphere_area(n - 1) * 2.0 ** ((2.0 * m - n) / 2.0)
    return scale * ((w @ B) / at_one)


def funk_hecke_spectrum(params: SphereParams, K: int, tol: float = 1e-9) -> KernelSpectrum:
    """Kernel eigenvalues mu_0..mu_K, certified by comparing two Jacobi rules.

    The polynomial part of the integrand is degree K, so the base rule is
    already exact up to roundoff; the doubled rule bounds the achieved
    relative accuracy.  High degrees sit on a cancellation floor of order
    eps * mu_0 / mu_k, which is folded into the acceptance threshold; if the
    two rules still disagree an accuracy error reports the achieved estimate.
    """
    base = max(K // 2 + 8, 8)
    mu_a = _kernel_moments(params, K, base)
    mu_b = _kernel_moments(params, K, 2 * base + 8)
    rel = np.abs(mu_a - mu_b) / np.abs(mu_b)
    floor = 32.0 * np.finfo(float).eps * mu_b[0] / np.abs(mu_b)
    allowed = np.maximum(tol, floor)
    if np.any(rel > allowed):
        worst = int(np.argmax(rel - allowed))
        raise AccuracyError(
            f"kernel eigenvalue k={worst} achieved rel {rel[worst]:.3e} "
            f"(target {allowed[worst]:.3e}) for n={params.n}, m={params.m}"
        )
    return KernelSpectrum(params=params, mu=mu_b)


@dataclass(frozen=True)
class GreenConstants:
    """Normalizations tying the kernel to inverse operators.

    c_n is the Euclidean Laplace Green constant 1/(n(n-2)v_n); g_mn scales the
    surface Riesz kernel into the exact inverse of the order-2m operator, so
    that g_mn * mu_k * Lambda_k = 1 for every degree k.
    """

    c_n: float
    g_mn: float


def green_constant(
    params: SphereParams,
    kernel: KernelSpectrum | None = None,
    gjms: GjmsSpectrum | None = None,
    K: int = 32,
) -> GreenConstants:
    """Fix g_mn = 1/(mu_0 Lambda_0) and certify the inverse identity spectrally.

    Raises an inconsistency error if max_k |g_mn mu_k Lambda_k - 1| exceeds
    1e-6, which would indicate a quadrature or spectrum bug.
    """
    if kernel is None:
        kernel = funk_hecke_spectrum(params, K)
    if gjms is None or gjms.K < kernel.K:
        gjms = gjms_eigenvalues(params, kernel.K)
    lam = gjms.lam[: kernel.K + 1]
    g = 1.0 / (kernel.mu[0] * lam[0])
    deviation = float(np.max(np.abs(g * kernel.mu * lam - 1.0)))
    if deviation > 1e-6:
        raise InconsistencyError(
            f"inverse-kernel identity violated by {deviation:.3e} "
            f"for n={params.n}, m={params.m}"
        )
    n = params.n
    c_n = 1.0 / (n * (n - 2.0) * ball_volume(n))
    return GreenConstants(c_n=c_n, g_mn=g)


def green_apply(v: ZonalFunction, gjms: GjmsSpectrum) -> ZonalFunction:
    """Invert the operator spectrally: c_k -> c_k / Lambda_k."""
    if v.params != gjms.params:
        raise ValueError("function and spectrum built for different (n, m)")
    if v.K > gjms.K:
        raise ValueError(f"truncation mismatch: degree {v.K} exceeds spectrum {gjms.K}")
    return ZonalFunction(v.params, v.coeffs / gjms.lam[: v.K + 1])


def hls_functional(v: ZonalFunction, kernel: KernelSpectrum) -> float:
    """Bilinear kernel energy: double surface integral of v(xi) v(eta) |xi-eta|^(2m-n).

    Diagonal in the basis: sum(mu_k c_k^2).  Nonnegative, zero only for v = 0.
    """
    if v.params != kernel.params:
        raise ValueError("function and kernel spectrum built for different (n, m)")
    if v.K > kernel.K:
        raise ValueError(f"truncation mismatch: degree {v.K} exceeds spectrum {kernel.K}")
    return float(np.dot(kernel.mu[: v.K + 1], v.coeffs**2))


def hls_dual_ratio(
    params: SphereParams,
    p: float,
    trials: int = 8,
    seed: int = 0,
    K: int = 32,
    max_iter: int = 800,
    tol_grad: float = 1e-8,
) -> float:
    """Maximize g_mn * (kernel energy) / ||v||_{p'}^2 over nonnegative zonal v.

    p' = p/(p-1) is the conjugate exponent.  Duality predicts the maximum
    1/(Lambda_0 |S^n|^(1 - 2/p)), attained at constants; a multistart
    projected ascent over node values (clipped to the nonnegative cone,
    renormalized to the p' sphere) probes for anything larger.
    """
    if not (2.0 < p < params.critical_norm_exponent):
        raise DomainError(
            f"need 2 < p < {params.critical_norm_exponent}, got p={p} "
            f"for n={params.n}, m={params.m}"
        )
    if trials < 1:
        raise DomainError("need at least one ascent start")
    pp = p / (p - 1.0)
    rule = build_quadrature(params.n, default_rule_size(K))
    B = zonal_basis(rule, params, K)
    w = rule.weights
    kernel = funk_hecke_spectrum(params, K)
    g = green_constant(params, kernel=kernel).g_mn
    mu = kernel.mu

    def ratio_and_grad(vals):
        # evaluated on the p'-sphere only, so the denominator is 1; the
        # functional (weight-preconditioned) gradient is 2 (g K v - R v^(p'-1))
        c = B.T @ (w * vals)
        val = g * float(np.dot(mu, c * c))
        smooth = B @ (mu * c)
        grad = 2.0 * (g * smooth - val * vals ** (pp - 1.0))
        return val, grad

    def normalize(vals):
        vals = np.clip(vals, 0.0, None)
        ip = float(np.dot(w, vals**pp))
        if ip <= 0.0:
            raise DomainError("ascent iterate collapsed to zero")
        return vals / ip ** (1.0 / pp)

    def ascend(v0):
        vals = normalize(v0)
        val, grad = ratio_and_grad(vals)
        step, it = 1.0, 0
        for it in range(1, max_iter + 1):
            direction = grad.copy()
            direction[(vals <= 0.0) & (grad < 0.0)] = 0.0  # cone-feasible part
            stat = math.sqrt(float(np.dot(w, direction * direction)))
            if stat <= tol_grad * max(1.0, abs(val)):
                break
            slope = float(np.dot(w, direction * direction))
            step = min(step * 2.0, 1e3)
            while step > 1e-18:
                cand = normalize(vals + step * direction)
                cand_val, cand_grad = ratio_and_grad(cand)
                # strict increase guards against accepting a float plateau
                if cand_val > val and cand_val >= val + 1e-4 * step * slope:
                    vals, val, grad = cand, cand_val, cand_grad
                    break
                step *= 0.5
            else:
                break  # no representable improvement left
        return val, it

    starts = [np.ones(rule.order)]
    for i in range(trials - 1):
        rng = np.random.default_rng([seed, i])
        k = np.arange(K + 1, dtype=float)
        c = rng.standard_normal(K + 1) / (1.0 + k * k)
        c[0] = abs(c[0]) + 0.5
        starts.append(np.clip(B @ c, 0.0, None) + 1e-3)

    best, converged = -np.inf, True
    for v0 in starts:
        val, it = ascend(v0)
        best = max(best, val)
        converged = converged and it < max_iter
    if not converged:
        warnings.warn(
            f"kernel-quotient ascent hit max_iter={max_iter}; best value {best:.12e}",
            stacklevel=2,
        )
    return float(best)
