"""Orthonormal zonal-harmonic calculus on the round unit sphere S^n.

A zonal (rotationally symmetric) function is stored as a coefficient vector
c_0..c_K in an L^2(S^n)-orthonormal basis of ultraspherical polynomials in
t = cos(theta).  The surface measure restricted to zonal functions is
|S^{n-1}| (1-t^2)^{(n-2)/2} dt on [-1, 1], so Gauss-Jacobi rules integrate
the basis exactly and every norm, quadratic form, and transform below is
diagonal or a single matrix product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .errors import AliasingError, DomainError, InconsistencyError

#: Default truncation degree; rules default to 2K + 8 nodes, leaving exactness
#: margin for the p-power nonlinearities applied downstream.
DEFAULT_TRUNCATION = 64


def default_rule_size(K: int) -> int:
    return 2 * K + 8


def sphere_area(n: int) -> float:
    """Surface measure |S^n| = 2 pi^((n+1)/2) / Gamma((n+1)/2) of the unit n-sphere."""
    if n < 1:
        raise DomainError(f"sphere dimension must be >= 1, got n={n}")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


@dataclass(frozen=True)
class SphereParams:
    """Ambient dimension n and order parameter m of the conformal operator (order 2m).

    Requires n > 2m, the range in which the operator is positive definite.
    """

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise DomainError(f"n and m must be integers, got n={self.n}, m={self.m}")
        if self.m < 1:
            raise DomainError(f"order parameter must satisfy m >= 1, got m={self.m}")
        if self.n <= 2 * self.m:
            raise DomainError(f"need n > 2m, got n={self.n}, m={self.m}")

    @property
    def area(self) -> float:
        return sphere_area(self.n)

    @property
    def critical_norm_exponent(self) -> float:
        """Upper endpoint 2n/(n-2m) of the admissible Lebesgue exponents."""
        return 2.0 * self.n / (self.n - 2 * self.m)

    @property
    def critical_equation_exponent(self) -> float:
        """Critical power (n+2m)/(n-2m) for polynomial right-hand sides."""
        return (self.n + 2.0 * self.m) / (self.n - 2.0 * self.m)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes t_i in (-1, 1) and weights w_i > 0 integrating zonal functions on S^n.

    sum(w_i f(t_i)) equals the surface integral of f for polynomial f of degree
    up to 2*order - 1; in particular sum(w_i) = |S^n|.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def build_quadrature(n: int, Q: int) -> QuadratureRule:
    """Gauss-Jacobi rule for the zonal surface measure on S^n.

    Parameters
    ----------
    n : ambient sphere dimension, n >= 2.
    Q : node count, Q >= 4; exact for integrands of polynomial degree <= 2Q-1.
    """
    if n < 2:
        raise DomainError(f"quadrature needs n >= 2, got n={n}")
    if Q < 4:
        raise DomainError(f"quadrature needs Q >= 4, got Q={Q}")
    a = (n - 2) / 2.0
    try:
        nodes, weights = roots_jacobi(Q, a, a)
    except Exception as exc:  # pragma: no cover - scipy failure surface
        raise InconsistencyError(f"Gauss-Jacobi node solve failed for n={n}, Q={Q}") from exc
    if not (np.all(np.isfinite(nodes)) and np.all(weights > 0)):
        raise InconsistencyError(f"degenerate Gauss-Jacobi rule for n={n}, Q={Q}")
    return QuadratureRule(n=n, nodes=nodes, weights=weights * sphere_area(n - 1))


def _recurrence_offdiag(n: int, K: int) -> np.ndarray:
    # Off-diagonal entries b_1..b_K of the symmetric Jacobi matrix for the
    # zonal measure: t q_k = b_{k+1} q_{k+1} + b_k q_{k-1} with q_k orthonormal.
    # Rescaling the measure leaves the b_k unchanged.
    lam = (n - 1) / 2.0
    k = np.arange(1, K + 1, dtype=float)
    return np.sqrt(k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0)))


def basis_values(n: int, K: int, t) -> np.ndarray:
    """Values of the orthonormal zonal harmonics Y_0..Y_K at cosines t.

    Returns an array of shape (len(t), K+1).  Y_k is the degree-k ultraspherical
    polynomial normalized so that its squared surface integral is 1; Y_0 is the
    constant |S^n|^(-1/2).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if K < 0:
        raise DomainError("truncation degree must be >= 0")
    B = np.empty((t.size, K + 1))
    B[:, 0] = 1.0 / math.sqrt(sphere_area(n))
    if K == 0:
        return B
    b = _recurrence_offdiag(n, K)
    B[:, 1] = t * B[:, 0] / b[0]
    for k in range(1, K):
        B[:, k + 1] = (t * B[:, k] - b[k - 1] * B[:, k - 1]) / b[k]
    return B


def basis_with_derivatives(n: int, K: int, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, first, and second t-derivatives of Y_0..Y_K at cosines t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    B = basis_values(n, K, t)
    D1 = np.zeros_like(B)
    D2 = np.zeros_like(B)
    if K >= 1:
        b = _recurrence_offdiag(n, K)
        D1[:, 1] = B[:, 0] / b[0]
        for k in range(1, K):
            D1[:, k + 1] = (B[:, k] + t * D1[:, k] - b[k - 1] * D1[:, k - 1]) / b[k]
            D2[:, k + 1] = (2.0 * D1[:, k] + t * D2[:, k] - b[k - 1] * D2[:, k - 1]) / b[k]
    return B, D1, D2


def zonal_basis(rule: QuadratureRule, params: SphereParams, K: int) -> np.ndarray:
    """Basis matrix B[i, k] = Y_k(t_i) at the rule's nodes; requires K < rule.order."""
    if rule.n != params.n:
        raise ValueError(f"rule is for n={rule.n}, params have n={params.n}")
    if K >= rule.order:
        raise AliasingError(
            f"truncation K={K} is not resolved by a {rule.order}-node rule; need K < Q"
        )
    return basis_values(params.n, K, rule.nodes)


@dataclass
class ZonalFunction:
    """Coefficients of a zonal function in the orthonormal basis.

    Parseval holds exactly: the squared L^2(S^n) norm is sum(coeffs**2).
    """

    params: SphereParams
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(c)):
            raise DomainError("zonal coefficients must be finite")
        self.coeffs = c

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def mean(self) -> float:
        """Average value over the sphere."""
        return float(self.coeffs[0]) / math.sqrt(self.params.area)

    def evaluate(self, t) -> np.ndarray:
        """Pointwise values at arbitrary cosines t via the stable recurrence."""
        return basis_values(self.params.n, self.K, t) @ self.coeffs

    def distance_to_constant(self) -> float:
        """Relative L^2 distance from the mean, ||u - mean(u)|| / ||u||, in [0, 1]."""
        total = self.l2_norm()
        if total == 0.0:
            return 0.0
        return float(np.linalg.norm(self.coeffs[1:]) / total)

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "m": self.params.m,
            "K": self.K,
            "coeffs": [float(c) for c in self.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ZonalFunction":
        return cls(SphereParams(n=data["n"], m=data["m"]), np.asarray(data["coeffs"], float))


def analyze(values, rule: QuadratureRule, params: SphereParams, K: int) -> ZonalFunction:
    """Project node values onto the basis: c_k = sum_i w_i values_i Y_k(t_i)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (rule.order,):
        raise ValueError(f"expected {rule.order} node values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DomainError("node values must be finite")
    B = zonal_basis(rule, params, K)
    return ZonalFunction(params, B.T @ (rule.weights * values))


def synthesize(u: ZonalFunction, rule: QuadratureRule) -> np.ndarray:
    """Node values of a coefficient vector; inverse of analyze up to degree K."""
    return zonal_basis(rule, u.params, u.K) @ u.coeffs


def laplace_beltrami_eigenvalues(n: int, K: int) -> np.ndarray:
    """Eigenvalues k(k+n-1) of -Delta on degree-k zonal harmonics."""
    k = np.arange(K + 1, dtype=float)
    return k * (k + n - 1.0)


def laplace_beltrami_ode_residual(params: SphereParams, K: int, Q: int | None = None) -> float:
    """Max residual of (1-t^2) Y_k'' - n t Y_k' + k(k+n-1) Y_k over the rule's nodes.

    Numerical confirmation that the basis diagonalizes -Delta with the claimed
    eigenvalues before they are composed into higher-order spectra.
    """
    n = params.n
    rule = build_quadrature(n, default_rule_size(K) if Q is None else Q)
    t = rule.nodes
    B, D1, D2 = basis_with_derivatives(n, K, t)
    ev = laplace_beltrami_eigenvalues(n, K)
    resid = (1.0 - t * t)[:, None] * D2 - n * t[:, None] * D1 + ev[None, :] * B
    # normalize by the basis magnitude so the residual is scale-free
    return float(np.max(np.abs(resid)) / max(1.0, np.max(np.abs(B))))


@dataclass
class GjmsSpectrum:
    """Eigenvalues of the order-2m conformal operator on degree-k zonal harmonics."""

    params: SphereParams
    lam: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        if not np.all(np.isfinite(lam)):
            raise InconsistencyError("spectrum entries must be finite")
        if np.any(lam <= 0.0):
            raise InconsistencyError("spectrum must be positive for n > 2m")
        if np.any(np.diff(lam) <= 0.0):
            raise InconsistencyError("spectrum must be strictly increasing in the degree")
        self.lam = lam

    @property
    def K(self) -> int:
        return len(self.lam) - 1

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "m": self.params.m,
            "K": self.K,
            "lambda": [float(v) for v in self.lam],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def gjms_lambda0(m: int, n: int) -> float:
    """Bottom eigenvalue: product over j < m of (n(n-2)/4 - j(j+1))."""
    params = SphereParams(n=n, m=m)  # validates n > 2m
    mu0 = params.n * (params.n - 2.0) / 4.0
    out = 1.0
    for j in range(m):
        out *= mu0 - j * (j + 1.0)
    return out


def gjms_eigenvalues(params: SphereParams, K: int) -> GjmsSpectrum:
    """Spectrum of the order-2m conformal operator, factored through the order-2 one.

    Lambda_k = prod_{j=0}^{m-1} (mu_k - j(j+1)) with mu_k = k(k+n-1) + n(n-2)/4
    the eigenvalue of the conformally shifted Laplacian.  The equivalent
    Gamma-ratio closed form Gamma(k+n/2+m)/Gamma(k+n/2-m) is evaluated through
    log-Gamma and must agree to 1e-10 relative, guarding the factorization.
    """
    n, m = params.n, params.m
    k = np.arange(K + 1, dtype=float)
    mu = laplace_beltrami_eigenvalues(n, K) + n * (n - 2.0) / 4.0
    lam = np.ones_like(mu)
    for j in range(m):
        lam *= mu - j * (j + 1.0)
    lam_gamma = np.exp(gammaln(k + n / 2.0 + m) - gammaln(k + n / 2.0 - m))
    rel = np.max(np.abs(lam / lam_gamma - 1.0))
    if rel > 1e-10:
        raise InconsistencyError(
            f"product and Gamma-ratio spectra disagree (rel {rel:.3e}) for n={n}, m={m}"
        )
    return GjmsSpectrum(params=params, lam=lam)


def quadratic_form(u: ZonalFunction, spectrum: GjmsSpectrum) -> float:
    """Energy sum(Lambda_k c_k^2) = surface integral of (P u) u; >= 0, zero iff u = 0."""
    if u.params != spectrum.params:
        raise ValueError("function and spectrum built for different (n, m)")
    if u.K > spectrum.K:
        raise ValueError(
            f"truncation mismatch: function degree {u.K} exceeds spectrum degree {spectrum.K}"
        )
    return float(np.dot(spectrum.lam[: u.K + 1], u.coeffs**2))


def lp_norm(u: ZonalFunction, p: float, rule: QuadratureRule) -> float:
    """L^p(S^n) norm by quadrature; for p = 2 it matches the coefficient norm."""
    if p < 1:
        raise DomainError(f"need p >= 1, got p={p}")
    vals = synthesize(u, rule)
    return float(np.dot(rule.weights, np.abs(vals) ** p) ** (1.0 / p))
