"""Zonal solvers and verifiers for P u = f(u) on S^n with polynomial f.

Newton runs in coefficient space: the residual is Lambda * c - analyze(f(u))
and the Jacobian is diag(Lambda) minus the quadrature-assembled multiplication
operator f'(u).  For subcritical f the nonnegative solutions are constants;
multistart probes collect numerical evidence and archive anything that
converges elsewhere.  The verifiers check the planar conclusions on pulled
back profiles: monotone decay, and nonnegativity of the intermediate iterated
Laplacians, computed through a Chebyshev representation in the polar cosine
where the radial Laplacian becomes

    (1-t)(1+t)^3 d2/dt2 + (1+t)^2 (2(1-t) - n) d/dt,

a form that is regular through the pole r = 0 (t = 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import brentq

from .conformal import RadialProfile, angle_from_radius, pullback_to_plane, radius_from_angle
from .errors import AccuracyError, DomainError
from .spectral import (
    QuadratureRule,
    SphereParams,
    ZonalFunction,
    build_quadrature,
    default_rule_size,
    gjms_eigenvalues,
    gjms_lambda0,
    zonal_basis,
)

CONSTANT_CLASS_TOL = 1e-7


def _term_power(u: np.ndarray, p: float) -> np.ndarray:
    # integer exponents act literally; fractional ones extend oddly so Newton
    # stays defined when an iterate dips negative
    q = round(p)
    if abs(p - q) < 1e-12:
        return u ** int(q)
    return np.sign(u) * np.abs(u) ** p


def _term_slope(u: np.ndarray, p: float) -> np.ndarray:
    q = round(p)
    if abs(p - q) < 1e-12:
        return float(q) * u ** (int(q) - 1)
    return p * np.abs(u) ** (p - 1.0)


@dataclass(frozen=True)
class Nonlinearity:
    """Right-hand side f(t) = sum a_i t^(p_i) with a_i >= 0 and p_i >= 1 nondecreasing."""

    terms: tuple
    classification: str

    @classmethod
    def from_terms(cls, terms, params: SphereParams) -> "Nonlinearity":
        clean = []
        for a, p in terms:
            a, p = float(a), float(p)
            if a < 0:
                raise DomainError(f"coefficients must be nonnegative, got {a}")
            if p < 1:
                raise DomainError(f"exponents must be >= 1, got {p}")
            if a > 0:
                clean.append((a, p))
        clean.sort(key=lambda t: t[1])
        p_crit = params.critical_equation_exponent
        if not clean:
            cls_name = "subcritical"
        else:
            p_max = clean[-1][1]
            if abs(p_max - p_crit) <= 1e-12:
                cls_name = "critical"
            elif p_max < p_crit:
                cls_name = "subcritical"
            else:
                cls_name = "supercritical"
        return cls(terms=tuple(clean), classification=cls_name)

    @classmethod
    def single_power(cls, a: float, p: float, params: SphereParams) -> "Nonlinearity":
        return cls.from_terms([(a, p)], params)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(u, dtype=float))
        for a, p in self.terms:
            out += a * _term_power(u, p)
        return out

    def slope(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(u, dtype=float))
        for a, p in self.terms:
            out += a * _term_slope(u, p)
        return out

    @property
    def max_exponent(self) -> float:
        return self.terms[-1][1] if self.terms else 1.0

    @property
    def is_linear(self) -> bool:
        return bool(self.terms) and all(p == 1.0 for _, p in self.terms)

    def describe(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{a:g} t^{p:g}" for a, p in self.terms)


def constant_solution(m: int, n: int, f: Nonlinearity) -> float | None:
    """Positive root of Lambda_0 c = f(c), the constant the solver should find.

    Returns 0.0 when f vanishes identically, None when no positive root exists
    (including the resonant all-linear cases).
    """
    lam0 = gjms_lambda0(m, n)
    if not f.terms:
        return 0.0
    linear = sum(a for a, p in f.terms if p == 1.0)
    if f.is_linear:
        return None  # either only c = 0, or a whole ray when linear == lam0

    def g(c):
        return lam0 * c - float(f(np.asarray([c]))[0])

    if linear >= lam0:
        return None  # g < 0 for all c > 0, superlinear terms only push further down
    lo = 1e-300  # the linear part dominates as c -> 0+, so g(lo) > 0
    hi = 1.0
    for _ in range(200):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        return None
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


@dataclass
class SolveResult:
    """One solve outcome; `negativity` is the most negative node value (0 if none)."""

    solution: ZonalFunction
    residual: float
    iters: int
    classification: str
    negativity: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "solution": self.solution.to_dict(),
            "residual": self.residual,
            "iters": self.iters,
            "classification": self.classification,
            "negativity": self.negativity,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _classify(u: ZonalFunction, diverged: bool) -> str:
    if diverged:
        return "diverged"
    return "constant" if u.distance_to_constant() <= CONSTANT_CLASS_TOL else "nonconstant"


def solve_newton(
    m: int,
    n: int,
    f: Nonlinearity,
    init: ZonalFunction,
    tol: float = 1e-12,
    max_iter: int = 60,
    rule: QuadratureRule | None = None,
) -> SolveResult:
    """Newton iteration on spectral coefficients for P u = f(u).

    Residual is measured in the coefficient 2-norm.  Steps are damped by
    halving while they fail to reduce the residual; iterates with coefficient
    norm beyond 1e8 are declared diverged and returned flagged.
    """
    params = SphereParams(n=n, m=m)
    if init.params != params:
        raise ValueError("initial iterate carries different (n, m)")
    K = init.K
    rule = rule or build_quadrature(n, default_rule_size(K))
    B = zonal_basis(rule, params, K)
    w = rule.weights
    lam = gjms_eigenvalues(params, K).lam

    def residual_vec(c):
        vals = B @ c
        return lam * c - B.T @ (w * f(vals)), vals

    c = init.coeffs.copy()
    res_vec, vals = residual_vec(c)
    res = float(np.linalg.norm(res_vec))
    iters = 0
    converged = res <= tol
    diverged = False
    for iters in range(1, max_iter + 1):
        if converged or diverged:
            iters -= 1
            break
        J = np.diag(lam) - B.T @ (w[:, None] * f.slope(vals)[:, None] * B)
        # plain damped Newton first; near a singular linearization fall back to
        # progressively regularized systems (J + tau diag(Lambda))
        accepted = False
        for tau in (0.0, 1e-8, 1e-4, 1e-2, 1.0, 1e2):
            Jreg = J + tau * np.diag(lam) if tau else J
            try:
                step = np.linalg.solve(Jreg, -res_vec)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(Jreg, -res_vec, rcond=None)[0]
            if not np.all(np.isfinite(step)):
                continue
            scale = 1.0
            while scale >= 1.0 / 1024.0:
                cand = c + scale * step
                cand_res_vec, cand_vals = residual_vec(cand)
                cand_res = float(np.linalg.norm(cand_res_vec))
                if math.isfinite(cand_res) and cand_res < res:
                    c, res_vec, vals, res = cand, cand_res_vec, cand_vals, cand_res
                    accepted = True
                    break
                scale *= 0.5
            if accepted:
                break
        if not accepted:
            break
        if not np.all(np.isfinite(c)) or np.linalg.norm(c) > 1e8:
            diverged = True
        converged = res <= tol
    u = ZonalFunction(params, c)
    negativity = float(min(np.min(B @ c), 0.0))
    return SolveResult(
        solution=u,
        residual=res,
        iters=iters,
        classification=_classify(u, diverged),
        negativity=negativity,
        converged=converged and not diverged,
    )


def solve_green(
    m: int,
    n: int,
    f: Nonlinearity,
    init: ZonalFunction,
    tol: float = 1e-12,
    max_iter: int = 200,
    rule: QuadratureRule | None = None,
) -> SolveResult:
    """Inverse-operator fixed-point iteration u <- P^{-1} f(u).

    Exact solutions are fixed points (the constant in particular); the map is
    not contractive in the constant mode for superlinear f, so this path is a
    cross-check of solve_newton rather than a robust solver.
    """
    params = SphereParams(n=n, m=m)
    if init.params != params:
        raise ValueError("initial iterate carries different (n, m)")
    K = init.K
    rule = rule or build_quadrature(n, default_rule_size(K))
    B = zonal_basis(rule, params, K)
    w = rule.weights
    lam = gjms_eigenvalues(params, K).lam

    c = init.coeffs.copy()
    res = float(np.linalg.norm(lam * c - B.T @ (w * f(B @ c))))
    iters = 0
    converged = res <= tol
    diverged = False
    for iters in range(1, max_iter + 1):
        if converged or diverged:
            iters -= 1
            break
        c = (B.T @ (w * f(B @ c))) / lam
        if not np.all(np.isfinite(c)) or np.linalg.norm(c) > 1e8:
            diverged = True
            break
        res = float(np.linalg.norm(lam * c - B.T @ (w * f(B @ c))))
        converged = res <= tol
    u = ZonalFunction(params, c)
    negativity = float(min(np.min(B @ c), 0.0)) if np.all(np.isfinite(c)) else float("nan")
    return SolveResult(
        solution=u,
        residual=res,
        iters=iters,
        classification=_classify(u, diverged),
        negativity=negativity,
        converged=converged and not diverged,
    )


@dataclass
class ProbeReport:
    """Aggregate of multistart Newton solves for one subcritical right-hand side."""

    m: int
    n: int
    nonlinearity: str
    trials: int
    constant_value: float | None
    converged: int = 0
    nonconverged: int = 0
    diverged: int = 0
    negative: int = 0
    zero: int = 0
    constant: int = 0
    nonconstant: int = 0
    max_constant_rel_err: float = 0.0
    fraction_constant: float = 0.0
    counterexamples: list = field(default_factory=list)
    kernel_dimension: int | None = None

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "nonlinearity": self.nonlinearity,
            "trials": self.trials,
            "constant_value": self.constant_value,
            "converged": self.converged,
            "nonconverged": self.nonconverged,
            "diverged": self.diverged,
            "negative": self.negative,
            "zero": self.zero,
            "constant": self.constant,
            "nonconstant": self.nonconstant,
            "max_constant_rel_err": self.max_constant_rel_err,
            "fraction_constant": self.fraction_constant,
            "counterexamples": self.counterexamples,
            "kernel_dimension": self.kernel_dimension,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def probe_start(
    params: SphereParams,
    K: int,
    base: float,
    rng: np.random.Generator,
    rule: QuadratureRule,
) -> ZonalFunction:
    """Positive random start: scaled constant plus damped modes, clipped positive."""
    k = np.arange(K + 1, dtype=float)
    c = base * 0.3 * rng.standard_normal(K + 1) / (1.0 + k * k)
    c[0] = base * rng.uniform(0.7, 2.0) * math.sqrt(params.area)
    B = zonal_basis(rule, params, K)
    vals = B @ c
    floor = 0.05 * base
    if np.min(vals) <= floor:
        vals = np.clip(vals, floor, None)
        c = B.T @ (rule.weights * vals)
    return ZonalFunction(params, c)


def uniqueness_probe(
    m: int,
    n: int,
    f: Nonlinearity,
    trials: int,
    seed: int,
    K: int = 24,
    tol: float = 1e-12,
) -> ProbeReport:
    """Run `trials` seeded Newton solves from random positive starts.

    Every converged outcome with nonnegative values is classified against the
    constant; anything nonconstant is archived with full coefficients.  For
    purely linear f the equation is diagonal and the report carries the kernel
    dimension instead of Newton runs.
    """
    params = SphereParams(n=n, m=m)
    p_crit = params.critical_equation_exponent
    if f.terms and f.max_exponent >= p_crit - 1e-12 and not f.is_linear:
        raise DomainError(
            f"probe requires subcritical growth: max exponent {f.max_exponent} "
            f">= critical {p_crit}"
        )
    c_star = constant_solution(m, n, f)
    report = ProbeReport(
        m=m, n=n, nonlinearity=f.describe(), trials=trials, constant_value=c_star
    )
    if f.is_linear:
        a = sum(coef for coef, _ in f.terms)
        lam = gjms_eigenvalues(params, K).lam
        report.kernel_dimension = int(np.sum(np.abs(lam - a) <= 1e-9 * np.abs(lam)))
        report.trials = 0
        return report
    if trials < 1:
        raise DomainError("need at least one trial")

    rule = build_quadrature(n, default_rule_size(K))
    base = c_star if (c_star is not None and c_star > 0) else 1.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        init = probe_start(params, K, base, rng, rule)
        result = solve_newton(m, n, f, init, tol=tol, rule=rule)
        if result.classification == "diverged":
            report.diverged += 1
            continue
        if not result.converged:
            report.nonconverged += 1
            continue
        report.converged += 1
        sol = result.solution
        scale = max(abs(float(np.max(np.abs(sol.coeffs)))), 1e-30)
        if result.negativity < -1e-8 * scale:
            report.negative += 1
            continue
        # measured against the problem scale, not the (possibly tiny) iterate
        if sol.l2_norm() <= 1e-8 * base * math.sqrt(params.area):
            report.zero += 1
            continue
        if result.classification == "constant" and c_star:
            rel = abs(sol.mean() - c_star) / c_star
            report.constant += 1
            report.max_constant_rel_err = max(report.max_constant_rel_err, rel)
        else:
            report.nonconstant += 1
            report.counterexamples.append(
                {
                    "trial": trial,
                    "residual": result.residual,
                    "distance_to_constant": sol.distance_to_constant(),
                    "coeffs": [float(v) for v in sol.coeffs],
                }
            )
    pool = report.zero + report.constant + report.nonconstant
    report.fraction_constant = (
        (report.zero + report.constant) / pool if pool else 0.0
    )
    return report


@dataclass
class MonotonicityReport:
    passed: bool
    worst_increase: float
    index: int | None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_increase": self.worst_increase,
            "index": self.index,
        }


def check_profile_monotone(profile: RadialProfile, slack: float = 1e-9) -> MonotonicityReport:
    """Check u(r_{i+1}) <= u(r_i) + slack along the grid."""
    increments = np.diff(profile.values)
    worst = float(np.max(increments)) if len(increments) else 0.0
    if worst > slack:
        return MonotonicityReport(False, worst, int(np.argmax(increments)))
    return MonotonicityReport(True, max(worst, 0.0), None)


def verify_symmetry_monotonicity(sol: ZonalFunction, grid) -> MonotonicityReport:
    """Pull the solution back to R^n and check it decays monotonically in r."""
    return check_profile_monotone(pullback_to_plane(sol, grid))


def chebyshev_radial_grid(r_max: float, size: int = 321) -> np.ndarray:
    """Radii whose polar cosines are Chebyshev points on [t(r_max), 1].

    Smooth radial functions become Chebyshev-resolvable functions of t on this
    grid, which is what the iterated-Laplacian verifier expects.
    """
    if not (r_max > 0 and size >= 16):
        raise DomainError("need r_max > 0 and size >= 16")
    t_min = angle_from_radius(r_max)
    x = np.cos(np.pi * np.arange(size) / (size - 1))  # 1 .. -1
    t = np.clip(t_min + (x + 1.0) * (1.0 - t_min) / 2.0, t_min, 1.0)
    return radius_from_angle(t)  # t decreasing, so radii increase from 0 to r_max


@dataclass
class SuperPolyReport:
    """Signs of the iterated negative Laplacians of a radial profile."""

    passed: bool
    order_minima: list
    order_scales: list
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "order_minima": self.order_minima,
            "order_scales": self.order_scales,
            "tolerance": self.tolerance,
        }


def _cheb_fit(x: np.ndarray, values: np.ndarray, deg: int) -> np.ndarray:
    coef = cheb.chebfit(x, values, deg)
    resid = values - cheb.chebval(x, coef)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    tail = float(np.max(np.abs(coef[-max(deg // 20, 3) :])))
    if float(np.max(np.abs(resid))) > 1e-7 * scale or tail > 1e-7 * max(
        float(np.max(np.abs(coef))), 1e-300
    ):
        raise AccuracyError(
            "radial grid does not resolve the profile: Chebyshev tail "
            f"{tail:.2e} / fit residual {np.max(np.abs(resid)):.2e} "
            f"against scale {scale:.2e}"
        )
    return coef


def radial_laplacian(profile: RadialProfile) -> np.ndarray:
    """One application of the radial Laplacian u'' + (n-1) u'/r on the grid.

    Computed through the polar-cosine representation, so the r = 0 limit
    n u''(0) comes out of the same formula instead of a special case.
    """
    n = profile.params.n
    t = angle_from_radius(profile.grid)
    t_min = float(np.min(t))
    span = 1.0 - t_min
    x = (2.0 * (t - t_min) / span) - 1.0
    deg = min(len(x) - 1, 400)
    dx_dt = 2.0 / span
    coef = _cheb_fit(x, profile.values, deg)
    d1 = cheb.chebval(x, cheb.chebder(coef, 1)) * dx_dt
    d2 = cheb.chebval(x, cheb.chebder(coef, 2)) * dx_dt**2
    return (1.0 - t) * (1.0 + t) ** 3 * d2 + (1.0 + t) ** 2 * (2.0 * (1.0 - t) - n) * d1


def verify_super_polyharmonic(
    profile: RadialProfile, m: int, rtol: float = 1e-6
) -> SuperPolyReport:
    """Check (-Delta)^i u >= -rtol * scale_i for i = 1..m-1 on the profile's range.

    Vacuous for m = 1.  Derivatives are taken spectrally in t = cos(theta),
    where the radial Laplacian is a first/second-order operator with polynomial
    coefficients, regular at the pole; each application is refit on the same
    Chebyshev grid and under-resolution raises an accuracy error.
    """
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    if m == 1:
        return SuperPolyReport(True, [], [], rtol)
    n = profile.params.n
    t = angle_from_radius(profile.grid)
    t_min = float(np.min(t))
    span = 1.0 - t_min
    x = (2.0 * (t - t_min) / span) - 1.0
    deg = min(len(x) - 1, 400)
    dx_dt = 2.0 / span

    coef = _cheb_fit(x, profile.values, deg)
    minima, scales = [], []
    passed = True
    for _ in range(1, m):
        d1 = cheb.chebval(x, cheb.chebder(coef, 1)) * dx_dt
        d2 = cheb.chebval(x, cheb.chebder(coef, 2)) * dx_dt**2
        lap = (1.0 - t) * (1.0 + t) ** 3 * d2 + (1.0 + t) ** 2 * (2.0 * (1.0 - t) - n) * d1
        values = -lap
        scale = max(float(np.max(np.abs(values))), 1e-300)
        low = float(np.min(values))
        minima.append(low)
        scales.append(scale)
        passed = passed and (low >= -rtol * scale)
        coef = _cheb_fit(x, values, deg)
    return SuperPolyReport(passed, minima, scales, rtol)
