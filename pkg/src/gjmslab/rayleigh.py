"""Sharp subcritical Sobolev constants and quotient minimization on S^n.

The quotient Q(u) = (energy of u) / ||u||_p^2 is scale invariant; over
2 < p < 2n/(n-2m) its infimum is Lambda_0 |S^n|^(1-2/p), attained exactly at
the constants.  minimize() reproduces this numerically by multistart
projected descent on the p-sphere, using the gradient in the operator's own
metric (coefficient k scaled by 1/Lambda_k) so the quadratic term is perfectly
conditioned at every order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .conformal import BubbleParams, bubble_values
from .errors import DomainError
from .spectral import (
    SphereParams,
    ZonalFunction,
    analyze,
    build_quadrature,
    default_rule_size,
    gjms_eigenvalues,
    gjms_lambda0,
    sphere_area,
    zonal_basis,
)

#: Quotient gradients degenerate as p -> 2 (|u|^(p-2) loses smoothness at zeros),
#: and the admissible range is open anyway, so a small guard band is enforced.
MIN_EXPONENT_GAP = 1e-3


def sharp_constant(m: int, n: int, p: float) -> float:
    """Best constant Lambda_0 |S^n|^(1-2/p) of the subcritical quotient.

    Admits the closed endpoints p = 2 and p = 2n/(n-2m) for reporting; the
    sharp statement lives on the open interval.
    """
    params = SphereParams(n=n, m=m)
    p_crit = params.critical_norm_exponent
    if not (2.0 <= p <= p_crit):
        raise DomainError(f"need 2 <= p <= {p_crit} for n={n}, m={m}, got p={p}")
    return gjms_lambda0(m, n) * sphere_area(n) ** (1.0 - 2.0 / p)


class _Workspace:
    """Rule, basis, and spectrum bundle reused across quotient evaluations."""

    def __init__(self, params: SphereParams, K: int, Q: int | None = None):
        self.params = params
        self.K = K
        self.rule = build_quadrature(params.n, default_rule_size(K) if Q is None else Q)
        self.basis = zonal_basis(self.rule, params, K)
        self.weights = self.rule.weights
        self.lam = gjms_eigenvalues(params, K).lam

    def p_norm(self, c: np.ndarray, p: float) -> float:
        vals = self.basis @ c
        return float(np.dot(self.weights, np.abs(vals) ** p)) ** (1.0 / p)

    def normalize(self, c: np.ndarray, p: float) -> np.ndarray:
        norm = self.p_norm(c, p)
        if not (norm > 0.0 and math.isfinite(norm)):
            raise DomainError("cannot normalize the zero (or overflowing) function")
        return c / norm

    def quotient(self, c: np.ndarray, p: float) -> float:
        num = float(np.dot(self.lam, c * c))
        return num / self.p_norm(c, p) ** 2

    def quotient_and_gradient(self, c: np.ndarray, p: float):
        vals = self.basis @ c
        ip = float(np.dot(self.weights, np.abs(vals) ** p))
        den = ip ** (2.0 / p)
        num = float(np.dot(self.lam, c * c))
        val = num / den
        moment = self.basis.T @ (self.weights * np.abs(vals) ** (p - 2.0) * vals)
        grad = 2.0 * self.lam * c / den - 2.0 * num * ip ** (-1.0 - 2.0 / p) * moment
        return val, grad


def rayleigh_quotient(u: ZonalFunction, p: float, workspace: _Workspace | None = None) -> float:
    """Energy over squared L^p norm; scale invariant, and >= the sharp constant
    (up to quadrature slack) on the subcritical range."""
    if p < 1:
        raise DomainError(f"need p >= 1, got p={p}")
    if u.l2_norm() == 0.0:
        raise DomainError("quotient undefined for the zero function")
    ws = workspace or _Workspace(u.params, u.K)
    return ws.quotient(u.coeffs, p)


def rayleigh_gradient(u: ZonalFunction, p: float, workspace: _Workspace | None = None) -> np.ndarray:
    """Coefficient gradient of the quotient; vanishes exactly at constants."""
    _check_exponent(u.params, p)
    if u.l2_norm() == 0.0:
        raise DomainError("gradient undefined for the zero function")
    ws = workspace or _Workspace(u.params, u.K)
    return ws.quotient_and_gradient(u.coeffs, p)[1]


def _check_exponent(params: SphereParams, p: float) -> None:
    p_crit = params.critical_norm_exponent
    if p <= 2.0 + MIN_EXPONENT_GAP or p >= p_crit:
        raise DomainError(
            f"need 2 + {MIN_EXPONENT_GAP} < p < {p_crit} for n={params.n}, m={params.m}, got p={p}"
        )


@dataclass(frozen=True)
class OptimizerConfig:
    """Multistart projected-descent settings for one (n, m, p) instance."""

    params: SphereParams
    p: float
    K: int = 32
    starts: int = 20
    seed: int = 0
    step0: float = 1.0
    tol_grad: float = 1e-9
    max_iter: int = 2000

    def __post_init__(self):
        _check_exponent(self.params, self.p)
        if self.starts < 1:
            raise DomainError("need at least one start")
        if self.tol_grad <= 0:
            raise DomainError("gradient tolerance must be positive")
        if self.K < 1:
            raise DomainError("need K >= 1")
        if self.max_iter < 1 or self.step0 <= 0:
            raise DomainError("need max_iter >= 1 and step0 > 0")


@dataclass
class MinimizationResult:
    """Best iterate over all starts, normalized to ||u||_p = 1."""

    minimizer: ZonalFunction
    value: float
    grad_norm: float
    iters: int
    distance_to_constant: float
    converged: bool
    trace: list = field(default_factory=list)
    start_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "minimizer": self.minimizer.to_dict(),
            "value": self.value,
            "grad_norm": self.grad_norm,
            "iters": self.iters,
            "distance_to_constant": self.distance_to_constant,
            "converged": self.converged,
            "start_values": [float(v) for v in self.start_values],
        }

    def write_trace_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "value", "grad_norm"])
            for it, val, gn in self.trace:
                writer.writerow([it, repr(float(val)), repr(float(gn))])


def _descend(ws: _Workspace, c0: np.ndarray, p: float, cfg: OptimizerConfig):
    c = ws.normalize(c0, p)
    val, grad = ws.quotient_and_gradient(c, p)
    gnorm = float(np.linalg.norm(grad))
    trace = [(0, val, gnorm)]
    step = cfg.step0
    it = 0
    converged = gnorm <= cfg.tol_grad
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, cfg.max_iter + 1):
            if converged:
                it -= 1
                break
            # scaling by 1/(2 Lambda_k) makes the unit step the exact Newton
            # step on the high modes, where the quotient Hessian is 2 Lambda_k
            # per unit p-norm; low modes are then contracted geometrically.
            direction = -grad / (2.0 * ws.lam)
            slope = float(np.dot(grad, direction))
            step = min(step * 2.0, 2.0 * cfg.step0)
            accepted = False
            while step > 1e-18:
                cand = c + step * direction
                cand_norm = ws.p_norm(cand, p)
                if math.isfinite(cand_norm) and cand_norm > 0.0:
                    cand = cand / cand_norm
                    cand_val = ws.quotient(cand, p)
                    if cand_val <= val + 1e-4 * step * slope:
                        c, val = cand, cand_val
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                break  # no representable decrease left
            val, grad = ws.quotient_and_gradient(c, p)
            gnorm = float(np.linalg.norm(grad))
            trace.append((it, val, gnorm))
            converged = gnorm <= cfg.tol_grad
    return c, val, gnorm, it, converged, trace


def _starts(cfg: OptimizerConfig, ws: _Workspace) -> list[np.ndarray]:
    K = cfg.K
    out = [np.eye(K + 1)[0]]  # the constant
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # bubble tails are harmless as starts
        for lam in (2.0, 4.0):
            vals = bubble_values(BubbleParams(lam=lam, params=cfg.params), ws.rule.nodes)
            out.append(analyze(vals, ws.rule, cfg.params, K).coeffs)
    k = np.arange(K + 1, dtype=float)
    for i in range(max(cfg.starts - len(out), 0)):
        rng = np.random.default_rng([cfg.seed, i])
        out.append(rng.standard_normal(K + 1) / (1.0 + k * k))
    return out[: cfg.starts]


def minimize(cfg: OptimizerConfig) -> MinimizationResult:
    """Best-of-multistart quotient minimization on the p-sphere.

    Starts at the constant, two bubble profiles, and damped random coefficient
    draws seeded per (seed, index); the per-start descent renormalizes after
    every accepted step and backtracks with Armijo parameter 1e-4, shrink 0.5.
    Non-convergent starts are kept (flagged through `converged`), never hidden.
    """
    ws = _Workspace(cfg.params, cfg.K)
    best = None
    start_values = []
    for c0 in _starts(cfg, ws):
        c, val, gnorm, iters, converged, trace = _descend(ws, c0, cfg.p, cfg)
        start_values.append(val)
        if best is None or val < best[1]:
            best = (c, val, gnorm, iters, converged, trace)
    c, val, gnorm, iters, converged, trace = best
    if c[0] < 0:
        c = -c  # report the nonnegative-mean representative
    u = ZonalFunction(cfg.params, c)
    return MinimizationResult(
        minimizer=u,
        value=val,
        grad_norm=gnorm,
        iters=iters,
        distance_to_constant=u.distance_to_constant(),
        converged=converged,
        trace=trace,
        start_values=start_values,
    )
