"""Stereographic transport of radial/zonal data between R^n and S^n.

The conformal diffeomorphism sends x in R^n to the sphere point with polar
cosine t = (1 - |x|^2)/(1 + |x|^2), pulling the round metric back to
(2/(1+|x|^2))^2 dx^2.  Functions move with the covariant weight
(2/(1+r^2))^(n/2-m); the dilation family of extremal profiles on R^n then
corresponds to the one-parameter bubble family on the sphere, with the
dilation-free member being the constant.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import AccuracyError, DomainError, InconsistencyError, TruncationWarning
from .spectral import QuadratureRule, SphereParams, ZonalFunction, analyze, sphere_area


def angle_from_radius(r):
    """Polar cosine t = (1 - r^2)/(1 + r^2) of the image of a point at radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    out = (1.0 - r * r) / (1.0 + r * r)
    return float(out) if out.ndim == 0 else out


def radius_from_angle(t):
    """Inverse map r = sqrt((1 - t)/(1 + t)); t = -1 is the infinite-radius pole."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= -1.0) or np.any(t > 1.0):
        raise DomainError("need t in (-1, 1]; t = -1 corresponds to infinite radius")
    out = np.sqrt((1.0 - t) / (1.0 + t))
    return float(out) if out.ndim == 0 else out


def conformal_factor(r):
    """Metric factor 2/(1 + r^2), in (0, 2]."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    out = 2.0 / (1.0 + r * r)
    return float(out) if out.ndim == 0 else out


@dataclass
class RadialProfile:
    """Samples u(r_i) of a radial function on R^n over an increasing grid."""

    params: SphereParams
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.grid, dtype=float))
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if g.shape != v.shape:
            raise ValueError(f"grid shape {g.shape} != values shape {v.shape}")
        if np.any(g < 0):
            raise DomainError("radial grid must be nonnegative")
        if np.any(np.diff(g) <= 0):
            raise DomainError("radial grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise DomainError("profile values must be finite")
        self.grid, self.values = g, v

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "u"])
            for r, u in zip(self.grid, self.values):
                writer.writerow([repr(float(r)), repr(float(u))])

    @classmethod
    def read_csv(cls, path, params: SphereParams) -> "RadialProfile":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:2] != ["r", "u"]:
                raise ValueError(f"unexpected profile header {header}")
            rows = [(float(a), float(b)) for a, b in reader]
        grid = np.array([a for a, _ in rows])
        values = np.array([b for _, b in rows])
        return cls(params=params, grid=grid, values=values)


@dataclass(frozen=True)
class BubbleParams:
    """Dilation parameter of the centered extremal family; lam = 1 is the constant."""

    lam: float
    params: SphereParams

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"dilation must be positive and finite, got {self.lam}")


def _sup_abs(v: ZonalFunction, samples: int = 2048) -> float:
    t = np.cos(np.linspace(0.0, math.pi, samples))
    return float(np.max(np.abs(v.evaluate(t))))


def pullback_to_plane(v: ZonalFunction, grid) -> RadialProfile:
    """Transport a zonal function to R^n: u(r) = (2/(1+r^2))^(n/2-m) v(t(r)).

    For bounded v the result obeys the decay bound
    u(r) (1+r^2)^(n/2-m) <= sup|v| 2^(n/2-m); the construction is checked
    against it with a 1e-9 slack.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    n, m = v.params.n, v.params.m
    t = angle_from_radius(grid)
    exponent = n / 2.0 - m
    values = conformal_factor(grid) ** exponent * v.evaluate(t)
    bound = _sup_abs(v) * 2.0**exponent + 1e-9
    excess = np.max(np.abs(values) * (1.0 + grid * grid) ** exponent) - bound
    if excess > 0:  # pragma: no cover - construction satisfies the bound identically
        raise InconsistencyError(f"pullback violates its decay bound by {excess:.3e}")
    return RadialProfile(params=v.params, grid=grid, values=values)


def bubble_values(bubble: BubbleParams, t) -> np.ndarray:
    """Pointwise bubble v_lam(t) = (lam / ((1+lam^2) + (1-lam^2) t))^((n-2m)/2).

    Pushforward of the dilated planar profile lam^((n-2m)/2) (1+lam^2 r^2)^(m-n/2);
    at lam = 1 this is the constant 2^(m-n/2).
    """
    t = np.asarray(t, dtype=float)
    lam = bubble.lam
    n, m = bubble.params.n, bubble.params.m
    e = (n - 2.0 * m) / 2.0
    return (lam / ((1.0 + lam * lam) + (1.0 - lam * lam) * t)) ** e


def bubble_on_sphere(bubble: BubbleParams, rule: QuadratureRule, K: int) -> ZonalFunction:
    """Expand a bubble in the zonal basis; warns when the degree-K tail is not negligible."""
    u = analyze(bubble_values(bubble, rule.nodes), rule, bubble.params, K)
    norm = u.l2_norm()
    tail = abs(float(u.coeffs[-1])) / norm if norm > 0 else 0.0
    if tail > 1e-6:
        # geometric decay estimate from the last few coefficients suggests the
        # degree needed to push the tail below threshold
        c = np.abs(u.coeffs)
        ratio = (c[-1] / c[-5]) ** 0.25 if c[-5] > 0 else 0.5
        ratio = min(max(ratio, 1e-3), 0.999)
        extra = int(math.ceil(math.log(1e-6 / tail) / math.log(ratio)))
        warnings.warn(
            f"bubble lam={bubble.lam} tail {tail:.2e} above 1e-6 at K={K}; "
            f"suggest K >= {K + max(extra, 1)}",
            TruncationWarning,
            stacklevel=2,
        )
    return u


def norm_transport_check(
    v: ZonalFunction,
    q: float,
    rule: QuadratureRule,
    rtol: float = 1e-10,
) -> float:
    """Relative gap between the sphere-side and plane-side integrals of |v|^q.

    Sphere side is the quadrature sum of |v|^q; the plane side integrates the
    pulled-back |u|^q against (2/(1+r^2))^(n - q(n/2-m)) on R^n by adaptive
    radial quadrature, with the cutoff radius chosen so the analytic tail
    bound sits below 1e-12 of the total.  At q = 2n/(n-2m) the weight exponent
    vanishes and both sides express one conformally invariant quantity.
    """
    if q < 1:
        raise DomainError(f"need q >= 1, got q={q}")
    n, m = v.params.n, v.params.m
    sphere_side = float(np.dot(rule.weights, np.abs(v.evaluate(rule.nodes)) ** q))

    exponent = n / 2.0 - m
    weight_exp = n - q * exponent
    ring = sphere_area(n - 1)

    def integrand(r):
        u = conformal_factor(r) ** exponent * float(v.evaluate(r_to_t(r))[0])
        return abs(u) ** q * conformal_factor(r) ** weight_exp * r ** (n - 1)

    def r_to_t(r):
        return (1.0 - r * r) / (1.0 + r * r)

    sup_v = _sup_abs(v)
    if sup_v == 0.0 and sphere_side == 0.0:
        return 0.0

    # tail of the plane integral beyond R: integrand <= sup|v|^q 2^n r^(-n-1)
    def tail_bound(R):
        return sup_v**q * ring * 2.0**n / (n * R**n)

    r_max, plane_side = 8.0, 0.0
    for _ in range(8):
        total, abserr = 0.0, 0.0
        for a, b in [(0.0, 1.0), (1.0, r_max)]:
            val, err = quad(integrand, a, b, limit=300, epsabs=1e-14, epsrel=1e-12)
            total += val
            abserr += err
        plane_side = ring * total
        if tail_bound(r_max) <= 1e-12 * max(plane_side, 1e-300):
            err_scale = max(plane_side, sphere_side, 1e-300)
            if ring * abserr > 1e-6 * err_scale:
                raise AccuracyError(
                    f"radial quadrature error {ring * abserr:.3e} too large for "
                    f"plane integral {plane_side:.6e}"
                )
            break
        r_max *= 4.0
    else:  # pragma: no cover - bounded v always terminates the loop
        raise AccuracyError(f"tail bound not met below r={r_max}")

    scale = max(abs(sphere_side), abs(plane_side))
    if scale == 0.0:
        return 0.0
    return abs(sphere_side - plane_side) / scale
