"""Command-line front end: computations, probes, and the verification suite.

Subcommands: eigenvalues | sharp-constant | minimize | solve | probe | verify
| sweep.  Options can also come from a plain key=value config file
(--config); explicit flags win.  Exit codes: 0 success, 2 usage/config error,
3 numerical check failure, 4 internal inconsistency.

Reports are JSON with an inputs echo, results carrying their tolerances, and
a provenance block; with a fixed seed two runs differ only in the wall-time
field.  Tables are RFC-4180 CSV with repr-formatted floats, so they re-parse
to identical values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .conformal import (
    BubbleParams,
    angle_from_radius,
    bubble_on_sphere,
    pullback_to_plane,
    radius_from_angle,
)
from .errors import AccuracyError, DomainError, InconsistencyError, ToolkitError
from .kernels import funk_hecke_spectrum, green_constant, hls_functional
from .lane_emden import (
    Nonlinearity,
    constant_solution,
    probe_start,
    solve_green,
    solve_newton,
    uniqueness_probe,
)
from .rayleigh import (
    OptimizerConfig,
    _Workspace,
    minimize as minimize_quotient,
    sharp_constant,
)
from .spectral import (
    SphereParams,
    ZonalFunction,
    build_quadrature,
    default_rule_size,
    gjms_eigenvalues,
    gjms_lambda0,
    laplace_beltrami_ode_residual,
    lp_norm,
    quadratic_form,
    sphere_area,
    zonal_basis,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_INCONSISTENT = 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# option plumbing


def _parse_float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_terms(text: str) -> list[tuple[float, float]]:
    """Parse a right-hand side given as 'a1:p1,a2:p2'."""
    terms = []
    for i, tok in enumerate(t for t in text.split(",") if t.strip()):
        parts = tok.split(":")
        if len(parts) != 2:
            raise UsageError(f"term {i + 1}: expected a:p, got {tok!r}")
        try:
            terms.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise UsageError(f"term {i + 1}: non-numeric entry in {tok!r}") from exc
    return terms


def read_config(path: str) -> dict:
    """Plain key=value file; '#' starts a comment, keys use flag names."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def _explicit_flags(argv: list[str]) -> set[str]:
    out = set()
    for tok in argv:
        if tok.startswith("--"):
            out.add(tok.split("=", 1)[0][2:].replace("-", "_"))
    return out


def _convert_like(current, raw: str):
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if current is None:
        for cast in (int, float):
            try:
                return cast(raw)
            except ValueError:
                pass
    return raw


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill options from the key=value file; explicitly passed flags win."""
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    known = set(vars(args)) - {"func", "config", "_argv"}
    explicit = _explicit_flags(args._argv)
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"config field {key!r} is not an option of this command")
        if key in explicit:
            continue
        try:
            setattr(args, key, _convert_like(getattr(args, key), raw))
        except ValueError as exc:
            raise UsageError(f"config field {key!r}: cannot parse {raw!r}") from exc
    return args


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_table(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def make_report(command: str, inputs: dict, results: dict, started: float, **provenance) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "results": results,
        "provenance": {
            "toolkit_version": __version__,
            "wall_time_s": time.time() - started,
            **provenance,
        },
    }


def _report_text(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _nonlinearity(args, params: SphereParams) -> Nonlinearity:
    if getattr(args, "f", None):
        return Nonlinearity.from_terms(_parse_terms(args.f), params)
    if getattr(args, "p", None) is not None:
        return Nonlinearity.single_power(1.0, args.p, params)
    raise UsageError("provide a right-hand side via --f or --p")


# ---------------------------------------------------------------------------
# subcommands


def cmd_eigenvalues(args) -> int:
    params = SphereParams(n=args.n, m=args.m)
    K = args.K
    spec = gjms_eigenvalues(params, K)
    kernel = funk_hecke_spectrum(params, K)
    gc = green_constant(params, kernel=kernel, gjms=spec)
    rows = [
        [k, float(spec.lam[k]), float(kernel.mu[k]), float(gc.g_mn * kernel.mu[k] * spec.lam[k])]
        for k in range(K + 1)
    ]
    if args.format == "csv":
        _emit(_csv_table(["k", "lambda", "mu", "g_mu_lambda"], rows), args.out)
    else:
        started = time.time()
        report = make_report(
            "eigenvalues",
            {"m": args.m, "n": args.n, "K": K},
            {
                "g_mn": gc.g_mn,
                "c_n": gc.c_n,
                "rows": [
                    {"k": k, "lambda": lam, "mu": mu, "g_mu_lambda": glm}
                    for k, lam, mu, glm in rows
                ],
                "identity_tolerance": 1e-8,
            },
            started,
            seed=None,
            K=K,
            Q=None,
        )
        _emit(_report_text(report), args.out)
    return EXIT_OK


def cmd_sharp_constant(args) -> int:
    ps = _parse_float_list(args.p)
    rows = []
    for p in ps:
        rows.append([args.m, args.n, float(p), sharp_constant(args.m, args.n, p)])
    if args.format == "csv":
        _emit(_csv_table(["m", "n", "p", "sharp_constant"], rows), args.out)
    else:
        started = time.time()
        report = make_report(
            "sharp-constant",
            {"m": args.m, "n": args.n, "p": ps},
            {"rows": [{"m": m, "n": n, "p": p, "sharp_constant": s} for m, n, p, s in rows]},
            started,
            seed=None,
            K=None,
            Q=None,
        )
        _emit(_report_text(report), args.out)
    return EXIT_OK


def cmd_minimize(args) -> int:
    started = time.time()
    if args.p is None:
        raise UsageError("minimize needs --p (flag or config)")
    params = SphereParams(n=args.n, m=args.m)
    cfg = OptimizerConfig(
        params=params,
        p=args.p,
        K=args.K,
        starts=args.starts,
        seed=args.seed,
        step0=args.step0,
        tol_grad=args.tol,
        max_iter=args.max_iter,
    )
    result = minimize_quotient(cfg)
    if args.trace_out:
        result.write_trace_csv(args.trace_out)
    S = sharp_constant(args.m, args.n, args.p)
    report = make_report(
        "minimize",
        {
            "m": args.m,
            "n": args.n,
            "p": args.p,
            "K": args.K,
            "starts": args.starts,
            "seed": args.seed,
            "tol_grad": args.tol,
            "max_iter": args.max_iter,
            "step0": args.step0,
        },
        {
            "minimization": result.to_dict(),
            "sharp_constant": S,
            "relative_error": abs(result.value / S - 1.0),
        },
        started,
        seed=args.seed,
        K=args.K,
        Q=default_rule_size(args.K),
    )
    _emit(_report_text(report), args.out)
    return EXIT_OK


def _solve_initial(args, params: SphereParams, f: Nonlinearity, rule) -> ZonalFunction:
    choice = args.init
    K = args.K
    c_star = constant_solution(args.m, args.n, f)
    base = c_star if (c_star is not None and c_star > 0) else 1.0
    if choice == "constant":
        c = np.zeros(K + 1)
        c[0] = base * math.sqrt(params.area)
        return ZonalFunction(params, c)
    if choice.startswith("bubble:"):
        lam = float(choice.split(":", 1)[1])
        u = bubble_on_sphere(BubbleParams(lam=lam, params=params), rule, K)
        # scaled so the bubble family solves the unit-coefficient critical power
        p_max = f.max_exponent
        scale = 1.0
        if p_max > 1.0:
            scale = (gjms_lambda0(args.m, args.n) * 2.0 ** (2 * args.m)) ** (1.0 / (p_max - 1.0))
        return ZonalFunction(params, scale * u.coeffs)
    if choice.startswith("random"):
        amp_seed = args.seed
        rng = np.random.default_rng([amp_seed, 0])
        return probe_start(params, K, base, rng, rule)
    raise UsageError(f"unknown --init {choice!r}; use constant, bubble:LAM, or random")


def cmd_solve(args) -> int:
    started = time.time()
    params = SphereParams(n=args.n, m=args.m)
    f = _nonlinearity(args, params)
    rule = build_quadrature(args.n, args.Q if args.Q else default_rule_size(args.K))
    init = _solve_initial(args, params, f, rule)
    solver = solve_green if args.solver == "green" else solve_newton
    result = solver(args.m, args.n, f, init, tol=args.tol, max_iter=args.max_iter, rule=rule)
    report = make_report(
        "solve",
        {
            "m": args.m,
            "n": args.n,
            "f": f.describe(),
            "classification": f.classification,
            "K": args.K,
            "Q": rule.order,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "init": args.init,
            "solver": args.solver,
            "seed": args.seed,
        },
        {
            "solve": result.to_dict(),
            "constant_solution": constant_solution(args.m, args.n, f),
            "tolerance": args.tol,
        },
        started,
        seed=args.seed,
        K=args.K,
        Q=rule.order,
    )
    _emit(_report_text(report), args.out)
    return EXIT_OK


def cmd_probe(args) -> int:
    started = time.time()
    params = SphereParams(n=args.n, m=args.m)
    f = _nonlinearity(args, params)
    report_obj = uniqueness_probe(
        args.m, args.n, f, trials=args.trials, seed=args.seed, K=args.K, tol=args.tol
    )
    report = make_report(
        "probe",
        {
            "m": args.m,
            "n": args.n,
            "f": f.describe(),
            "trials": args.trials,
            "seed": args.seed,
            "K": args.K,
            "tol": args.tol,
        },
        {"probe": report_obj.to_dict(), "tolerance": args.tol},
        started,
        seed=args.seed,
        K=args.K,
        Q=default_rule_size(args.K),
    )
    _emit(_report_text(report), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    ms = [int(v) for v in _parse_float_list(args.m)]
    ns = [int(v) for v in _parse_float_list(args.n)]
    ps = _parse_float_list(args.p)
    rows = []
    for m in ms:
        for n in ns:
            for p in ps:
                try:
                    params = SphereParams(n=n, m=m)
                    if not (2.0 <= p <= params.critical_norm_exponent):
                        continue
                    S = sharp_constant(m, n, p)
                except DomainError:
                    continue
                row = [m, n, float(p), S]
                if args.starts > 0:
                    # the optimizer needs the open exponent range; boundary
                    # points keep their closed-form column with blank cells
                    try:
                        cfg = OptimizerConfig(
                            params=params, p=p, K=args.K, starts=args.starts, seed=args.seed
                        )
                    except DomainError:
                        row.extend(["", ""])
                    else:
                        res = minimize_quotient(cfg)
                        row.extend([res.value, abs(res.value / S - 1.0)])
                rows.append(row)
    header = ["m", "n", "p", "sharp_constant"]
    if args.starts > 0:
        header += ["minimize_value", "relative_error"]
    _emit(_csv_table(header, rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suite


def _verify_checks(m: int, n: int, K: int, seed: int, trials: int):
    """Yield (name, margin, tolerance, passed) rows; margin <= tolerance passes."""
    params = SphereParams(n=n, m=m)
    rule = build_quadrature(n, default_rule_size(K))
    B = zonal_basis(rule, params, K)
    area = sphere_area(n)
    rng = np.random.default_rng(seed)

    rows = []

    def add(name, margin, tol):
        rows.append((name, float(margin), float(tol), bool(margin <= tol)))

    add("quadrature-total-mass", abs(float(np.sum(rule.weights)) / area - 1.0), 1e-12)

    worst = 0.0
    for j in range(0, 2 * rule.order, max(1, rule.order // 8)):
        num = rule.integrate(rule.nodes**j)
        if j % 2 == 1:
            worst = max(worst, abs(num) / area)
        else:
            lb = math.lgamma((j + 1) / 2) + math.lgamma(n / 2) - math.lgamma((j + 1) / 2 + n / 2)
            exact = sphere_area(n - 1) * math.exp(lb)
            worst = max(worst, abs(num - exact) / exact)
    add("quadrature-moments", worst, 1e-12)

    gram = B.T @ (rule.weights[:, None] * B)
    add("basis-gram-identity", float(np.max(np.abs(gram - np.eye(K + 1)))), 1e-10)

    add("laplace-beltrami-ode", laplace_beltrami_ode_residual(params, K), 1e-8)

    spec = gjms_eigenvalues(params, K)
    from scipy.special import gammaln

    kk = np.arange(K + 1, dtype=float)
    ref = np.exp(gammaln(kk + n / 2 + m) - gammaln(kk + n / 2 - m))
    add("spectrum-cross-form", float(np.max(np.abs(spec.lam / ref - 1.0))), 1e-10)
    add("spectrum-monotone", 0.0 if np.all(np.diff(spec.lam) > 0) else 1.0, 0.5)

    gap_worst = 0.0
    for _ in range(trials):
        u = ZonalFunction(params, rng.standard_normal(K + 1))
        gap = quadratic_form(u, spec) - spec.lam[0] * u.l2_norm() ** 2
        gap_worst = max(gap_worst, -gap / quadratic_form(u, spec))
    add("spectral-gap", gap_worst, 1e-12)

    kernel = funk_hecke_spectrum(params, K)
    gc = green_constant(params, kernel=kernel, gjms=spec)  # raises on gross violation
    add(
        "green-identity",
        float(np.max(np.abs(gc.g_mn * kernel.mu * spec.lam - 1.0))),
        1e-8,
    )
    add("kernel-monotone", 0.0 if np.all(np.diff(kernel.mu) < 0) else 1.0, 0.5)

    hls_worst = 0.0
    for _ in range(trials):
        v = ZonalFunction(params, rng.standard_normal(K + 1))
        excess = hls_functional(v, kernel) - kernel.mu[0] * v.l2_norm() ** 2
        hls_worst = max(hls_worst, excess / (kernel.mu[0] * v.l2_norm() ** 2))
    add("kernel-energy-bound", hls_worst, 1e-12)

    jensen_worst = 0.0
    for _ in range(trials):
        vals = np.abs(rng.standard_normal(rule.order)) + 0.01
        for p_test in (1.5, 2.0, 3.0):
            mean_u = float(np.dot(rule.weights, vals)) / area
            mean_up = float(np.dot(rule.weights, vals**p_test)) / area
            jensen_worst = max(jensen_worst, (mean_u**p_test - mean_up) / mean_up)
    add("jensen-mean-power", jensen_worst, 1e-12)

    r = np.linspace(0.0, 20.0, 200)
    rt = np.max(np.abs(radius_from_angle(angle_from_radius(r)) - r) / np.maximum(1.0, r))
    t = np.linspace(-1 + 1e-6, 1.0, 200)
    rt = max(rt, float(np.max(np.abs(angle_from_radius(radius_from_angle(t)) - t))))
    add("stereographic-roundtrip", rt, 1e-14)

    v = ZonalFunction(params, rng.standard_normal(K + 1))
    grid = np.linspace(0.0, 30.0, 300)
    prof = pullback_to_plane(v, grid)
    sup_v = float(np.max(np.abs(v.evaluate(np.cos(np.linspace(0, np.pi, 2048))))))
    bound = sup_v * 2.0 ** (n / 2 - m) + 1e-9
    decay = float(np.max(np.abs(prof.values) * (1 + grid**2) ** (n / 2 - m))) - bound
    add("pullback-decay-bound", max(decay, 0.0), 0.0)

    p_crit = params.critical_norm_exponent
    norms = []
    big_rule = build_quadrature(n, default_rule_size(72))
    for lam_b in (0.5, 2.0):
        ub = bubble_on_sphere(BubbleParams(lam=lam_b, params=params), big_rule, 72)
        norms.append(lp_norm(ub, p_crit, big_rule))
    add("bubble-critical-norm", abs(norms[0] / norms[1] - 1.0), 1e-6)

    p_mid = 0.5 * (2.0 + p_crit)
    S = sharp_constant(m, n, p_mid)
    ws = _Workspace(params, K)
    const = np.zeros(K + 1)
    const[0] = 1.0
    add("quotient-at-constant", abs(ws.quotient(const, p_mid) / S - 1.0), 1e-12)

    low_worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(K + 1)
        low_worst = max(low_worst, (S - ws.quotient(u, p_mid)) / S)
    add("quotient-lower-bound", low_worst, 1e-8)

    fd_worst = 0.0
    euler_worst = 0.0
    h = 1e-5
    for _ in range(max(trials // 4, 2)):
        kk = np.arange(K + 1, dtype=float)
        c = rng.standard_normal(K + 1) * 0.3 / (1.0 + kk * kk)
        c[0] = 1.0
        c = ws.normalize(c, p_mid)
        val, grad = ws.quotient_and_gradient(c, p_mid)
        euler_worst = max(
            euler_worst,
            abs(float(np.dot(grad, c)))
            / max(np.linalg.norm(grad) * np.linalg.norm(c), 1.0),
        )
        fd = np.zeros_like(grad)
        for k in range(K + 1):
            e = np.zeros(K + 1)
            e[k] = h
            fd[k] = (ws.quotient(c + e, p_mid) - ws.quotient(c - e, p_mid)) / (2 * h)
        scale = max(np.max(np.abs(grad)), np.max(np.abs(fd)))
        fd_worst = max(fd_worst, np.max(np.abs(grad - fd)) / scale)
    add("gradient-finite-difference", fd_worst, 1e-6)
    add("gradient-euler-orthogonality", euler_worst, 1e-10)

    return rows


def cmd_verify(args) -> int:
    started = time.time()
    rows = _verify_checks(args.m, args.n, args.K, args.seed, args.trials)
    all_pass = all(passed for *_, passed in rows)
    lines = [f"{'check':34s} {'margin':>12s} {'tolerance':>12s} {'status':>8s}"]
    for name, margin, tol, passed in rows:
        lines.append(f"{name:34s} {margin:12.3e} {tol:12.3e} {'pass' if passed else 'FAIL':>8s}")
    lines.append(f"{'overall':34s} {'':12s} {'':12s} {'pass' if all_pass else 'FAIL':>8s}")
    text = "\n".join(lines) + "\n"
    if args.format == "json":
        report = make_report(
            "verify",
            {"m": args.m, "n": args.n, "K": args.K, "seed": args.seed, "trials": args.trials},
            {
                "checks": [
                    {"name": nm, "margin": mg, "tolerance": tl, "passed": ps}
                    for nm, mg, tl, ps in rows
                ],
                "passed": all_pass,
            },
            started,
            seed=args.seed,
            K=args.K,
            Q=default_rule_size(args.K),
        )
        _emit(_report_text(report), args.out)
    else:
        _emit(text, args.out)
    return EXIT_OK if all_pass else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gjmslab",
        description="Zonal spectral toolkit for conformal operators on round spheres.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"gjmslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, m=True, n=True, K=None, seed=False, tol=None, out=True, fmt=None):
        p.add_argument("--config", help="key=value option file; explicit flags win")
        if m:
            p.add_argument("--m", type=int, required=False, default=1)
        if n:
            p.add_argument("--n", type=int, required=False, default=3)
        if K is not None:
            p.add_argument("--K", type=int, default=K)
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol)
        if out:
            p.add_argument("--out", help="output path (default stdout)")
        if fmt:
            p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("eigenvalues", help="operator and kernel spectra with the inverse identity")
    common(p, K=32, fmt=("csv", "json"))
    p.set_defaults(func=cmd_eigenvalues)

    p = sub.add_parser("sharp-constant", help="closed-form sharp constants over a p grid")
    common(p, fmt=("csv", "json"))
    p.add_argument("--p", default="", help="comma-separated exponents (may be empty)")
    p.set_defaults(func=cmd_sharp_constant)

    p = sub.add_parser("minimize", help="multistart quotient minimization")
    common(p, K=32, seed=True, tol=1e-9, fmt=("json",))
    p.add_argument("--p", type=float, default=None, help="norm exponent (required here or in config)")
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--step0", type=float, default=1.0)
    p.add_argument("--trace-out", help="CSV path for the convergence trace")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("solve", help="one Newton or inverse-iteration solve")
    common(p, K=32, seed=True, tol=1e-12, fmt=("json",))
    p.add_argument("--p", type=float, help="single-power right-hand side u^p")
    p.add_argument("--f", help="general right-hand side 'a1:p1,a2:p2'")
    p.add_argument("--Q", type=int, default=0, help="quadrature size (default 2K+8)")
    p.add_argument("--max-iter", type=int, default=60)
    p.add_argument("--init", default="constant", help="constant | bubble:LAM | random")
    p.add_argument("--solver", choices=("newton", "green"), default="newton")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe", help="multistart uniqueness probe")
    common(p, K=24, seed=True, tol=1e-12, fmt=("json",))
    p.add_argument("--p", type=float, help="single-power right-hand side u^p")
    p.add_argument("--f", help="general right-hand side 'a1:p1,a2:p2'")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("verify", help="invariant suite with per-check margins")
    common(p, K=16, seed=True, fmt=("text", "json"))
    p.add_argument("--trials", type=int, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="sharp constants (and optional minimization) over a grid")
    common(p, m=False, n=False, K=16, seed=True)
    p.add_argument("--m", default="", help="comma-separated orders")
    p.add_argument("--n", default="", help="comma-separated dimensions")
    p.add_argument("--p", default="", help="comma-separated exponents")
    p.add_argument("--starts", type=int, default=0, help="if > 0, also run minimize per point")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = argv
        args = _apply_config(args)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors already printed
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return EXIT_USAGE if code not in (0,) else 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (AccuracyError, ToolkitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
