"""Command line interface.

Subcommands:

    analyze    reduce the problem, count and refine roots, report solutions
    verify     re-derive everything numerically and pass/fail the candidates
    norms      closed-form norms against the quadrature oracle
    plot-data  CSV of the reduced equation for external plotting
    selftest   quick self-contained sanity battery, no configuration needed

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 domain or numerical-convergence error, 4 kernel evaluation fault.

Structured output (--json) is deterministic: keys are sorted, floats carry 17
significant digits, and no timestamps or machine identifiers appear, so two
runs of the same configuration are byte-identical.  Human output rounds to 6
significant digits.
"""

import argparse
import json
import math
import sys

import numpy as np

from .base_solutions import (BallGeometry, ExteriorGeometry, ball_profile,
                             exterior_profile, norm_grad_u_ball,
                             norm_grad_u_exterior, norm_quadrature,
                             norm_u_ball, norm_u_exterior)
from .config import SCHEMA_VERSION, RunConfig, config_to_dict, load_config
from .errors import (ConfigError, DomainError, KernelEvalError,
                     KernelSyntaxError, QuadratureError)
from .hessian import binomial, k_hessian_radial
from .kernel import eval_kernel, kernel_to_string, parse_kernel
from .reduction import (ProblemInstance, ScanConfig, build_reduced,
                        roots_to_solutions, solve_roots, system_count_check)
from .specialfun import beta, incomplete_beta, sphere_area
from .verifier import (gamma_scaling_check, kelvin_checks, perturb_solution,
                       verify_ball, verify_exterior)

THRESHOLDS = {
    "interior_residual": 1e-6,
    "boundary_value": 1e-10,
    "boundary_gradient": 1e-8,
    "norm_consistency": 1e-8,
    "gamma_amplitude": 1e-6,
    "gamma_pde": 1e-6,
    "kelvin_identity": 1e-10,
    "kelvin_constant": 1e-8,
    "norm_agreement": 1e-8,
}


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def canonical_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17 significant digits for floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(inner + canonical_json(v, indent + 1) for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(key))}: {canonical_json(obj[key], indent + 1)}"
            for key in sorted(obj)
        )
        return "{\n" + items + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _f6(x: float) -> str:
    return format(x, ".6g")


def _exponent_doc(x: float):
    return "inf" if math.isinf(x) else x


def _instance_doc(cfg: RunConfig) -> dict:
    doc = config_to_dict(cfg)
    return {key: doc[key] for key in
            ("geometry", "k", "p", "q", "lambda", "kernel")}


def _geometry_line(geom) -> str:
    if isinstance(geom, BallGeometry):
        center = ", ".join(_f6(c) for c in geom.center)
        return f"ball n={geom.n} R={_f6(geom.radius)} center=({center})"
    return f"exterior n={geom.n}"


def _analyze(cfg: RunConfig):
    eq = build_reduced(cfg.instance)
    structure = solve_roots(eq, cfg.scan)
    report = system_count_check(eq, structure)
    return eq, structure, report


def cmd_analyze(cfg: RunConfig, as_json: bool, out) -> int:
    eq, structure, sysrep = _analyze(cfg)
    if as_json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "analyze",
            **_instance_doc(cfg),
            "coeff": eq.coeff,
            "norm_u": eq.norm_u,
            "norm_grad": eq.norm_grad,
            "rho": eq.rho,
            "target": eq.target,
            "scan": {"s_min": structure.s_min, "s_max": structure.s_max,
                     "n_grid": structure.n_grid},
            "count": structure.count,
            "roots": [
                {"s": r.s, "amplitude": r.amplitude, "c": r.c,
                 "residual": r.residual, "bracket": list(r.bracket)}
                for r in structure.roots
            ],
            "tangencies": [
                {"s": t.s, "gap": t.gap, "bracket": list(t.bracket)}
                for t in structure.tangencies
            ],
            "warnings": list(structure.warnings),
            "system_check": {"cluster_count": sysrep.cluster_count,
                             "root_count": sysrep.root_count,
                             "matched": sysrep.matched},
        }
        out.write(canonical_json(doc) + "\n")
        return 0
    w = out.write
    w(f"geometry       {_geometry_line(cfg.instance.geometry)}\n")
    w(f"operator       k={cfg.instance.k} (C(n,k)={eq.coeff})\n")
    w(f"exponents      p={_exponent_doc(cfg.instance.p)}, "
      f"q={_exponent_doc(cfg.instance.q)}\n")
    w(f"lambda         {_f6(cfg.instance.lam)}\n")
    w(f"kernel         {eq.kernel_text}\n")
    w(f"norm_u         {_f6(eq.norm_u)}\n")
    w(f"norm_grad      {_f6(eq.norm_grad)}\n")
    w(f"rho            {_f6(eq.rho)}\n")
    w(f"target         {_f6(eq.target)}\n")
    w(f"scan           s in [{_f6(structure.s_min)}, {_f6(structure.s_max)}], "
      f"{structure.n_grid} points\n")
    w(f"count          {structure.count}\n")
    for i, r in enumerate(structure.roots, 1):
        w(f"  root {i}: s={_f6(r.s)}, amplitude={_f6(r.amplitude)}, "
          f"c={_f6(r.c)}, residual={_f6(r.residual)}\n")
    if structure.tangencies:
        for t in structure.tangencies:
            w(f"tangency       s={_f6(t.s)}, gap={_f6(t.gap)} "
              "(near-touching, not counted)\n")
    else:
        w("tangencies     (none)\n")
    if structure.warnings:
        for msg in structure.warnings:
            w(f"warning        {msg}\n")
    else:
        w("warnings       (none)\n")
    w(f"system check   clusters={sysrep.cluster_count}, "
      f"matched={'yes' if sysrep.matched else 'NO'}\n")
    return 0


def _verify_one(cfg: RunConfig, solution):
    inst = cfg.instance
    exterior = isinstance(inst.geometry, ExteriorGeometry)
    if exterior:
        rep = verify_exterior(inst, solution, seed=cfg.seed)
    else:
        rep = verify_ball(inst, solution, seed=cfg.seed)
    gam = gamma_scaling_check(inst, solution, seed=cfg.seed)
    norm_dev = abs(rep.norm_u_quad - solution.s) / max(1.0, abs(solution.s))
    checks = {
        "interior_residual": rep.max_interior_residual,
        "boundary_value": rep.boundary_value_max,
        "boundary_gradient": rep.boundary_gradient_deviation,
        "norm_consistency": norm_dev,
        "gamma_amplitude": abs(gam.recovered_amplitude - 1.0),
        "gamma_pde": gam.max_pde_dev,
    }
    ok = all(value <= THRESHOLDS[name] for name, value in checks.items())
    doc = {
        "s": solution.s,
        "amplitude": solution.amplitude,
        "c": rep.c_reported,
        "norm_u_quad": rep.norm_u_quad,
        "norm_grad_quad": rep.norm_grad_quad,
        "kernel_value": rep.kernel_value,
        "gamma": gam.gamma,
        "recovered_amplitude": gam.recovered_amplitude,
        "checks": {name: {"value": value, "threshold": THRESHOLDS[name],
                          "pass": value <= THRESHOLDS[name]}
                   for name, value in checks.items()},
        "pass": ok,
    }
    if rep.far_field_ratio is not None:
        doc["far_field_ratio"] = rep.far_field_ratio
    return ok, doc


def cmd_verify(cfg: RunConfig, as_json: bool, out) -> int:
    eq, structure, sysrep = _analyze(cfg)
    solutions = roots_to_solutions(structure)
    if cfg.amplitude_scale != 1.0:
        solutions = tuple(perturb_solution(s, cfg.amplitude_scale)
                          for s in solutions)
    all_ok = sysrep.matched
    reports = []
    for sol in solutions:
        ok, doc = _verify_one(cfg, sol)
        all_ok = all_ok and ok
        reports.append(doc)

    kelvin_doc = None
    if isinstance(cfg.instance.geometry, ExteriorGeometry):
        kel = kelvin_checks(cfg.instance.geometry, seed=cfg.seed)
        kel_checks = {
            "image_pointwise": (kel.image_pointwise_dev,
                                THRESHOLDS["kelvin_identity"]),
            "laplacian_identity": (kel.laplacian_identity_dev,
                                   THRESHOLDS["kelvin_identity"]),
            "laplacian_constant": (kel.laplacian_constant_dev,
                                   THRESHOLDS["kelvin_constant"]),
            "boundary_identity": (kel.boundary_identity_dev,
                                  THRESHOLDS["kelvin_constant"]),
            "orthogonality": (kel.orthogonality_dev,
                              THRESHOLDS["kelvin_identity"]),
            "pythagoras": (kel.pythagoras_dev, THRESHOLDS["kelvin_identity"]),
            "double_transform": (kel.double_transform_dev,
                                 THRESHOLDS["kelvin_identity"]),
        }
        kel_ok = (all(v <= t for v, t in kel_checks.values())
                  and kel.removability_monotone)
        all_ok = all_ok and kel_ok
        kelvin_doc = {
            "checks": {name: {"value": v, "threshold": t, "pass": v <= t}
                       for name, (v, t) in kel_checks.items()},
            "removability_monotone": kel.removability_monotone,
            "removability_shrink": kel.removability_shrink,
            "pass": kel_ok,
        }

    verdict = "pass" if all_ok else "fail"
    if as_json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            **_instance_doc(cfg),
            "amplitude_scale": cfg.amplitude_scale,
            "count": structure.count,
            "system_check": {"cluster_count": sysrep.cluster_count,
                             "root_count": sysrep.root_count,
                             "matched": sysrep.matched},
            "roots": reports,
            "kelvin": kelvin_doc,
            "verdict": verdict,
        }
        out.write(canonical_json(doc) + "\n")
        return 0 if all_ok else 1
    w = out.write
    w(f"verdict: {verdict.upper()}\n")
    w(f"count: {structure.count} "
      f"(system check clusters={sysrep.cluster_count}, "
      f"matched={'yes' if sysrep.matched else 'NO'})\n")
    for i, doc in enumerate(reports, 1):
        w(f"root {i} (s={_f6(doc['s'])}):\n")
        for name, chk in doc["checks"].items():
            flag = "PASS" if chk["pass"] else "FAIL"
            w(f"  {name:<22} {_f6(chk['value']):>12}  "
              f"<= {_f6(chk['threshold'])}  {flag}\n")
    if kelvin_doc is not None:
        w("kelvin transform suite:\n")
        for name, chk in kelvin_doc["checks"].items():
            flag = "PASS" if chk["pass"] else "FAIL"
            w(f"  {name:<22} {_f6(chk['value']):>12}  "
              f"<= {_f6(chk['threshold'])}  {flag}\n")
        flag = "PASS" if kelvin_doc["removability_monotone"] else "FAIL"
        w(f"  removability monotone decay, shrink "
          f"{_f6(kelvin_doc['removability_shrink'])}  {flag}\n")
    return 0 if all_ok else 1


def _norm_rows(cfg: RunConfig):
    inst = cfg.instance
    geom = inst.geometry
    if isinstance(geom, BallGeometry):
        prof = ball_profile(geom)
        closed_u = lambda p: norm_u_ball(p, geom)
        closed_g = lambda q: norm_grad_u_ball(q, geom)
        r_lo, r_hi = 0.0, geom.radius
    else:
        prof = exterior_profile(geom)
        closed_u = lambda p: norm_u_exterior(p, geom)
        closed_g = lambda q: norm_grad_u_exterior(q, geom)
        r_lo, r_hi = 1.0, math.inf
    rows = []
    seen = set()
    for name, exponent, closed, fun in (
            ("u", inst.p, closed_u, prof.phi),
            ("u", math.inf, closed_u, prof.phi),
            ("grad_u", inst.q, closed_g, prof.dphi),
            ("grad_u", math.inf, closed_g, prof.dphi)):
        key = (name, exponent)
        if key in seen:
            continue
        seen.add(key)
        cval = closed(exponent)
        qval = norm_quadrature(fun, exponent, geom.n, r_lo, r_hi)
        rows.append({
            "field": name,
            "exponent": _exponent_doc(exponent),
            "closed_form": cval,
            "quadrature": qval,
            "rel_err": abs(cval - qval) / abs(cval),
        })
    return rows


def cmd_norms(cfg: RunConfig, as_json: bool, out) -> int:
    rows = _norm_rows(cfg)
    ok = all(row["rel_err"] <= THRESHOLDS["norm_agreement"] for row in rows)
    if as_json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "norms",
            **_instance_doc(cfg),
            "rows": rows,
            "threshold": THRESHOLDS["norm_agreement"],
            "verdict": "pass" if ok else "fail",
        }
        out.write(canonical_json(doc) + "\n")
        return 0 if ok else 1
    w = out.write
    w(f"geometry   {_geometry_line(cfg.instance.geometry)}\n")
    w(f"{'field':<8} {'exponent':>8} {'closed form':>16} "
      f"{'quadrature':>16} {'rel err':>10}\n")
    for row in rows:
        w(f"{row['field']:<8} {str(row['exponent']):>8} "
          f"{_f6(row['closed_form']):>16} {_f6(row['quadrature']):>16} "
          f"{_f6(row['rel_err']):>10}\n")
    w(f"verdict: {'PASS' if ok else 'FAIL'} "
      f"(threshold {_f6(THRESHOLDS['norm_agreement'])})\n")
    return 0 if ok else 1


def cmd_plot_data(cfg: RunConfig, out) -> int:
    eq, structure, _ = _analyze(cfg)
    grid = np.geomspace(structure.s_min, structure.s_max, structure.n_grid)
    gvals = eq.g(grid)
    rows = [(float(s), float(g), 0) for s, g in zip(grid, gvals)]
    rows.extend((r.s, eq.g(r.s), 1) for r in structure.roots)
    rows.sort(key=lambda row: (row[0], row[2]))
    out.write("s,g,target,is_root\n")
    for s, g, is_root in rows:
        out.write(f"{s:.17g},{g:.17g},{eq.target:.17g},{is_root}\n")
    return 0


def _selftest_checks():
    def sphere_areas():
        return (abs(sphere_area(2) - 2 * math.pi) < 1e-12
                and abs(sphere_area(3) - 4 * math.pi) < 1e-12
                and abs(sphere_area(4) - 2 * math.pi ** 2) < 1e-12)

    def beta_identity():
        lhs = beta(2.5, 3.5)
        rhs = math.gamma(2.5) * math.gamma(3.5) / math.gamma(6.0)
        return abs(lhs - rhs) < 1e-14 and abs(beta(2.5, 3.5) - beta(3.5, 2.5)) < 1e-15

    def incomplete_beta_values():
        full = abs(incomplete_beta(1.0, 2.0, 3.0) - beta(2.0, 3.0)) < 1e-12
        # integral of t (1-t)^(-2) over [0, 2/3] has the closed value 2 - ln 3
        neg = abs(incomplete_beta(2.0 / 3.0, 2.0, -1.0) - (2.0 - math.log(3.0))) < 1e-10
        return full and neg

    def ball_hessian_constant():
        geom = BallGeometry(n=4, radius=2.0)
        prof = ball_profile(geom)
        vals = k_hessian_radial(prof, np.array([0.3, 1.0, 1.9]), 4, 2)
        return bool(np.all(np.abs(vals - binomial(4, 2)) < 1e-12))

    def norm_agreement():
        geom = BallGeometry(n=3, radius=1.0)
        closed = norm_u_ball(2.0, geom)
        quad = norm_quadrature(ball_profile(geom).phi, 2.0, 3, 0.0, 1.0)
        return abs(closed - quad) / closed < 1e-9

    def kernel_round_trip():
        for text in ("1", "s*t", "-s^2", "min(s, t)/2", "exp(-(s-2)^2)"):
            tree = parse_kernel(text)
            if parse_kernel(kernel_to_string(tree)) != tree:
                return False
        return abs(eval_kernel(parse_kernel("2^-2"), 1.0, 1.0) - 0.25) < 1e-15

    def constant_kernel_root():
        inst = ProblemInstance(geometry=BallGeometry(n=2, radius=1.0), k=1,
                               p=math.inf, q=2.0, lam=3.0, kernel="1")
        structure = solve_roots(build_reduced(inst))
        if structure.count != 1:
            return False
        root = structure.roots[0]
        return abs(root.s - 0.75) < 1e-10 and abs(root.c - 1.5) < 1e-10

    return [
        ("sphere areas", sphere_areas),
        ("beta identity", beta_identity),
        ("incomplete beta", incomplete_beta_values),
        ("ball k-hessian constant", ball_hessian_constant),
        ("norm closed vs quadrature", norm_agreement),
        ("kernel round-trip", kernel_round_trip),
        ("constant kernel root", constant_kernel_root),
    ]


def cmd_selftest(out) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # a selftest must never crash the reporter
            ok = False
            out.write(f"selftest {name}: raised {type(exc).__name__}: {exc}\n")
        out.write(f"selftest {name}: {'PASS' if ok else 'FAIL'}\n")
        failures += 0 if ok else 1
    out.write(f"selftest: {'all passed' if failures == 0 else f'{failures} failed'}\n")
    return 0 if failures == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odkirch",
        description="Solution structure of overdetermined ball/exterior "
                    "problems with Kirchhoff-type coefficients",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("analyze", "reduce, count and refine roots"),
                       ("verify", "numerically verify constructed solutions"),
                       ("norms", "closed-form norms against quadrature")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("-c", "--config", required=True,
                        help="path to a JSON run configuration")
        sp.add_argument("--json", action="store_true",
                        help="deterministic machine-readable output")
    sp = sub.add_parser("plot-data", help="CSV dump of g(s) and the target level")
    sp.add_argument("-c", "--config", required=True)
    sp.add_argument("-o", "--output", default="-",
                    help="output file, '-' for stdout (default)")
    sub.add_parser("selftest", help="quick sanity battery, no config needed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "selftest":
            return cmd_selftest(out)
        cfg = load_config(args.config)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.json, out)
        if args.command == "verify":
            return cmd_verify(cfg, args.json, out)
        if args.command == "norms":
            return cmd_norms(cfg, args.json, out)
        if args.command == "plot-data":
            if args.output == "-":
                return cmd_plot_data(cfg, out)
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                return cmd_plot_data(cfg, fh)
    except (ConfigError, KernelSyntaxError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, QuadratureError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except KernelEvalError as exc:
        print(f"kernel fault: {exc}", file=sys.stderr)
        return 4
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
