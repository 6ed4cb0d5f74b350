"""Command-line front end: load problem documents, solve, verify, emit results.

Output is machine-readable and byte-deterministic: JSON fields appear in a
fixed order and floats are serialized with 17 significant digits, so
identical invocations produce identical bytes. Exit codes: 0 success, 1 input
error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .checks import alexandrov_bound, check_comparison, gauss_curvature
from .errors import MongeAmpereError
from .geometry import ConvexPolygon
from .nodal import ma_masses, subgradient_cell
from .singular import (
    IntegrationConfig,
    fit_power_exponent,
    integrate_pogorelov,
    integrate_wang,
    pogorelov_constant,
    pogorelov_eval,
    wang_eval,
)
from .solver import DiracProblem, SolverConfig, discretize_density, solve_dirac

_DOC_KEYS = ("schema_version", "domain", "boundary", "nodes", "masses")
_BOUNDARY_TYPES = ("zero", "samples", "quadratic")


class _UsageError(Exception):
    """Raised in place of argparse's sys.exit(2) so usage errors map to exit 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(value) -> str:
    """Serialize to JSON text with deterministic float formatting."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(document: dict) -> None:
    sys.stdout.write(_fmt(document) + "\n")


def _fail(message: str) -> ValueError:
    return ValueError(message)


def _point_list(obj, name: str, width: int) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise _fail(f"'{name}' must be a non-empty list")
    out = []
    for row in obj:
        if not isinstance(row, list) or len(row) != width:
            raise _fail(f"every entry of '{name}' must be a list of {width} numbers")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise _fail(f"every entry of '{name}' must be a list of {width} numbers")
        out.append([float(v) for v in row])
    return np.asarray(out, dtype=float)


def _boundary_samples(boundary, domain: ConvexPolygon, per_edge: int) -> np.ndarray:
    if not isinstance(boundary, dict) or "type" not in boundary:
        raise _fail("'boundary' must be an object with a 'type' field")
    kind = boundary["type"]
    if kind not in _BOUNDARY_TYPES:
        raise _fail(f"boundary type must be one of {_BOUNDARY_TYPES}")
    allowed = {"type", "samples"} if kind == "samples" else {"type"}
    unknown = sorted(set(boundary) - allowed)
    if unknown:
        raise _fail(f"unknown boundary fields: {', '.join(unknown)}")
    verts = domain.vertices
    if kind == "zero":
        return np.column_stack([verts, np.zeros(len(verts))])
    if kind == "samples":
        if "samples" not in boundary:
            raise _fail("boundary type 'samples' requires a 'samples' list")
        return _point_list(boundary["samples"], "boundary.samples", 3)
    if per_edge < 1:
        raise _fail("--boundary-samples-per-edge must be at least 1")
    rows = []
    k = len(verts)
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        for j in range(per_edge):
            y = a + (b - a) * (j / per_edge)
            rows.append([y[0], y[1], 0.5 * float(y @ y)])
    return np.asarray(rows, dtype=float)


def _load_problem(path: str, per_edge: int) -> DiracProblem:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise _fail("problem document must be a JSON object")
    unknown = sorted(set(doc) - set(_DOC_KEYS))
    if unknown:
        raise _fail(f"unknown document fields: {', '.join(unknown)}")
    missing = sorted(set(_DOC_KEYS) - set(doc))
    if missing:
        raise _fail(f"missing document fields: {', '.join(missing)}")
    if doc["schema_version"] != "1":
        raise _fail("unsupported schema_version (expected \"1\")")
    domain = ConvexPolygon(_point_list(doc["domain"], "domain", 2))
    nodes = _point_list(doc["nodes"], "nodes", 2)
    samples = _boundary_samples(doc["boundary"], domain, per_edge)
    masses = doc["masses"]
    if isinstance(masses, dict):
        if masses != {"type": "density-one"}:
            raise _fail("the only supported masses object is {\"type\": \"density-one\"}")
        target = discretize_density(domain, 1.0, nodes)
    elif isinstance(masses, list):
        if len(masses) != len(nodes) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in masses
        ):
            raise _fail("'masses' must list one number per node")
        target = np.asarray([float(v) for v in masses], dtype=float)
    else:
        raise _fail("'masses' must be a list or {\"type\": \"density-one\"}")
    return DiracProblem.from_samples(domain, samples, nodes, target)


def _load_heights(path: str, n: int) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("heights")
    if not isinstance(doc, list) or len(doc) != n:
        raise _fail(f"heights file must hold a list (or 'heights' field) of {n} numbers")
    return np.asarray([float(v) for v in doc], dtype=float)


def _cells_csv(f) -> str:
    lines = ["node_index,vx,vy"]
    for i in range(len(f.nodes)):
        region = subgradient_cell(f, i)
        if region.is_bounded:
            for vx, vy in region.polygon.vertices:
                lines.append(f"{i},{format(vx, '.17g')},{format(vy, '.17g')}")
    return "\n".join(lines) + "\n"


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        mass_tolerance=args.tol,
        max_sweeps=args.max_sweeps,
        parallel=args.parallel,
    )


def _cmd_solve(args) -> int:
    problem = _load_problem(args.input, args.boundary_samples_per_edge)
    report = solve_dirac(problem, _solver_config(args))
    if args.output == "csv":
        sys.stdout.write(_cells_csv(report.solution))
    else:
        achieved = ma_masses(report.solution, parallel=args.parallel)
        _emit(
            {
                "heights": list(report.solution.heights),
                "achieved_masses": list(achieved.masses),
                "sweeps": report.sweeps_used,
                "residual": report.final_mass_residual,
                "converged": report.converged,
            }
        )
    return 0 if report.converged else 2


def _cmd_measure(args) -> int:
    problem = _load_problem(args.input, args.boundary_samples_per_edge)
    if args.heights is None:
        f = problem.envelope()
    else:
        f = problem.nodal(_load_heights(args.heights, len(problem.nodes)))
    if args.output == "csv":
        sys.stdout.write(_cells_csv(f))
        return 0
    mm = ma_masses(f, parallel=args.parallel)
    _emit({"masses": list(mm.masses), "total": mm.total})
    return 0


def _cmd_verify(args) -> int:
    problem = _load_problem(args.input, args.boundary_samples_per_edge)
    cfg = _solver_config(args)
    report = solve_dirac(problem, cfg)
    u = report.solution

    envelope_masses = ma_masses(problem.envelope(), parallel=args.parallel)
    env_max = float(envelope_masses.masses.max()) if len(envelope_masses.masses) else 0.0
    envelope_doc = {"max_interior_mass": env_max, "ok": env_max <= 1e-10}

    mu = ma_masses(u, parallel=args.parallel)
    if float(np.abs(problem.boundary_values).max()) <= 1e-12:
        bound = alexandrov_bound(u, measure=mu)
        worst = bound.worst
        alex_doc = {
            "checked": True,
            "overall": bound.overall,
            "worst_margin": worst.margin if worst is not None else None,
        }
        alex_ok = bound.overall
    else:
        alex_doc = {"checked": False, "reason": "nonzero boundary data"}
        alex_ok = True

    halved = DiracProblem(
        problem.domain,
        problem.boundary_points,
        problem.boundary_values,
        problem.nodes,
        problem.target_masses * 0.5,
    )
    half_report = solve_dirac(halved, cfg)
    comparison = check_comparison(u, half_report.solution, mu=mu)
    comp_doc = {
        "hypothesis": comparison.hypothesis,
        "conclusion": comparison.conclusion,
        "overall": comparison.overall,
    }

    converged = report.converged and half_report.converged
    overall = bool(envelope_doc["ok"] and alex_ok and comparison.overall and converged)
    _emit(
        {
            "converged": converged,
            "envelope": envelope_doc,
            "alexandrov": alex_doc,
            "comparison": comp_doc,
            "overall": overall,
        }
    )
    return 0 if converged else 2


def _cmd_pogorelov(args) -> int:
    n = args.n
    profile = integrate_pogorelov(n)
    c = pogorelov_constant(n)
    kappa = (2.0 * n - 2.0) / (n - 2.0)
    residual = np.abs(
        profile.h ** (n - 2) * (profile.h * profile.h_double_prime - kappa * profile.h_prime**2) - c
    )
    even_dev = float(np.abs(profile.h - profile.h[::-1]).max())
    doc = {
        "n": n,
        "c": c,
        "blow_up_time": profile.blow_up_time,
        "grid_range": [profile.t_min, profile.t_max],
        "max_ode_residual": float(residual.max()),
        "even_deviation": even_dev,
    }
    if args.check_exponent:
        radii = np.geomspace(1e-4, 1e-2, 9)
        grads = []
        for r in radii:
            x = np.zeros(n)
            x[0] = r
            x[-1] = 0.2
            grads.append(float(np.linalg.norm(pogorelov_eval(n, profile, x).gradient[:-1])))
        doc["gradient_exponent"] = fit_power_exponent(zip(radii, grads))
        doc["gradient_exponent_expected"] = 1.0 - 2.0 / n
    _emit(doc)
    return 0


def _cmd_wang(args) -> int:
    profile = integrate_wang()
    h0, hp0, hpp0 = profile.sample(0.0)
    h1 = profile.sample(1.0)[0]
    residual = np.abs(
        0.25 * profile.h_double_prime * (3.0 * profile.h + profile.grid * profile.h_prime)
        - profile.h_prime**2
        - 1.0
    )
    doc = {
        "h_at_0": h0,
        "h_double_prime_at_0": hpp0,
        "h_at_1": h1,
        "max_ode_residual": float(residual.max()),
        "even_deviation": float(np.abs(profile.h - profile.h[::-1]).max()),
    }
    if args.check_exponent:
        x2s = np.geomspace(1e-4, 1e-2, 9)
        u22s = [wang_eval(profile, 0.0, x2).hessian.array[1, 1] for x2 in x2s]
        doc["u22_exponent"] = fit_power_exponent(zip(x2s, u22s))
        doc["u22_exponent_expected"] = -0.5
    _emit(doc)
    return 0


def _hemisphere_data(x: np.ndarray):
    # graph of u = -sqrt(1 - |x|^2): grad = x/w, hess = (I + xx^T/w^2)/w, w = sqrt(1-|x|^2)
    w2 = 1.0 - float(x @ x)
    w = np.sqrt(w2)
    grad = x / w
    hess = (np.eye(2) + np.outer(x, x) / w2) / w
    return grad, hess


def _cmd_gauss(args) -> int:
    if args.input is not None:
        with open(args.input, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict) or set(doc) != {"gradient", "hessian"}:
            raise _fail("gauss input must be {\"gradient\": [...], \"hessian\": [[...], ...]}")
        grad = np.asarray(doc["gradient"], dtype=float).reshape(-1)
        hess = np.asarray(doc["hessian"], dtype=float)
        _emit({"curvature": gauss_curvature(grad, hess)})
        return 0
    points = [(0.3, 0.4), (-0.5, 0.1), (0.2, -0.6), (0.0, 0.0)]
    curvatures = []
    for p in points:
        grad, hess = _hemisphere_data(np.asarray(p, dtype=float))
        curvatures.append(gauss_curvature(grad, hess))
    _emit(
        {
            "points": [list(p) for p in points],
            "curvatures": curvatures,
            "max_deviation_from_unit": float(np.abs(np.asarray(curvatures) - 1.0).max()),
        }
    )
    return 0


def _add_problem_flags(sub):
    sub.add_argument("--input", required=True, help="problem document (JSON)")
    sub.add_argument("--tol", type=float, default=1e-8, help="relative mass tolerance")
    sub.add_argument("--max-sweeps", type=int, default=500)
    sub.add_argument(
        "--boundary-samples-per-edge",
        type=int,
        default=64,
        help="sampling density for boundary type 'quadratic'",
    )
    sub.add_argument("--output", choices=("json", "csv"), default="json")
    sub.add_argument("--parallel", action="store_true", help="evaluate cells concurrently")


def _build_parser() -> _Parser:
    parser = _Parser(prog="mongeampere", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    solve = subs.add_parser("solve", help="solve the Dirichlet problem for Dirac masses")
    _add_problem_flags(solve)
    solve.set_defaults(func=_cmd_solve)

    measure = subs.add_parser("measure", help="masses of a nodal function")
    _add_problem_flags(measure)
    measure.add_argument(
        "--heights",
        help="JSON file with the node heights (a list, or an object with a 'heights' field); "
        "defaults to the boundary envelope",
    )
    measure.set_defaults(func=_cmd_measure)

    verify = subs.add_parser(
        "verify", help="solve, then run envelope, depth-bound, and comparison checks"
    )
    _add_problem_flags(verify)
    verify.set_defaults(func=_cmd_verify)

    pogorelov = subs.add_parser("pogorelov", help="cylindrical singular profile")
    pogorelov.add_argument("--n", type=int, default=3, help="ambient dimension (>= 3)")
    pogorelov.add_argument("--check-exponent", action="store_true")
    pogorelov.set_defaults(func=_cmd_pogorelov)

    wang = subs.add_parser("wang", help="parabolic-region boundary profile")
    wang.add_argument("--check-exponent", action="store_true")
    wang.set_defaults(func=_cmd_wang)

    gauss = subs.add_parser("gauss", help="Gauss curvature from gradient and Hessian")
    gauss.add_argument("--input", help="JSON with 'gradient' and 'hessian'; hemisphere demo if omitted")
    gauss.set_defaults(func=_cmd_gauss)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        print("error: a subcommand is required (see --help)", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (MongeAmpereError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
