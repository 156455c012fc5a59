"""Command-line interface: ``wickrot <command> [options]``.

Exit codes: 0 success or certificate, 2 honest no-certificate outcome, 1 error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import _linalg as la
from . import catalog as cat
from . import io
from .algebra import check_jacobi, killing_form, structural_classify
from .cartan import (
    conjugate_lie_cartan,
    conjugate_metric_cartan,
    is_lie_cartan,
    is_metric_cartan,
    wick_rotate,
)
from .metric import (
    DegenerateMetricError,
    bi_invariance_residual,
    compatibility_residual,
    curvature,
    riemann_symmetry_residuals,
    signature_of_form,
    torsion_residual,
)
from .minvec import (
    CARTAN_FOUND,
    MINIMAL_VECTOR_FOUND,
    BracketVector,
    FlowConfig,
    is_minimal,
    minimal_vector_flow,
    moment_norm,
    search_lie_cartan,
    theta_norm,
)
from .soliton import equivariance_report, soliton_decompose

EXIT_OK, EXIT_ERROR, EXIT_NO_CERT = 0, 1, 2
OK, NO_CERTIFICATE = "ok", "no_certificate"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _budget(text):
    try:
        if "x" in text:
            a, b = text.lower().split("x")
            starts, iters = int(a), int(b)
        else:
            starts, iters = int(text), 2000
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be STARTS or STARTSxITERATIONS, got {text!r}") from None
    if starts < 1 or iters < 1:
        raise argparse.ArgumentTypeError("budget values must be positive")
    return starts, iters


def _common(p, theta=False, theta_found=False):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", metavar="NAME", help="built-in example (see `catalog list`)")
    src.add_argument("--input", metavar="FILE", help="algebra document (JSON)")
    p.add_argument("--negate-metric", action="store_true", help="use -g instead of g")
    p.add_argument("--no-validate", action="store_true", help="skip the Jacobi check on load")
    p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    p.add_argument("--tol", type=float, default=1e-8, help="numerical tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--budget", type=_budget, default=(32, 2000),
                   help="Cartan search budget STARTSxITERATIONS (default 32x2000)")
    p.add_argument("--output", metavar="FILE", help="also write the primary artifact to FILE")
    if theta:
        help_ = "involution matrix file (JSON)" + (", or 'found' to search for one" if theta_found else "")
        p.add_argument("--theta", metavar="FILE", required=True, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wickrot", description="Cartan involutions, Wick rotations and GIT on Lie brackets.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    _common(sub.add_parser("analyze", help="Jacobi, structure, signature, Killing form, bi-invariance"))
    _common(sub.add_parser("curvature", help="Levi-Civita connection, Ricci operator, scalar curvature"))
    _common(sub.add_parser("soliton", help="decompose Ric = lambda I + D"))

    cartan = sub.add_parser("cartan", help="find, verify or conjugate Cartan involutions")
    csub = cartan.add_subparsers(dest="action", required=True, metavar="ACTION")
    _common(csub.add_parser("find", help="search for a Lie-algebra Cartan involution"))
    _common(csub.add_parser("verify", help="check a given involution"), theta=True)
    conj = csub.add_parser("conjugate", help="find phi with phi theta1 phi^-1 = theta2")
    _common(conj, theta=True)
    conj.add_argument("--theta2", metavar="FILE", required=True)
    conj.add_argument("--metric-only", action="store_true", help="conjugate inside O(p,q) only")

    wick = sub.add_parser("wick", help="Wick-rotate along an involution")
    _common(wick, theta=True, theta_found=True)

    minvec = sub.add_parser("minvec", help="moment map and norm-minimizing flow")
    msub = minvec.add_subparsers(dest="action", required=True, metavar="ACTION")
    flow = msub.add_parser("flow", help="run the norm-minimizing flow")
    _common(flow)
    flow.add_argument("--log", metavar="FILE", help="write line-delimited iteration records")
    flow.add_argument("--max-iter", type=int, default=10_000)
    _common(msub.add_parser("check", help="minimality test for the bracket"))

    eq = sub.add_parser("equivariance", help="theta-equivariance of nabla, ric, Ric and R")
    _common(eq, theta=True, theta_found=True)

    catp = sub.add_parser("catalog", help="built-in examples")
    catsub = catp.add_subparsers(dest="action", required=True, metavar="ACTION")
    lst = catsub.add_parser("list", help="names and descriptions")
    lst.add_argument("--json", action="store_true")
    show = catsub.add_parser("show", help="print an entry as an algebra document")
    show.add_argument("name")
    show.add_argument("--output", metavar="FILE")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _load(args):
    if args.catalog:
        L, m = cat.catalog(args.catalog)
        if not args.no_validate:
            rep = check_jacobi(L)
            if not rep.ok:
                raise io.JacobiError(rep.worst_triple, rep.max_residual)
    else:
        with open(args.input) as fh:
            L, m = io.parse_algebra(fh.read(), validate=not args.no_validate)
    if args.negate_metric:
        m = -m
    return L, m


def _read_matrix(path, n, key="theta"):
    with open(path) as fh:
        return io.parse_matrix(fh.read(), n, key)


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _involution_dict(inv):
    return {
        "theta": inv.matrix,
        "is_involution": inv.is_involution,
        "is_isometry": inv.is_metric_isometry,
        "g_theta_positive": inv.g_theta_positive,
        "is_automorphism": inv.is_automorphism,
        "is_metric_cartan": inv.is_metric_cartan,
        "is_lie_cartan": inv.is_lie_cartan,
        "g_theta_eigenvalues": list(inv.g_theta_eigenvalues),
        "residuals": inv.residuals,
    }


def _theta(args, L, m, inputs):
    """Involution from --theta FILE or by search when --theta found; None if the search fails."""
    if args.theta == "found":
        search = search_lie_cartan(L, m, args.budget, args.seed, args.tol)
        inputs["theta"] = "found"
        return search.involution.matrix if search.certified else None
    theta = _read_matrix(args.theta, L.dim)
    inputs["theta"] = io.document_hash(io.to_jsonable(theta))
    return theta


# ---------------------------------------------------------------------------
# commands; each returns (outputs, status)


def cmd_analyze(args, L, m, inputs):
    jac = check_jacobi(L, args.tol)
    rep = structural_classify(L, args.tol)
    kappa = killing_form(L)
    try:
        ksig = list(signature_of_form(kappa, args.tol))
    except DegenerateMetricError:
        ksig = None
    bres = bi_invariance_residual(L, m)
    exact = L.exact and m.exact
    return {
        "dim": L.dim,
        "jacobi": {"ok": jac.ok, "max_residual": jac.max_residual},
        "structure": {
            "abelian": rep.abelian, "nilpotent": rep.nilpotent, "solvable": rep.solvable,
            "semisimple": rep.semisimple, "reductive": rep.reductive,
            "derived_series_dims": list(rep.derived_series_dims),
            "lower_central_dims": list(rep.lower_central_dims),
            "center_dim": rep.center_dim, "radical_dim": rep.radical_dim,
            "nilpotency_class": rep.nilpotency_class,
        },
        "signature": list(m.signature),
        "killing_form": kappa,
        "killing_signature": ksig,
        "bi_invariant": bool(bres == 0 if exact else bres <= args.tol),
        "bi_invariance_residual": bres,
    }, OK


def cmd_curvature(args, L, m, inputs):
    c = curvature(L, m)
    return {
        "ricci_operator": c.ricci_operator,
        "ricci_tensor": c.ricci_tensor,
        "scalar": c.scalar,
        "residuals": {
            "torsion": torsion_residual(L, c.connection),
            "metric_compatibility": compatibility_residual(m, c.connection),
            **riemann_symmetry_residuals(m, c.riemann),
        },
    }, OK


def cmd_soliton(args, L, m, inputs):
    s = soliton_decompose(L, m, args.tol)
    return {
        "lambda": s.lam,
        "D": s.D,
        "D_eigenvalues": [round(float(v), 12) + 0.0 for v in s.eigenvalues()],
        "residual": s.residual,
        "classification": s.classification,
        "ricci_operator": s.ricci_operator,
    }, OK if s.accepted else NO_CERTIFICATE


def cmd_cartan_find(args, L, m, inputs):
    s = search_lie_cartan(L, m, args.budget, args.seed, args.tol)
    out = {
        "certified": s.certified,
        "best_residual": s.residual,
        "start_index": s.start_index,
        "starts": len(s.start_residuals),
        "distinct_certificates": _distinct(s.certificates, args.tol),
    }
    if s.certified:
        out["involution"] = _involution_dict(s.involution)
        if args.output:
            _write(args.output, json.dumps({"theta": io.to_jsonable(s.involution.matrix)}, indent=2) + "\n")
    else:
        out["note"] = "no certificate within budget; this is not a proof of nonexistence"
    return out, OK if s.certified else NO_CERTIFICATE


def _distinct(certs, tol):
    seen = []
    for _, inv in certs:
        mat = la.as_float(inv.matrix)
        if not any(np.max(np.abs(mat - s)) < max(tol, 1e-6) for s in seen):
            seen.append(mat)
    return len(seen)


def cmd_cartan_verify(args, L, m, inputs):
    theta = _read_matrix(args.theta, L.dim)
    inputs["theta"] = io.document_hash(io.to_jsonable(theta))
    inv = is_lie_cartan(L, m, theta, args.tol)
    return _involution_dict(inv), OK if inv.is_lie_cartan else NO_CERTIFICATE


def cmd_cartan_conjugate(args, L, m, inputs):
    t1 = _read_matrix(args.theta, L.dim)
    t2 = _read_matrix(args.theta2, L.dim)
    inputs["theta"] = io.document_hash(io.to_jsonable(t1))
    inputs["theta2"] = io.document_hash(io.to_jsonable(t2))
    if args.metric_only:
        conj = conjugate_metric_cartan(m, t1, t2, args.tol)
    else:
        for t in (t1, t2):
            if not is_lie_cartan(L, m, t, args.tol).is_lie_cartan:
                raise ValueError("both involutions must be Lie-algebra Cartan involutions")
        conj = conjugate_lie_cartan(L, m, t1, t2, (args.budget[0], min(args.budget[1], 500)),
                                    args.seed, args.tol)
    if conj is None:
        return {"found": False, "note": "no conjugator certified within budget"}, NO_CERTIFICATE
    return {
        "found": True,
        "phi": conj.phi,
        "method": conj.method,
        "conjugation_residual": conj.conjugation_residual,
        "isometry_residual": conj.isometry_residual,
        "automorphism_residual": conj.automorphism_residual,
    }, OK


def cmd_wick(args, L, m, inputs):
    theta = _theta(args, L, m, inputs)
    if theta is None:
        return {"note": "no Cartan involution certified within budget"}, NO_CERTIFICATE
    w = wick_rotate(L, m, theta, args.tol)
    prov = {"parent_hash": inputs["algebra"], "theta": theta, "basis_map": w.basis_map}
    doc = io.document_dict(w.algebra, w.metric, prov)
    if args.output:
        _write(args.output, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return {"document": doc, "hash": io.document_hash(doc), "signature": list(w.metric.signature),
            "n_t": w.n_t, "n_p": w.n_p}, OK


def cmd_minvec_flow(args, L, m, inputs):
    res = minimal_vector_flow(L, m, config=FlowConfig(max_iter=args.max_iter), verify_tol=args.tol)
    if args.log:
        res.write_log(args.log)
    out = {
        "status": res.status,
        "final_norm": res.final_norm,
        "final_moment_norm": res.final_moment_norm,
        "iterations": res.diagnostics.get("iterations"),
        "diagnostics": res.diagnostics,
        "transporter": res.transporter,
        "initial_norm": res.log[0][1],
    }
    if res.theta is not None:
        out["theta"] = res.theta
    ok = res.status in (MINIMAL_VECTOR_FOUND, CARTAN_FOUND)
    return out, OK if ok else NO_CERTIFICATE


def cmd_minvec_check(args, L, m, inputs):
    v = BracketVector.from_algebra(L, m)
    minimal = is_minimal(v, args.tol, seed=args.seed)
    return {
        "theta_norm": theta_norm(v),
        "moment_norm": moment_norm(v),
        "is_minimal": minimal,
        "reference_involution": v.theta0,
    }, OK if minimal else NO_CERTIFICATE


def cmd_equivariance(args, L, m, inputs):
    theta = _theta(args, L, m, inputs)
    if theta is None:
        return {"note": "no Cartan involution certified within budget"}, NO_CERTIFICATE
    rep = equivariance_report(L, m, theta, args.tol)
    return {**rep.as_dict(), "max_residual": rep.max_residual, "theta": theta}, OK


COMMANDS = {
    ("analyze", None): cmd_analyze,
    ("curvature", None): cmd_curvature,
    ("soliton", None): cmd_soliton,
    ("cartan", "find"): cmd_cartan_find,
    ("cartan", "verify"): cmd_cartan_verify,
    ("cartan", "conjugate"): cmd_cartan_conjugate,
    ("wick", None): cmd_wick,
    ("minvec", "flow"): cmd_minvec_flow,
    ("minvec", "check"): cmd_minvec_check,
    ("equivariance", None): cmd_equivariance,
}


def _human(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v and (isinstance(v, dict) or isinstance(v[0], list)):
                lines.append(f"{pad}{k}:")
                lines.extend(_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(value, list):
        for row in value:
            lines.append(f"{pad}{_inline(row)}")
    else:
        lines.append(f"{pad}{_inline(value)}")
    return lines


def _inline(v):
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return "-"
    return str(v)


def run_command(argv) -> tuple:
    """Parse and execute; returns (exit code, report dict or None)."""
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        return _run_catalog(args), None
    key = (args.command, getattr(args, "action", None))
    L, m = _load(args)
    inputs = {"algebra": io.algebra_hash(L, m)}
    if args.catalog:
        inputs["catalog"] = args.catalog
    if args.negate_metric:
        inputs["negate_metric"] = True
    outputs, status = COMMANDS[key](args, L, m, inputs)
    command = args.command if key[1] is None else f"{args.command} {key[1]}"
    report = {
        "schema_version": io.SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "outputs": io.to_jsonable(outputs),
        "tolerances": {"tol": args.tol},
        "seed": args.seed,
        "status": status,
    }
    if args.json:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join([f"{command}: {status}"] + _human(report["outputs"], 1)) + "\n")
    return (EXIT_OK if status == OK else EXIT_NO_CERT), report


def _run_catalog(args) -> int:
    if args.action == "list":
        if args.json:
            sys.stdout.write(json.dumps({n: cat.describe(n) for n in cat.names()}, indent=2, sort_keys=True) + "\n")
        else:
            width = max(len(n) for n in cat.names())
            for n in cat.names():
                sys.stdout.write(f"{n.ljust(width)}  {cat.describe(n)}\n")
        return EXIT_OK
    L, m = cat.catalog(args.name)
    text = io.emit_algebra(L, m)
    if args.output:
        _write(args.output, text)
    sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        code, _ = run_command(sys.argv[1:] if argv is None else argv)
        return code
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_ERROR
    except (cat.CatalogError, io.SchemaError, io.JacobiError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
