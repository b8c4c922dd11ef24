"""Command-line front end.

    fmethod singular --geometry so --n 3 --a 2 --format latex
    fmethod ode --geometry uu --n 1 --a 3
    fmethod verify --geometry so --n 3 --a 2
    fmethod rc --k1 4 --k2 6 --a 1 --terms 8 --check-delta
    fmethod orthopoly --family jacobi --degree 3 --alpha 1/2 --beta sym
    fmethod geometry --geometry sp --n 3

Exit codes: 0 success, 1 verification failure or no solution, 2 usage error.
The default output format comes from FMETHOD_FORMAT (text if unset).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .coeff import context
from .geometries import build_geometry
from .modforms import delta, eisenstein, is_proportional, rc_bracket
from .orthopoly import gegenbauer, jacobi
from .singular import (
    NoSingularVector,
    NotSaturated,
    ParameterDegeneracy,
    closed_form,
    ode_of_geometry,
    printed_ode,
    reconstruct_vector_valued,
    singular_operator,
    solve_singular,
    substitution_pattern,
    verify_intertwining,
)

FORMATS = ("text", "json", "latex")
ENV_FORMAT = "FMETHOD_FORMAT"


class UsageError(Exception):
    pass


def _param(text):
    """'sym' keeps a parameter symbolic; otherwise an exact rational."""
    if text is None or text == "sym":
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected 'sym' or a rational number, got {text!r}")


def _default_format():
    fmt = os.environ.get(ENV_FORMAT, "text")
    return fmt if fmt in FORMATS else "text"


def _add_geometry_args(p, need_a=True):
    p.add_argument("--geometry", required=True, type=str.lower, choices=("so", "sp", "uu"))
    p.add_argument("--n", type=int, required=True)
    if need_a:
        p.add_argument("--a", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=_param, default=None,
                   help="SO/SP parameter: 'sym' (default) or a rational")
    p.add_argument("--lambda1", type=_param, default=None, help="UU parameter lambda'")
    p.add_argument("--lambda2", type=_param, default=None, help="UU parameter lambda''")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmethod", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=FORMATS, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("singular", help="solve for the singular vector and emit the operator")
    _add_geometry_args(p)
    p.add_argument("--symbol", action="store_true", help="print the symbol instead of the operator")

    p = sub.add_parser("ode", help="radial reduction of the F-method system")
    _add_geometry_args(p)

    p = sub.add_parser("verify", help="run the intertwining or covariance oracle")
    _add_geometry_args(p)
    p.add_argument("--degree", type=int, default=None, help="monomial degree bound (default 2a+4)")

    p = sub.add_parser("rc", help="Rankin-Cohen bracket of two Eisenstein series")
    p.add_argument("--k1", type=int, required=True)
    p.add_argument("--k2", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--check-delta", action="store_true")

    p = sub.add_parser("orthopoly", help="Jacobi or Gegenbauer polynomial")
    p.add_argument("--family", required=True, choices=("jacobi", "gegenbauer"))
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--alpha", default="sym")
    p.add_argument("--beta", default="sym")

    p = sub.add_parser("geometry", help="generator tables of a geometry")
    _add_geometry_args(p, need_a=False)

    for sp in sub.choices.values():
        sp.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    return parser


def _geometry(args):
    fam = args.geometry.upper()
    if args.n < (1 if fam == "UU" else 2):
        raise UsageError(f"n out of range for {fam}")
    if getattr(args, "a", 0) < 0:
        raise UsageError("a must be nonnegative")
    if fam == "UU":
        params = (args.lambda1, args.lambda2)
    else:
        params = (args.lam,)
    return build_geometry(fam, args.n, params)


def _emit(out, fmt, text, data, latex):
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=False) + "\n")
    elif fmt == "latex":
        out.write(latex + "\n")
    else:
        out.write(text + "\n")


def cmd_singular(args, fmt, out):
    G = _geometry(args)
    if args.symbol:
        P = solve_singular(G, args.a)
        names = G.latex_names()
        _emit(out, fmt, str(P), {"geometry": G.family, "n": G.n, "a": args.a, "symbol": P.to_json()},
              P.to_latex(names))
        return 0
    fam = singular_operator(G, args.a)
    _emit(out, fmt, fam.to_text(), fam.to_json(), fam.to_latex())
    return 0


def cmd_ode(args, fmt, out):
    G = _geometry(args)
    ode = ode_of_geometry(G, args.a)
    ref = printed_ode(G, args.a)
    mine = ode.d_form if G.family == "UU" else ode.theta
    ok = mine == ref
    data = ode.to_json()
    data["matches_reference"] = ok
    names = dict(G.latex_names())
    shown = ode.d_form if G.family == "UU" else ode.theta
    _emit(out, fmt, f"{shown}\nmatches reference equation: {ok}", data,
          shown.to_latex(names))
    return 0 if ok else 1


def cmd_verify(args, fmt, out):
    G = _geometry(args)
    a = args.a
    if args.degree is not None and args.degree < 2 * a:
        raise UsageError("degree bound must be at least 2a")
    if G.family == "SP" and G.n > 2 or G.family == "UU" and G.n > 1:
        P = solve_singular(G, a)
        Psi = reconstruct_vector_valued(G, a, P)
        pat = substitution_pattern(G, a, P)
        res = Psi - pat
        ok = res.is_zero()
        report = {"geometry": G.family, "n": G.n, "a": a, "check": "covariance",
                  "ok": ok, "residual": str(res)}
        lines = [f"covariance check {G.family} n={G.n} a={a}: {'ok' if ok else 'FAILED'}",
                 f"  residual: {res}"]
    else:
        rep = verify_intertwining(G, a, args.degree)
        ok = rep.ok
        report = rep.to_json()
        report["check"] = "intertwining"
        lines = [f"intertwining check {G.family} n={G.n} a={a} degree<={rep.degree_bound} "
                 f"({rep.monomials_checked} monomials): {'ok' if ok else 'FAILED'}"]
        for g, r in rep.residuals.items():
            lines.append(f"  {g}: {r}")
    _emit(out, fmt, "\n".join(lines), report, "\\text{" + lines[0] + "}")
    return 0 if ok else 1


def cmd_rc(args, fmt, out):
    if args.a < 0 or args.terms < 0:
        raise UsageError("a and terms must be nonnegative")
    try:
        f1 = eisenstein(args.k1, args.terms)
        f2 = eisenstein(args.k2, args.terms)
    except ValueError as exc:
        raise UsageError(str(exc))
    b = rc_bracket(f1, args.k1, f2, args.k2, args.a)
    data = b.to_json()
    text = str(b)
    code = 0
    if args.check_delta:
        c = is_proportional(b, delta(args.terms))
        data["delta_scalar"] = None if c is None else str(c)
        text += f"\nproportional to Delta: {'no' if c is None else c}"
        code = 0 if c is not None else 1
    latex = " + ".join(f"{c} q^{{{i}}}" for i, c in enumerate(b.coeffs) if c) or "0"
    _emit(out, fmt, text, data, latex)
    return code


def cmd_orthopoly(args, fmt, out):
    if args.degree < 0:
        raise UsageError("degree must be nonnegative")
    ctx = context(("alpha", "beta"))
    al = ctx.gen("alpha") if args.alpha == "sym" else ctx(_param(args.alpha))
    if args.family == "jacobi":
        be = ctx.gen("beta") if args.beta == "sym" else ctx(_param(args.beta))
        p = jacobi(args.degree, al, be, ctx)
    else:
        p = gegenbauer(args.degree, al, ctx)
    _emit(out, fmt, str(p), p.to_json(), p.to_latex({"alpha": r"\alpha", "beta": r"\beta"}))
    return 0


def cmd_geometry(args, fmt, out):
    G = _geometry(args)
    data = G.to_json()
    text = "\n".join(f"{k}: {v}" for k, v in data.items())
    _emit(out, fmt, text, data, "\\text{" + f"{G.family}, n={G.n}" + "}")
    return 0


COMMANDS = {
    "singular": cmd_singular,
    "ode": cmd_ode,
    "verify": cmd_verify,
    "rc": cmd_rc,
    "orthopoly": cmd_orthopoly,
    "geometry": cmd_geometry,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or _default_format()
    try:
        return COMMANDS[args.command](args, fmt, out)
    except UsageError as exc:
        err.write(f"fmethod: error: {exc}\n")
        return 2
    except (NoSingularVector, ParameterDegeneracy, NotSaturated) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        out.write(json.dumps(report) + "\n")
        return 1
    except (ValueError, KeyError) as exc:
        err.write(f"fmethod: error: {exc}\n")
        return 2


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
