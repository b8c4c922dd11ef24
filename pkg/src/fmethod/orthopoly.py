"""Jacobi and Gegenbauer polynomials with symbolic parameters.

Gamma ratios are always expanded as rising factorials so that parameters stay
polynomial symbols.  Polynomials are :class:`Poly` objects in the single
variable ``t``; inflations live in the two variables ``(x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .coeff import ParamContext, RatFunc, context
from .weyl import Poly

__all__ = [
    "OrthoPoly",
    "ODE_KINDS",
    "gegenbauer",
    "gegenbauer_from_jacobi_factor",
    "inflate",
    "jacobi",
    "ode_residual",
    "rising",
    "theta_apply",
]

T_VARS = ("t",)
XY_VARS = ("x", "y")


def rising(x, k: int):
    """Pochhammer symbol (x)_k = x (x+1) ... (x+k-1)."""
    out = Fraction(1) if not isinstance(x, RatFunc) else x.ctx.one
    for i in range(k):
        out = out * (x + i)
    return out


def _ctx_of(*vals) -> ParamContext:
    for v in vals:
        if isinstance(v, RatFunc):
            return v.ctx
    return context(())


@dataclass(frozen=True)
class OrthoPoly:
    family: str            # "jacobi" or "gegenbauer"
    degree: int
    params: tuple          # (alpha, beta) or (alpha,)
    poly: Poly             # polynomial in t

    def __str__(self):
        return str(self.poly)

    def to_json(self):
        return {
            "family": self.family,
            "degree": self.degree,
            "params": [str(p) for p in self.params],
            "coeffs": [str(self.poly.coeff((i,))) for i in range(self.degree + 1)],
        }

    def to_latex(self, namemap=None) -> str:
        return self.poly.to_latex(namemap)


def _t_poly(ctx, coeffs) -> Poly:
    return Poly(T_VARS, ctx, {(i,): c for i, c in enumerate(coeffs) if c})


def jacobi(ell: int, alpha, beta, ctx: ParamContext | None = None) -> OrthoPoly:
    """P_ell^{alpha,beta}(t) from the finite sum in powers of (t-1)/2."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    ctx = ctx or _ctx_of(alpha, beta)
    alpha, beta = ctx(alpha), ctx(beta)
    half = Poly(T_VARS, ctx, {(1,): Fraction(1, 2), (0,): Fraction(-1, 2)})
    out = Poly(T_VARS, ctx)
    power = Poly.const(T_VARS, ctx, 1)
    for m in range(ell + 1):
        c = rising(alpha + (m + 1), ell - m) * rising(alpha + beta + (ell + 1), m)
        c = c * Fraction(comb(ell, m), factorial(ell))
        out = out + power * c
        power = power * half
    return OrthoPoly("jacobi", ell, (alpha, beta), out)


def gegenbauer(ell: int, alpha, ctx: ParamContext | None = None) -> OrthoPoly:
    """C_ell^alpha(t) = sum_k (-1)^k (alpha)_{ell-k} / (k! (ell-2k)!) (2t)^{ell-2k}."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    ctx = ctx or _ctx_of(alpha)
    alpha = ctx(alpha)
    coeffs = [ctx.zero] * (ell + 1)
    for k in range(ell // 2 + 1):
        m = ell - 2 * k
        c = rising(alpha, ell - k) * Fraction((-1) ** k * 2 ** m, factorial(k) * factorial(m))
        coeffs[m] = c
    return OrthoPoly("gegenbauer", ell, (alpha,), _t_poly(ctx, coeffs))


def gegenbauer_from_jacobi_factor(ell: int, alpha):
    """Gamma(a+1/2)Gamma(ell+2a) / (Gamma(2a)Gamma(ell+a+1/2)) = (2a)_ell / (a+1/2)_ell."""
    return rising(2 * alpha, ell) / rising(alpha + Fraction(1, 2), ell)


def inflate(p: OrthoPoly) -> Poly:
    """Two-variable inflation.

    gegenbauer: x^{ell/2} C(y / sqrt(x)); jacobi: y^ell P(2x/y + 1).
    """
    ctx = p.poly.ctx
    ell = p.degree
    if p.family == "gegenbauer":
        terms = {}
        for (m,), c in p.poly.terms.items():
            if (ell - m) % 2:
                raise ArithmeticError("odd-parity coefficient: inflation is not polynomial")
            terms[((ell - m) // 2, m)] = c
        return Poly(XY_VARS, ctx, terms)
    if p.family == "jacobi":
        x = Poly.var(XY_VARS, ctx, 0)
        y = Poly.var(XY_VARS, ctx, 1)
        lin = x * 2 + y
        out = Poly(XY_VARS, ctx)
        for (m,), c in p.poly.terms.items():
            out = out + (lin ** m) * (y ** (ell - m)) * c
        return out
    raise ValueError(f"unknown family {p.family!r}")


def theta_apply(g: Poly, coeffs) -> Poly:
    """Apply sum_r t^r c_r(theta) where ``coeffs`` maps r -> list of theta-power coefficients.

    theta = t d/dt acts on t^m by multiplication with m.
    """
    ctx = g.ctx
    acc = Poly(T_VARS, ctx)
    for r, cs in coeffs.items():
        terms = {}
        for (m,), c in g.terms.items():
            val = ctx.zero
            for j, cj in enumerate(cs):
                if cj:
                    val = val + ctx(cj) * (m ** j)
            if val:
                if m + r < 0:
                    raise ArithmeticError("negative power of t")
                terms[(m + r,)] = c * val
        acc = acc + Poly(T_VARS, ctx, terms)
    return acc


def _dt(g: Poly, k=1) -> Poly:
    return g.diff(0, k)


def _t(ctx, coeffs) -> Poly:
    return _t_poly(ctx, [ctx(c) for c in coeffs])


ODE_KINDS = ("gegenbauer", "jacobi", "de3", "de2", "de1")

_REQUIRED = {
    "gegenbauer": ("ell", "alpha"),
    "jacobi": ("ell", "alpha", "beta"),
    "de3": ("a", "lam", "n"),
    "de2": ("a", "mu", "n"),
    "de1": ("a", "a1", "a2"),
}


def ode_coefficients(kind: str, params: dict, ctx: ParamContext):
    """Coefficient data of the chosen equation.

    Returns ("theta", {r: [c_0, c_1, c_2]}) for theta-form equations, meaning
    sum_r t^r (c_0 + c_1 theta + c_2 theta^2), or ("d", [p0, p1, p2]) for
    equations p2 g'' + p1 g' + p0 g written with d/dt (polynomials in t).
    """
    if kind not in _REQUIRED:
        raise ValueError(f"unknown equation {kind!r}")
    missing = [k for k in _REQUIRED[kind] if k not in params]
    if missing:
        raise KeyError(f"missing parameter(s) for {kind}: {', '.join(missing)}")
    P = {k: ctx(v) for k, v in params.items()}
    if kind == "gegenbauer":
        ell, al = P["ell"], P["alpha"]
        # (1-t^2) th^2 - (1 + 2 al t^2) th + ell(ell + 2 al) t^2
        return "theta", {0: [ctx.zero, ctx(-1), ctx.one],
                         2: [ell * (ell + al * 2), -al * 2, ctx(-1)]}
    if kind == "de3":
        a, lam, n = P["a"], P["lam"], P["n"]
        c = lam * 2 - n + 1
        # (1-s^2) th^2 - (1 + c s^2) th + a(a + c) s^2
        return "theta", {0: [ctx.zero, ctx(-1), ctx.one],
                         2: [a * (a + c), -c, ctx(-1)]}
    if kind == "de2":
        a, mu, n = P["a"], P["mu"], P["n"]
        c = (n - mu) * 2
        # (1-t^2) th^2 - (1 + 2(n-mu) t^2) th + a(a + 2(n-mu)) t^2
        return "theta", {0: [ctx.zero, ctx(-1), ctx.one],
                         2: [a * (a + c), -c, ctx(-1)]}
    if kind == "jacobi":
        ell, al, be = P["ell"], P["alpha"], P["beta"]
        # (1-t^2) y'' + (be - al - (al + be + 2) t) y' + ell(ell + al + be + 1) y
        return "d", [_t(ctx, [ell * (ell + al + be + 1)]),
                     _t(ctx, [be - al, -(al + be + 2)]),
                     _t(ctx, [1, 0, -1])]
    # de1: (1-s^2) g'' + q(s) g' + a(1 - a2 - a) g, q(s) = s(a2 - 2 + 2a) - 2a1 - a2 - 2a + 2
    a, a1, a2 = P["a"], P["a1"], P["a2"]
    return "d", [_t(ctx, [a * (1 - a2 - a)]),
                 _t(ctx, [-a1 * 2 - a2 - a * 2 + 2, a2 - 2 + a * 2]),
                 _t(ctx, [1, 0, -1])]


def ode_residual(kind: str, params: dict, g: Poly) -> Poly:
    """Left-hand side of the selected equation applied to ``g`` (a Poly in t)."""
    form, data = ode_coefficients(kind, params, g.ctx)
    if form == "theta":
        return theta_apply(g, data)
    p0, p1, p2 = data
    return p2 * _dt(g, 2) + p1 * _dt(g) + p0 * g
