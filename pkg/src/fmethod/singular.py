"""The F-method engine.

weight-space basis -> nullspace of the Fourier-side system -> radial reduction
to an ODE -> comparison with the closed forms -> vector-valued reconstruction
-> emission of the differential operator, plus an independent intertwining
check on the z-side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .coeff import ParamContext, RatFunc, context
from .geometries import GeometrySpec, dpi_hat, dpi_z
from .orthopoly import gegenbauer, inflate, jacobi
from .weyl import Poly, WeylOp, dual_vars, quadratic_form, symbol_inverse

__all__ = [
    "NoSingularVector",
    "ParameterDegeneracy",
    "NotSaturated",
    "ThetaOp",
    "OdeSpec",
    "SolveResult",
    "OperatorFamily",
    "affine_change",
    "closed_form",
    "emit_operator",
    "nullspace",
    "ode_of_geometry",
    "printed_ode",
    "reconstruct_vector_valued",
    "saturate",
    "saturate_theta",
    "solve_singular",
    "solve_system",
    "sp_coordinate_symbol",
    "singular_operator",
    "theta_from_d",
    "operator_residual",
    "OracleReport",
    "substitution_pattern",
    "verify_intertwining",
    "weight_space_basis",
]


class NoSingularVector(ArithmeticError):
    """The linear system has only the zero solution."""


class ParameterDegeneracy(ArithmeticError):
    """The solution space has dimension > 1 at these parameters."""


class NotSaturated(ArithmeticError):
    """The operator does not descend through the radial map."""


# ---------------------------------------------------------------------------
# linear algebra over the coefficient field
# ---------------------------------------------------------------------------

def row_reduce(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    rows = [list(r) for r in rows if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv if x else x for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y if y else x for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def nullspace(rows, ncols, ctx: ParamContext):
    """Basis of {x : rows . x = 0} over the field of ``ctx``."""
    red, pivots = row_reduce(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [ctx.zero] * ncols
        vec[f] = ctx.one
        for i, p in enumerate(pivots):
            vec[p] = -red[i][f]
        basis.append(vec)
    return basis


def solve_affine(rows, rhs, ncols, ctx):
    """One solution of rows . x = rhs, or None if inconsistent; also the nullity."""
    aug = [list(r) + [ctx(b)] for r, b in zip(rows, rhs)]
    red, pivots = row_reduce(aug, ncols + 1)
    if ncols in pivots:
        return None, None
    x = [ctx.zero] * ncols
    for i, p in enumerate(pivots):
        x[p] = red[i][ncols]
    return x, ncols - len(pivots)


# ---------------------------------------------------------------------------
# weight spaces and the nullspace solve
# ---------------------------------------------------------------------------

def weight_space_basis(G: GeometrySpec, a: int):
    """Basis of the chi-weight space of degree-a polynomials on n_+."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    V, ctx, n = G.zeta_vars, G.ctx, G.n
    if G.family == "SO":
        Q = quadratic_form(V, ctx, range(n - 1))
        zn = Poly.var(V, ctx, n - 1)
        return [zn ** (a - 2 * j) * Q ** j for j in range(a // 2 + 1)]
    if G.family == "SP":
        i11, i1n, inn = G.zeta_index(1, 1), G.zeta_index(1, n), G.zeta_index(n, n)
        out = []
        for j in range(a // 2 + 1):
            mon = [0] * len(V)
            mon[i11] += j
            mon[i1n] += a - 2 * j
            mon[inn] += j
            out.append(Poly.monomial(V, ctx, mon))
        return out
    ip, ipp = G.zeta_index("p", 1), G.zeta_index("pp", 1)
    out = []
    for i in range(a, -1, -1):
        mon = [0] * len(V)
        mon[ip] = i
        mon[ipp] = a - i
        out.append(Poly.monomial(V, ctx, mon))
    return out


def _normalization_order(G, basis):
    """Indices of basis elements in the order tried for the monic convention."""
    if G.family == "UU":
        return list(range(len(basis) - 1, -1, -1))
    return list(range(len(basis)))


@dataclass
class SolveResult:
    geometry: GeometrySpec
    a: int
    basis: list
    nullity: int
    solutions: list            # Poly per nullspace vector
    P: Poly | None             # normalized singular vector when nullity == 1
    normalized_on: int | None  # index of the basis element with coefficient 1


def solve_system(G: GeometrySpec, a: int, mode: str = "printed") -> SolveResult:
    """Solve dpi_hat(C) P = 0 for all C in n_+^tau on the weight space.

    ``mode`` only matters for SP (see ``dpi_hat``).
    """
    basis = [G.specialize(b) for b in weight_space_basis(G, a)]
    ctx = G.ctx
    if a == 0:
        P = Poly.const(G.zeta_vars, ctx, 1)
        return SolveResult(G, a, basis, 1, [P], P, 0)
    images = []
    for gen in G.nplus_tau:
        op = G.specialize(dpi_hat(G, gen, mode))
        images.append([op.apply(b) for b in basis])
    rows = []
    for imgs in images:
        mons = set()
        for p in imgs:
            mons.update(p.terms)
        for m in sorted(mons):
            rows.append([p.coeff(m) for p in imgs])
    ns = nullspace(rows, len(basis), ctx)
    sols = []
    for vec in ns:
        p = Poly(G.zeta_vars, ctx)
        for c, b in zip(vec, basis):
            if c:
                p = p + b * c
        sols.append(p)
    P, idx = None, None
    if len(ns) == 1:
        vec = ns[0]
        for i in _normalization_order(G, basis):
            if vec[i]:
                idx = i
                P = sols[0].scale(ctx.one / vec[i])
                break
    return SolveResult(G, a, basis, len(ns), sols, P, idx)


def solve_singular(G: GeometrySpec, a: int, mode: str = "printed") -> Poly:
    """The unique-up-to-scalar singular vector, monic on the designated basis element."""
    res = solve_system(G, a, mode)
    if res.nullity == 0:
        raise NoSingularVector(f"no singular vector for {G.family} n={G.n} a={a}")
    if res.nullity > 1:
        raise ParameterDegeneracy(
            f"solution space of dimension {res.nullity} for {G.family} n={G.n} a={a}")
    return res.P


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def closed_form(G: GeometrySpec, a: int) -> Poly:
    """Symbol polynomial given by the closed-form theorem of the geometry."""
    V, ctx, n = G.zeta_vars, G.ctx, G.n
    if a == 0:
        return Poly.const(V, ctx, 1)
    if G.family == "SO":
        alpha = G.lam - Fraction(n - 1, 2)
        C = inflate(gegenbauer(a, alpha, ctx))
        x = -quadratic_form(V, ctx, range(n - 1))
        y = Poly.var(V, ctx, n - 1)
    elif G.family == "SP":
        C = inflate(gegenbauer(a, G.lam - 1, ctx))
        x = Poly.var(V, ctx, G.zeta_index(1, 1)) * Poly.var(V, ctx, G.zeta_index(n, n)) * 2
        y = Poly.var(V, ctx, G.zeta_index(1, n))
    else:
        lp, lpp = G.param("lp"), G.param("lpp")
        C = inflate(jacobi(a, -lp + n, lp + lpp - 2 * n - 2 * a + 1, ctx))
        x = Poly.var(V, ctx, G.zeta_index("p", 1))
        y = Poly.var(V, ctx, G.zeta_index("pp", 1))
    return G.specialize(C.compose({"x": x, "y": y}))


# ---------------------------------------------------------------------------
# radial reduction
# ---------------------------------------------------------------------------

class ThetaOp:
    """One-variable operator sum_r t^r c_r(theta), theta = t d/dt.

    ``coeffs[r]`` is the list of coefficients of theta^0, theta^1, ...
    """

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: ParamContext, coeffs=None):
        self.ctx = ctx
        self.coeffs = {}
        for r, cs in (coeffs or {}).items():
            cs = [ctx(c) for c in cs]
            while cs and not cs[-1]:
                cs.pop()
            if cs:
                self.coeffs[r] = cs

    def __eq__(self, other):
        if not isinstance(other, ThetaOp):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        out = {r: list(cs) for r, cs in self.coeffs.items()}
        for r, cs in other.coeffs.items():
            cur = out.setdefault(r, [])
            while len(cur) < len(cs):
                cur.append(self.ctx.zero)
            for i, c in enumerate(cs):
                cur[i] = cur[i] + c
        return ThetaOp(self.ctx, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return ThetaOp(self.ctx, {r: [x * c for x in cs] for r, cs in self.coeffs.items()})

    def shift(self, s: int) -> "ThetaOp":
        """Left multiplication by t^s."""
        return ThetaOp(self.ctx, {r + s: cs for r, cs in self.coeffs.items()})

    def compose(self, other: "ThetaOp") -> "ThetaOp":
        """self o other, using theta t^r = t^r (theta + r)."""
        out = ThetaOp(self.ctx)
        for r1, c1 in self.coeffs.items():
            for r2, c2 in other.coeffs.items():
                # c1(theta) t^{r2} = t^{r2} c1(theta + r2)
                shifted = _poly_shift(c1, r2, self.ctx)
                out = out + ThetaOp(self.ctx, {r1 + r2: _poly_mul(shifted, c2, self.ctx)})
        return out

    def substitute_scale(self, factor_sq) -> "ThetaOp":
        """Change of variable t = c s with c^2 = ``factor_sq``; only even shifts allowed."""
        out = {}
        for r, cs in self.coeffs.items():
            if r % 2:
                raise ValueError("odd power of t under a quadratic rescaling")
            f = Fraction(factor_sq) ** (r // 2)
            out[r] = [c * f for c in cs]
        return ThetaOp(self.ctx, out)

    def normalized(self):
        """Scaled so that the highest theta power at the lowest t-shift has coefficient 1."""
        if not self.coeffs:
            return self
        r0 = min(self.coeffs)
        lead = self.coeffs[r0][-1]
        return self.scale(self.ctx.one / lead)

    def to_weyl(self, var="t") -> WeylOp:
        """Expand theta^m = sum_j S(m, j) t^j d^j; fails on surviving negative powers."""
        ctx = self.ctx
        acc = {}
        for r, cs in self.coeffs.items():
            for m, c in enumerate(cs):
                if not c:
                    continue
                for j in range(m + 1):
                    s = _stirling2(m, j)
                    if s:
                        key = (r + j, j)
                        acc[key] = acc.get(key, ctx.zero) + c * s
        terms = {}
        for (p, j), c in acc.items():
            if not c:
                continue
            if p < 0:
                raise ValueError("operator has a pole at t = 0")
            terms[((p,), (j,))] = c
        return WeylOp((var,), ctx, terms)

    def apply(self, g: Poly) -> Poly:
        from .orthopoly import theta_apply
        return theta_apply(g, self.coeffs)

    def __str__(self):
        parts = []
        for r in sorted(self.coeffs):
            cs = self.coeffs[r]
            inner = " + ".join(f"({c})*th^{i}" for i, c in enumerate(cs) if c)
            parts.append(f"t^{r}*[{inner}]")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__

    def to_latex(self, namemap=None) -> str:
        out = []
        for r in sorted(self.coeffs):
            cs = self.coeffs[r]
            inner = []
            for i, c in enumerate(cs):
                if not c:
                    continue
                th = "" if i == 0 else (r"\vartheta_t" if i == 1 else rf"\vartheta_t^{{{i}}}")
                cl = c.to_latex(namemap)
                if th and c == 1:
                    cl = ""
                elif th and c == -1:
                    cl = "-"
                elif th and (c.needs_parens() or not c.den.is_ground):
                    cl = f"\\left({cl}\\right)"
                inner.append(cl + th)
            tp = "" if r == 0 else (f"t^{{{r}}}")
            body = " + ".join(inner).replace("+ -", "- ")
            out.append(f"{tp}\\left({body}\\right)" if tp else body)
        return " + ".join(out) if out else "0"


def _stirling2(m, j):
    if m == j:
        return 1
    if j == 0 or j > m:
        return 0
    return j * _stirling2(m - 1, j) + _stirling2(m - 1, j - 1)


def _poly_shift(cs, r, ctx):
    """Coefficients of c(theta + r) from those of c(theta)."""
    from math import comb
    out = [ctx.zero] * len(cs)
    for i, c in enumerate(cs):
        if not c:
            continue
        for j in range(i + 1):
            out[j] = out[j] + c * (comb(i, j) * r ** (i - j))
    return out


def _poly_mul(a, b, ctx):
    out = [ctx.zero] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def theta_from_d(op: WeylOp) -> ThetaOp:
    """Rewrite a one-variable WeylOp with t^p d^j as t^{p-j} (theta)_j (falling factorial)."""
    ctx = op.ctx
    out = ThetaOp(ctx)
    for ((p,), (j,)), c in op.terms.items():
        # t^j d^j = theta (theta - 1) ... (theta - j + 1)
        poly = [ctx.one]
        for i in range(j):
            poly = _poly_mul(poly, [ctx(-i), ctx.one], ctx)
        out = out + ThetaOp(ctx, {p - j: [x * c for x in poly]})
    return out


# -- generalized monomials c * prod v_i^{e_i} * Q^f with exponents affine in k ----

def _aff(c0=0, ck=0):
    return (Fraction(c0), Fraction(ck))


def _aff_add(e, c0):
    return (e[0] + c0, e[1])


class _Radial:
    """Radial ansatz T_a(t^k) for one geometry, with the exponent k symbolic."""

    def __init__(self, G: GeometrySpec, a: int):
        self.G = G
        self.a = a
        self.kctx = G.ctx.extend("k")
        self.k = self.kctx.gen("k")
        n = G.n
        nv = len(G.zeta_vars)
        self.nv = nv
        exps = [_aff()] * nv
        self.qset = ()
        q = _aff()
        if G.family == "SO":
            self.num = n - 1
            self.qset = tuple(range(n - 1))
            exps[n - 1] = _aff(0, 1)
            q = _aff(Fraction(a, 2), Fraction(-1, 2))
        elif G.family == "SP":
            self.num = G.zeta_index(1, n)
            self.den = (G.zeta_index(1, 1), G.zeta_index(n, n))
            exps[self.num] = _aff(0, 1)
            for i in self.den:
                exps[i] = _aff(Fraction(a, 2), Fraction(-1, 2))
        else:
            self.num = G.zeta_index("p", 1)
            self.den = (G.zeta_index("pp", 1),)
            exps[self.num] = _aff(0, 1)
            exps[self.den[0]] = _aff(a, -1)
        self.start = {(tuple(exps), q): self.kctx.one}

    def aff_value(self, e):
        return self.kctx(e[0]) + self.k * e[1]

    def diff(self, terms, i):
        out = {}
        for (exps, q), c in terms.items():
            e = exps[i]
            if e != (0, 0):
                ne = list(exps)
                ne[i] = _aff_add(e, -1)
                _acc(out, (tuple(ne), q), c * self.aff_value(e))
            if i in self.qset and q != (0, 0):
                ne = list(exps)
                ne[i] = _aff_add(exps[i], 1)
                _acc(out, (tuple(ne), _aff_add(q, -1)), c * self.aff_value(q) * 2)
        return out

    def mult(self, terms, alpha, qpow=0, coef=None):
        out = {}
        for (exps, q), c in terms.items():
            ne = tuple(_aff_add(e, x) if x else e for e, x in zip(exps, alpha))
            nq = _aff_add(q, qpow) if qpow else q
            _acc(out, (ne, nq), c * coef if coef is not None else c)
        return out

    def apply(self, op: WeylOp, prefactor=None):
        """Apply (prefactor *) op to the ansatz; prefactor = (coef, exps, qpow)."""
        op = op.with_context(self.kctx)
        total = {}
        for (alpha, beta), c in op.terms.items():
            cur = self.start
            for i, b in enumerate(beta):
                for _ in range(b):
                    cur = self.diff(cur, i)
            cur = self.mult(cur, alpha, 0, c)
            for key, v in cur.items():
                _acc(total, key, v)
        if prefactor is not None:
            coef, pexps, qpow = prefactor
            total = self.mult(total, pexps, qpow, self.kctx.embed(self.G.ctx(coef)))
        return total

    def reduce(self, terms) -> dict:
        """Write sum of generalized monomials as sum_r c_r(k) T_a(t^{k+r})."""
        G, a = self.G, self.a
        groups = {}
        for (exps, q), c in terms.items():
            en = exps[self.num]
            if en[1] != 1 or en[0].denominator != 1:
                raise NotSaturated(f"exponent of the radial numerator is {en}")
            r = int(en[0])
            groups.setdefault(r, []).append((exps, q, c))
        out = {}
        for r, items in groups.items():
            if G.family == "SO":
                cr = self._reduce_so(r, items)
            else:
                cr = self._reduce_mono(r, items)
            if cr:
                out[r] = cr
        return out

    def _reduce_mono(self, r, items):
        G, a = self.G, self.a
        total = self.kctx.zero
        for exps, q, c in items:
            for i, e in enumerate(exps):
                if i == self.num:
                    continue
                if i in self.den:
                    want = (_aff(Fraction(a - r, 2), Fraction(-1, 2)) if G.family == "SP"
                            else _aff(a - r, -1))
                    if e != want:
                        raise NotSaturated(f"term with exponent {e} at variable {G.zeta_vars[i]}")
                elif e != (0, 0):
                    raise NotSaturated(f"variable {G.zeta_vars[i]} survives with exponent {e}")
            total = total + c
        if G.family == "SP" and total:
            if r % 2:
                raise NotSaturated("odd shift: coefficient involves sqrt(2)")
            total = total * Fraction(2) ** (r // 2)
        return total

    def _reduce_so(self, r, items):
        G, a = self.G, self.a
        n = G.n
        qv = G.zeta_vars[: n - 1]
        qctx = self.kctx
        # relative exponents: zeta' exps (ints) and s = q - (a - k)/2 (int)
        rel = []
        for exps, q, c in items:
            ep = []
            for i in range(n - 1):
                e = exps[i]
                if e[1] != 0 or e[0].denominator != 1:
                    raise NotSaturated(f"non-integral exponent {e} on {G.zeta_vars[i]}")
                ep.append(int(e[0]))
            s = q[0] - Fraction(a, 2)
            if q[1] != Fraction(-1, 2) or s.denominator != 1:
                raise NotSaturated(f"unexpected Q exponent {q}")
            rel.append((ep, int(s), c))
        M = [max(0, -min(e[i] for e, _, _ in rel)) for i in range(n - 1)]
        S = max([0] + [-s for _, s, _ in rel] + ([-(-r // 2)] if r > 0 else [0]))
        S = max(S, (r + 1) // 2)
        Q = quadratic_form(qv, qctx)
        L = Poly(qv, qctx)
        qpow = {}
        for ep, s, c in rel:
            k = s + S
            if k not in qpow:
                qpow[k] = Q ** k
            L = L + qpow[k] * Poly.monomial(qv, qctx, [x + m for x, m in zip(ep, M)], c)
        if L.is_zero():
            return self.kctx.zero
        if r % 2:
            raise NotSaturated(f"odd shift {r} with nonzero remainder {L}")
        unit = Q ** (S - r // 2) * Poly.monomial(qv, qctx, M)
        c = L.ratio_to(unit)
        if c is None:
            raise NotSaturated(f"remainder {L} is not a multiple of {unit}")
        return c


def _acc(d, key, val):
    if not val:
        return
    cur = d.get(key)
    if cur is None:
        d[key] = val
    else:
        s = cur + val
        if s:
            d[key] = s
        else:
            del d[key]


def _to_theta(cr: dict, kctx: ParamContext, ctx: ParamContext) -> ThetaOp:
    """Turn {r: c_r(k)} into sum_r t^r c_r(theta)."""
    kidx = kctx.names.index("k")
    out = {}
    for r, c in cr.items():
        for m in c.den.monoms():
            if m[kidx]:
                raise NotSaturated("coefficient is not polynomial in the exponent")
        den = ctx.ring.from_dict({m[:kidx] + m[kidx + 1:]: v for m, v in c.den.terms()})
        byk = {}
        for m, v in c.num.terms():
            byk.setdefault(m[kidx], {})[m[:kidx] + m[kidx + 1:]] = v
        deg = max(byk)
        cs = [ctx.zero] * (deg + 1)
        for d, terms in byk.items():
            from .coeff import normalize
            cs[d] = normalize(ctx, ctx.ring.from_dict(terms), den)
        out[r] = cs
    return ThetaOp(ctx, out)


def saturate_theta(G: GeometrySpec, a: int, T: WeylOp, prefactor=None) -> ThetaOp:
    """T_a^sharp(prefactor * T) in theta form.

    ``prefactor`` = (coefficient, integer exponent vector over the zeta
    variables (negative entries allowed), power of Q_{n-1}) describes a
    meromorphic monomial multiplier.
    """
    rad = _Radial(G, a)
    terms = rad.apply(G.specialize(T), prefactor)
    cr = rad.reduce(terms)
    return _to_theta(cr, rad.kctx, G.ctx)


def saturate(G: GeometrySpec, a: int, T: WeylOp, prefactor=None) -> WeylOp:
    """T_a^sharp as a normal-ordered operator in the variable t."""
    return saturate_theta(G, a, T, prefactor).to_weyl()


# ---------------------------------------------------------------------------
# ODEs
# ---------------------------------------------------------------------------

@dataclass
class OdeSpec:
    kind: str                 # de3 | de2 | de1
    variable: str
    theta: ThetaOp            # the saturated operator, normalized
    d_form: WeylOp | None     # same operator with d/dt when it has no pole
    prefactor: str            # human-readable multiplier used before saturating

    def to_json(self):
        return {
            "kind": self.kind,
            "variable": self.variable,
            "prefactor": self.prefactor,
            "theta": {str(r): [str(c) for c in cs] for r, cs in sorted(self.theta.coeffs.items())},
            "d_form": self.d_form.to_json() if self.d_form is not None else None,
        }


def _so_prefactor(G, j):
    n = G.n
    e = [0] * len(G.zeta_vars)
    e[n - 1] = 2
    e[j] = -1
    return (-2, tuple(e), 0)


def _sp_prefactor(G):
    e = [0] * len(G.zeta_vars)
    e[G.zeta_index(1, G.n)] = 2
    e[G.zeta_index(G.n, G.n)] = -1
    return (-2, tuple(e), 0)


def _uu_prefactor(G):
    e = [0] * len(G.zeta_vars)
    e[G.zeta_index("pp", 1)] = 1
    return (1, tuple(e), 0)


def ode_of_geometry(G: GeometrySpec, a: int) -> OdeSpec:
    """Saturate the relevant Fourier-side operator to a single ODE in t."""
    n = G.n
    if G.family == "SO":
        pre = _so_prefactor(G, 0)
        th = saturate_theta(G, a, dpi_hat(G, "C1"), pre)
        desc = "-2 zeta_n^2 / zeta_1  (= -2 t^2 Q'/zeta_1 on the radial image)"
        kind = "de3"
    elif G.family == "SP":
        pre = _sp_prefactor(G)
        gen = [g for g in G.nplus_tau if g.endswith("11") or g.endswith("_1_1")][0]
        th = saturate_theta(G, a, dpi_hat(G, gen), pre)
        desc = "-2 zeta_1n^2 / zeta_nn"
        kind = "de2"
    else:
        pre = _uu_prefactor(G)
        th = saturate_theta(G, a, -dpi_hat(G, "C1"), pre)
        desc = "-zeta''_1"
        kind = "de1"
    try:
        d = th.to_weyl()
    except ValueError:
        d = None
    return OdeSpec(kind, "t", th, d, desc)


def printed_ode(G: GeometrySpec, a: int):
    """The equation exactly as displayed in the corresponding proposition.

    SO: theta form in t before the change t = -sqrt(-1) s; SP: theta form;
    UU: d/dt form of the saturated equation.
    """
    ctx, n = G.ctx, G.n
    if G.family == "SO":
        lam = G.lam
        c = lam * 2 - n + 1
        return ThetaOp(ctx, {0: [0, -1, 1], 2: [-(c + a) * a, c, 1]})
    if G.family == "SP":
        mu = G.mu()
        c = (n - mu) * 2
        return ThetaOp(ctx, {0: [0, -1, 1], 2: [(c + a) * a, -c, -1]})
    a1, a2 = G.uu_a()
    t = ("t",)
    return WeylOp(t, ctx, {
        ((1,), (2,)): 1, ((2,), (2,)): 1,
        ((0,), (1,)): a1, ((1,), (1,)): -(a2 + 2 * a - 2),
        ((0,), (0,)): (a2 + a - 1) * a,
    })


def affine_change(op: WeylOp, scale, shift, var="s") -> WeylOp:
    """Rewrite an operator in t under t = scale*s + shift (so d/dt = (1/scale) d/ds)."""
    ctx = op.ctx
    sv = (var,)
    lin = Poly(sv, ctx, {(1,): scale, (0,): shift})
    out = WeylOp(sv, ctx)
    inv = Fraction(1) / Fraction(scale)
    for ((p,), (j,)), c in op.terms.items():
        coeff = lin ** p * c * inv ** j
        out = out + WeylOp.mult(coeff) * WeylOp.d(sv, ctx, 0, j)
    return out


# ---------------------------------------------------------------------------
# vector-valued reconstruction
# ---------------------------------------------------------------------------

def _v_count(G):
    if G.family == "SP":
        return G.n - 1
    if G.family == "UU":
        return G.n
    return 0


def _vz_vars(G):
    m = _v_count(G)
    return tuple(f"v_{i}" for i in range(1, m + 1)) + G.zeta_vars


def _levi_zeta_field(G, k, l, vars):
    """Derivation of Pol(n_+) induced by E_kl in l' (see module docstring of reconstruct)."""
    ctx = G.ctx
    m = _v_count(G)
    off = m
    op = WeylOp(vars, ctx)
    n = G.n
    if G.family == "SP":
        # zeta -> A^t zeta + zeta A on the (n-1)-block, zeta_in -> (A^t zeta)_in
        def var(i, j):
            return off + G.zeta_index(i, j)
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                terms = []
                if i < n and j < n:
                    # (A^t zeta)_ij + (zeta A)_ij with A = E_kl
                    if i == l:
                        terms.append((k, j))
                    if j == l:
                        terms.append((i, k))
                elif i < n and j == n:
                    if i == l:
                        terms.append((k, n))
                for (p, q) in terms:
                    op = op + WeylOp.x(vars, ctx, var(*sorted((p, q)))) * WeylOp.d(vars, ctx, var(i, j))
        return op
    # UU: zeta' -> A^t zeta', zeta'' -> A^t zeta''
    for side in ("p", "pp"):
        op = op + (WeylOp.x(vars, ctx, off + G.zeta_index(side, k))
                   * WeylOp.d(vars, ctx, off + G.zeta_index(side, l)))
    return op


def _levi_v_field(G, k, l, vars):
    """v -> A v with A = E_kl: the vector field v_l d/dv_k."""
    ctx = G.ctx
    return WeylOp.x(vars, ctx, l - 1) * WeylOp.d(vars, ctx, k - 1)


def levi_generators(G):
    m = _v_count(G)
    return [(k, l) for k in range(1, m + 1) for l in range(1, m + 1)]


def _zeta_weight(G, mon):
    """Torus weights (per v-index) and the last-slot weight of a zeta monomial."""
    m = _v_count(G)
    w = [0] * m
    last = 0
    n = G.n
    if G.family == "SP":
        for (i, j) in [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]:
            e = mon[G.zeta_index(i, j)]
            if not e:
                continue
            for x in (i, j):
                if x < n:
                    w[x - 1] += e
                else:
                    last += e
        return tuple(w), last
    for side in ("p", "pp"):
        for i in range(1, n + 1):
            e = mon[G.zeta_index(side, i)]
            w[i - 1] += e
    return tuple(w), 0


def _monomials(nvars, deg):
    for combo in combinations_with_replacement(range(nvars), deg):
        mon = [0] * nvars
        for c in combo:
            mon[c] += 1
        yield tuple(mon)


def reconstruct_vector_valued(G: GeometrySpec, a: int, P: Poly) -> Poly:
    """Extend the highest-weight component P to the l'-covariant generating polynomial.

    Unknowns are the coefficients of v^g zeta^d with matching torus weights;
    equations are the infinitesimal covariance conditions for every E_kl in
    l' together with [v_1^a] Psi = P.
    """
    if G.family == "SO":
        raise ValueError("SO targets are line bundles; nothing to reconstruct")
    m = _v_count(G)
    vars = _vz_vars(G)
    ctx = G.ctx
    nz = len(G.zeta_vars)
    if a == 0:
        return Poly.const(vars, ctx, 1)
    unknowns = []
    for zm in _monomials(nz, a):
        w, last = _zeta_weight(G, zm)
        if G.family == "SP" and last != a:
            continue
        if sum(w) + (last if G.family == "SP" else 0) != (2 * a if G.family == "SP" else a):
            continue
        if any(x < 0 for x in w):
            continue
        unknowns.append(tuple(w) + zm)
    index = {u: i for i, u in enumerate(unknowns)}
    N = len(unknowns)
    # equations from E_kl, k != l
    rows = []
    rhs = []
    for (k, l) in levi_generators(G):
        if k == l:
            continue
        Dv = _levi_v_field(G, k, l, vars)
        Dz = _levi_zeta_field(G, k, l, vars)
        diff = Dv - Dz
        eqs = {}
        for u, col in index.items():
            img = diff.apply(Poly.monomial(vars, ctx, u))
            for mon, c in img.terms.items():
                eqs.setdefault(mon, {})[col] = c
        for mon in sorted(eqs):
            row = [ctx.zero] * N
            for col, c in eqs[mon].items():
                row[col] = c
            rows.append(row)
            rhs.append(ctx.zero)
    # highest-weight component
    Pp = G.specialize(P)
    lead = tuple([a] + [0] * (m - 1))
    for u, col in index.items():
        if u[:m] == lead:
            row = [ctx.zero] * N
            row[col] = ctx.one
            rows.append(row)
            rhs.append(Pp.coeff(u[m:]))
    for mon in Pp.terms:
        if lead + mon not in index:
            raise ArithmeticError("highest-weight component has a term outside the weight space")
    sol, nullity = solve_affine(rows, rhs, N, ctx)
    if sol is None:
        raise ArithmeticError("inconsistent covariance system (wrong weight datum?)")
    if nullity:
        raise ParameterDegeneracy(f"covariant extension not unique (nullity {nullity})")
    return Poly(vars, ctx, {u: c for u, c in zip(unknowns, sol) if c})


def substitution_pattern(G: GeometrySpec, a: int, P: Poly) -> Poly:
    """The generating polynomial predicted by the closed-form display.

    SP: zeta_11 zeta_nn -> sum_{i,j<n} v_i v_j zeta_ij zeta_nn, zeta_1n -> sum v_j zeta_jn.
    UU: zeta'_1 -> sum v_i zeta'_i, zeta''_1 -> sum v_i zeta''_i.
    """
    vars = _vz_vars(G)
    ctx = G.ctx
    m = _v_count(G)
    n = G.n
    off = m

    def v(i):
        return Poly.var(vars, ctx, i - 1)

    def z(idx):
        return Poly.var(vars, ctx, off + idx)

    out = Poly(vars, ctx)
    if G.family == "SP":
        X = Poly(vars, ctx)
        for i in range(1, n):
            for j in range(1, n):
                X = X + v(i) * v(j) * z(G.zeta_index(i, j))
        X = X * z(G.zeta_index(n, n))
        Y = Poly(vars, ctx)
        for j in range(1, n):
            Y = Y + v(j) * z(G.zeta_index(j, n))
        i11, i1n, inn = G.zeta_index(1, 1), G.zeta_index(1, n), G.zeta_index(n, n)
        for mon, c in P.terms.items():
            j = mon[i11]
            if mon[inn] != j or sum(mon) - mon[i11] - mon[inn] - mon[i1n]:
                raise ValueError("P is not in the weight space")
            out = out + X ** j * Y ** mon[i1n] * c
        return out
    if G.family == "UU":
        Xp = Poly(vars, ctx)
        Xpp = Poly(vars, ctx)
        for i in range(1, n + 1):
            Xp = Xp + v(i) * z(G.zeta_index("p", i))
            Xpp = Xpp + v(i) * z(G.zeta_index("pp", i))
        ip, ipp = G.zeta_index("p", 1), G.zeta_index("pp", 1)
        for mon, c in P.terms.items():
            out = out + Xp ** mon[ip] * Xpp ** mon[ipp] * c
        return out
    raise ValueError("only SP and UU have vector-valued targets")


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

@dataclass
class OperatorFamily:
    """D_{X->Y,a} as a v-indexed family of constant-coefficient operators."""
    geometry: GeometrySpec
    a: int
    v_vars: tuple
    components: dict            # v-exponent tuple -> WeylOp in the z variables
    symbol: Poly                # generating polynomial in (v, zeta)
    normalization: str = ""

    def to_json(self):
        G = self.geometry
        m = len(self.v_vars)
        entries = []
        for mon, c in self.symbol.items():
            entries.append({"v_exponents": list(mon[:m]), "zeta_monomial": list(mon[m:]),
                            "coeff": str(c)})
        return {
            "geometry": G.family,
            "n": G.n,
            "a": self.a,
            "params": {nm: (str(dict(G.values)[nm]) if nm in dict(G.values) else "sym")
                       for nm in G.ctx.names},
            "zeta_vars": list(G.zeta_vars),
            "v_vars": list(self.v_vars),
            "symbol": entries,
            "normalization": self.normalization,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    def to_latex(self) -> str:
        names = self.geometry.latex_names()
        if not self.v_vars:
            return self.components[()].to_latex(names)
        parts = []
        for vmon in sorted(self.components, reverse=True):
            op = self.components[vmon]
            vs = " ".join(
                (f"v_{{{i + 1}}}" if e == 1 else f"v_{{{i + 1}}}^{{{e}}}")
                for i, e in enumerate(vmon) if e)
            parts.append(f"{vs}\\left({op.to_latex(names)}\\right)")
        return " + ".join(parts)

    def to_text(self) -> str:
        if not self.v_vars:
            return str(self.components[()])
        parts = []
        for vmon in sorted(self.components, reverse=True):
            vs = "*".join((f"v_{i + 1}" if e == 1 else f"v_{i + 1}^{e}")
                          for i, e in enumerate(vmon) if e)
            parts.append(f"{vs}*({self.components[vmon]})")
        return " + ".join(parts)


def emit_operator(G: GeometrySpec, a: int, Psi: Poly) -> OperatorFamily:
    """Apply the inverse symbol map per v-monomial."""
    m = _v_count(G)
    if m == 0:
        D = symbol_inverse(Psi, G.z_vars)
        return OperatorFamily(G, a, (), {(): D}, Psi, "monic on zeta_n^a")
    if Psi.vars[:m] != tuple(f"v_{i}" for i in range(1, m + 1)):
        raise ValueError("expected a generating polynomial in (v, zeta)")
    comps = {}
    for mon, c in Psi.terms.items():
        comps.setdefault(mon[:m], {})[mon[m:]] = c
    out = {}
    for vmon, terms in comps.items():
        out[vmon] = symbol_inverse(Poly(G.zeta_vars, G.ctx, terms), G.z_vars)
    norm = "monic on zeta_1n^a" if G.family == "SP" else "monic on zeta''_1^a"
    return OperatorFamily(G, a, tuple(f"v_{i}" for i in range(1, m + 1)), out, Psi, norm)


def singular_operator(G: GeometrySpec, a: int) -> OperatorFamily:
    """Solve, reconstruct and emit in one go.

    At special parameters the designated coefficient may vanish; the
    normalization then moves to the next basis element and says so.
    """
    res = solve_system(G, a)
    if res.nullity != 1:
        solve_singular(G, a)   # raises the appropriate error
    P = res.P
    if G.family == "SO":
        fam = emit_operator(G, a, P)
    else:
        fam = emit_operator(G, a, reconstruct_vector_valued(G, a, P))
    designated = _normalization_order(G, res.basis)[0]
    if res.normalized_on != designated:
        fam.normalization = (f"designated coefficient vanishes at these parameters; "
                             f"monic on {res.basis[res.normalized_on]}")
    return fam


# ---------------------------------------------------------------------------
# intertwining oracle
# ---------------------------------------------------------------------------

def clear_denominators(p: Poly) -> Poly:
    """Scale by the lcm of coefficient denominators (projective normalization)."""
    ctx = p.ctx
    den = ctx.ring.one
    for c in p.terms.values():
        if not c.den.is_ground:
            den = den.lcm(c.den)
    from .coeff import RatFunc as _R
    scale = _R._raw(ctx, den, ctx.ring.one)
    return p.scale(scale) if not den.is_ground else p


@dataclass
class OracleReport:
    geometry: str
    n: int
    a: int
    degree_bound: int
    monomials_checked: int
    residuals: dict = field(default_factory=dict)   # generator -> max residual (Poly, zero if ok)

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    def to_json(self):
        return {
            "geometry": self.geometry, "n": self.n, "a": self.a,
            "degree_bound": self.degree_bound,
            "monomials_checked": self.monomials_checked,
            "ok": self.ok,
            "residuals": {g: str(r) for g, r in self.residuals.items()},
        }


def _restriction(G):
    """Function mapping a source-side Poly to the target variables."""
    if G.family == "SO":
        last = G.z_vars[-1]
        return lambda p: p.drop_vars([last])
    if G.family == "UU" and G.n == 1:
        return lambda p: p.reindex(("z_1",), [0, 0])
    if G.family == "SP" and G.n == 2:
        off = G.z_vars[G.zeta_index(1, 2)]
        return lambda p: p.drop_vars([off])
    raise ValueError("intertwining oracle is available for SO, UU with n = 1 and SP with n = 2")


def sp_coordinate_symbol(G: GeometrySpec, P: Poly) -> Poly:
    """Convert an SP (n = 2) symbol from the printed system to matrix-entry derivatives.

    The printed system yields C(2 zeta_11 zeta_nn, zeta_1n); the Fourier
    transform of the z-side action (trace pairing, so d/dz_ij -> 2 zeta_ij off
    the diagonal) yields C(zeta_11 zeta_nn, zeta_1n), which is C(4 d_11 d_nn, d_1n)
    in matrix-entry derivatives.  The weight-space coefficient of
    zeta_11^j zeta_12^(a-2j) zeta_22^j is therefore multiplied by 2^j.
    """
    i11 = G.zeta_index(1, 1)
    return Poly(P.vars, P.ctx, {m: c * Fraction(2) ** m[i11] for m, c in P.terms.items()})


def verify_intertwining(G: GeometrySpec, a: int, degree_bound: int | None = None,
                        generators=None) -> OracleReport:
    """Check R D dpi(X) f = dpi'(X) R D f on every monomial f of degree <= bound.

    D is the emitted operator (denominators cleared), R the restriction to
    the subvariety, and both actions are taken in the sections picture.
    """
    if degree_bound is None:
        degree_bound = 2 * a + 4
    if G.family == "UU" and G.n != 1:
        raise ValueError("UU oracle is implemented for n = 1")
    if G.family == "SP" and G.n != 2:
        raise ValueError("SP targets are vector valued for n > 2; use the covariance check")
    P = clear_denominators(solve_singular(G, a))
    if G.family == "SP":
        P = sp_coordinate_symbol(G, P)
    D = symbol_inverse(P, G.z_vars)
    R = _restriction(G)
    gens = list(generators) if generators is not None else list(G.gtau)
    src = {g: G.specialize(dpi_z(G, g, "source", "sections")) for g in gens}
    tgt = {g: G.specialize(dpi_z(G, g, "target", "sections", a)) for g in gens}
    # precompose on the source side once
    DX = {g: D * src[g] for g in gens}
    nv = len(G.z_vars)
    count = 0
    worst = {g: Poly(tgt[g].vars, G.ctx) for g in gens}
    for deg in range(degree_bound + 1):
        for mon in _monomials(nv, deg):
            f = Poly.monomial(G.z_vars, G.ctx, mon)
            RDf = R(D.apply(f))
            count += 1
            for g in gens:
                lhs = R(DX[g].apply(f))
                rhs = tgt[g].apply(RDf)
                res = lhs - rhs
                if not res.is_zero() and (worst[g].is_zero() or len(res.terms) > len(worst[g].terms)):
                    worst[g] = res
    return OracleReport(G.family, G.n, a, degree_bound, count, worst)


def operator_residual(G: GeometrySpec, a: int, gen: str) -> WeylOp:
    """Operator-level residual R (D dpi(X) - dpi'(X) D) for SO (restriction z_n = 0)."""
    if G.family != "SO":
        raise ValueError("operator-level residual is implemented for SO")
    P = clear_denominators(solve_singular(G, a))
    D = symbol_inverse(P, G.z_vars)
    src = G.specialize(dpi_z(G, gen, "source", "sections"))
    tgt = G.specialize(dpi_z(G, gen, "target", "sections", a))
    tgt = tgt.reindex(G.z_vars, list(range(G.n - 1)))
    return (D * src - tgt * D).restrict_zero([G.z_vars[-1]])
