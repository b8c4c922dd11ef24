"""Polynomials and the Weyl algebra of polynomial-coefficient differential operators.

A :class:`Poly` is a sparse map from exponent tuples to :class:`RatFunc`
coefficients.  A :class:`WeylOp` stores ``sum c[a, b] x^a d^b`` in normal order
(all multiplications to the left of all derivatives), which is the only stored
form, so equality is structural.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import product
from math import comb

from .coeff import ContextError, ParamContext, RatFunc, context

__all__ = [
    "Poly",
    "WeylOp",
    "dual_name",
    "dual_vars",
    "euler",
    "falling",
    "fourier_hat",
    "matrix_action",
    "symbol",
    "symbol_inverse",
]


def falling(m: int, k: int) -> int:
    """m (m-1) ... (m-k+1)."""
    out = 1
    for i in range(k):
        out *= m - i
    return out


def dual_name(name: str) -> str:
    """Pair ``z...`` with ``zeta...``; any other name gets or loses a ``^`` suffix."""
    if name.startswith("zeta"):
        return "z" + name[4:]
    if name.startswith("z"):
        return "zeta" + name[1:]
    return name[:-1] if name.endswith("^") else name + "^"


def dual_vars(names) -> tuple:
    return tuple(dual_name(nm) for nm in names)


def _add_into(acc: dict, key, val):
    cur = acc.get(key)
    if cur is None:
        acc[key] = val
    else:
        s = cur + val
        if s:
            acc[key] = s
        else:
            del acc[key]


def _latex_var(name: str) -> str:
    if name.startswith("zeta"):
        base, rest = r"\zeta", name[4:]
    elif name.startswith("z"):
        base, rest = "z", name[1:]
    else:
        base, rest = name, ""
    rest = rest.lstrip("_")
    primes = ""
    while rest.startswith("p"):
        primes += "'"
        rest = rest[1:]
    rest = rest.lstrip("_")
    if rest:
        return f"{base}{primes}_{{{rest}}}"
    return base + primes


class Poly:
    """Multivariate polynomial with RatFunc coefficients."""

    __slots__ = ("vars", "ctx", "terms")

    def __init__(self, vars, ctx: ParamContext, terms=None):
        self.vars = tuple(vars)
        self.ctx = ctx
        self.terms = {}
        if terms:
            n = len(self.vars)
            for mon, c in terms.items():
                mon = tuple(mon)
                if len(mon) != n:
                    raise ValueError("monomial length does not match variable count")
                c = ctx(c)
                if c:
                    _add_into(self.terms, mon, c)

    @classmethod
    def _raw(cls, vars, ctx, terms):
        obj = object.__new__(cls)
        obj.vars = vars
        obj.ctx = ctx
        obj.terms = terms
        return obj

    # -- constructors ---------------------------------------------------------
    @classmethod
    def const(cls, vars, ctx, c=1) -> "Poly":
        return cls(vars, ctx, {(0,) * len(tuple(vars)): c})

    @classmethod
    def var(cls, vars, ctx, name_or_index, power=1) -> "Poly":
        vars = tuple(vars)
        i = vars.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        mon = [0] * len(vars)
        mon[i] = power
        return cls(vars, ctx, {tuple(mon): 1})

    @classmethod
    def monomial(cls, vars, ctx, mon, c=1) -> "Poly":
        return cls(vars, ctx, {tuple(mon): c})

    def zero(self) -> "Poly":
        return Poly._raw(self.vars, self.ctx, {})

    def gens(self):
        return [Poly.var(self.vars, self.ctx, i) for i in range(len(self.vars))]

    # -- basics ---------------------------------------------------------------
    def _check(self, other: "Poly"):
        if other.vars != self.vars:
            raise ContextError(f"variable mismatch: {self.vars} vs {other.vars}")
        if other.ctx != self.ctx:
            raise ContextError(f"parameter mismatch: {self.ctx} vs {other.ctx}")

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, RatFunc)):
            return Poly.const(self.vars, self.ctx, other)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            other = Poly.const(self.vars, self.ctx, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.vars == other.vars and self.ctx == other.ctx and self.terms == other.terms

    __hash__ = None

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        acc = dict(self.terms)
        for m, c in o.terms.items():
            _add_into(acc, m, c)
        return Poly._raw(self.vars, self.ctx, acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.vars, self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def scale(self, c) -> "Poly":
        c = self.ctx(c) if not isinstance(c, int) else c
        if not c:
            return self.zero()
        return Poly._raw(self.vars, self.ctx, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return self.scale(other)
        o = self._lift(other)
        if o is NotImplemented:
            return o
        acc = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                _add_into(acc, tuple(a + b for a, b in zip(m1, m2)), c1 * c2)
        return Poly._raw(self.vars, self.ctx, acc)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(self.ctx.one / self.ctx(c))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Poly.const(self.vars, self.ctx, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- structure --------------------------------------------------------------
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, var) -> int:
        i = self.vars.index(var) if isinstance(var, str) else var
        return max((m[i] for m in self.terms), default=-1)

    def is_homogeneous(self, weights=None) -> bool:
        w = weights or (1,) * len(self.vars)
        degs = {sum(a * b for a, b in zip(w, m)) for m in self.terms}
        return len(degs) <= 1

    def coeff(self, mon) -> RatFunc:
        return self.terms.get(tuple(mon), self.ctx.zero)

    def monomials(self):
        return sorted(self.terms)

    def items(self):
        return sorted(self.terms.items())

    def diff(self, var, k: int = 1) -> "Poly":
        i = self.vars.index(var) if isinstance(var, str) else var
        acc = {}
        for m, c in self.terms.items():
            if m[i] >= k:
                f = falling(m[i], k)
                nm = m[:i] + (m[i] - k,) + m[i + 1:]
                acc[nm] = c * f
        return Poly._raw(self.vars, self.ctx, acc)

    def map_coeffs(self, fn) -> "Poly":
        acc = {}
        for m, c in self.terms.items():
            v = fn(c)
            if v:
                acc[m] = v
        return Poly._raw(self.vars, self.ctx, acc)

    def subs_params(self, values: dict) -> "Poly":
        return self.map_coeffs(lambda c: c.subs(values))

    def with_context(self, ctx: ParamContext) -> "Poly":
        """Embed coefficients into a larger parameter context."""
        return Poly._raw(self.vars, ctx, {m: ctx.embed(c) for m, c in self.terms.items()})

    def restrict_zero(self, names) -> "Poly":
        """Set the listed variables to zero (variables stay in the context)."""
        idx = [self.vars.index(nm) if isinstance(nm, str) else nm for nm in names]
        return Poly._raw(self.vars, self.ctx,
                         {m: c for m, c in self.terms.items() if all(m[i] == 0 for i in idx)})

    def drop_vars(self, names) -> "Poly":
        """Restrict to the listed variables being zero and remove them from the context."""
        idx = {self.vars.index(nm) if isinstance(nm, str) else nm for nm in names}
        keep = [i for i in range(len(self.vars)) if i not in idx]
        acc = {}
        for m, c in self.terms.items():
            if all(m[i] == 0 for i in idx):
                acc[tuple(m[i] for i in keep)] = c
        return Poly._raw(tuple(self.vars[i] for i in keep), self.ctx, acc)

    def reindex(self, new_vars, mapping) -> "Poly":
        """Move to ``new_vars``; ``mapping[i]`` is the target index of old variable i.

        Several old variables may map to the same target (exponents add)."""
        new_vars = tuple(new_vars)
        acc = {}
        for m, c in self.terms.items():
            nm = [0] * len(new_vars)
            for i, e in enumerate(m):
                if e:
                    if mapping[i] is None:
                        raise ValueError(f"variable {self.vars[i]} has no image")
                    nm[mapping[i]] += e
            _add_into(acc, tuple(nm), c)
        return Poly._raw(new_vars, self.ctx, acc)

    def compose(self, images: dict) -> "Poly":
        """Substitute polynomials for variables (``images`` keyed by name).

        All images must share a variable context; unspecified variables map to
        themselves, which requires that context to contain them."""
        if not images:
            return self
        sample = next(iter(images.values()))
        tvars, ctx = sample.vars, sample.ctx
        imgs = []
        for nm in self.vars:
            if nm in images:
                imgs.append(images[nm])
            else:
                imgs.append(Poly.var(tvars, ctx, nm))
        out = Poly._raw(tvars, ctx, {})
        powers = [dict() for _ in imgs]
        for m, c in self.terms.items():
            term = Poly.const(tvars, ctx, c)
            for i, e in enumerate(m):
                if e:
                    if e not in powers[i]:
                        powers[i][e] = imgs[i] ** e
                    term = term * powers[i][e]
            out = out + term
        return out

    def evaluate(self, point: dict):
        """Evaluate at rational values for every variable; returns a RatFunc."""
        total = self.ctx.zero
        vals = [self.ctx(point[nm]) for nm in self.vars]
        for m, c in self.terms.items():
            t = c
            for v, e in zip(vals, m):
                if e:
                    t = t * v ** e
            total = total + t
        return total

    def content_normalized(self, lead=None) -> "Poly":
        """Scale so that the coefficient of ``lead`` (default: largest monomial) is 1."""
        if not self.terms:
            return self
        mon = tuple(lead) if lead is not None else max(self.terms)
        c = self.terms.get(mon)
        if c is None:
            raise ValueError("designated monomial is absent")
        return self.scale(self.ctx.one / c)

    def ratio_to(self, other: "Poly"):
        """Return c with self == c * other, or None (exact cross-multiplication)."""
        self._check(other)
        if not other.terms:
            return self.ctx.zero if not self.terms else None
        if set(self.terms) != set(other.terms):
            if not self.terms:
                return self.ctx.zero
            return None
        mon = next(iter(other.terms))
        c = self.terms[mon] / other.terms[mon]
        for m, v in other.terms.items():
            if self.terms[m] != c * v:
                return None
        return c

    # -- display ----------------------------------------------------------------
    def _mon_str(self, m, latex=False):
        parts = []
        for nm, e in zip(self.vars, m):
            if not e:
                continue
            base = _latex_var(nm) if latex else nm
            if e == 1:
                parts.append(base)
            else:
                parts.append(f"{base}^{{{e}}}" if latex else f"{base}^{e}")
        return (" " if latex else "*").join(parts)

    def _render(self, latex=False, namemap=None):
        if not self.terms:
            return "0"
        order = sorted(self.terms.items(), key=lambda mc: (-sum(mc[0]), tuple(-e for e in mc[0])))
        out = []
        for i, (m, c) in enumerate(order):
            ms = self._mon_str(m, latex)
            out.append(_join_term(c, ms, i == 0, latex, namemap))
        return "".join(out)

    def __str__(self):
        return self._render()

    def __repr__(self):
        return f"Poly({self._render()!r}, vars={self.vars})"

    def to_latex(self, namemap=None) -> str:
        return self._render(True, namemap)

    def to_json(self):
        return {
            "vars": list(self.vars),
            "params": list(self.ctx.names),
            "terms": [{"exponents": list(m), "coeff": str(c)} for m, c in self.items()],
        }

    @classmethod
    def from_json(cls, data) -> "Poly":
        ctx = context(tuple(data["params"]))
        return cls(data["vars"], ctx, {tuple(t["exponents"]): ctx.parse(t["coeff"]) for t in data["terms"]})


def _join_term(c: RatFunc, ms: str, first: bool, latex: bool, namemap=None) -> str:
    """Render ``c * ms`` with a leading sign separator."""
    neg = False
    body_c = c
    if c.is_constant() and c.to_fraction() < 0:
        neg = True
        body_c = -c
    elif not c.is_constant():
        # pull a leading minus out of single-term numerators
        if len(c.num.terms()) == 1 and c.num.LC < 0:
            neg = True
            body_c = -c
    cs = body_c.to_latex(namemap) if latex else str(body_c)
    if ms:
        if cs == "1":
            txt = ms
        else:
            multi = len(body_c.num.terms()) > 1 and body_c.den.is_ground
            if multi:
                cs = f"\\left({cs}\\right)" if latex else f"({cs})"
            txt = f"{cs} {ms}" if latex else f"{cs}*{ms}"
    else:
        txt = cs
    if first:
        return ("-" if neg else "") + txt
    return (" - " if neg else " + ") + txt


class WeylOp:
    """Normal-ordered differential operator ``sum c x^alpha d^beta``."""

    __slots__ = ("vars", "ctx", "terms")

    def __init__(self, vars, ctx: ParamContext, terms=None):
        self.vars = tuple(vars)
        self.ctx = ctx
        self.terms = {}
        if terms:
            n = len(self.vars)
            for (a, b), c in terms.items():
                a, b = tuple(a), tuple(b)
                if len(a) != n or len(b) != n:
                    raise ValueError("multi-index length does not match variable count")
                c = ctx(c)
                if c:
                    _add_into(self.terms, (a, b), c)

    @classmethod
    def _raw(cls, vars, ctx, terms):
        obj = object.__new__(cls)
        obj.vars = vars
        obj.ctx = ctx
        obj.terms = terms
        return obj

    # -- constructors -------------------------------------------------------------
    @classmethod
    def identity(cls, vars, ctx, c=1) -> "WeylOp":
        z = (0,) * len(tuple(vars))
        return cls(vars, ctx, {(z, z): c})

    @classmethod
    def x(cls, vars, ctx, i, power=1) -> "WeylOp":
        vars = tuple(vars)
        i = vars.index(i) if isinstance(i, str) else i
        a = [0] * len(vars)
        a[i] = power
        return cls(vars, ctx, {(tuple(a), (0,) * len(vars)): 1})

    @classmethod
    def d(cls, vars, ctx, i, power=1) -> "WeylOp":
        vars = tuple(vars)
        i = vars.index(i) if isinstance(i, str) else i
        b = [0] * len(vars)
        b[i] = power
        return cls(vars, ctx, {((0,) * len(vars), tuple(b)): 1})

    @classmethod
    def mult(cls, p: Poly) -> "WeylOp":
        """Multiplication by a polynomial."""
        z = (0,) * len(p.vars)
        return cls._raw(p.vars, p.ctx, {(m, z): c for m, c in p.terms.items()})

    def zero(self) -> "WeylOp":
        return WeylOp._raw(self.vars, self.ctx, {})

    # -- ring structure -------------------------------------------------------------
    def _check(self, other):
        if other.vars != self.vars:
            raise ContextError(f"variable mismatch: {self.vars} vs {other.vars}")
        if other.ctx != self.ctx:
            raise ContextError(f"parameter mismatch: {self.ctx} vs {other.ctx}")

    def _lift(self, other):
        if isinstance(other, WeylOp):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, RatFunc)):
            return WeylOp.identity(self.vars, self.ctx, other)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            other = WeylOp.identity(self.vars, self.ctx, other)
        if not isinstance(other, WeylOp):
            return NotImplemented
        return self.vars == other.vars and self.ctx == other.ctx and self.terms == other.terms

    __hash__ = None

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        acc = dict(self.terms)
        for k, c in o.terms.items():
            _add_into(acc, k, c)
        return WeylOp._raw(self.vars, self.ctx, acc)

    __radd__ = __add__

    def __neg__(self):
        return WeylOp._raw(self.vars, self.ctx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def scale(self, c) -> "WeylOp":
        c = self.ctx(c) if not isinstance(c, int) else c
        if not c:
            return self.zero()
        return WeylOp._raw(self.vars, self.ctx, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        """Scalar multiple, or composition when ``other`` is a WeylOp."""
        if isinstance(other, (int, Fraction, RatFunc)):
            return self.scale(other)
        if isinstance(other, WeylOp):
            return compose(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return self.scale(other)
        return NotImplemented

    def __matmul__(self, other):
        return compose(self, other)

    def __pow__(self, k: int):
        out = WeylOp.identity(self.vars, self.ctx)
        for _ in range(k):
            out = compose(out, self)
        return out

    def commutator(self, other: "WeylOp") -> "WeylOp":
        return compose(self, other) - compose(other, self)

    # -- structure ---------------------------------------------------------------------
    def order(self) -> int:
        return max((sum(b) for (_, b) in self.terms), default=-1)

    def degrees(self) -> set:
        """Set of |alpha| - |beta| over terms."""
        return {sum(a) - sum(b) for (a, b) in self.terms}

    def is_constant_coeff(self) -> bool:
        return all(not any(a) for (a, _) in self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][1]), kv[0][1], kv[0][0]))

    def map_coeffs(self, fn) -> "WeylOp":
        acc = {}
        for k, c in self.terms.items():
            v = fn(c)
            if v:
                acc[k] = v
        return WeylOp._raw(self.vars, self.ctx, acc)

    def subs_params(self, values: dict) -> "WeylOp":
        return self.map_coeffs(lambda c: c.subs(values))

    def with_context(self, ctx: ParamContext) -> "WeylOp":
        return WeylOp._raw(self.vars, ctx, {k: ctx.embed(c) for k, c in self.terms.items()})

    def restrict_zero(self, names) -> "WeylOp":
        """The operator ``R o T`` where R sets the listed variables to zero."""
        idx = [self.vars.index(nm) if isinstance(nm, str) else nm for nm in names]
        return WeylOp._raw(self.vars, self.ctx,
                           {k: c for k, c in self.terms.items() if all(k[0][i] == 0 for i in idx)})

    def reindex(self, new_vars, mapping) -> "WeylOp":
        """Rename variables injectively (``mapping[i]`` = target index)."""
        new_vars = tuple(new_vars)
        acc = {}
        for (a, b), c in self.terms.items():
            na = [0] * len(new_vars)
            nb = [0] * len(new_vars)
            for i in range(len(a)):
                if a[i] or b[i]:
                    na[mapping[i]] += a[i]
                    nb[mapping[i]] += b[i]
            _add_into(acc, (tuple(na), tuple(nb)), c)
        return WeylOp._raw(new_vars, self.ctx, acc)

    # -- action --------------------------------------------------------------------------
    def apply(self, p: Poly) -> Poly:
        if p.vars != self.vars:
            raise ContextError(f"variable mismatch: {self.vars} vs {p.vars}")
        if p.ctx != self.ctx:
            raise ContextError(f"parameter mismatch: {self.ctx} vs {p.ctx}")
        acc = {}
        n = len(self.vars)
        rng = range(n)
        for (a, b), c in self.terms.items():
            for m, pc in p.terms.items():
                f = 1
                for i in rng:
                    bi = b[i]
                    if bi:
                        mi = m[i]
                        if mi < bi:
                            f = 0
                            break
                        f *= falling(mi, bi)
                if not f:
                    continue
                nm = tuple(m[i] - b[i] + a[i] for i in rng)
                _add_into(acc, nm, (c * pc) * f)
        return Poly._raw(self.vars, self.ctx, acc)

    __call__ = apply

    # -- display ---------------------------------------------------------------------------
    def _mon_str(self, a, b, latex=False):
        parts = []
        for nm, e in zip(self.vars, a):
            if e:
                base = _latex_var(nm) if latex else nm
                parts.append(base if e == 1 else (f"{base}^{{{e}}}" if latex else f"{base}^{e}"))
        for nm, e in zip(self.vars, b):
            if e:
                if latex:
                    base = f"\\partial_{{{_latex_var(nm)}}}"
                    parts.append(base if e == 1 else f"\\partial_{{{_latex_var(nm)}}}^{{{e}}}")
                else:
                    base = f"d_{nm}"
                    parts.append(base if e == 1 else f"{base}^{e}")
        return (" " if latex else "*").join(parts)

    def _render(self, latex=False, namemap=None):
        if not self.terms:
            return "0"
        out = []
        for i, ((a, b), c) in enumerate(self.items()):
            out.append(_join_term(c, self._mon_str(a, b, latex), i == 0, latex, namemap))
        return "".join(out)

    def __str__(self):
        return self._render()

    def __repr__(self):
        return f"WeylOp({self._render()!r}, vars={self.vars})"

    def to_latex(self, namemap=None) -> str:
        return self._render(True, namemap)

    def to_json(self):
        return [{"alpha": list(a), "beta": list(b), "coeff": str(c)} for (a, b), c in self.items()]

    @classmethod
    def from_json(cls, vars, ctx, data) -> "WeylOp":
        return cls(vars, ctx, {(tuple(t["alpha"]), tuple(t["beta"])): ctx.parse(t["coeff"]) for t in data})

    def dumps(self) -> str:
        return json.dumps({"vars": list(self.vars), "params": list(self.ctx.names), "terms": self.to_json()})


def _leibniz(b, g):
    """Expansion of d^b x^g as list of (factor, kappa) with d^b x^g = sum f x^(g-k) d^(b-k)."""
    ranges = [range(min(bi, gi) + 1) for bi, gi in zip(b, g)]
    out = []
    for kappa in product(*ranges):
        f = 1
        for bi, gi, ki in zip(b, g, kappa):
            if ki:
                f *= comb(bi, ki) * falling(gi, ki)
        out.append((f, kappa))
    return out


def compose(t1: WeylOp, t2: WeylOp) -> WeylOp:
    """Normal-ordered product t1 o t2."""
    t1._check(t2)
    acc = {}
    cache = {}
    for (a, b), c1 in t1.terms.items():
        for (g, d), c2 in t2.terms.items():
            key = (b, g)
            exp = cache.get(key)
            if exp is None:
                exp = _leibniz(b, g)
                cache[key] = exp
            c = c1 * c2
            for f, kappa in exp:
                na = tuple(ai + gi - ki for ai, gi, ki in zip(a, g, kappa))
                nb = tuple(bi + di - ki for bi, di, ki in zip(b, d, kappa))
                _add_into(acc, (na, nb), c * f)
    return WeylOp._raw(t1.vars, t1.ctx, acc)


def euler(vars, ctx, subset=None) -> WeylOp:
    """Euler operator sum x_i d_i (over ``subset`` of variable names if given)."""
    vars = tuple(vars)
    idx = range(len(vars)) if subset is None else [vars.index(s) if isinstance(s, str) else s for s in subset]
    out = WeylOp(vars, ctx)
    for i in idx:
        out = out + WeylOp.x(vars, ctx, i) * WeylOp.d(vars, ctx, i)
    return out


def laplacian(vars, ctx, subset=None) -> WeylOp:
    """Sum of second derivatives over ``subset`` (default: all variables)."""
    vars = tuple(vars)
    idx = range(len(vars)) if subset is None else [vars.index(s) if isinstance(s, str) else s for s in subset]
    out = WeylOp(vars, ctx)
    for i in idx:
        out = out + WeylOp.d(vars, ctx, i, 2)
    return out


def quadratic_form(vars, ctx, subset=None) -> Poly:
    """Q(x) = sum x_i^2 over ``subset``."""
    vars = tuple(vars)
    idx = range(len(vars)) if subset is None else [vars.index(s) if isinstance(s, str) else s for s in subset]
    out = Poly(vars, ctx)
    for i in idx:
        out = out + Poly.var(vars, ctx, i, 2)
    return out


def fourier_hat(t: WeylOp, scale=None, target_vars=None) -> WeylOp:
    """Algebraic Fourier transform: d_j -> -s_j zeta_j, x_j -> (1/s_j) d_{zeta_j}.

    ``scale`` is an optional per-variable tuple of nonzero rationals (default 1),
    used for coordinates whose natural pairing is not the standard one.
    """
    n = len(t.vars)
    tv = dual_vars(t.vars) if target_vars is None else tuple(target_vars)
    ctx = t.ctx
    s = [Fraction(1)] * n if scale is None else [Fraction(x) for x in scale]
    acc = {}
    zero = (0,) * n
    for (a, b), c in t.terms.items():
        # x^a d^b -> prod_i (d_i/s_i)^{a_i} (-s_i zeta_i)^{b_i}; re-order d^a zeta^b
        f = Fraction(-1) ** sum(b)
        for i in range(n):
            if a[i] or b[i]:
                f *= s[i] ** (b[i] - a[i])
        cc = c * f if f != 1 else c
        for lf, kappa in _leibniz(a, b):
            na = tuple(bi - ki for bi, ki in zip(b, kappa))
            nb = tuple(ai - ki for ai, ki in zip(a, kappa))
            _add_into(acc, (na, nb), cc * lf)
    del zero
    return WeylOp._raw(tv, ctx, acc)


def symbol(t: WeylOp, target_vars=None) -> Poly:
    """Symbol of a constant-coefficient operator: d^beta -> zeta^beta."""
    if not t.is_constant_coeff():
        raise ValueError("symbol is defined only for constant-coefficient operators")
    tv = dual_vars(t.vars) if target_vars is None else tuple(target_vars)
    return Poly._raw(tv, t.ctx, {b: c for (a, b), c in t.terms.items()})


def symbol_inverse(p: Poly, target_vars=None) -> WeylOp:
    """Constant-coefficient operator with symbol ``p``."""
    tv = dual_vars(p.vars) if target_vars is None else tuple(target_vars)
    z = (0,) * len(p.vars)
    return WeylOp._raw(tv, p.ctx, {(z, m): c for m, c in p.terms.items()})


def matrix_action(A, side: str, vars, ctx: ParamContext) -> WeylOp:
    """Vector field induced by a square matrix.

    primal: -sum_ij A_ij x_j d_i ;  dual: sum_ij A_ji x_j d_i.
    """
    vars = tuple(vars)
    n = len(vars)
    if len(A) != n or any(len(row) != n for row in A):
        raise ValueError(f"matrix must be {n}x{n}")
    if side not in ("primal", "dual"):
        raise ValueError("side must be 'primal' or 'dual'")
    out = {}
    for i in range(n):
        for j in range(n):
            c = A[i][j] if side == "primal" else A[j][i]
            c = ctx(c)
            if not c:
                continue
            a = [0] * n
            b = [0] * n
            a[j] = 1
            b[i] = 1
            _add_into(out, (tuple(a), tuple(b)), -c if side == "primal" else c)
    return WeylOp._raw(vars, ctx, out)
