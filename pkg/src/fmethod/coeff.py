"""Exact coefficient field.

Rational numbers are plain :class:`fractions.Fraction`.  Rational functions in a
fixed ordered tuple of parameter symbols are :class:`RatFunc` values, stored as
a reduced numerator/denominator pair of polynomials over QQ.  The polynomial
arithmetic itself (and the gcd used for reduction) comes from sympy's sparse
polynomial rings; everything above that is local.

Canonical form: numerator and denominator are coprime and the leading
coefficient of the denominator, in graded lexicographic order, is 1.  Two
values are equal iff their canonical forms are identical.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

__all__ = [
    "ContextError",
    "ParamContext",
    "RatFunc",
    "context",
    "normalize",
    "to_fraction",
]


class ContextError(TypeError):
    """Raised when values from different parameter contexts are combined."""


_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def _qq(value):
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    return QQ.convert(value)


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction, gmpy rational or constant RatFunc to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, RatFunc):
        return value.to_fraction()
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


class ParamContext:
    """An ordered tuple of parameter symbols together with its polynomial ring.

    Two contexts are interchangeable iff their symbol tuples agree.
    """

    __slots__ = ("names", "ring", "_one", "_zero")

    def __init__(self, names=()):
        names = tuple(names)
        for nm in names:
            if not _NAME_RE.match(nm):
                raise ValueError(f"bad parameter name {nm!r}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        self.names = names
        self.ring = PolyRing(names, QQ, grlex) if names else PolyRing((), QQ, grlex)
        self._one = RatFunc._raw(self, self.ring.one, self.ring.one)
        self._zero = RatFunc._raw(self, self.ring.zero, self.ring.one)

    def __eq__(self, other):
        return isinstance(other, ParamContext) and other.names == self.names

    def __hash__(self):
        return hash(("ParamContext", self.names))

    def __repr__(self):
        return f"ParamContext({self.names!r})"

    @property
    def zero(self) -> "RatFunc":
        return self._zero

    @property
    def one(self) -> "RatFunc":
        return self._one

    def gen(self, name: str) -> "RatFunc":
        try:
            i = self.names.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a parameter of {self!r}") from None
        return RatFunc._raw(self, self.ring.gens[i], self.ring.one)

    def gens(self):
        return tuple(self.gen(nm) for nm in self.names)

    def __call__(self, value) -> "RatFunc":
        """Coerce ``value`` (int, Fraction, RatFunc or string) into this context."""
        if isinstance(value, RatFunc):
            if value.ctx is self or value.ctx == self:
                return value
            raise ContextError(f"value lives in {value.ctx!r}, not {self!r}")
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, int) and value == 0:
            return self._zero
        if isinstance(value, int) and value == 1:
            return self._one
        return RatFunc._raw(self, self.ring.ground_new(_qq(value)), self.ring.one)

    def extend(self, *names) -> "ParamContext":
        """Context with extra symbols appended (existing order preserved)."""
        extra = [nm for nm in names if nm not in self.names]
        return context(self.names + tuple(extra))

    def embed(self, value) -> "RatFunc":
        """Map a value from a context whose symbols are a subset of ours."""
        if not isinstance(value, RatFunc):
            return self(value)
        if value.ctx == self:
            return value
        missing = set(value.ctx.names) - set(self.names)
        if missing:
            raise ContextError(f"cannot embed: symbols {sorted(missing)} missing")
        num = value.num.set_ring(self.ring)
        den = value.den.set_ring(self.ring)
        return normalize(self, num, den)

    def parse(self, text: str) -> "RatFunc":
        """Parse an expression built from +, -, *, /, ^ (or **), integers and symbols."""
        src = text.replace("^", "**").strip()
        if not src:
            raise ValueError("empty expression")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse {text!r}") from exc
        return self._eval_ast(tree.body, text)

    def _eval_ast(self, node, text):
        if isinstance(node, ast.BinOp):
            left = self._eval_ast(node.left, text)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    if (isinstance(node.right, ast.UnaryOp) and isinstance(node.right.op, ast.USub)
                            and isinstance(node.right.operand, ast.Constant)
                            and isinstance(node.right.operand.value, int)):
                        return left ** (-node.right.operand.value)
                    raise ValueError(f"exponent must be an integer literal in {text!r}")
                return left ** node.right.value
            right = self._eval_ast(node.right, text)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            raise ValueError(f"unsupported operator in {text!r}")
        if isinstance(node, ast.UnaryOp):
            val = self._eval_ast(node.operand, text)
            if isinstance(node.op, ast.USub):
                return -val
            if isinstance(node.op, ast.UAdd):
                return val
            raise ValueError(f"unsupported operator in {text!r}")
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return self(node.value)
        if isinstance(node, ast.Name):
            if node.id not in self.names:
                raise ValueError(f"unknown symbol {node.id!r} in {text!r}")
            return self.gen(node.id)
        raise ValueError(f"unsupported syntax in {text!r}")


@lru_cache(maxsize=None)
def context(names=()) -> ParamContext:
    """Shared context instance for a symbol tuple (contexts are immutable)."""
    return ParamContext(tuple(names))


def normalize(ctx: ParamContext, num, den) -> "RatFunc":
    """Reduce num/den (ring elements of ``ctx``) to canonical form."""
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return ctx._zero
    if den.is_ground:
        c = den.LC
        if c != 1:
            num = num.quo_ground(c)
        return RatFunc._raw(ctx, num, ctx.ring.one)
    num, den = num.cancel(den)
    c = den.LC
    if c != 1:
        num = num.quo_ground(c)
        den = den.quo_ground(c)
    return RatFunc._raw(ctx, num, den)


class RatFunc:
    """Immutable rational function in the symbols of a :class:`ParamContext`."""

    __slots__ = ("ctx", "num", "den")

    @classmethod
    def _raw(cls, ctx, num, den):
        obj = object.__new__(cls)
        obj.ctx = ctx
        obj.num = num
        obj.den = den
        return obj

    # -- coercion helpers -------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.ctx is self.ctx or other.ctx == self.ctx:
                return other
            raise ContextError(f"mixing {self.ctx!r} and {other.ctx!r}")
        if isinstance(other, (int, Fraction)):
            return self.ctx(other)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        one = self.ctx.ring.one
        if self.den == one and o.den == one:
            return RatFunc._raw(self.ctx, self.num + o.num, one)
        if self.den == o.den:
            return normalize(self.ctx, self.num + o.num, self.den)
        return normalize(self.ctx, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(self.ctx, -self.num, self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self.ctx._zero
            return RatFunc._raw(self.ctx, self.num * other, self.den)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        one = self.ctx.ring.one
        if self.den == one and o.den == one:
            return RatFunc._raw(self.ctx, self.num * o.num, one)
        return normalize(self.ctx, self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return normalize(self.ctx, self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            raise ZeroDivisionError("division by zero rational function")
        return normalize(self.ctx, self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc._raw(self.ctx, self.num ** k, self.den ** k)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, RatFunc):
            if not (other.ctx is self.ctx or other.ctx == self.ctx):
                return False
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        if self.is_constant():
            return hash(self.to_fraction())
        return hash((self.ctx.names, tuple(sorted(self.num.terms())), tuple(sorted(self.den.terms()))))

    def __bool__(self):
        return bool(self.num)

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def is_polynomial(self) -> bool:
        return self.den.is_ground

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        c = self.num.LC if self.num else QQ(0)
        return Fraction(int(c.numerator), int(c.denominator))

    def symbols(self):
        """Names of parameters that actually occur."""
        used = set()
        for poly in (self.num, self.den):
            for mon in poly.monoms():
                for i, e in enumerate(mon):
                    if e:
                        used.add(self.ctx.names[i])
        return tuple(nm for nm in self.ctx.names if nm in used)

    # -- evaluation ---------------------------------------------------------
    def subs(self, values: dict) -> "RatFunc":
        """Substitute rational values for some symbols, staying in the same context.

        Raises ZeroDivisionError if the denominator vanishes at the point.
        """
        num, den = self.num, self.den
        ring = self.ctx.ring
        for name, val in values.items():
            i = self.ctx.names.index(name)
            if isinstance(val, RatFunc):
                val = self.ctx(val)
                if not val.is_polynomial():
                    raise ValueError("only polynomial substitutions are supported")
                num = num.compose(ring.gens[i], val.num)
                den = den.compose(ring.gens[i], val.num)
            else:
                q = _qq(to_fraction(val))
                num = num.compose(ring.gens[i], ring.ground_new(q))
                den = den.compose(ring.gens[i], ring.ground_new(q))
        if not den:
            raise ZeroDivisionError(f"denominator of {self} vanishes at {values}")
        return normalize(self.ctx, num, den)

    def evaluate(self, values: dict) -> Fraction:
        """Evaluate at a full assignment of rational values."""
        return self.subs(values).to_fraction()

    # -- display ------------------------------------------------------------
    def _integer_parts(self):
        nt = self.num.terms()
        dt = self.den.terms()
        den_l = 1
        for _, c in nt + dt:
            den_l = lcm(den_l, int(c.denominator))
        nint = [(m, int(c.numerator) * (den_l // int(c.denominator))) for m, c in nt]
        dint = [(m, int(c.numerator) * (den_l // int(c.denominator))) for m, c in dt]
        g = 0
        for _, c in nint + dint:
            g = gcd(g, c)
        if g > 1:
            nint = [(m, c // g) for m, c in nint]
            dint = [(m, c // g) for m, c in dint]
        return nint, dint

    def _fmt_poly(self, terms, power="^", mul="*", namemap=None):
        if not terms:
            return "0"
        names = self.ctx.names if namemap is None else [namemap.get(n, n) for n in self.ctx.names]
        order = sorted(terms, key=lambda mc: (sum(mc[0]), mc[0]), reverse=True)
        out = []
        for idx, (mon, c) in enumerate(order):
            factors = []
            for nm, e in zip(names, mon):
                if e == 1:
                    factors.append(nm)
                elif e > 1:
                    factors.append(f"{nm}{power}{e}" if power != "latex" else f"{nm}^{{{e}}}")
            sep = mul if power != "latex" else " "
            body = sep.join(factors)
            mag = abs(c)
            if body:
                txt = body if mag == 1 else f"{mag}{sep}{body}" if sep.strip() else f"{mag}{body}"
            else:
                txt = str(mag)
            if idx == 0:
                out.append(("-" if c < 0 else "") + txt)
            else:
                out.append((" - " if c < 0 else " + ") + txt)
        return "".join(out)

    def __str__(self):
        if not self.num:
            return "0"
        nint, dint = self._integer_parts()
        ns = self._fmt_poly(nint)
        if len(dint) == 1 and dint[0][0] == (0,) * len(self.ctx.names) and dint[0][1] == 1:
            return ns
        ds = self._fmt_poly(dint)
        if len(nint) > 1:
            ns = f"({ns})"
        if len(dint) > 1 or "*" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"RatFunc({str(self)!r})"

    def to_latex(self, namemap=None) -> str:
        """LaTeX rendering; ``namemap`` maps symbol names to LaTeX macros."""
        if not self.num:
            return "0"
        nint, dint = self._integer_parts()
        nm = namemap or {}
        ns = self._fmt_poly(nint, power="latex", namemap=nm)
        if len(dint) == 1 and dint[0][0] == (0,) * len(self.ctx.names) and dint[0][1] == 1:
            return ns
        ds = self._fmt_poly(dint, power="latex", namemap=nm)
        return f"\\frac{{{ns}}}{{{ds}}}"

    def needs_parens(self) -> bool:
        """True when the printed form is a sum (so products need brackets)."""
        return len(self.num.terms()) > 1 and self.den.is_ground
