"""The three split rank one settings and their infinitesimal actions.

Families:

``SO``  (SO(n,2), SO(n-1,2))       n variables zeta_1..zeta_n, parameter l
``SP``  (Sp(n,R), Sp(n-1,R)xSp(1,R)) symmetric-matrix variables zeta_ij (i<=j)
``UU``  (U(n,1)xU(n,1), U(n,1))   2n variables zetap_i, zetapp_i, parameters lp, lpp

Every spec carries the zeta-side (Fourier) variables and the z-side variables.
Public parameters are always the lambdas of the closed-form theorems; the
shifted constants used inside the operators are derived here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import ParamContext, RatFunc, context
from .weyl import Poly, WeylOp, euler, quadratic_form

__all__ = [
    "FAMILIES",
    "GeometrySpec",
    "build_geometry",
    "dpi_hat",
    "dpi_z",
    "gl_beta",
    "gl_dpi",
    "sp_scale",
]

FAMILIES = ("SO", "SP", "UU")

PARAM_NAMES = {"SO": ("l",), "SP": ("l",), "UU": ("lp", "lpp")}
LATEX_NAMES = {"l": r"\lambda", "lp": r"\lambda'", "lpp": r"\lambda''",
               "k": "k", "a": "a"}


def _sym_name(prefix, i, j, n):
    return f"{prefix}_{i}{j}" if n < 10 else f"{prefix}_{i}_{j}"


@dataclass(frozen=True)
class GeometrySpec:
    family: str
    n: int
    ctx: ParamContext
    values: tuple                 # ((name, Fraction), ...) numeric specialisations
    zeta_vars: tuple
    z_vars: tuple
    nplus: tuple                  # generator ids of n_+
    nplus_tau: tuple              # ids in n_+^tau
    nplus_antitau: tuple          # ids in n_+^{-tau}
    gtau: tuple                   # z-side generator ids of g^tau
    rho_shift: int                # mu = -lambda + rho_shift on the dual side (SO, SP)
    weight: dict = field(default_factory=dict, compare=False)

    @property
    def params(self):
        return self.ctx.names

    def param(self, name) -> RatFunc:
        """Parameter value: the symbol, or its numeric specialisation."""
        vals = dict(self.values)
        if name in vals:
            return self.ctx(vals[name])
        return self.ctx.gen(name)

    def specialize(self, obj):
        """Apply the numeric parameter values to a Poly/WeylOp/RatFunc."""
        if not self.values:
            return obj
        vals = dict(self.values)
        if isinstance(obj, RatFunc):
            return obj.subs(vals)
        return obj.subs_params(vals)

    # -- derived constants -------------------------------------------------------
    @property
    def lam(self) -> RatFunc:
        return self.param("l")

    def mu(self) -> RatFunc:
        """Dual-picture parameter mu = -lambda + rho (SO, SP)."""
        if self.family == "UU":
            raise ValueError("UU uses the pair (a1, a2)")
        return -self.lam + self.rho_shift

    def uu_a(self):
        """The two first-order coefficients (a1, a2) of the UU equation."""
        if self.family != "UU":
            raise ValueError("only defined for UU")
        n = self.n
        return (-self.param("lp") + (n + 1), -self.param("lpp") + (n - 1))

    def zeta_index(self, *key) -> int:
        """Index of a zeta variable: SO (j,), SP (i, j) symmetric, UU ('p'|'pp', i)."""
        if self.family == "SO":
            return key[0] - 1
        if self.family == "SP":
            i, j = sorted(key)
            return self.zeta_vars.index(_sym_name("zeta", i, j, self.n))
        side, i = key
        return (i - 1) if side == "p" else (self.n + i - 1)

    def latex_names(self):
        return {nm: LATEX_NAMES.get(nm, nm) for nm in self.ctx.names}

    def to_json(self):
        return {
            "family": self.family,
            "n": self.n,
            "params": list(self.ctx.names),
            "values": {k: str(v) for k, v in self.values},
            "zeta_vars": list(self.zeta_vars),
            "z_vars": list(self.z_vars),
            "nplus": list(self.nplus),
            "nplus_tau": list(self.nplus_tau),
            "nplus_antitau": list(self.nplus_antitau),
            "gtau": list(self.gtau),
            "rho_shift": self.rho_shift,
            "weight": {k: str(v) for k, v in self.weight.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _parse_values(family, params):
    """Normalise the user parameter spec into a tuple of numeric assignments."""
    names = PARAM_NAMES[family]
    if params is None:
        return ()
    if isinstance(params, dict):
        items = dict(params)
    else:
        params = tuple(params)
        if family == "UU" and len(params) == 4:
            # (l1', l2', l1'', l2'') -> differences
            p = [None if v is None or v == "sym" else Fraction(v) for v in params]
            lp = None if p[0] is None or p[1] is None else p[0] - p[1]
            lpp = None if p[2] is None or p[3] is None else p[2] - p[3]
            items = {"lp": lp, "lpp": lpp}
        else:
            if len(params) != len(names):
                raise ValueError(f"{family} expects {len(names)} parameter(s)")
            items = dict(zip(names, params))
    out = []
    for nm in names:
        v = items.get(nm)
        if v is None or v == "sym":
            continue
        out.append((nm, Fraction(v)))
    extra = set(items) - set(names)
    if extra:
        raise ValueError(f"unknown parameter(s) {sorted(extra)} for {family}")
    return tuple(out)


def build_geometry(family: str, n: int, params=None) -> GeometrySpec:
    """Build the generator tables of one geometry.

    ``params`` may be None (all symbolic), a tuple of values or a dict; a value
    of None or "sym" keeps that parameter symbolic.
    """
    family = family.upper()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if not isinstance(n, int):
        raise TypeError("n must be an integer")
    if family in ("SO", "SP") and n < 2:
        raise ValueError(f"{family} requires n >= 2")
    if family == "UU" and n < 1:
        raise ValueError("UU requires n >= 1")
    ctx = context(PARAM_NAMES[family])
    values = _parse_values(family, params)

    if family == "SO":
        zeta = tuple(f"zeta_{j}" for j in range(1, n + 1))
        z = tuple(f"z_{j}" for j in range(1, n + 1))
        nplus = tuple(f"C{j}" for j in range(1, n + 1))
        tau = nplus[:-1]
        anti = nplus[-1:]
        gtau = tuple(f"N{j}" for j in range(1, n)) + tau + ("H",) + tuple(
            f"M{i}{j}" for i in range(1, n) for j in range(i + 1, n))
        rho = n
        weight = {"chi": "l + a"}
    elif family == "SP":
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
        zeta = tuple(_sym_name("zeta", i, j, n) for i, j in pairs)
        z = tuple(_sym_name("z", i, j, n) for i, j in pairs)
        nplus = tuple(_sym_name("C", i, j, n) for i, j in pairs)
        tau = tuple(_sym_name("C", i, j, n) for i, j in pairs if (j < n) or (i == n))
        anti = tuple(_sym_name("C", i, n, n) for i in range(1, n))
        gtau = (tuple(_sym_name("N", i, j, n) for i, j in pairs if (j < n) or (i == n))
                + tau
                + tuple(_sym_name("L", i, j, n) for i in range(1, n) for j in range(1, n))
                + (_sym_name("L", n, n, n),))
        rho = n + 1
        weight = {"chi": "(a, 0, ..., 0; a) + (l, ..., l; l)"}
    else:
        zeta = tuple(f"zetap_{i}" for i in range(1, n + 1)) + tuple(
            f"zetapp_{i}" for i in range(1, n + 1))
        z = tuple(f"zp_{i}" for i in range(1, n + 1)) + tuple(f"zpp_{i}" for i in range(1, n + 1))
        tau = tuple(f"C{i}" for i in range(1, n + 1))
        anti = tuple(f"A{i}" for i in range(1, n + 1))
        nplus = tau + anti
        gtau = ("E11", "E12", "E21", "E22") if n == 1 else tau + tuple(f"N{i}" for i in range(1, n + 1))
        rho = n + 1
        weight = {"chi": "(a, 0, ..., 0; -a) + (l1, ..., l1; l2)",
                  "a1": "-lp + n + 1", "a2": "-lpp + n - 1"}
    return GeometrySpec(family, n, ctx, values, zeta, z, nplus, tau, anti, gtau, rho, weight)


# ---------------------------------------------------------------------------
# zeta side
# ---------------------------------------------------------------------------

def _sp_pairs(n):
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def _sp_matrix(G, gen):
    """Symmetric elementary matrix of an SP generator id like 'C12'."""
    key = gen[1:].lstrip("_")
    if "_" in key:
        i, j = (int(x) for x in key.split("_"))
    else:
        i, j = int(key[0]), int(key[1])
    n = G.n
    M = [[0] * n for _ in range(n)]
    M[i - 1][j - 1] = 1
    M[j - 1][i - 1] = 1
    return M


def dpi_hat(G: GeometrySpec, gen: str, mode: str = "printed") -> WeylOp:
    """Fourier-side operator of an n_+ generator.

    For SP, ``mode`` selects the printed two-sum formula ("printed") or the
    symmetric four-term expansion ("expanded").  The expanded form is the
    Fourier transform of the z-side action for the trace pairing and its
    generators commute.  The printed generators need not commute (C_11 and
    C_12 already fail for n = 2), but the off-diagonal ones annihilate the
    weight space used by the solver, and there the two modes differ by
    x -> 2x in the Gegenbauer inflation.
    """
    if gen not in G.nplus:
        raise KeyError(f"{gen!r} is not an n_+ generator of {G.family}")
    ctx, V = G.ctx, G.zeta_vars
    if G.family == "SO":
        j = int(gen[1:]) - 1
        dj = WeylOp.d(V, ctx, j)
        lam = G.lam
        box = WeylOp(V, ctx)
        for i in range(G.n):
            box = box + WeylOp.d(V, ctx, i, 2)
        op = dj * lam + euler(V, ctx) * dj - WeylOp.x(V, ctx, j) * box * Fraction(1, 2)
        return op
    if G.family == "SP":
        return _sp_dpi_hat(G, _sp_matrix(G, gen), mode)
    a1, a2 = G.uu_a()
    i = int(gen[1:])
    sign = 1 if gen[0] == "C" else -1
    n = G.n
    op = WeylOp(V, ctx)
    for side, coef, s in (("p", a1, 1), ("pp", a2, sign)):
        ii = G.zeta_index(side, i)
        part = WeylOp.d(V, ctx, ii) * coef
        for j in range(1, n + 1):
            jj = G.zeta_index(side, j)
            part = part + WeylOp.x(V, ctx, jj) * WeylOp.d(V, ctx, ii) * WeylOp.d(V, ctx, jj)
        op = op - part * s
    return op


def _sp_dpi_hat(G, C, mode):
    ctx, V, n = G.ctx, G.zeta_vars, G.n
    lam = G.lam
    op = WeylOp(V, ctx)

    def d(i, k):
        return WeylOp.d(V, ctx, G.zeta_index(i, k))

    def x(i, j):
        return WeylOp.x(V, ctx, G.zeta_index(i, j))

    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if C[i - 1][j - 1]:
                op = op - d(i, j) * (lam * C[i - 1][j - 1])
    rng = range(1, n + 1)
    for i in rng:
        for j in rng:
            for k in rng:
                for l in rng:
                    c = C[k - 1][l - 1]
                    if not c:
                        continue
                    if mode == "printed":
                        w = Fraction(int(i <= k and j <= l) + int(i >= k and j >= l), 2)
                    else:
                        w = Fraction((1 + int(i == k)) * (1 + int(j == l)), 4)
                    if w:
                        op = op - x(i, j) * d(i, k) * d(j, l) * (w * c)
    return op


# ---------------------------------------------------------------------------
# z side
# ---------------------------------------------------------------------------

def _mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), 0) for j in range(len(B[0]))]
            for i in range(len(A))]


def _mat_add(A, B, sign=1):
    return [[A[i][j] + B[i][j] * sign for j in range(len(A[0]))] for i in range(len(A))]


def gl_beta(Y, X):
    """beta(Y, X) = AX + B - XCX - XD for Y = (A, B, C, D) with A p x p, D q x q, X p x q."""
    A, B, C, D = Y
    p, q = len(A), len(D)
    if len(X) != p or any(len(r) != q for r in X):
        raise ValueError("X must be p x q")
    if len(B) != p or any(len(r) != q for r in B):
        raise ValueError("B must be p x q")
    if len(C) != q or any(len(r) != p for r in C):
        raise ValueError("C must be q x p")
    if any(len(r) != p for r in A) or any(len(r) != q for r in D):
        raise ValueError("A and D must be square")
    out = _mat_add(_mat_mul(A, X), B)
    out = _mat_add(out, _mat_mul(_mat_mul(X, C), X), -1)
    out = _mat_add(out, _mat_mul(X, D), -1)
    return out


def gl_alpha(Y, X):
    """alpha(Y, X) = (A - XC, CX + D)."""
    A, B, C, D = Y
    return _mat_add(A, _mat_mul(X, C), -1), _mat_add(_mat_mul(C, X), D)


def gl_dpi(Y, vars, ctx, mu1, mu2) -> WeylOp:
    """d pi(Y) = mu(alpha(Y, X)) - beta(Y, .) on M(p, q) for the character
    (A', D') -> mu1 tr A' + mu2 tr D'.  ``vars`` lists the p*q entries row by row."""
    A, B, C, D = Y
    p, q = len(A), len(D)
    X = [[Poly.var(vars, ctx, i * q + j) for j in range(q)] for i in range(p)]
    beta = gl_beta(Y, X)
    a1, a2 = gl_alpha(Y, X)
    tr = sum((a1[i][i] for i in range(p)), 0) * ctx(mu1) + sum((a2[i][i] for i in range(q)), 0) * ctx(mu2)
    op = WeylOp.mult(_as_poly(tr, vars, ctx))
    for i in range(p):
        for j in range(q):
            op = op - WeylOp.mult(_as_poly(beta[i][j], vars, ctx)) * WeylOp.d(vars, ctx, i * q + j)
    return op


def _as_poly(v, vars, ctx):
    if isinstance(v, Poly):
        return v
    return Poly.const(vars, ctx, v)


def _so_dpi_z(G, gen, nvars, mu, vars):
    ctx = G.ctx
    Q = quadratic_form(vars, ctx)
    E = euler(vars, ctx)
    kind = gen[0]
    if kind == "N":
        return -WeylOp.d(vars, ctx, int(gen[1:]) - 1)
    if kind == "C":
        j = int(gen[1:]) - 1
        zj = WeylOp.x(vars, ctx, j)
        return -zj * mu - zj * E + WeylOp.mult(Q) * WeylOp.d(vars, ctx, j) * Fraction(1, 2)
    if kind == "H":
        return E + mu
    if kind == "M":
        i, j = int(gen[1]) - 1, int(gen[2]) - 1
        return (WeylOp.x(vars, ctx, i) * WeylOp.d(vars, ctx, j)
                - WeylOp.x(vars, ctx, j) * WeylOp.d(vars, ctx, i))
    raise KeyError(gen)


def _uu1_Y(gen):
    A = [[0]]
    B = [[0]]
    C = [[0]]
    D = [[0]]
    which = {"E11": A, "E12": B, "E21": C, "E22": D}[gen]
    which[0][0] = 1
    return (A, B, C, D)


def sp_scale(G: GeometrySpec):
    """Per-variable Fourier scale for symmetric coordinates: 1 on the diagonal, 2 off it."""
    out = []
    for nm in G.z_vars:
        key = nm.split("_", 1)[1]
        i, j = (key.split("_") if "_" in key else (key[0], key[1]))
        out.append(1 if i == j else 2)
    return tuple(out)


def _sp_dpi_z(G, gen, mu):
    ctx, V, n = G.ctx, G.z_vars, G.n

    def zz(i, j):
        i, j = sorted((i, j))
        return Poly.var(V, ctx, G.zeta_index(i, j))

    def dz(i, j):
        return WeylOp.d(V, ctx, G.zeta_index(i, j))

    kind = gen[0]
    M = _sp_matrix(G, gen)
    Z = [[zz(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]
    if kind == "N":
        i, j = _sp_ij(gen)
        return -dz(i, j)
    if kind == "C":
        tr = sum((Z[i][k] * M[k][i] for i in range(n) for k in range(n)), 0)
        op = WeylOp.mult(_as_poly(tr, V, ctx)) * mu
        ZCZ = _mat_mul(_mat_mul(Z, M), Z)
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                op = op + WeylOp.mult(_as_poly(ZCZ[i - 1][j - 1], V, ctx)) * dz(i, j)
        return op
    if kind == "L":
        # Levi element diag(A, -A^t) with A = E_kl: character -mu tr A, field -(AZ + Z A^t)
        k, l = _sp_ij(gen)
        A = [[0] * n for _ in range(n)]
        A[k - 1][l - 1] = 1
        At = [[A[j][i] for j in range(n)] for i in range(n)]
        F = _mat_add(_mat_mul(A, Z), _mat_mul(Z, At))
        op = WeylOp.identity(V, ctx, -mu * (1 if k == l else 0))
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                op = op - WeylOp.mult(_as_poly(F[i - 1][j - 1], V, ctx)) * dz(i, j)
        return op
    raise KeyError(gen)


def _sp_ij(gen):
    key = gen[1:].lstrip("_")
    if "_" in key:
        i, j = (int(x) for x in key.split("_"))
    else:
        i, j = int(key[0]), int(key[1])
    return i, j


def dpi_z(G: GeometrySpec, gen: str, role: str = "source", picture: str = "dual", a: int = 0) -> WeylOp:
    """z-side first-order operator of a generator.

    ``picture="dual"`` is the action whose Fourier transform is ``dpi_hat``
    (SO: mu = -lambda + n).  ``picture="sections"`` is the action on sections
    of the source bundle, the one a covariant operator must intertwine; the
    target role is only available there and needs the degree ``a``.
    """
    if role not in ("source", "target"):
        raise ValueError("role must be 'source' or 'target'")
    if picture not in ("dual", "sections"):
        raise ValueError("picture must be 'dual' or 'sections'")
    ctx = G.ctx
    if G.family == "SO":
        if role == "source":
            allowed = G.nplus + G.gtau
            if gen not in allowed:
                raise KeyError(f"{gen!r} is not an SO generator")
            mu = G.mu() if picture == "dual" else G.lam
            return _so_dpi_z(G, gen, G.n, mu, G.z_vars)
        if picture != "sections":
            raise ValueError("target actions are given in the sections picture")
        if gen not in G.gtau:
            raise KeyError(f"{gen!r} is not in the g^tau table")
        return _so_dpi_z(G, gen, G.n - 1, G.lam + a, G.z_vars[:-1])
    if G.family == "UU":
        a1, a2 = G.uu_a()
        n = G.n
        if picture == "dual":
            m1, m2 = a1 - (n + 1), a2 - (n + 1)     # mu_1 - mu_2 per factor
            chars = ((m1, ctx.zero), (m2, ctx.zero))
        else:
            chars = ((-a1, ctx.zero), (-a2, ctx.zero))
        if role == "target":
            if picture != "sections" or n != 1:
                raise ValueError("UU target actions are implemented for n = 1 in the sections picture")
            if gen not in G.gtau:
                raise KeyError(f"{gen!r} is not in the g^tau table")
            t1 = chars[0][0] + chars[1][0] - a
            t2 = chars[0][1] + chars[1][1] + a
            return gl_dpi(_uu1_Y(gen), ("z_1",), ctx, t1, t2)
        if n == 1 and gen in ("E11", "E12", "E21", "E22"):
            Y = _uu1_Y(gen)
            p1 = gl_dpi(Y, ("zp",), ctx, *chars[0])
            p2 = gl_dpi(Y, ("zpp",), ctx, *chars[1])
            return _embed_pair(p1, p2, G)
        if gen in G.nplus:
            i = int(gen[1:]) - 1
            sign = 1 if gen[0] == "C" else -1
            return _uu_c(G, i, chars[0][0], chars[1][0], sign)
        if gen.startswith("N"):
            i = int(gen[1:]) - 1
            return -(WeylOp.d(G.z_vars, ctx, i) + WeylOp.d(G.z_vars, ctx, n + i))
        raise KeyError(f"{gen!r} is not a UU generator")
    # SP
    if gen not in G.nplus and gen not in G.gtau:
        raise KeyError(f"{gen!r} is not an SP generator")
    if role == "source":
        return _sp_dpi_z(G, gen, G.mu() if picture == "dual" else G.lam)
    if picture != "sections" or G.n != 2:
        raise ValueError("SP target actions are implemented for n = 2 in the sections picture")
    return _sp2_target(G, gen, G.lam + a)


def _sp2_target(G, gen, mu):
    """Target for n = 2: two rank-one actions, on z_11 and on z_22."""
    ctx = G.ctx
    tv = (G.z_vars[G.zeta_index(1, 1)], G.z_vars[G.zeta_index(2, 2)])
    kind = gen[0]
    i, j = _sp_ij(gen)
    if i != j:
        raise KeyError(f"{gen!r} does not act on the diagonal subvariety")
    k = i - 1
    z, d = WeylOp.x(tv, ctx, k), WeylOp.d(tv, ctx, k)
    if kind == "C":
        return z * mu + z * z * d
    if kind == "N":
        return -d
    if kind == "L":
        return WeylOp.identity(tv, ctx, -mu) - z * d * 2
    raise KeyError(gen)


def _uu_c(G, i, m1, m2, sign):
    """sum c_i z_i (E - m) on each factor (m = mu_1 - mu_2)."""
    ctx, V, n = G.ctx, G.z_vars, G.n
    Ep = euler(V, ctx, range(n))
    Epp = euler(V, ctx, range(n, 2 * n))
    op = WeylOp.x(V, ctx, i) * (Ep - m1)
    op = op + (WeylOp.x(V, ctx, n + i) * (Epp - m2)) * sign
    return op


def _embed_pair(p1: WeylOp, p2: WeylOp, G):
    """Sum of two one-variable operators placed on z' and z''."""
    V = G.z_vars
    return p1.reindex(V, [0]) + p2.reindex(V, [G.n])
