from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmethod.coeff import context
from fmethod.orthopoly import (
    gegenbauer, gegenbauer_from_jacobi_factor, inflate, jacobi, ode_residual, rising,
)
from fmethod.weyl import Poly

AB = context(("alpha", "beta"))
al, be = AB.gen("alpha"), AB.gen("beta")
T = ("t",)
XY = ("x", "y")


def tpoly(ctx, coeffs):
    return Poly(T, ctx, {(i,): c for i, c in enumerate(coeffs) if c})


def t_minus_1(ctx):
    return tpoly(ctx, [-1, 1])


class TestJacobiList:
    def test_degree0(self):
        assert jacobi(0, al, be).poly == Poly.const(T, AB, 1)

    def test_degree1(self):
        expected = tpoly(AB, [(al - be) / 2, (al + be + 2) / 2])
        assert jacobi(1, al, be).poly == expected

    def test_degree2(self):
        u = t_minus_1(AB)
        expected = (Poly.const(T, AB, (al + 1) * (al + 2) / 2)
                    + u * ((al + 2) * (al + be + 3) / 2)
                    + u * u * ((al + be + 3) * (al + be + 4) / 8))
        assert jacobi(2, al, be).poly == expected

    def test_value_at_one(self):
        for ell in range(6):
            p = jacobi(ell, al, be)
            val = p.poly.evaluate({"t": 1})
            assert val == rising(al + 1, ell) / factorial(ell)


class TestGegenbauerList:
    def test_first_five(self):
        a = al
        assert gegenbauer(0, a).poly == Poly.const(T, AB, 1)
        assert gegenbauer(1, a).poly == tpoly(AB, [0, a * 2])
        assert gegenbauer(2, a).poly == tpoly(AB, [-a, 0, a * 2 * (a + 1)])
        c3 = -a * 2 * (a + 1)
        assert gegenbauer(3, a).poly == tpoly(AB, [0, c3, 0, c3 * (-(a + 2) * Fraction(2, 3))])
        c4 = a * (a + 1) / 2
        assert gegenbauer(4, a).poly == tpoly(
            AB, [c4, 0, -c4 * 4 * (a + 2), 0, c4 * Fraction(4, 3) * (a + 2) * (a + 3)])


class TestInflate:
    def test_examples(self):
        x, y = (Poly.var(XY, AB, i) for i in range(2))
        assert inflate(gegenbauer(0, al)) == Poly.const(XY, AB, 1)
        assert inflate(gegenbauer(1, al)) == y * (al * 2)
        assert inflate(gegenbauer(2, al)) == y * y * (al * 2 * (al + 1)) - x * al
        assert inflate(jacobi(0, al, be)) == Poly.const(XY, AB, 1)
        assert inflate(jacobi(1, al, be)) == x * (al + be + 2) + y * (al + 1)

    @pytest.mark.parametrize("ell", range(9))
    def test_gegenbauer_weights(self, ell):
        for (k, m) in inflate(gegenbauer(ell, al)).terms:
            assert 2 * k + m == ell

    @pytest.mark.parametrize("ell", range(7))
    def test_jacobi_homogeneous(self, ell):
        assert inflate(jacobi(ell, al, be)).is_homogeneous()

    @pytest.mark.parametrize("ell", range(6))
    def test_jacobi_inflation_restricts(self, ell):
        # y^ell P(2x/y + 1) at y = 1 is P(2x + 1)
        P = jacobi(ell, al, be).poly
        infl = inflate(jacobi(ell, al, be))
        lhs = infl.compose({"x": Poly.var(T, AB, 0) * Fraction(1, 2) - Fraction(1, 2),
                            "y": Poly.const(T, AB, 1)})
        assert lhs == P


class TestRelations:
    @pytest.mark.parametrize("ell", range(9))
    def test_gegenbauer_is_specialized_jacobi(self, ell):
        half = Fraction(1, 2)
        factor = gegenbauer_from_jacobi_factor(ell, al)
        assert gegenbauer(ell, al).poly == jacobi(ell, al - half, al - half, AB).poly * factor

    @pytest.mark.parametrize("a,b", [(a, b) for a in range(3) for b in range(3)])
    def test_rodrigues(self, a, b):
        Q0 = context(())
        one_minus = tpoly(Q0, [1, -1])
        one_plus = tpoly(Q0, [1, 1])
        for ell in range(6):
            lhs = one_minus ** a * one_plus ** b * jacobi(ell, a, b, Q0).poly
            inner = (one_minus ** (ell + a) * one_plus ** (ell + b)).diff(0, ell)
            rhs = inner * Fraction((-1) ** ell, 2 ** ell * factorial(ell))
            assert lhs == rhs


class TestOdeResidual:
    @pytest.mark.parametrize("ell", range(11))
    def test_gegenbauer(self, ell):
        g = gegenbauer(ell, al).poly
        assert ode_residual("gegenbauer", {"ell": ell, "alpha": al}, g).is_zero()

    @pytest.mark.parametrize("ell", range(7))
    def test_jacobi(self, ell):
        g = jacobi(ell, al, be).poly
        assert ode_residual("jacobi", {"ell": ell, "alpha": al, "beta": be}, g).is_zero()

    def test_nonsolution(self):
        r = ode_residual("gegenbauer", {"ell": 1, "alpha": al}, Poly.const(T, AB, 1))
        assert not r.is_zero()
        assert r == Poly.monomial(T, AB, (2,), al * 2 + 1)

    def test_missing_parameter(self):
        with pytest.raises(KeyError):
            ode_residual("jacobi", {"ell": 1, "alpha": al}, Poly.const(T, AB, 1))

    def test_de3_solved_by_gegenbauer(self):
        L = context(("l",))
        l = L.gen("l")
        for n in (2, 3, 4):
            for a in range(5):
                g = gegenbauer(a, l - Fraction(n - 1, 2), L).poly
                assert ode_residual("de3", {"a": a, "lam": l, "n": n}, g).is_zero()

    def test_de2_solved_by_gegenbauer(self):
        L = context(("l",))
        l = L.gen("l")
        for n in (2, 3):
            mu = -l + n + 1
            for a in range(5):
                g = gegenbauer(a, l - 1, L).poly
                assert ode_residual("de2", {"a": a, "mu": mu, "n": n}, g).is_zero()

    def test_de1_solved_by_jacobi(self):
        K = context(("a1", "a2"))
        a1, a2 = K.gen("a1"), K.gen("a2")
        for a in range(5):
            g = jacobi(a, a1 - 1, 1 - a1 - a2 - 2 * a, K).poly
            assert ode_residual("de1", {"a": a, "a1": a1, "a2": a2}, g).is_zero()


@given(st.integers(0, 8), st.fractions(min_value=-3, max_value=3, max_denominator=6))
def test_gegenbauer_ode_numeric(ell, alpha):
    g = gegenbauer(ell, alpha).poly
    assert ode_residual("gegenbauer", {"ell": ell, "alpha": alpha}, g).is_zero()


def test_json():
    data = gegenbauer(2, Fraction(1, 2)).to_json()
    assert data == {"family": "gegenbauer", "degree": 2, "params": ["1/2"],
                    "coeffs": ["-1/2", "0", "3/2"]}
