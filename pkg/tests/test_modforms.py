from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmethod.modforms import (
    QSeries, bernoulli, delta, derive, eisenstein, is_proportional, rc_bracket, rc_symbol,
)
from fmethod.weyl import Poly

N = 30


def series(N, weight=0):
    coeff = st.fractions(min_value=-50, max_value=50, max_denominator=7)
    return st.lists(coeff, min_size=N + 1, max_size=N + 1).map(lambda cs: QSeries(tuple(cs), weight))


class TestBernoulli:
    def test_values(self):
        assert [bernoulli(m) for m in range(7)] == [
            1, Fraction(-1, 2), Fraction(1, 6), 0, Fraction(-1, 30), 0, Fraction(1, 42)]
        assert bernoulli(12) == Fraction(-691, 2730)

    def test_negative(self):
        with pytest.raises(ValueError):
            bernoulli(-1)


class TestEisenstein:
    def test_e4(self):
        assert eisenstein(4, 2).coeffs == (1, 240, 2160)

    def test_e6(self):
        assert eisenstein(6, 1).coeffs == (1, -504)

    def test_constant(self):
        assert eisenstein(4, 0).coeffs == (1,)

    def test_weight(self):
        assert eisenstein(8, 3).weight == 8

    @pytest.mark.parametrize("k", [3, 2, 0, 5])
    def test_bad_weight(self, k):
        with pytest.raises(ValueError):
            eisenstein(k, 3)

    def test_e4_squared_is_e8(self):
        assert eisenstein(4, N) * eisenstein(4, N) == eisenstein(8, N)

    def test_e4_e6_is_e10(self):
        assert eisenstein(4, N) * eisenstein(6, N) == eisenstein(10, N)


class TestDelta:
    def test_first_coefficients(self):
        # Ramanujan tau
        assert delta(6).coeffs == (0, 1, -24, 252, -1472, 4830, -6048)

    def test_from_eisenstein(self):
        e4, e6 = eisenstein(4, N), eisenstein(6, N)
        d = (e4 * e4 * e4 - e6 * e6).scale(Fraction(1, 1728))
        assert d.coeffs == delta(N).coeffs

    def test_weight(self):
        assert delta(4).weight == 12


class TestDerive:
    def test_constant(self):
        assert derive(QSeries.constant(1, 4)).is_zero()

    def test_q(self):
        q = QSeries((0, 1, 0, 0))
        assert derive(q) == q.with_weight(2)

    def test_e4(self):
        assert derive(eisenstein(4, 2)).coeffs == (0, 240, 4320)

    def test_repeated(self):
        f = eisenstein(6, 5)
        assert derive(f, 3) == derive(derive(derive(f)))


class TestBracket:
    def test_a0_is_product(self):
        f, g = eisenstein(4, 10), eisenstein(6, 10)
        assert rc_bracket(f, 4, g, 6, 0).coeffs == (f * g).coeffs

    @pytest.mark.parametrize("k", [4, 6, 8])
    @pytest.mark.parametrize("a", [1, 3, 5])
    def test_odd_self_bracket_vanishes(self, k, a):
        f = eisenstein(k, N)
        assert rc_bracket(f, k, f, k, a).is_zero()

    def test_e4_e6_delta(self):
        b = rc_bracket(eisenstein(4, N), 4, eisenstein(6, N), 6, 1)
        assert b.coeffs[0] == 0 and not b.is_zero()
        c = is_proportional(b, delta(N))
        assert c == b.coeffs[1]
        # q^1: 6 * 240 - 4 * (-504)
        assert c == 3456

    def test_e4_e4_degree2_is_cusp_form(self):
        # weight 12 again, cusp form, so a multiple of Delta
        b = rc_bracket(eisenstein(4, N), 4, eisenstein(4, N), 4, 2)
        assert b.weight == 12
        assert is_proportional(b, delta(N)) not in (None, 0)

    @pytest.mark.parametrize("a", range(5))
    def test_weight(self, a):
        b = rc_bracket(eisenstein(4, 5), 4, eisenstein(6, 5), 6, a)
        assert b.weight == 4 + 6 + 2 * a

    @given(series(8), series(8), st.integers(4, 12), st.integers(0, 4))
    def test_antisymmetry(self, f1, f2, k, a):
        lhs = rc_bracket(f1, k, f2, k, a)
        rhs = rc_bracket(f2, k, f1, k, a)
        assert lhs == rhs.scale((-1) ** a)

    def test_truncation_mismatch(self):
        with pytest.raises(ValueError):
            rc_bracket(eisenstein(4, 3), 4, eisenstein(6, 4), 6, 1)

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            rc_bracket(eisenstein(4, 3), 4, eisenstein(6, 3), 6, -1)


class TestSymbol:
    def test_a1(self):
        for k1, k2 in [(4, 6), (2, 2), (5, 7)]:
            s = rc_symbol(k1, k2, 1)
            assert s.terms == {(1, 0): k2, (0, 1): -k1}

    def test_a0(self):
        assert rc_symbol(4, 6, 0) == Poly.const(("xip", "xipp"), rc_symbol(4, 6, 0).ctx, 1)

    def test_a2_k2(self):
        s = rc_symbol(2, 2, 2)
        assert s.terms == {(2, 0): comb(3, 0) * comb(3, 2), (1, 1): -comb(3, 1) * comb(3, 1),
                           (0, 2): comb(3, 2) * comb(3, 0)}
        assert s.terms == {(2, 0): 3, (1, 1): -9, (0, 2): 3}

    @pytest.mark.parametrize("a", range(5))
    def test_symbol_matches_bracket(self, a):
        # applying the symbol to (D on f1, D on f2) reproduces the bracket
        k1, k2 = 4, 6
        f1, f2 = eisenstein(k1, 12), eisenstein(k2, 12)
        out = QSeries.constant(0, 12)
        for (i, j), c in rc_symbol(k1, k2, a).terms.items():
            out = out + (derive(f1, i).with_weight(0) * derive(f2, j).with_weight(0)).scale(c.to_fraction())
        assert out.coeffs == rc_bracket(f1, k1, f2, k2, a).coeffs


class TestProportional:
    def test_scalar(self):
        g = eisenstein(6, 5)
        assert is_proportional(g.scale(2), g) == 2

    def test_zero(self):
        g = eisenstein(6, 5)
        assert is_proportional(QSeries.constant(0, 5), g) == 0

    def test_none(self):
        assert is_proportional(eisenstein(4, 5), eisenstein(6, 5)) is None

    def test_zero_denominator(self):
        z = QSeries.constant(0, 3)
        assert is_proportional(z, z) == 0
        assert is_proportional(eisenstein(4, 3), z) is None


class TestSeries:
    @given(series(6, 4))
    def test_json_roundtrip(self, f):
        assert QSeries.from_json(f.dumps()) == f

    def test_text(self):
        assert str(eisenstein(6, 2)) == "1, -504, -16632"

    def test_json_shape(self):
        data = eisenstein(4, 2).to_json()
        assert data == {"weight": 4, "N": 2, "coeffs": ["1", "240", "2160"]}

    def test_bad_json(self):
        with pytest.raises(ValueError):
            QSeries.from_json({"weight": 4, "N": 3, "coeffs": ["1"]})

    def test_truncate(self):
        assert eisenstein(4, 5).truncate(2) == eisenstein(4, 2)
        with pytest.raises(ValueError):
            eisenstein(4, 2).truncate(5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            eisenstein(4, 2) + eisenstein(4, 3)
