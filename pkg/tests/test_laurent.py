import random

import pytest
from hypothesis import given, settings, strategies as st

from ascoh.errors import (
    NoRoot,
    NotSecondKind,
    OddExponentInSqrt,
    PrecisionExhausted,
)
from ascoh.gf2m import GF2m
from ascoh.laurent import (
    EXACT,
    LaurentSeries,
    LocalDifferential,
    TailClass,
    cartier_local,
    default_precision,
    integrate_tail,
    reduce_series_artin_schreier,
    reduce_tail,
    residue,
    solve_artin_schreier,
)

GF2 = GF2m(1)
GF4 = GF2m(2)


def S(field, val, coeffs, known=EXACT):
    return LaurentSeries(field, val, coeffs, known)


def random_series(field, rng, lo=-6, width=10, known=EXACT):
    coeffs = [field.random_element(rng) for _ in range(width)]
    return LaurentSeries(field, lo, coeffs, known)


class TestSeriesArith:
    def test_sqrt_of_u_squared(self):
        s = S(GF2, 2, [1])
        assert s.sqrt() == S(GF2, 1, [1])

    def test_derivative_of_u_squared_is_zero(self):
        s = S(GF2, 2, [1])
        assert s.derivative().is_zero()

    def test_geometric_inverse(self):
        # (1+u)^-1 to precision 4 is 1+u+u^2+u^3; check by multiplying back
        s = S(GF2, 0, [1, 1], known=4)
        inv = s.inverse()
        assert inv.known == 4
        assert [inv.coeff(i) for i in range(4)] == [1, 1, 1, 1]
        prod = s * inv
        assert prod.coeff(0) == 1
        assert all(prod.coeff(i) == 0 for i in range(1, prod.known))

    def test_mul_precision_pessimism(self):
        a = S(GF4, -2, [1, 1], known=3)
        b = S(GF4, 1, [1], known=5)
        assert (a * b).known == min(-2 + 5, 1 + 3)

    def test_add_known_is_min(self):
        a = S(GF4, 0, [1], known=7)
        b = S(GF4, 0, [3], known=4)
        assert (a + b).known == 4

    def test_sqrt_odd_exponent_rejected(self):
        with pytest.raises(OddExponentInSqrt):
            S(GF2, 1, [1]).sqrt()

    def test_coeff_beyond_precision_raises(self):
        s = S(GF2, 0, [1], known=3)
        with pytest.raises(PrecisionExhausted):
            s.coeff(3)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_sqrt_squares_back(self, seed):
        rng = random.Random(seed)
        s = random_series(GF4, rng, lo=-4, width=8)
        sq = s.square()
        root = sq.sqrt()
        assert root == s.truncate(root.known)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_derivative_of_square_is_zero(self, seed):
        rng = random.Random(seed)
        s = random_series(GF4, rng)
        assert s.square().derivative().is_zero()

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_inverse_multiplies_to_one(self, seed):
        rng = random.Random(seed)
        s = random_series(GF4, rng, lo=rng.randrange(-3, 3), width=6)
        if s.is_zero():
            return
        p = s * s.inverse()
        assert p.coeff(0) == 1
        for e in range(1, p.known):
            assert p.coeff(e) == 0

    def test_compose_linear_shift(self):
        # f(u) = u^-1 + u, g = u + u^2: f(g) has valuation -1
        f = S(GF4, -1, [1, 0, 1], known=5)
        g = S(GF4, 1, [1, 1], known=8)
        h = f.compose(g)
        gi = g.inverse()
        expect = gi + g
        assert h == expect.truncate(h.known)

    def test_compose_requires_positive_inner_valuation(self):
        f = S(GF4, 0, [1, 1])
        g = S(GF4, 0, [1, 1])
        with pytest.raises(PrecisionExhausted):
            f.compose(g)


class TestResidueAndCartier:
    def test_residue_of_du_over_u(self):
        assert residue(LocalDifferential(S(GF2, -1, [1]))) == 1

    def test_residue_of_u_minus_2_du(self):
        assert residue(LocalDifferential(S(GF2, -2, [1]))) == 0

    def test_residue_precision(self):
        with pytest.raises(PrecisionExhausted):
            residue(LocalDifferential(S(GF2, -3, [1], known=-2)))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_residue_of_f_df_is_zero(self, seed):
        rng = random.Random(seed)
        f = random_series(GF4, rng, lo=-5, width=10)
        omega = LocalDifferential(f * f.derivative())
        assert residue(omega) == 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_integration_by_parts(self, seed):
        rng = random.Random(seed)
        f = random_series(GF4, rng, lo=-4, width=8)
        g = random_series(GF4, rng, lo=-4, width=8)
        r1 = residue(LocalDifferential(f * g.derivative()))
        r2 = residue(LocalDifferential(g * f.derivative()))
        assert r1 ^ r2 == 0

    def test_cartier_u_minus_3(self):
        out = cartier_local(LocalDifferential(S(GF2, -3, [1])))
        assert out.body == S(GF2, -2, [1])

    def test_cartier_du_is_zero(self):
        assert cartier_local(LocalDifferential(S(GF2, 0, [1]))).body.is_zero()

    def test_cartier_u_du(self):
        out = cartier_local(LocalDifferential(S(GF2, 1, [1])))
        assert out.body == S(GF2, 0, [1])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_cartier_kills_exact_differentials(self, seed):
        rng = random.Random(seed)
        f = random_series(GF4, rng, lo=-5, width=10)
        assert cartier_local(LocalDifferential(f.derivative())).body.is_zero()

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_cartier_zero_implies_exact(self, seed):
        # if V(omega) = 0 within precision, omega antidifferentiates
        rng = random.Random(seed)
        f = random_series(GF4, rng, lo=-4, width=8)
        omega = LocalDifferential(f.derivative())
        assert cartier_local(omega).body.is_zero()
        # explicit antidifferentiation: every known exponent must be even
        for e, c in omega.body.terms():
            assert e % 2 == 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_cartier_semilinearity(self, seed):
        rng = random.Random(seed)
        c = GF4.random_element(rng)
        f = random_series(GF4, rng, lo=-4, width=8)
        lhs = cartier_local(LocalDifferential(f.scale(GF4.frob(c))))
        rhs = cartier_local(LocalDifferential(f)).scale(c)
        assert lhs.body == rhs.body


class TestArtinSchreierSolve:
    def test_f_equals_t(self):
        f = S(GF2, 1, [1], known=16)
        y = solve_artin_schreier(f, 0, 16)
        resid = y.square() + y + f
        assert resid.is_zero()
        # y = t + t^2 + t^4 + t^8 + ...
        assert [e for e, _ in y.terms()] == [1, 2, 4, 8]

    def test_f_zero_seed_zero(self):
        y = solve_artin_schreier(LaurentSeries.zero(GF2, 16), 0, 16)
        assert y.is_zero()

    def test_f_zero_seed_one(self):
        y = solve_artin_schreier(LaurentSeries.zero(GF2, 16), 1, 16)
        assert y == LaurentSeries.const(GF2, 1, known=16)

    def test_bad_seed_rejected(self):
        f = S(GF2, 0, [1, 1], known=8)
        with pytest.raises(NoRoot):
            solve_artin_schreier(f, 0, 8)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_random_solves(self, seed):
        rng = random.Random(seed)
        f = random_series(GF4, rng, lo=0, width=10, known=12)
        f0 = f.coeff(0)
        if GF4.trace(f0):
            with pytest.raises(NoRoot):
                GF4.artin_schreier_roots(f0)
            return
        seed_c = GF4.artin_schreier_roots(f0)[0]
        y = solve_artin_schreier(f, seed_c, 12)
        assert (y.square() + y + f).is_zero()


class TestTails:
    def test_integrate_u_minus_2(self):
        t = integrate_tail(LocalDifferential(S(GF2, -2, [1])))
        assert t.terms == {-1: 1}
        # d(u^-1) = u^-2 du in char 2
        assert t.d().body == S(GF2, -2, [1])

    def test_integrate_regular_is_empty(self):
        t = integrate_tail(LocalDifferential(S(GF2, 0, [1])))
        assert t.is_zero()

    def test_integrate_odd_pole_rejected(self):
        with pytest.raises(NotSecondKind):
            integrate_tail(LocalDifferential(S(GF2, -3, [1])))

    def test_reduce_already_odd(self):
        t = TailClass(GF2, {-3: 1})
        red, g = reduce_tail(t)
        assert red == t and g.is_zero()

    def test_reduce_even_leading(self):
        c = 3  # g+1 in GF(4)
        t = TailClass(GF4, {-2: c})
        red, g = reduce_tail(t)
        r = GF4.ifrob(c)
        assert g.terms == {-1: r}
        assert red.terms == {-1: r}
        assert red.pole_order() <= 1

    def test_reduce_empty(self):
        red, g = reduce_tail(TailClass(GF2))
        assert red.is_zero() and g.is_zero()

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_reduce_equivalence_and_odd_pole(self, seed):
        rng = random.Random(seed)
        field = GF2 if seed % 2 else GF4
        terms = {}
        for e in range(-10, 0):
            terms[e] = field.random_element(rng)
        t = TailClass(field, terms)
        red, g = reduce_tail(t)
        # equivalence: red == t + g^2 + g
        assert red == t + g.square() + g
        # odd (or no) pole
        if not red.is_zero():
            assert red.pole_order() % 2 == 1

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_reduce_series_matches_tail_reduction(self, seed):
        rng = random.Random(seed)
        s = random_series(GF4, rng, lo=-8, width=12, known=6)
        red, g = reduce_series_artin_schreier(s)
        gs = g.as_series()
        assert red == s + gs.square() + gs
        if not red.is_zero() and red.valuation() < 0:
            assert red.valuation() % 2 == 1


def test_default_precision():
    assert default_precision(7) == 4 * 7 + 16
