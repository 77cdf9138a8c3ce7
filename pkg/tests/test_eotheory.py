import pytest

from ascoh.dieudonne import Word, apply_word, final_type, m_branch
from ascoh.eotheory import (
    BoundsReport,
    RamificationData,
    admissible_mu,
    bounds,
    branch_final_type,
    codim_eo,
    codim_stratum_ss,
    final_type_bounds,
    mu_from_coefficients,
    mu_from_tail,
    one_point_bounds,
    ordinary_word_dimension,
    phi,
    phi_total,
    predict_2n1,
    predict_ordinary,
    predict_vtype_ss,
    v_word,
    word_for_target,
)
from ascoh.errors import AscohError
from ascoh.gf2m import GF2m
from ascoh.polys import RationalFunction
from ascoh.tower import INF, FunctionElement, TowerCurve

GF2 = GF2m(1)


def xpow(field, n, c=1):
    return FunctionElement(
        field, {frozenset(): RationalFunction(field, (0,) * n + (c,))}
    )


def ss_elliptic(field=GF2):
    return TowerCurve(field, [xpow(field, 3)])


class TestPhi:
    def test_single_block(self):
        assert phi(7, Word([1])) == 3
        assert phi(7, Word([2])) == 1
        assert phi(15, Word([2])) == 3

    def test_two_blocks(self):
        assert phi(7, Word([1, 1])) == 1  # V perp V

    def test_leading_perp(self):
        assert phi(15, Word([2], leading_perp=True)) == 11

    def test_range(self):
        for d in (7, 15, 31):
            for exps in ([1], [2], [1, 1], [3, 2], [1, 2, 1]):
                for lp in (False, True):
                    m = phi(d, Word(exps, leading_perp=lp))
                    assert 0 <= m <= d - 1

    def test_rejects_even_d(self):
        with pytest.raises(AscohError):
            phi(6, Word([1]))

    def test_v_word(self):
        assert v_word(Word([1, 1])) == Word([1, 2])
        assert v_word(Word([2], leading_perp=True)) == Word([2, 1])
        assert phi(15, v_word(Word([2], leading_perp=True))) == 11 // 2


class TestRamificationData:
    def test_derived_quantities(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        assert rd.l_x == 1 and rd.m == 1
        assert rd.f_y == 0 and rd.g_y == 5 and rd.l_y == 5
        assert rd.a(0) == 0 and rd.a(1) == 1 and rd.a(5) == 1

    def test_conservative_a(self):
        rd = RamificationData(g_x=2, f_x=0, breaks=(3,))
        assert rd.a(3) == rd.l_x == 2

    def test_rejects_even_break(self):
        with pytest.raises(AscohError):
            RamificationData(g_x=0, f_x=0, breaks=(4,))

    def test_rejects_decreasing_a(self):
        with pytest.raises(AscohError):
            RamificationData(g_x=2, f_x=0, breaks=(3,), a_x=(2, 1))


class TestOrdinaryPrediction:
    def test_p1_one_branch_d9(self):
        rd = RamificationData(g_x=0, f_x=0, breaks=(9,))
        module, nu = predict_ordinary(rd)
        assert rd.f_y == 0 and rd.g_y == 4
        assert nu == (0, 1, 1, 2)
        assert nu == final_type(module)

    def test_closed_form_matches_module(self):
        cases = [
            RamificationData(g_x=0, f_x=0, breaks=(3, 5, 7)),
            RamificationData(g_x=1, f_x=1, breaks=(5,)),
            RamificationData(g_x=2, f_x=2, breaks=(3, 3)),
        ]
        for rd in cases:
            module, nu = predict_ordinary(rd)
            assert len(nu) == rd.g_y
            assert nu == final_type(module)

    def test_branch_closed_form(self):
        for d in (3, 5, 7, 9, 11, 13, 15):
            assert branch_final_type(d) == final_type(m_branch(GF2, d))

    def test_word_dimension_formula(self):
        rd = RamificationData(g_x=1, f_x=1, breaks=(7, 5))
        module, _ = predict_ordinary(rd)
        for exps, lp in ([1], False), ([2], False), ([1, 1], False), ([1], True):
            w = Word(exps, leading_perp=lp)
            assert apply_word(module, w).dim == ordinary_word_dimension(rd, w)

    def test_rejects_nonordinary(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,))
        with pytest.raises(AscohError):
            predict_ordinary(rd)


class TestPredict2n1:
    def test_patterns(self):
        assert predict_2n1(3) == (0, 1, 2)
        assert predict_2n1(5) == (0, 1, 2, 3)
        assert predict_2n1(9) == (0, 1, 2, 3, 3, 4)
        assert predict_2n1(17) == (0, 1, 2, 3, 3, 4, 4, 5, 5, 6)

    def test_rejects_other_d(self):
        with pytest.raises(AscohError):
            predict_2n1(7)


class TestVTypePrediction:
    def test_admissible_sets(self):
        assert admissible_mu(7) == frozenset({1, 3})
        assert admissible_mu(15) == frozenset({1, 2, 4})
        assert admissible_mu(3) == frozenset({2})

    def test_d7_strata(self):
        assert predict_vtype_ss(7, 3) == (5, 3, 2, 1, 0)
        assert predict_vtype_ss(7, 1) == (5, 3, 1, 0)

    def test_d15_generic(self):
        assert predict_vtype_ss(15, 4) == (9, 5, 3, 2, 1, 0)

    def test_rejects_inadmissible(self):
        with pytest.raises(AscohError):
            predict_vtype_ss(7, 2)

    def test_codim_strata(self):
        assert codim_stratum_ss(7, 3) == 0
        assert codim_stratum_ss(7, 1) == 1
        assert codim_stratum_ss(15, 4) == 0
        assert codim_stratum_ss(15, 2) == 14 // 8 - 14 // 16 == 1

    def test_codim_eo(self):
        assert codim_eo((0, 1, 1, 2)) == 6
        assert codim_eo((1, 2, 3)) == 0

    def test_codim_eo_one_point_lower_bound(self):
        # covers of the projective line branched at one point
        for d in (5, 9, 13, 17, 21):
            rd = RamificationData(g_x=0, f_x=0, breaks=(d,))
            _, nu = predict_ordinary(rd)
            assert 16 * codim_eo(nu) >= (d - 1) * (d + 1)


class TestMuExtraction:
    def setup_method(self):
        self.curve = ss_elliptic()
        (self.q,) = self.curve.places_over(INF)

    def _z(self, pref):
        return FunctionElement(GF2, {frozenset({1}): pref})

    def test_nongeneric_cover(self):
        # z^2 + z = x^2 y over the genus-1 base: the smaller stratum
        psi = self._z(RationalFunction(GF2, (0, 0, 1)))
        mu, adm = mu_from_tail(self.curve, psi, self.q)
        assert mu == 1 and adm == frozenset({1, 3})

    def test_generic_cover(self):
        psi = self._z(RationalFunction(GF2, (1, 1, 1)))
        mu, adm = mu_from_tail(self.curve, psi, self.q)
        assert mu == 3

    def test_rejects_even_pole(self):
        with pytest.raises(AscohError):
            mu_from_tail(self.curve, xpow(GF2, 2), self.q)

    def test_coefficient_rule_d7(self):
        assert mu_from_coefficients({-7: 1}) == 1
        assert mu_from_coefficients({-7: 1, -5: 1}) == 3

    def test_coefficient_rule_d15(self):
        assert mu_from_coefficients({-15: 1}) == 1
        assert mu_from_coefficients({-15: 1, -9: 1}) == 4
        assert mu_from_coefficients({-15: 1, -13: 1}) == 2

    def test_rules_agree_on_covers(self):
        # polar tail of x^2 y at infinity in the uniformizer with dt = dx
        # determines the same invariant as the Cartier iteration
        for coeffs, pref in [
            ((0, 0, 1), (0, 0, 1)),
            ((1, 1, 1), (1, 1, 1)),
        ]:
            psi = self._z(RationalFunction(GF2, pref))
            mu, _ = mu_from_tail(self.curve, psi, self.q)
            assert mu in admissible_mu(7)


class TestBounds:
    def test_ordinary_base_is_exact(self):
        rd = RamificationData(g_x=2, f_x=2, breaks=(7, 5))
        for exps in ([1, 1], [2, 1], [1, 2, 1]):
            w = Word(exps)
            rep = bounds(rd, w)
            assert rep.lower == rep.upper == phi_total(rd, w)

    def test_supersingular_base_d7(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        rep = bounds(rd, Word([1, 1]))
        assert rep.phi == 1
        assert (rep.l1, rep.l2, rep.l3) == (0, 0, 1)
        assert rep.lower == 1 and rep.upper == 4

    def test_upper_clamped_by_module_size(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(3,), a_x=(1,))
        rep = bounds(rd, Word([1, 1]))
        assert rep.upper <= 2 * rd.l_y

    def test_rejects_pure_v_word(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        with pytest.raises(AscohError):
            bounds(rd, Word([2]))

    def test_rejects_leading_perp(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        with pytest.raises(AscohError):
            bounds(rd, Word([4], leading_perp=True))

    def test_carries_final_type_interval(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        rep = bounds(rd, Word([1, 1]))
        assert rep.index == 3
        assert rep.nu_lower is not None and rep.nu_lower <= rep.nu_upper

    def test_tango_branch(self):
        rd = RamificationData(
            g_x=1, f_x=0, breaks=(7,), a_x=(1,), tango=1
        )
        rep = bounds(rd, Word([1, 1]))
        # deg floor(D / 2) = 2 >= tango: first term improves to l_x
        assert rep.l1 == 1


class TestFinalTypeBounds:
    def test_d7_interval_contains_both_strata(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        l, lo, hi = final_type_bounds(rd, Word([1, 1]))
        assert l == 3
        for nu in ((0, 1, 1, 2, 3), (0, 1, 2, 2, 3)):
            assert lo <= nu[l - 1] <= hi

    def test_rejects_leading_perp(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        with pytest.raises(AscohError):
            final_type_bounds(rd, Word([1], leading_perp=True))


class TestOnePointBounds:
    def test_example_types_inside_intervals(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(15,), a_x=(1,))
        assert rd.g_y == 9
        for nu in (
            (0, 1, 2, 2, 3, 4, 4, 4, 5),
            (0, 1, 2, 2, 3, 3, 3, 4, 5),
        ):
            for l in range(1, 10):
                lo, hi = one_point_bounds(rd, l)
                assert lo <= nu[l - 1] <= hi, (l, nu)

    def test_small_index_cases(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(7,), a_x=(1,))
        assert one_point_bounds(rd, 1) == (0, 0)
        lo, hi = one_point_bounds(rd, 2)
        assert lo <= 1 <= hi

    def test_ordinary_prefix(self):
        rd = RamificationData(g_x=1, f_x=1, breaks=(7,))
        for l in range(1, rd.f_y + 1):
            assert one_point_bounds(rd, l) == (l, l)

    def test_rejects_multi_branch(self):
        rd = RamificationData(g_x=1, f_x=0, breaks=(3, 3), a_x=(1,))
        with pytest.raises(AscohError):
            one_point_bounds(rd, 1)


class TestWordForTarget:
    def test_all_targets_small_d(self):
        for d in (3, 7, 15, 31, 45):
            budget = max((d - 1) // 2, 1)
            cap = (budget - 1).bit_length() if budget > 1 else 0
            for m in range((d - 1) // 2 + 1):
                w = word_for_target(d, m)
                assert phi(d, w) == m
                assert w.num_perps <= max(cap, 1)

    def test_extremes(self):
        assert phi(201, word_for_target(201, 0)) == 0
        assert phi(201, word_for_target(201, 100)) == 100

    def test_rejects_out_of_range(self):
        with pytest.raises(AscohError):
            word_for_target(7, 4)
