import random

import pytest
from hypothesis import given, settings, strategies as st

from ascoh.errors import AscohError, NoRoot
from ascoh.gf2m import (
    GF2m,
    SemilinearMap,
    SubspaceBasis,
    canonical_modulus,
    full_space,
    image_of_map,
    kernel_of_map,
    map_image_of_subspace,
    pairing,
    symplectic_complement,
    vec_add,
    vec_scale,
    zero_space,
    _is_irreducible,
)

GF2 = GF2m(1)
GF4 = GF2m(2)
G = 2  # the generator class of X in GF(4) = GF(2)[g]/(g^2+g+1)


def random_subspace(field, ambient, rng, dim=None):
    if dim is None:
        dim = rng.randrange(ambient + 1)
    vecs = [
        tuple(field.random_element(rng) for _ in range(ambient)) for _ in range(dim)
    ]
    return SubspaceBasis(field, ambient, vecs)


def random_nondegenerate_alternating_gram(field, n, rng):
    # random symmetric matrix with zero diagonal; retry until nondegenerate
    while True:
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                c = field.random_element(rng)
                rows[i][j] = c
                rows[j][i] = c
        gram = tuple(tuple(r) for r in rows)
        try:
            symplectic_complement(zero_space(field, n), gram)
        except AscohError:
            continue
        return gram


class TestFieldOps:
    def test_modulus_table_deterministic(self):
        for m in range(1, 17):
            f = canonical_modulus(m)
            assert f.bit_length() - 1 == m
            assert _is_irreducible(f)
            assert canonical_modulus(m) == f

    def test_gf2_inv_frobenius_identity(self):
        assert GF2.ifrob(1) == 1

    def test_gf4_defining_relation(self):
        # g*g = g+1 in GF(4) = GF(2)[g]/(g^2+g+1)
        assert GF4.mul(G, G) == G ^ 1

    def test_gf4_inv_frobenius(self):
        # inv_frobenius(g) = g^2 = g+1; check by squaring back
        r = GF4.ifrob(G)
        assert r == G ^ 1
        assert GF4.frob(r) == G

    @pytest.mark.parametrize("m", range(1, 9))
    def test_frob_ifrob_identity_exhaustive(self, m):
        f = GF2m(m)
        for a in f.elements():
            assert f.frob(f.ifrob(a)) == a
            assert f.ifrob(f.frob(a)) == a

    @pytest.mark.parametrize("m", [9, 13, 17, 24, 32])
    def test_frob_ifrob_identity_randomized(self, m):
        f = GF2m(m)
        rng = random.Random(m)
        for _ in range(50):
            a = f.random_element(rng)
            assert f.frob(f.ifrob(a)) == a

    @pytest.mark.parametrize("m", [2, 3, 5, 8, 13])
    def test_field_axioms_random(self, m):
        f = GF2m(m)
        rng = random.Random(m * 7)
        for _ in range(100):
            a, b, c = (f.random_element(rng) for _ in range(3))
            assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
            assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)
            if a:
                assert f.mul(a, f.inv(a)) == 1

    def test_inverse_of_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            GF4.inv(0)

    def test_mismatched_modulus_rejected(self):
        with pytest.raises(AscohError):
            GF2m(3, modulus=0b1111)  # x^3+x^2+x+1 = (x+1)(x^2+1), reducible

    @pytest.mark.parametrize("m", [2, 3, 4, 6])
    def test_artin_schreier_roots(self, m):
        f = GF2m(m)
        solvable = 0
        for a in f.elements():
            if f.trace(a) == 0:
                roots = f.artin_schreier_roots(a)
                assert sorted(roots) == sorted([roots[0], roots[0] ^ 1])
                for c in roots:
                    assert f.frob(c) ^ c == a
                solvable += 1
            else:
                with pytest.raises(NoRoot):
                    f.artin_schreier_roots(a)
        assert solvable == f.order // 2


class TestSubspaceOps:
    def test_kernel_of_zero_map_is_full(self):
        t = SemilinearMap(GF4, [(0, 0, 0)] * 3, twist=0)
        assert kernel_of_map(t).dim == 3

    def test_image_of_twisted_identity_is_full(self):
        eye = [(1, 0), (0, 1)]
        t = SemilinearMap(GF4, eye, twist=1)
        assert image_of_map(t) == full_space(GF4, 2)

    def test_kernel_of_twisted_1x1_map(self):
        # over GF(4): g*x^2 = 0 only for x = 0
        t = SemilinearMap(GF4, [(G,)], twist=1)
        k = kernel_of_map(t)
        assert k.dim == 0
        for x in GF4.elements():
            expect_zero = t.apply((x,)) == (0,)
            assert expect_zero == (x == 0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_dim_sum_intersection_formula(self, seed):
        rng = random.Random(seed)
        field = GF4 if seed % 2 else GF2m(3)
        n = rng.randrange(1, 7)
        a = random_subspace(field, n, rng)
        b = random_subspace(field, n, rng)
        s = a.sum_(b)
        i = a.intersect(b)
        assert s.dim + i.dim == a.dim + b.dim
        assert i.is_subspace_of(a) and i.is_subspace_of(b)
        assert a.is_subspace_of(s) and b.is_subspace_of(s)

    def test_membership_and_coords(self):
        rng = random.Random(5)
        w = random_subspace(GF4, 5, rng, dim=3)
        v = (0,) * 5
        for c, row in zip((G, 1, G ^ 1), w.rows):
            v = vec_add(v, vec_scale(GF4, c, row))
        assert w.contains(v)
        assert w.coords_of(v) == (G, 1, G ^ 1)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_semilinear_twist_plus_one_scaling(self, seed):
        rng = random.Random(seed)
        f = GF4
        n = rng.randrange(1, 5)
        rows = [
            tuple(f.random_element(rng) for _ in range(n)) for _ in range(n)
        ]
        t = SemilinearMap(f, rows, twist=1)
        v = tuple(f.random_element(rng) for _ in range(n))
        c = f.random_element(rng)
        lhs = t.apply(vec_scale(f, c, v))
        rhs = vec_scale(f, f.frob(c), t.apply(v))
        assert lhs == rhs

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_semilinear_twist_minus_one_scaling(self, seed):
        rng = random.Random(seed)
        f = GF4
        n = rng.randrange(1, 5)
        rows = [
            tuple(f.random_element(rng) for _ in range(n)) for _ in range(n)
        ]
        t = SemilinearMap(f, rows, twist=-1)
        v = tuple(f.random_element(rng) for _ in range(n))
        c = f.random_element(rng)
        lhs = t.apply(vec_scale(f, f.frob(c), v))
        rhs = vec_scale(f, c, t.apply(v))
        assert lhs == rhs

    def test_image_of_subspace_under_map(self):
        rng = random.Random(11)
        f = GF4
        rows = [(1, G), (0, 0)]
        t = SemilinearMap(f, rows, twist=-1)
        w = full_space(f, 2)
        img = map_image_of_subspace(t, w)
        assert img.dim == 1


class TestSymplecticComplement:
    STD_GRAM = ((0, 1), (1, 0))

    def test_zero_subspace_complement_is_full(self):
        w = zero_space(GF4, 2)
        assert symplectic_complement(w, self.STD_GRAM) == full_space(GF4, 2)

    def test_full_space_complement_is_zero(self):
        w = full_space(GF4, 2)
        assert symplectic_complement(w, self.STD_GRAM).dim == 0

    def test_isotropic_line_is_self_perp(self):
        w = SubspaceBasis(GF4, 2, [(1, 0)])
        assert symplectic_complement(w, self.STD_GRAM) == w

    def test_degenerate_gram_rejected(self):
        gram = ((0, 0), (0, 0))
        with pytest.raises(AscohError):
            symplectic_complement(zero_space(GF4, 2), gram)

    def test_non_alternating_gram_rejected(self):
        gram = ((1, 0), (0, 1))
        with pytest.raises(AscohError):
            symplectic_complement(zero_space(GF4, 2), gram)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_double_complement_and_dimension(self, seed):
        rng = random.Random(seed)
        f = GF4
        n = rng.choice([2, 4, 6])
        gram = random_nondegenerate_alternating_gram(f, n, rng)
        w = random_subspace(f, n, rng)
        wp = symplectic_complement(w, gram)
        assert wp.dim == n - w.dim
        assert symplectic_complement(wp, gram) == w
        for u in w.rows:
            for v in wp.rows:
                assert pairing(f, gram, u, v) == 0
