"""Polarized mod-2 Dieudonne modules as explicit matrices.

A module is (F, V, Gram) on k^{2g} over k = GF(2^m), with F Frobenius-
semilinear (twist +1), V inverse-Frobenius-semilinear (twist -1), FV = VF = 0
and an alternating nondegenerate pairing satisfying <Vx, y>^2 = <x, Fy>.

Provides the Fitting decomposition into bijective and nilpotent parts, word
actions built from V-images and symplectic complements, the canonical
filtration and final type, V-types with higher a-numbers, and a brute-force
k[V]-chain decomposition used as an independent oracle.
"""

from __future__ import annotations

from .errors import (
    AscohError,
    DimensionMismatch,
    InterpolationGap,
    NotAChain,
)
from .gf2m import (
    GF2m,
    SemilinearMap,
    SubspaceBasis,
    full_space,
    kernel_of_map,
    map_image_of_subspace,
    map_preimage_of_subspace,
    pairing as gram_pairing,
    symplectic_complement,
    zero_space,
)


class Word:
    """V^{n_t} (perp) ... (perp) V^{n_1}, optionally preceded by a leading
    perp: the operations are applied right to left, V^{n_1} first.

    This is the simple-word normal form: the word ends with V (rightmost
    factor is a V-power) and never has two consecutive perps.
    """

    __slots__ = ("exponents", "leading_perp")

    def __init__(self, exponents, leading_perp=False):
        exps = tuple(int(n) for n in exponents)
        if not exps or any(n <= 0 for n in exps):
            raise AscohError("word exponents must be positive integers")
        self.exponents = exps
        self.leading_perp = bool(leading_perp)

    @property
    def num_perps(self):
        return len(self.exponents) - 1 + (1 if self.leading_perp else 0)

    def __eq__(self, other):
        return (
            isinstance(other, Word)
            and self.exponents == other.exponents
            and self.leading_perp == other.leading_perp
        )

    def __hash__(self):
        return hash((self.exponents, self.leading_perp))

    def __repr__(self):
        parts = []
        if self.leading_perp:
            parts.append("p")
        for n in reversed(self.exponents):
            parts.append(f"V{n}")
            parts.append("p")
        parts.pop()  # no trailing perp
        return "".join(parts)


class DieudonneModule:
    """Explicit polarized Dieudonne module; H0 optionally records the
    subspace of classes of regular differentials when built from a curve."""

    __slots__ = ("field", "F", "V", "gram", "dim", "H0", "_fitting")

    def __init__(self, field: GF2m, F: SemilinearMap, V: SemilinearMap, gram,
                 H0: SubspaceBasis | None = None, validate: bool = True):
        self.field = field
        self.F = F
        self.V = V
        self.gram = tuple(tuple(r) for r in gram)
        self.dim = len(self.gram)
        self.H0 = H0
        self._fitting = None
        if validate:
            self._validate()

    def _validate(self):
        f, n = self.field, self.dim
        if n % 2:
            raise DimensionMismatch("module dimension must be even")
        if self.F.twist != 1 or self.V.twist != -1:
            raise DimensionMismatch("F must have twist +1 and V twist -1")
        units = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        for e in units:
            if any(self.F.apply(self.V.apply(e))) or any(
                self.V.apply(self.F.apply(e))
            ):
                raise DimensionMismatch("FV = VF = 0 fails")
        # alternating, symmetric, nondegenerate
        for i in range(n):
            if self.gram[i][i]:
                raise DimensionMismatch("Gram is not alternating")
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise DimensionMismatch("Gram is not symmetric")
        if SubspaceBasis(f, n, self.gram).dim != n:
            raise DimensionMismatch("Gram is degenerate")
        # <V e_i, e_j>^2 = <e_i, F e_j> suffices by semilinearity
        for i in range(n):
            vei = self.V.apply(units[i])
            for j in range(n):
                lhs = f.frob(gram_pairing(f, self.gram, vei, units[j]))
                rhs = gram_pairing(f, self.gram, units[i], self.F.apply(units[j]))
                if lhs != rhs:
                    raise DimensionMismatch("<Vx,y>^2 = <x,Fy> fails")

    @property
    def genus(self):
        return self.dim // 2

    def full(self) -> SubspaceBasis:
        return full_space(self.field, self.dim)

    def zero(self) -> SubspaceBasis:
        return zero_space(self.field, self.dim)

    def v_image(self, w: SubspaceBasis) -> SubspaceBasis:
        return map_image_of_subspace(self.V, w)

    def perp(self, w: SubspaceBasis) -> SubspaceBasis:
        return symplectic_complement(w, self.gram)

    @property
    def p_rank(self):
        return fitting(self)[0].dim

    def pair(self, u, v) -> int:
        return gram_pairing(self.field, self.gram, u, v)

    def __repr__(self):
        return f"DieudonneModule(dim={self.dim}, field={self.field.spec_string()})"


# ---------------------------------------------------------------------------
# Fitting decomposition
# ---------------------------------------------------------------------------


def _stable_image(mod: DieudonneModule, mp: SemilinearMap) -> SubspaceBasis:
    s = mod.full()
    while True:
        nxt = map_image_of_subspace(mp, s)
        if nxt.dim == s.dim:
            return nxt
        s = nxt


def _stable_kernel(mod: DieudonneModule, mp: SemilinearMap) -> SubspaceBasis:
    s = kernel_of_map(mp)
    while True:
        nxt = map_preimage_of_subspace(mp, s)
        if nxt.dim == s.dim:
            return nxt
        s = nxt


def fitting(mod: DieudonneModule):
    """(U, Z, L): U = stable image of V (V bijective, F zero), Z = stable
    image of F, L = common stable kernel (both nilpotent); checked to be a
    direct sum with perfect pairing on U x Z and L perpendicular to both."""
    if mod._fitting is not None:
        return mod._fitting
    u = _stable_image(mod, mod.V)
    z = _stable_image(mod, mod.F)
    l = _stable_kernel(mod, mod.V).intersect(_stable_kernel(mod, mod.F))
    if u.dim != z.dim:
        raise DimensionMismatch("stable images of V and F differ in dimension")
    if u.sum_(z).sum_(l).dim != mod.dim or u.dim + z.dim + l.dim != mod.dim:
        raise DimensionMismatch("Fitting parts do not decompose the module")
    # perfect pairing on U x Z
    p = [[mod.pair(x, y) for y in z.rows] for x in u.rows]
    if SubspaceBasis(mod.field, z.dim, p).dim != u.dim:
        raise DimensionMismatch("pairing on U x Z is not perfect")
    uz = u.sum_(z)
    for x in l.rows:
        for y in uz.rows:
            if mod.pair(x, y):
                raise DimensionMismatch("L is not perpendicular to U + Z")
    mod._fitting = (u, z, l)
    return mod._fitting


def nilpotent_projection(mod: DieudonneModule, vec):
    """Project a vector onto L along U + Z."""
    u, z, l = fitting(mod)
    basis = list(l.rows) + list(u.rows) + list(z.rows)
    from .gf2m import solve, transpose

    cols = transpose(basis)
    x = solve(mod.field, [list(r) for r in cols], vec)
    if x is None:
        raise DimensionMismatch("vector outside the module")  # pragma: no cover
    out = [0] * mod.dim
    for c, b in zip(x[: l.dim], l.rows):
        if c:
            for i, bi in enumerate(b):
                out[i] ^= mod.field.mul(c, bi)
    return tuple(out)


# ---------------------------------------------------------------------------
# words, canonical filtration, final type
# ---------------------------------------------------------------------------


def apply_word(mod: DieudonneModule, w: Word,
               start: SubspaceBasis | None = None) -> SubspaceBasis:
    s = start if start is not None else mod.full()
    for idx, n in enumerate(w.exponents):
        for _ in range(n):
            s = mod.v_image(s)
        if idx < len(w.exponents) - 1:
            s = mod.perp(s)
    if w.leading_perp:
        s = mod.perp(s)
    return s


def canonical_filtration(mod: DieudonneModule):
    """Closure of {0, M} under V-image and symplectic complement, as a chain
    ordered by inclusion."""
    seen = {}
    frontier = [mod.zero(), mod.full()]
    for s in frontier:
        seen[s] = s
    limit = 2 * mod.dim * mod.dim + 8
    steps = 0
    while frontier:
        s = frontier.pop()
        for t in (mod.v_image(s), mod.perp(s)):
            if t not in seen:
                seen[t] = t
                frontier.append(t)
        steps += 1
        if steps > limit:
            raise NotAChain("canonical closure did not stabilize")
    chain = sorted(seen.values(), key=lambda s: s.dim)
    for a, b in zip(chain, chain[1:]):
        if a.dim == b.dim or not a.is_subspace_of(b):
            raise NotAChain("canonical closure is not totally ordered")
    return chain


def final_type(mod: DieudonneModule):
    """nu_1..nu_g with nu_l = dim V(N_l) along a final filtration."""
    g = mod.genus
    chain = canonical_filtration(mod)
    pts = [(s.dim, mod.v_image(s).dim) for s in chain]
    nu = [None] * (mod.dim + 1)
    for d, v in pts:
        nu[d] = v
    try:
        for (d1, v1), (d2, v2) in zip(pts, pts[1:]):
            if v2 == v1:
                for l in range(d1 + 1, d2):
                    nu[l] = v1
            elif v2 - v1 == d2 - d1:
                for l in range(d1 + 1, d2):
                    nu[l] = v1 + (l - d1)
            elif d2 - d1 > 1:
                raise InterpolationGap(
                    f"V-dim jump {v2 - v1} over dimension gap {d2 - d1}"
                )
    except InterpolationGap:
        return _final_type_by_refinement(mod, chain)
    return tuple(nu[1 : g + 1])


def _final_type_by_refinement(mod: DieudonneModule, chain):
    """Fallback: refine the canonical chain to a full final filtration by
    greedy one-dimensional extensions that keep the V/perp closure a chain."""
    chain = list(chain)
    guard = 0
    while any(b.dim - a.dim > 1 for a, b in zip(chain, chain[1:])):
        guard += 1
        if guard > 4 * mod.dim:
            raise InterpolationGap("could not refine to a final filtration")
        idx = next(
            i for i, (a, b) in enumerate(zip(chain, chain[1:]))
            if b.dim - a.dim > 1
        )
        a, b = chain[idx], chain[idx + 1]
        extended = False
        for v in b.rows:
            if a.contains(v):
                continue
            cand = a.sum_(SubspaceBasis(mod.field, mod.dim, [v]))
            trial = _close_chain(mod, chain + [cand])
            if trial is not None:
                chain = trial
                extended = True
                break
        if not extended:
            raise InterpolationGap("no chain-compatible refinement found")
    nu = [mod.v_image(s).dim for s in chain]
    # chain now has one space per dimension 0..2g
    return tuple(nu[1 : mod.genus + 1])


def _close_chain(mod, spaces):
    seen = {}
    frontier = list(spaces)
    for s in frontier:
        seen[s] = s
    steps = 0
    while frontier:
        s = frontier.pop()
        for t in (mod.v_image(s), mod.perp(s)):
            if t not in seen:
                seen[t] = t
                frontier.append(t)
        steps += 1
        if steps > 4 * mod.dim * mod.dim + 16:
            return None
    chain = sorted(seen.values(), key=lambda s: s.dim)
    for a, b in zip(chain, chain[1:]):
        if a.dim == b.dim or not a.is_subspace_of(b):
            return None
    return chain


def check_final_type(nu) -> bool:
    """Structural sanity of a final type sequence."""
    prev = 0
    for l, v in enumerate(nu, start=1):
        if v < prev or v > prev + 1 or v > l:
            return False
        prev = v
    return True


# ---------------------------------------------------------------------------
# V-types, higher a-numbers, k[V]-structure
# ---------------------------------------------------------------------------


def v_type_and_a_numbers(field: GF2m, vmap: SemilinearMap,
                         start: SubspaceBasis | None = None):
    """(c, a, b): c_i = dim V^i(M) until stable (the V-type), a^r = c_0 - c_r
    (higher a-numbers), b_i = multiplicity of k[V]/(V^i) from second
    differences of a^r."""
    s = start if start is not None else full_space(field, vmap.ncols)
    c = [s.dim]
    while True:
        s = map_image_of_subspace(vmap, s)
        c.append(s.dim)
        if c[-1] == c[-2]:
            break
    stable = c[-1]

    def c_at(i):
        return c[i] if i < len(c) else stable

    def a_at(r):
        return c[0] - c_at(r)

    a = tuple(a_at(r) for r in range(len(c)))
    b = {}
    for r in range(1, len(c)):
        val = (a_at(r) - a_at(r - 1)) - (a_at(r + 1) - a_at(r))
        if val:
            b[r] = val
    return tuple(c), a, b


def module_v_data(mod: DieudonneModule, on: str = "H0"):
    """V-type data either on H0 = im V (the curve-facing convention) or on
    the full module."""
    if on == "full":
        return v_type_and_a_numbers(mod.field, mod.V)
    h0 = mod.H0 if mod.H0 is not None else map_image_of_subspace(
        mod.V, mod.full()
    )
    return v_type_and_a_numbers(mod.field, mod.V, h0)


def chain_decomposition(field: GF2m, vmap: SemilinearMap,
                        start: SubspaceBasis | None = None):
    """Brute-force k[V]-chain decomposition of a nilpotent V-module: the
    multiset {i: b_i} of chain lengths, by repeatedly extracting an element
    of maximal order.  Enumerates vectors; intended for dim <= 6 oracles."""
    ambient = vmap.ncols
    space = start if start is not None else full_space(field, ambient)
    if field.order ** space.dim > 1 << 16:
        raise AscohError("chain decomposition oracle limited to small modules")
    # nilpotency check
    probe = space
    for _ in range(ambient + 1):
        probe = map_image_of_subspace(vmap, probe)
    if probe.dim:
        raise AscohError("V is not nilpotent on the given subspace")

    def all_vectors(basis):
        vecs = [tuple([0] * ambient)]
        for b in basis:
            new = []
            for c in field.elements():
                if c == 0:
                    continue
                cb = tuple(field.mul(c, x) for x in b)
                new.extend(tuple(x ^ y for x, y in zip(v, cb)) for v in vecs)
            vecs.extend(new)
        return vecs

    lengths = []
    chosen = zero_space(field, ambient)
    while chosen.dim < space.dim:
        best, best_ord = None, -1
        for v in all_vectors(space.rows):
            if chosen.contains(v):
                continue
            w, order = v, 0
            while not chosen.contains(w):
                order += 1
                w = vmap.apply(w)
            if order > best_ord:
                best, best_ord = v, order
        lengths.append(best_ord)
        w = best
        for _ in range(best_ord):
            chosen = chosen.sum_(SubspaceBasis(field, ambient, [w]))
            w = vmap.apply(w)
    b = {}
    for k in lengths:
        b[k] = b.get(k, 0) + 1
    return b


# ---------------------------------------------------------------------------
# synthetic modules and formatting
# ---------------------------------------------------------------------------


def m_ord(field: GF2m) -> DieudonneModule:
    """2-dim ordinary module: V e1 = e1, F e2 = e2, <e1,e2> = 1."""
    fmat = ((0, 0), (0, 1))
    vmat = ((1, 0), (0, 0))
    gram = ((0, 1), (1, 0))
    return DieudonneModule(
        field, SemilinearMap(field, fmat, 1), SemilinearMap(field, vmat, -1), gram
    )


def m_ss(field: GF2m) -> DieudonneModule:
    """2-dim supersingular module: V e1 = F e1 = e2, V e2 = F e2 = 0."""
    mat = ((0, 0), (1, 0))
    gram = ((0, 1), (1, 0))
    return DieudonneModule(
        field, SemilinearMap(field, mat, 1), SemilinearMap(field, mat, -1), gram
    )


def m_branch(field: GF2m, d: int) -> DieudonneModule:
    """The (d-1)-dimensional local contribution of a branch point with break
    d (d odd >= 3): basis w_1..w_{d-1}, V(w_j) = w_{j/2} for even j,
    F(w_j) = w_{2j-d} for 2j > d, <w_j, w_{j'}> = 1 iff j + j' = d."""
    if d < 3 or d % 2 == 0:
        raise AscohError("break must be odd and >= 3")
    n = d - 1

    def idx(j):
        return j - 1

    fmat = [[0] * n for _ in range(n)]
    vmat = [[0] * n for _ in range(n)]
    gram = [[0] * n for _ in range(n)]
    for j in range(1, d):
        if j % 2 == 0:
            vmat[idx(j // 2)][idx(j)] = 1
        if 2 * j > d:
            fmat[idx(2 * j - d)][idx(j)] = 1
        gram[idx(j)][idx(d - j)] = 1
    return DieudonneModule(
        field,
        SemilinearMap(field, [tuple(r) for r in fmat], 1),
        SemilinearMap(field, [tuple(r) for r in vmat], -1),
        [tuple(r) for r in gram],
    )


def direct_sum(*mods: DieudonneModule) -> DieudonneModule:
    field = mods[0].field
    n = sum(m.dim for m in mods)

    def block(rows_list):
        out = [[0] * n for _ in range(n)]
        off = 0
        for rows in rows_list:
            k = len(rows)
            for i in range(k):
                for j in range(k):
                    out[off + i][off + j] = rows[i][j]
            off += k
        return [tuple(r) for r in out]

    return DieudonneModule(
        field,
        SemilinearMap(field, block([m.F.rows for m in mods]), 1),
        SemilinearMap(field, block([m.V.rows for m in mods]), -1),
        block([m.gram for m in mods]),
    )


def format_final_type(nu) -> str:
    return "[" + ", ".join(str(v) for v in nu) + "]"


def format_vtype(c) -> str:
    return "(" + ", ".join(str(v) for v in c) + ")"


def format_kv_decomposition(b, p_rank: int = 0) -> str:
    parts = []
    for i in sorted(b, reverse=True):
        base = f"k[V]/(V^{i})"
        parts.append(base if b[i] == 1 else f"{base}^{b[i]}")
    if p_rank:
        part = "k[V]/(V-1)"
        parts.append(part if p_rank == 1 else f"({part})^{p_rank}")
    return " + ".join(parts) if parts else "0"
