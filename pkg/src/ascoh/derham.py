"""First de Rham cohomology of a tower curve as an explicit polarized
Dieudonne module.

Classes are enhanced differentials of the second kind: pairs (omega, tails)
where omega is a global differential with poles only in a support S of places
and, at each Q in S, the polar part of omega is d(tail_Q).  With D = sum of
the places of S and a pole bound n satisfying deg(nD) > max(2g-2, 0), the
quotient of such pairs (omega with poles bounded by (n+1)D, tails bounded by
exponent -n) by the coboundaries (df, tail(f)) for f in L(nD) is 2g-
dimensional and carries:

  F(omega, f) = (0, f^2)        V(omega, f) = (Cartier(omega), 0)
  <(omega,f),(tau,g)> = sum_Q Res_Q(g omega) + Res_Q(f tau) + Res_Q(g df)

F-images can have tails too deep for the bound; they are renormalized by
subtracting the coboundary of a function in L(2nD) whose deep tail matches.
The deep part of a squared tail has only even exponents, so d kills it and
the renormalized omega-part stays within the (n+1)D bound.
"""

from __future__ import annotations

from .dieudonne import DieudonneModule, fitting, nilpotent_projection
from .errors import (
    AscohError,
    DimensionMismatch,
    PoleBoundExceeded,
)
from .gf2m import (
    PresolvedSystem,
    SemilinearMap,
    SubspaceBasis,
    image_of_map,
    kernel_basis,
    kernel_of_map,
    transpose,
    vec_add,
)
from .laurent import (
    EXACT,
    LaurentSeries,
    LocalDifferential,
    TailClass,
    integrate_tail,
    residue,
)
from .tower import (
    DifferentialElement,
    Divisor,
    FunctionElement,
    Place,
    TowerCurve,
    dx_divisor,
)


class EnhancedDifferential:
    """(omega, tails): a global differential plus a local antiderivative
    tail at each supported place, witnessing that omega is of the second
    kind there."""

    __slots__ = ("omega", "tails")

    def __init__(self, omega: DifferentialElement, tails=None):
        self.omega = omega
        self.tails = {
            q: t for q, t in (tails or {}).items() if not t.is_zero()
        }

    @classmethod
    def zero(cls, field):
        return cls(DifferentialElement(FunctionElement.zero(field)))

    def __repr__(self):
        return f"EnhancedDifferential({self.omega!r}, tails at {list(self.tails)})"


class DeRhamSpace:
    """Explicit coordinates for H^1_dR of a tower curve.

    Ambient coordinates: coefficients over a basis of Gamma(Omega((n+1)D))
    followed by tail coefficients u^e (e = -n..-1) for each place of S.
    """

    def __init__(self, curve: TowerCurve, S, n: int):
        self.curve = curve
        self.field = curve.field
        self.S = list(S)
        self.n = n
        self._build()

    # -- construction -----------------------------------------------------------

    def _build(self):
        curve, field, n = self.curve, self.field, self.n
        g = curve.genus
        self.g = g
        bad = curve.all_bad_places()
        skeys = {q.key() for q in self.S}
        if not self.S or not skeys <= {q.key() for q in bad}:
            raise AscohError("support must be a nonempty set of bad places")
        if n * len(self.S) <= max(2 * g - 2, 0):
            raise AscohError("pole bound too small: deg(nD) <= max(2g-2, 0)")
        self.bad_places = bad

        kdiv = dx_divisor(curve)
        self.omega_basis = curve.riemann_roch_space(
            _add_div(kdiv, {q: n + 1 for q in self.S})
        )
        self.n_omega = len(self.omega_basis)
        self.tail_offset = {}
        off = self.n_omega
        for q in self.S:
            self.tail_offset[q.key()] = off
            off += n
        self.ambient_dim = off

        # expansion window per bad place: polar part down to -(n+1) plus a
        # regular window wide enough to pin a differential down uniquely
        w = max(2 * g - 2, 0) // len(bad) + 1
        self.window = w
        kexp = max(w, n + 2)
        self._omega_exp = {}
        for q in bad:
            self._omega_exp[q.key()] = [
                curve.expand_diff(DifferentialElement(f), q, kexp)
                for f in self.omega_basis
            ]

        # fingerprint solver: slot coefficients -> omega coordinates
        slots = []
        for q in bad:
            for e in range(-(n + 1), w):
                slots.append((q.key(), e))
        self._slots = slots
        fp_rows = []
        for qk, e in slots:
            fp_rows.append(
                tuple(
                    b.body.coeff(e) if e < b.body.known else 0
                    for b in self._omega_exp[qk]
                )
            )
        self._omega_solver = PresolvedSystem(field, fp_rows)

        # cocycle constraints: polar coefficients of omega - d(tail) vanish
        cons = []
        for q in bad:
            qk = q.key()
            toff = self.tail_offset.get(qk)
            for e in range(-(n + 1), 0):
                row = [0] * self.ambient_dim
                for k, b in enumerate(self._omega_exp[qk]):
                    row[k] = b.body.coeff(e) if e < b.body.known else 0
                if toff is not None and e % 2 == 0 and -n <= e + 1 <= -1:
                    # d(u^{e+1}) = u^e du for odd e+1
                    row[toff + (e + 1 + n)] ^= 1
                if any(row):
                    cons.append(tuple(row))
        self._constraints = cons
        self.cocycles = SubspaceBasis(
            field, self.ambient_dim,
            kernel_basis(field, cons, self.ambient_dim),
        )

        # coboundaries: d(f) for f in L(nD)
        self._small_rr = curve.riemann_roch_space(
            Divisor({q: n for q in self.S})
        )
        cob = []
        for f in self._small_rr:
            v = self._coboundary_vector(f)
            if any(v):
                cob.append(v)
        self.coboundaries = SubspaceBasis(field, self.ambient_dim, cob)
        if self.cocycles.dim - self.coboundaries.dim != 2 * g:
            raise DimensionMismatch(
                f"cohomology dimension {self.cocycles.dim - self.coboundaries.dim}"
                f" != 2g = {2 * g}"
            )

        # complement basis: regular differentials first, then tail classes
        self.h0_functions = curve.riemann_roch_space(kdiv)
        basis = []
        span = self.coboundaries
        for f in self.h0_functions:
            v = [0] * self.ambient_dim
            coords = self._omega_coords(DifferentialElement(f))
            for k, c in enumerate(coords):
                v[k] = c
            v = tuple(v)
            if not span.contains(v):
                basis.append(v)
                span = span.sum_(SubspaceBasis(field, self.ambient_dim, [v]))
        if len(basis) != g:
            raise DimensionMismatch("regular classes do not span H0")
        for v in self.cocycles.rows:
            if len(basis) == 2 * g:
                break
            if not span.contains(v):
                basis.append(v)
                span = span.sum_(SubspaceBasis(field, self.ambient_dim, [v]))
        if len(basis) != 2 * g:
            raise DimensionMismatch("could not complete a 2g-dim complement")
        self.basis = basis

        # reduction solver: ambient vector = basis coords + coboundary coords
        cols = list(basis) + list(self.coboundaries.rows)
        self._reduce_solver = PresolvedSystem(
            field, [list(r) for r in transpose(cols)]
        )

        # deep-tail renormalizer over L(2nD)
        self._big_rr = curve.riemann_roch_space(
            Divisor({q: 2 * n for q in self.S})
        )
        self._big_exp = {}
        deep_rows = []
        deep_slots = [
            (q.key(), e) for q in self.S for e in range(-2 * n, -n)
        ]
        self._deep_slots = deep_slots
        for q in self.S:
            self._big_exp[q.key()] = [
                curve.expand(f, q, 1) for f in self._big_rr
            ]
        for qk, e in deep_slots:
            deep_rows.append(
                tuple(
                    s.coeff(e) if e < s.known else 0
                    for s in self._big_exp[qk]
                )
            )
        self._deep_solver = PresolvedSystem(field, deep_rows)

        self._gram = None

    def _coboundary_vector(self, f: FunctionElement):
        v = [0] * self.ambient_dim
        df = DifferentialElement(self.curve.fe_dx(f))
        for k, c in enumerate(self._omega_coords(df)):
            v[k] = c
        for q in self.S:
            s = self.curve.expand(f, q, 1)
            toff = self.tail_offset[q.key()]
            for e in range(max(-self.n, s.val if not s.is_zero() else 0), 0):
                c = s.coeff(e) if e < s.known else 0
                v[toff + (e + self.n)] = c
        return tuple(v)

    def _omega_coords(self, omega: DifferentialElement):
        """Coordinates of a global differential over the omega basis;
        raises PoleBoundExceeded when it does not fit the pole bound."""
        if omega.is_zero():
            return (0,) * self.n_omega
        fp = []
        for q in self.bad_places:
            body = self.curve.expand_diff(omega, q, self.window).body
            if not body.is_zero() and body.valuation() < -(self.n + 1):
                raise PoleBoundExceeded(
                    f"pole order {-body.valuation()} exceeds n+1 = {self.n + 1}"
                    f" at {q!r}; rebuild with larger n"
                )
            for e in range(-(self.n + 1), self.window):
                fp.append(body.coeff(e) if e < body.known else 0)
        coords = self._omega_solver.solve(fp)
        if coords is None:
            raise PoleBoundExceeded(
                "differential is outside the ambient space (check poles/support)"
            )
        return coords

    # -- class arithmetic ------------------------------------------------------------

    def representative(self, cls):
        """Ambient vector of a class (coords over the chosen basis)."""
        v = [0] * self.ambient_dim
        for c, b in zip(cls, self.basis):
            if c:
                for i, bi in enumerate(b):
                    v[i] ^= self.field.mul(c, bi)
        return tuple(v)

    def reduce(self, ambient_vec):
        x = self._reduce_solver.solve(ambient_vec)
        if x is None:
            raise AscohError("vector is not a cocycle of the resolution")
        return tuple(x[: 2 * self.g])

    def class_of(self, e: EnhancedDifferential):
        v = [0] * self.ambient_dim
        for k, c in enumerate(self._omega_coords(e.omega)):
            v[k] = c
        for q, t in e.tails.items():
            toff = self.tail_offset.get(q.key())
            if toff is None:
                raise PoleBoundExceeded(f"tail at unsupported place {q!r}")
            for exp, c in t.terms.items():
                if exp < -self.n:
                    raise PoleBoundExceeded(
                        f"tail exponent {exp} below -n = {-self.n}; "
                        "rebuild with larger n"
                    )
                v[toff + (exp + self.n)] = c
        v = tuple(v)
        # enhanced-differential compatibility check
        for row in self._constraints:
            acc = 0
            for a, b in zip(row, v):
                if a and b:
                    acc ^= self.field.mul(a, b)
            if acc:
                raise AscohError(
                    "omega's polar parts do not match d(tails): "
                    "not an enhanced differential of the second kind"
                )
        return self.reduce(v)

    def _tails_of(self, ambient_vec):
        out = {}
        for q in self.S:
            toff = self.tail_offset[q.key()]
            terms = {}
            for i in range(self.n):
                c = ambient_vec[toff + i]
                if c:
                    terms[i - self.n] = c
            if terms:
                out[q] = TailClass(self.field, terms)
        return out

    def _omega_of(self, ambient_vec):
        f = FunctionElement.zero(self.field)
        for c, fe in zip(ambient_vec[: self.n_omega], self.omega_basis):
            if c:
                f = f + fe.scale(c)
        return DifferentialElement(f)

    def enhanced_of(self, cls) -> EnhancedDifferential:
        v = self.representative(cls)
        return EnhancedDifferential(self._omega_of(v), self._tails_of(v))

    def apply_F(self, cls):
        v = self.representative(cls)
        sq = {}
        for q in self.S:
            toff = self.tail_offset[q.key()]
            terms = {}
            for i in range(self.n):
                c = v[toff + i]
                if c:
                    terms[2 * (i - self.n)] = self.field.frob(c)
            sq[q.key()] = terms
        deep = [sq[qk].get(e, 0) for qk, e in self._deep_slots]
        new = [0] * self.ambient_dim
        if any(deep):
            y = self._deep_solver.solve(deep)
            if y is None:
                raise PoleBoundExceeded(
                    "deep tail not renormalizable; rebuild with larger n"
                )
            gfun = FunctionElement.zero(self.field)
            for c, f in zip(y, self._big_rr):
                if c:
                    gfun = gfun + f.scale(c)
            dg = DifferentialElement(self.curve.fe_dx(gfun))
            for k, c in enumerate(self._omega_coords(dg)):
                new[k] = c
            for q in self.S:
                qk = q.key()
                s = self.curve.expand(gfun, q, 1)
                toff = self.tail_offset[qk]
                for e in range(-self.n, 0):
                    c = sq[qk].get(e, 0)
                    c ^= s.coeff(e) if e < s.known else 0
                    new[toff + (e + self.n)] = c
        else:
            for q in self.S:
                qk = q.key()
                toff = self.tail_offset[qk]
                for e, c in sq[qk].items():
                    if e >= -self.n:
                        new[toff + (e + self.n)] = c
        return self.reduce(tuple(new))

    def apply_V(self, cls):
        v = self.representative(cls)
        vout = self.curve.cartier_global(self._omega_of(v))
        new = [0] * self.ambient_dim
        for k, c in enumerate(self._omega_coords(vout)):
            new[k] = c
        return self.reduce(tuple(new))

    # -- pairing --------------------------------------------------------------------

    def pairing_ambient(self, v, w):
        """<(omega_v, f), (omega_w, g)> = sum_Q Res(g omega_v) +
        Res(f omega_w) + Res(g df)."""
        field = self.field
        total = 0
        for q in self.S:
            qk = q.key()
            fser = self._tail_series(v, qk)
            gser = self._tail_series(w, qk)
            if fser is None and gser is None:
                continue
            if gser is not None:
                body_v = self._omega_body(v, qk)
                total ^= residue(LocalDifferential(gser * body_v))
            if fser is not None:
                body_w = self._omega_body(w, qk)
                total ^= residue(LocalDifferential(fser * body_w))
            if fser is not None and gser is not None:
                total ^= residue(LocalDifferential(gser * fser.derivative()))
        return total

    def _tail_series(self, v, qk):
        toff = self.tail_offset[qk]
        coeffs = v[toff : toff + self.n]
        if not any(coeffs):
            return None
        return LaurentSeries(self.field, -self.n, coeffs, EXACT)

    def _omega_body(self, v, qk):
        body = LaurentSeries.zero(self.field)
        for c, b in zip(v[: self.n_omega], self._omega_exp[qk]):
            if c:
                body = body + b.body.scale(c)
        return body

    def pairing(self, c1, c2):
        g = self.gram()
        acc = 0
        for i, ci in enumerate(c1):
            if not ci:
                continue
            for j, cj in enumerate(c2):
                if cj and g[i][j]:
                    acc ^= self.field.mul(
                        self.field.mul(ci, cj), g[i][j]
                    )
        return acc

    def gram(self):
        if self._gram is None:
            reps = [self.representative(_unit(2 * self.g, i)) for i in range(2 * self.g)]
            self._gram = tuple(
                tuple(self.pairing_ambient(a, b) for b in reps) for a in reps
            )
        return self._gram

    # -- assembly --------------------------------------------------------------------

    def assemble(self) -> DieudonneModule:
        g2 = 2 * self.g
        fcols = [self.apply_F(_unit(g2, i)) for i in range(g2)]
        vcols = [self.apply_V(_unit(g2, i)) for i in range(g2)]
        fmap = SemilinearMap(self.field, transpose(fcols), 1)
        vmap = SemilinearMap(self.field, transpose(vcols), -1)
        h0 = SubspaceBasis(
            self.field, g2, [_unit(g2, i) for i in range(self.g)]
        )
        data = DieudonneModule(self.field, fmap, vmap, self.gram(), H0=h0)
        if kernel_of_map(fmap) != h0 or image_of_map(vmap) != h0:
            raise DimensionMismatch("H0 is not ker F = im V")
        return data

    # -- branch differentials -----------------------------------------------------------

    def branch_places(self):
        """Places of S ramified at the top level, in S order."""
        return [q for q in self.S if q.breaks and q.breaks[-1] > 0]

    def omega_family(self, i: int):
        """Cleaned enhanced differentials w_{i,j}, j = 1..d_i - 1, for the
        i-th branch place (1-based)."""
        if not hasattr(self, "_families"):
            self._families = {}
        if i not in self._families:
            self._families[i] = _build_family(self, i)
        return self._families[i]

    def build_omega_ij(self, i: int, j: int) -> EnhancedDifferential:
        fam = self.omega_family(i)
        if not 1 <= j <= len(fam):
            raise AscohError(f"j must be in 1..{len(fam)}")
        return fam[j - 1]

    def nilpotent_part(self, data: DieudonneModule, cls):
        return nilpotent_projection(data, cls)


def _unit(n, i):
    return tuple(1 if k == i else 0 for k in range(n))


def _add_div(d: Divisor, extra: dict) -> Divisor:
    mults = dict(d.mults)
    for q, m in extra.items():
        mults[q] = mults.get(q, 0) + m
    return Divisor(mults)


def build_space(curve: TowerCurve, S=None, n: int | None = None) -> DeRhamSpace:
    if S is None:
        S = curve.all_bad_places()
    if n is None:
        g = curve.genus
        n0 = max(2 * g - 2, 0) // len(S) + 1
        breaks = [q.breaks[-1] for q in S if q.breaks and q.breaks[-1] > 0]
        n = n0 + (max(breaks) + 1 if breaks else 2)
    return DeRhamSpace(curve, S, n)


# ---------------------------------------------------------------------------
# the omega_{i,j} family at a branch place
# ---------------------------------------------------------------------------


def _build_family(space: DeRhamSpace, i: int):
    curve, field = space.curve, space.field
    branch = space.branch_places()
    if not 1 <= i <= len(branch):
        raise AscohError(f"branch index must be in 1..{len(branch)}")
    q = branch[i - 1]
    d = q.breaks[-1]
    p = q.parent
    sub = curve.sub_curve(curve.depth - 1)
    kdiv_x = dx_divisor(sub)

    # raw w_j: differential on the base with exact pole order j+1 at p
    raws = []
    for j in range(1, d):
        pool = sub.riemann_roch_space(_add_div(kdiv_x, {p: j + 1}))
        pick = None
        for f in pool:
            if sub.diff_valuation(DifferentialElement(f), p) == -(j + 1):
                pick = f
                break
        if pick is None:
            raise DimensionMismatch(
                f"no base differential of exact order -(j+1) at {p!r}"
            )
        raws.append(pick)

    prec = d + 4

    def exp_at_q(fe):
        return curve.expand_diff(DifferentialElement(fe), q, prec).body

    def coeff(body, e):
        return body.coeff(e) if e < body.known else 0

    # normalize the leading coefficient at Q to 1; expected order -2j+d-1
    cleaned = [None] * (d - 1)
    bodies = [None] * (d - 1)
    for j in range(1, d):
        fe = raws[j - 1]
        body = exp_at_q(fe)
        lead = -2 * j + d - 1
        if body.valuation() != lead:
            raise DimensionMismatch(
                f"pullback order {body.valuation()} != {lead} for j={j}"
            )
        c = body.coeff(lead)
        fe = fe.scale(field.inv(c))
        cleaned[j - 1] = fe
        bodies[j - 1] = exp_at_q(fe)

    half = (d - 1) // 2

    def elem_with_lead(slot):
        # the regular family member leading at the given even slot >= 0
        return (d - 1 - slot) // 2

    # clean the regular members (j = half down to 1 have leads 0..d-3):
    # zero every even slot above the lead using already-cleaned members
    for j in range(1, half + 1):
        lead = -2 * j + d - 1
        fe = cleaned[j - 1]
        for slot in range(lead + 2, d - 2, 2):
            c = coeff(bodies[j - 1], slot)
            if c:
                l = elem_with_lead(slot)
                fe = fe + cleaned[l - 1].scale(c)
                bodies[j - 1] = bodies[j - 1] + bodies[l - 1].scale(c)
        cleaned[j - 1] = fe

    # clean the polar members: single-term polar part, then zero the
    # regular even slots 0..d-3
    for j in range(half + 1, d):
        lead = -2 * j + d - 1
        fe = cleaned[j - 1]
        body = bodies[j - 1]
        for slot in range(lead + 2, 0, 2):
            c = coeff(body, slot)
            if c:
                l = (d - 1 - slot) // 2  # polar member with that lead
                fe = fe + cleaned[l - 1].scale(c)
                body = body + bodies[l - 1].scale(c)
        for slot in range(0, d - 2, 2):
            c = coeff(body, slot)
            if c:
                l = elem_with_lead(slot)
                fe = fe + cleaned[l - 1].scale(c)
                body = body + bodies[l - 1].scale(c)
        cleaned[j - 1] = fe
        bodies[j - 1] = body

    out = []
    for j in range(1, d):
        fe = cleaned[j - 1]
        omega = DifferentialElement(fe)
        tails = {}
        if j > half:
            body = curve.expand_diff(omega, q, 1).body
            t = integrate_tail(LocalDifferential(body))
            if t.terms != {-2 * j + d: 1}:
                raise DimensionMismatch(
                    f"cleaned tail is not the single term u^{-2 * j + d}"
                )
            tails[q] = t
        out.append(EnhancedDifferential(omega, tails))
    return out


def pullback_class(space_x: DeRhamSpace, space_y: DeRhamSpace, cls):
    """Pull a class back through the top-level cover of space_y's curve.

    space_x must be the de Rham space of the subtower one level down.
    """
    sub = space_y.curve.sub_curve(space_y.curve.depth - 1)
    if sub is not space_x.curve and sub.levels != space_x.curve.levels:
        raise AscohError("spaces are not related by a top-level cover")
    v = space_x.representative(cls)
    omega_x = space_x._omega_of(v)
    tails_x = space_x._tails_of(v)
    tails_y = {}
    for qy in space_y.S:
        px = _ancestor_at_level(qy, space_x.curve.depth)
        tx = None
        for p, t in tails_x.items():
            if p.key() == px.key():
                tx = t
                break
        if tx is None:
            continue
        s = tx.as_series()
        maps = []
        node = qy
        while node.level > px.level:
            if node.down_map is not None:
                maps.append(node.down_map)
            node = node.parent
        for m in reversed(maps):
            s = s.compose(m)
        terms = {}
        for e, c in s.terms():
            if e < 0 and c:
                terms[e] = c
        if terms:
            tails_y[qy] = TailClass(space_y.field, terms)
    e = EnhancedDifferential(DifferentialElement(omega_x.f), tails_y)
    return space_y.class_of(e)


def _ancestor_at_level(q: Place, level: int) -> Place:
    node = q
    while node.level > level:
        node = node.parent
    return node
