"""Artin-Schreier towers over the projective line in characteristic 2.

A tower of depth r is given by equations z_i^2 + z_i = psi_i for i = 1..r,
where psi_i is a function of the tower truncated at level i-1 (level 0 is the
rational function field in x).  Global functions are stored on the monomial
basis {z_T : T a square-free set of generators} with rational-function
coefficients in x.

Places carry Laurent-series parametrizations of x and every z_i in a local
uniformizer, constructed level by level: at an unramified level the place
splits via the two Artin-Schreier seeds, at a ramified level (reduced pole
order d odd) a new uniformizer is found by Newton iteration on the collapsed
equation.  Ramification breaks are always computed through local tail
reduction, so global inputs psi need not be pre-reduced.
"""

from __future__ import annotations

from .errors import (
    AscohError,
    ConfigError,
    DimensionMismatch,
    FieldTooSmall,
    NoRoot,
    PrecisionExhausted,
    UnsupportedDivisor,
)
from .gf2m import GF2m, kernel_basis
from .laurent import (
    EXACT,
    PRECISION_CAP,
    LaurentSeries,
    LocalDifferential,
    TailClass,
    default_precision,
    reduce_series_artin_schreier,
    solve_artin_schreier,
)
from .polys import (
    ONE,
    RationalFunction,
    pmul,
    pnorm,
    proots,
    psplit_even_odd,
)

INF = "infinity"  # the point at infinity on the x-line


class FunctionElement:
    """Element of the tower function field: map from square-free monomials in
    the generators (frozensets of level indices, 1-based) to rational
    functions in x."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: GF2m, coeffs=None):
        self.field = field
        c = {}
        for t, r in (coeffs or {}).items():
            if not r.is_zero():
                c[frozenset(t)] = r
        self.coeffs = c

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, field):
        return cls(field)

    @classmethod
    def const(cls, field, c):
        return cls(field, {frozenset(): RationalFunction.const(field, c)})

    @classmethod
    def from_rational(cls, field, r: RationalFunction):
        return cls(field, {frozenset(): r})

    @classmethod
    def x(cls, field):
        return cls(field, {frozenset(): RationalFunction.x(field)})

    @classmethod
    def gen(cls, field, i: int):
        """The generator z_i (1-based level index)."""
        return cls(field, {frozenset({i}): RationalFunction.const(field, 1)})

    # -- structure ---------------------------------------------------------------

    def is_zero(self):
        return not self.coeffs

    def top_level(self) -> int:
        return max((max(t) for t in self.coeffs if t), default=0)

    def __add__(self, other: "FunctionElement") -> "FunctionElement":
        out = dict(self.coeffs)
        for t, r in other.coeffs.items():
            out[t] = out[t] + r if t in out else r
        return FunctionElement(self.field, out)

    def scale_rational(self, r: RationalFunction) -> "FunctionElement":
        return FunctionElement(
            self.field, {t: c * r for t, c in self.coeffs.items()}
        )

    def scale(self, c: int) -> "FunctionElement":
        return FunctionElement(
            self.field, {t: r.scale(c) for t, r in self.coeffs.items()}
        )

    def __eq__(self, other):
        return isinstance(other, FunctionElement) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for t in sorted(self.coeffs, key=lambda s: (len(s), sorted(s))):
            mono = "*".join(f"z{i}" for i in sorted(t)) or "1"
            parts.append(f"({self.coeffs[t]!r})*{mono}")
        return " + ".join(parts)


def _weight(t: frozenset) -> int:
    return sum(1 << i for i in t)


class DifferentialElement:
    """f dx for a FunctionElement f."""

    __slots__ = ("f",)

    def __init__(self, f: FunctionElement):
        self.f = f

    def __add__(self, other):
        return DifferentialElement(self.f + other.f)

    def scale(self, c):
        return DifferentialElement(self.f.scale(c))

    def is_zero(self):
        return self.f.is_zero()

    def __repr__(self):
        return f"({self.f!r}) dx"


class Divisor:
    """Finite formal sum of places with integer multiplicities."""

    __slots__ = ("mults",)

    def __init__(self, mults=None):
        self.mults = {p: m for p, m in (mults or {}).items() if m}

    def degree(self):
        return sum(self.mults.values())

    def __getitem__(self, place):
        return self.mults.get(place, 0)

    def places(self):
        return list(self.mults)

    def __repr__(self):
        return "Divisor(" + ", ".join(f"{m}*{p!r}" for p, m in self.mults.items()) + ")"


class Place:
    """A rational place of the tower, with series parametrizations of x and
    all generators in a local uniformizer.

    Precision is an interior-mutable cache: :meth:`ensure` reparametrizes the
    place (deterministically, following the stored branch labels) at a higher
    precision in place.
    """

    __slots__ = (
        "curve",
        "base_x",
        "labels",
        "x_series",
        "z_series",
        "breaks",
        "e",
        "parent",
        "down_map",
        "prec",
        "_mono_cache",
    )

    def __init__(self, curve, base_x, labels, x_series, z_series, breaks, e,
                 parent, down_map, prec):
        self.curve = curve
        self.base_x = base_x
        self.labels = labels
        self.x_series = x_series
        self.z_series = z_series
        self.breaks = breaks
        self.e = e
        self.parent = parent
        self.down_map = down_map
        self.prec = prec
        self._mono_cache = {}

    @property
    def level(self):
        return len(self.z_series)

    def key(self):
        return (self.base_x, self.labels)

    def ensure(self, prec: int):
        if self.prec >= prec:
            return self
        if prec > PRECISION_CAP:
            raise PrecisionExhausted(
                f"requested precision {prec} exceeds the cap {PRECISION_CAP}"
            )
        fresh = _parametrize(self.curve, self.base_x, prec, want_labels=self.labels)
        self.x_series = fresh.x_series
        self.z_series = fresh.z_series
        self.breaks = fresh.breaks
        self.down_map = fresh.down_map
        self.prec = fresh.prec
        self._mono_cache = {}
        if fresh.parent is not None and self.parent is not None:
            self.parent.x_series = fresh.parent.x_series
            self.parent.z_series = fresh.parent.z_series
            self.parent.down_map = fresh.parent.down_map
            self.parent.prec = fresh.parent.prec
            self.parent._mono_cache = {}
            # recursively refresh the chain
            p, fp = self.parent.parent, fresh.parent.parent
            while p is not None and fp is not None:
                p.x_series = fp.x_series
                p.z_series = fp.z_series
                p.down_map = fp.down_map
                p.prec = fp.prec
                p._mono_cache = {}
                p, fp = p.parent, fp.parent
        return self

    def mono_series(self, t: frozenset) -> LaurentSeries:
        cached = self._mono_cache.get(t)
        if cached is not None:
            return cached
        s = LaurentSeries.const(self.field, 1)
        for i in sorted(t):
            s = s * self.z_series[i - 1]
        self._mono_cache[t] = s
        return s

    @property
    def field(self):
        return self.curve.field

    def __eq__(self, other):
        return (
            isinstance(other, Place)
            and self.curve is other.curve
            and self.base_x == other.base_x
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((id(self.curve), self.base_x, self.labels))

    def __repr__(self):
        a = "inf" if self.base_x == INF else self.field.fmt(self.base_x)
        lab = ",".join(str(l) for l in self.labels)
        return f"Place(x={a};{lab})"


class TowerCurve:
    """An Artin-Schreier tower over P^1."""

    def __init__(self, field: GF2m, levels, extra_bad=(), name=None, _bad=None,
                 _root=None):
        self.field = field
        self.levels = list(levels)
        self.name = name
        self._root = _root if _root is not None else self
        for r, psi in enumerate(self.levels, start=1):
            if psi.top_level() >= r:
                raise ConfigError(
                    f"psi_{r} uses generators at level >= {r}"
                )
        self.extra_bad = tuple(extra_bad)
        self._mono_sq = {}
        self._dpsi = {}
        self._sub = {}
        self._place_cache = {}
        self._genus = None
        if _bad is not None:
            self._bad_finite = _bad
        else:
            self._bad_finite = self._compute_bad_finite()

    @property
    def depth(self):
        return len(self.levels)

    # -- bad locus --------------------------------------------------------------

    def _compute_bad_finite(self):
        bad = set(a for a in self.extra_bad if a != INF)
        for psi in self.levels:
            for r in psi.coeffs.values():
                if r.den != ONE:
                    for root in proots(self.field, r.den):
                        bad.add(root)
        return tuple(sorted(bad))

    @property
    def bad_x_values(self):
        """All designated bad x-values, INF always included."""
        return tuple(self._bad_finite) + (INF,)

    def bad_poly(self):
        """B(x) = prod (x - a) over finite bad values."""
        b = ONE
        for a in self._bad_finite:
            b = pmul(self.field, b, (a, 1))
        return b

    # -- subtowers ----------------------------------------------------------------

    def sub_curve(self, r: int) -> "TowerCurve":
        root = self._root
        if r == root.depth:
            return root
        if r not in root._sub:
            root._sub[r] = TowerCurve(
                root.field,
                root.levels[:r],
                extra_bad=root.extra_bad,
                _bad=root._bad_finite,
                _root=root,
            )
        return root._sub[r]

    # -- function-field arithmetic ------------------------------------------------

    def fe_mul(self, a: FunctionElement, b: FunctionElement) -> FunctionElement:
        out = FunctionElement.zero(self.field)
        for t, ct in a.coeffs.items():
            for s, cs in b.coeffs.items():
                prod = self._mono_mul(t, s).scale_rational(ct * cs)
                out = out + prod
        return out

    def fe_square(self, a: FunctionElement) -> FunctionElement:
        out = FunctionElement.zero(self.field)
        for t, ct in a.coeffs.items():
            out = out + self.mono_square(t).scale_rational(ct.square())
        return out

    def _mono_mul(self, t: frozenset, s: frozenset) -> FunctionElement:
        common = t & s
        if not common:
            return FunctionElement(
                self.field,
                {t | s: RationalFunction.const(self.field, 1)},
            )
        i = max(common)
        rest = self._mono_mul(t - {i}, s - {i})
        # z_i^2 = z_i + psi_i
        zi = FunctionElement.gen(self.field, i)
        factor = zi + self.levels[i - 1]
        return self.fe_mul(rest, factor)

    def mono_square(self, t: frozenset) -> FunctionElement:
        t = frozenset(t)
        if t not in self._mono_sq:
            self._mono_sq[t] = self._mono_mul(t, t)
        return self._mono_sq[t]

    def dpsi(self, i: int) -> FunctionElement:
        """dz_i = dpsi(i) dx (from z^2 + z = psi: dz = d psi)."""
        if i not in self._dpsi:
            self._dpsi[i] = self.fe_dx(self.levels[i - 1])
        return self._dpsi[i]

    def fe_dx(self, f: FunctionElement) -> FunctionElement:
        """g with df = g dx."""
        out = FunctionElement.zero(self.field)
        for t, c in f.coeffs.items():
            out = out + FunctionElement(self.field, {t: c.derivative()})
            for i in sorted(t):
                part = FunctionElement(self.field, {t - {i}: c})
                out = out + self.fe_mul(part, self.dpsi(i))
        return out

    # -- local expansion ------------------------------------------------------------

    def fe_expand(self, place: Place, f: FunctionElement) -> LaurentSeries:
        acc = LaurentSeries.zero(self.field, known=place.prec)
        for t, c in f.coeffs.items():
            term = c.expand(place.x_series)
            if t:
                term = term * place.mono_series(t)
            acc = acc + term
        return acc

    def expand(self, f: FunctionElement, place: Place, prec: int) -> LaurentSeries:
        """Expansion of f at the place with known precision >= prec,
        re-parametrizing the place at higher precision as needed."""
        if f.is_zero():
            return LaurentSeries.zero(self.field, known=prec)
        while True:
            s = self.fe_expand(place, f)
            if s.known >= prec:
                return s
            next_prec = max(2 * place.prec, place.prec + (prec - s.known) + 8)
            place.ensure(next_prec)

    def expand_diff(self, omega: DifferentialElement, place: Place,
                    prec: int) -> LocalDifferential:
        """omega = f dx as h(u) du: h = f(u) * x'(u)."""
        extra = 0
        while True:
            fu = self.expand(omega.f, place, prec + extra)
            body = fu * place.x_series.derivative()
            if body.known >= prec:
                return LocalDifferential(body)
            # x'(u) is known to finite precision, so the product can fall a
            # few coefficients short; ask for exactly the deficit more
            extra += prec - body.known

    def valuation(self, f: FunctionElement, place: Place) -> int:
        if f.is_zero():
            raise AscohError("valuation of the zero function")
        prec = 16
        while True:
            s = self.expand(f, place, prec)
            if not s.is_zero():
                return s.valuation()
            prec *= 2
            if prec > PRECISION_CAP:
                raise PrecisionExhausted(
                    "function vanishes to enormous order (precision cap hit)"
                )

    def diff_valuation(self, omega: DifferentialElement, place: Place) -> int:
        if omega.is_zero():
            raise AscohError("valuation of the zero differential")
        prec = 16
        while True:
            s = self.expand_diff(omega, place, prec)
            if not s.body.is_zero():
                return s.body.valuation()
            prec *= 2
            if prec > PRECISION_CAP:
                raise PrecisionExhausted(
                    "differential vanishes to enormous order (precision cap hit)"
                )

    # -- places ------------------------------------------------------------------

    def places_over(self, a, prec: int | None = None) -> list[Place]:
        """All places over the x-value ``a`` (or INF), with consistent
        parametrizations."""
        if prec is None:
            prec = self._default_prec()
        cached = self._place_cache.get(a)
        if cached is not None:
            for p in cached:
                p.ensure(prec)
            return list(cached)
        places = _places_over_impl(self, a, prec)
        self._place_cache[a] = places
        return list(places)

    def _default_prec(self):
        # breaks are not known before places are built; start from the naive
        # pole degree of the defining equations as a proxy
        guess = 1
        for psi in self.levels:
            for r in psi.coeffs.values():
                guess = max(guess, len(r.num), len(r.den))
        return max(default_precision(2 * guess + self.depth * 4), 64)

    def all_bad_places(self, prec: int | None = None) -> list[Place]:
        out = []
        for a in self.bad_x_values:
            out.extend(self.places_over(a, prec))
        return out

    def ramification_break(self, place: Place, level: int) -> int:
        return place.breaks[level - 1]

    # -- global invariants ----------------------------------------------------------

    def genus_and_prank(self):
        """(g, f, l) by the Riemann-Hurwitz and Deuring-Shafarevich
        recursions over the levels."""
        if self._genus is not None:
            return self._genus
        g, f = 0, 0
        for r in range(1, self.depth + 1):
            sub = self.sub_curve(r)
            breaks = []
            for a in self.bad_x_values:
                for p in sub.places_over(a):
                    d = p.breaks[r - 1]
                    if d:
                        breaks.append(d)
            if not breaks:
                raise ConfigError(
                    f"level {r} is unramified everywhere (cover is disconnected)"
                )
            g = 2 * g - 1 + sum((d + 1) // 2 for d in breaks)
            f = 2 * f - 1 + len(breaks)
        self._genus = (g, f, g - f)
        return self._genus

    @property
    def genus(self):
        return self.genus_and_prank()[0]

    @property
    def p_rank(self):
        return self.genus_and_prank()[1]

    # -- Riemann-Roch ------------------------------------------------------------------

    def riemann_roch_space(self, div: Divisor) -> list[FunctionElement]:
        return _riemann_roch_impl(self, div)

    # -- Cartier and trace ----------------------------------------------------------------

    def cartier_global(self, omega: DifferentialElement) -> DifferentialElement:
        """V_X(f dx): write f = u^2 + v^2 x by triangular monomial descent
        and return v dx."""
        field = self.field
        work = dict(omega.f.coeffs)
        vparts = {}
        while work:
            t = max(work, key=_weight)
            c = work.pop(t)
            if c.is_zero():
                continue
            a_part, b_part = _split_u2_xv2(field, c)
            if not b_part.is_zero():
                vparts[t] = b_part
            if t:
                # z_T^2 = z_T + (lower weight); the z_T term cancels against
                # the coefficient just popped, the rest feeds the descent
                sq = self.mono_square(t)
                for s, c2 in sq.coeffs.items():
                    if s == t:
                        continue
                    add = c * c2
                    if s in work:
                        work[s] = work[s] + add
                    else:
                        work[s] = add
                    if work[s].is_zero():
                        del work[s]
        return DifferentialElement(FunctionElement(field, vparts))

    def trace(self, eta: DifferentialElement) -> DifferentialElement:
        """eta = omega_0 + omega_1 z_r  ->  omega_1 on the level-(r-1) tower."""
        if self.depth < 1:
            raise AscohError("trace requires a tower of depth >= 1")
        r = self.depth
        out = {}
        for t, c in eta.f.coeffs.items():
            if r in t:
                out[t - {r}] = c
        return DifferentialElement(FunctionElement(self.field, out))

    def __repr__(self):
        return f"TowerCurve(depth={self.depth}, field={self.field.spec_string()})"


def _split_u2_xv2(field: GF2m, c: RationalFunction):
    """c = A^2 + x B^2; returns (A, B) as rational functions."""
    # c = n/d = (n d)/(d^2); split n d = p(x^2) + x q(x^2)
    nd = pmul(field, c.num, c.den)
    p_even, q_odd = psplit_even_odd(nd)
    a_num = pnorm([field.ifrob(x) for x in p_even])
    b_num = pnorm([field.ifrob(x) for x in q_odd])
    a = RationalFunction(field, a_num, c.den)
    b = RationalFunction(field, b_num, c.den)
    return a, b


# ---------------------------------------------------------------------------
# place construction
# ---------------------------------------------------------------------------


def _level0_place(curve: TowerCurve, a, prec: int) -> Place:
    field = curve.field
    if a == INF:
        xs = LaurentSeries(field, -1, (1,), known=prec)
    else:
        xs = LaurentSeries(field, 0, (a, 1), known=prec)
    return Place(
        curve.sub_curve(0), a, (), xs, [], [], 1, None, None, prec
    )


def _places_over_impl(curve: TowerCurve, a, prec: int) -> list[Place]:
    places = [_level0_place(curve, a, prec)]
    for r in range(1, curve.depth + 1):
        sub = curve.sub_curve(r)
        nxt = []
        for p in places:
            nxt.extend(_extend_place(sub, p, prec))
        places = nxt
    return places


def _extend_place(sub: TowerCurve, parent: Place, prec: int) -> list[Place]:
    """Extend a place of the level-(r-1) tower to the level-r tower."""
    field = sub.field
    r = sub.depth
    psi = sub.levels[r - 1]
    parent.ensure(prec)
    psi_s = sub.sub_curve(r - 1).expand(psi, parent, prec)
    red, gloc = reduce_series_artin_schreier(psi_s)
    gseries = gloc.as_series()
    if red.is_zero() or red.valuation() >= 0:
        # unramified: split into two places via the Artin-Schreier seeds
        if red.known <= 0:
            raise PrecisionExhausted("constant term of reduced equation unknown")
        c0 = red.coeff(0)
        try:
            seeds = field.artin_schreier_roots(c0)
        except NoRoot:
            raise FieldTooSmall(
                f"place over {parent.base_x!r} is not rational over "
                f"GF(2^{field.m}); try m = {2 * field.m}",
                suggested_m=2 * field.m,
            ) from None
        out = []
        for seed in sorted(seeds):
            y = solve_artin_schreier(red, seed, min(prec, red.known))
            z_new = gseries + y
            out.append(
                Place(
                    sub,
                    parent.base_x,
                    parent.labels + (seed,),
                    parent.x_series,
                    parent.z_series + [z_new],
                    parent.breaks + [0],
                    parent.e,
                    parent,
                    None,
                    min(parent.prec, prec),
                )
            )
        return out
    # ramified: reduced pole order d (odd)
    d = -red.valuation()
    if d % 2 != 1:
        raise DimensionMismatch("reduced pole order is even")  # pragma: no cover
    s = _newton_uniformizer(field, red, d, prec)
    h = (d + 1) // 2
    z_polar = LaurentSeries.monomial(field, 1, 1) * s.pow_int(-h)
    z_new = z_polar
    if not gloc.is_zero():
        z_new = z_new + gseries.compose(s)
    x_new = parent.x_series.compose(s)
    z_list = [zi.compose(s) for zi in parent.z_series] + [z_new]
    newp = Place(
        sub,
        parent.base_x,
        parent.labels + ("ram",),
        x_new,
        z_list,
        parent.breaks + [d],
        2 * parent.e,
        parent,
        s,
        min(x_new.known, s.known),
    )
    return [newp]


def _newton_uniformizer(field: GF2m, red: LaurentSeries, d: int,
                        prec: int) -> LaurentSeries:
    """Solve u^2 + u s^((d+1)/2) + red(s) s^(d+1) = 0 for s(u) = u^2 + ...

    The s-derivative of the left side has the unit constant term c_{-d}, so
    Newton iteration converges quadratically.
    """
    h = (d + 1) // 2
    a_ser = red.shift(d + 1)  # series in s, valuation >= 1
    a_der = a_ser.derivative()
    c = red.coeff(-d)
    s = LaurentSeries.monomial(field, field.inv(c), 2, known=prec)
    u_sq = LaurentSeries.monomial(field, 1, 2, known=EXACT)
    u_lin = LaurentSeries.monomial(field, 1, 1, known=EXACT)
    for _ in range(prec.bit_length() + 4):
        s_h = s.pow_int(h)
        g_val = u_sq + (u_lin * s_h) + a_ser.compose(s)
        if g_val.is_zero():
            return s.truncate(prec)
        gp = a_der.compose(s)
        if h % 2 == 1:
            gp = gp + (u_lin * s.pow_int(h - 1))
        delta = g_val * gp.inverse()
        s = (s + delta).truncate(min(s.known, prec))
        if delta.valuation() >= prec or g_val.valuation() >= prec:
            return s.truncate(prec)
    # converged as far as precision allows
    return s.truncate(prec)


def _parametrize(sub: TowerCurve, a, prec: int, want_labels) -> Place:
    """Rebuild the place with the given branch labels at higher precision."""
    full = sub
    place = _level0_place(full, a, prec)
    for r in range(1, len(want_labels) + 1):
        subr = full.sub_curve(r) if r <= full.depth else None
        if subr is None:
            raise AscohError("labels deeper than the tower")  # pragma: no cover
        children = _extend_place(subr, place, prec)
        target = want_labels[r - 1]
        match = [p for p in children if p.labels[-1] == target]
        if not match:
            raise AscohError("place labels no longer reproducible")  # pragma: no cover
        place = match[0]
    return place


# ---------------------------------------------------------------------------
# Riemann-Roch spaces
# ---------------------------------------------------------------------------


def _riemann_roch_impl(curve: TowerCurve, div: Divisor) -> list[FunctionElement]:
    bad_places = curve.all_bad_places()
    bad_keys = {p.key() for p in bad_places}
    for p in div.places():
        if p.key() not in bad_keys:
            raise UnsupportedDivisor(f"divisor support off the bad locus: {p!r}")
    mult = {p.key(): div[p] for p in div.places()}
    deg = div.degree()
    g = curve.genus if curve.depth else 0
    target = deg + 1 - g if deg > 2 * g - 2 else None

    maxmult = max([m for m in mult.values()] + [0])
    k = maxmult + curve.depth * 2 + 2
    slack = curve.depth + 2

    prev_dim = -1
    fes = []
    for _round in range(6):
        fes = _rr_attempt(curve, bad_places, mult, k, slack)
        dim = len(fes)
        if target is not None:
            if dim == target:
                return fes
            if dim > target:
                raise DimensionMismatch(
                    f"Riemann-Roch space dimension {dim} exceeds {target}"
                )
        else:
            if dim == prev_dim:
                return fes
            prev_dim = dim
        k += 2
        slack += 4
    if target is not None:
        raise DimensionMismatch(
            f"Riemann-Roch space did not reach dimension {target}"
        )
    return fes


def _all_monomials(depth: int):
    out = [frozenset()]
    for i in range(1, depth + 1):
        out += [t | {i} for t in out]
    return out


def _rr_attempt(curve, bad_places, mult, k, slack):
    """One candidate-pool pass.

    Candidates are z_T x^i / B(x)^k.  For an element of L(D) the monomial
    component c_T z_T has pole order at Q bounded by the maximal multiplicity
    of D over the same x-value (components are sums of Galois conjugates), so
    i is capped per monomial by that budget plus a slack margin.
    """
    field = curve.field
    bpoly = curve.bad_poly()
    binv = RationalFunction(field, ONE, _ppow(field, bpoly, k))
    # per-x-value pole budget for a single monomial component
    budget = {}
    for q in bad_places:
        a = q.base_x
        budget[a] = max(budget.get(a, 0), mult.get(q.key(), 0), 0)

    monos = _all_monomials(curve.depth)
    # cap the x-exponent per monomial using valuations at places where x has
    # a pole (places over infinity)
    i_caps = {}
    inf_places = [q for q in bad_places if q.base_x == INF]
    for t in monos:
        cap = None
        for q in inf_places:
            need = 1
            while True:
                s = _rr_base_series(curve, q, t, binv, need)
                if not s.is_zero():
                    break
                need = 2 * max(need, q.prec)
                if need > PRECISION_CAP:
                    raise PrecisionExhausted(
                        "candidate vanishes to enormous order"
                    )
            v0 = s.valuation()
            allowed = (v0 + budget[q.base_x] + slack) // q.e
            cap = allowed if cap is None else min(cap, allowed)
        if cap is None:
            cap = budget.get(INF, 0) + slack
        if cap >= 0:
            i_caps[t] = cap
    candidates = [(t, i) for t in monos for i in range(i_caps.get(t, -1) + 1)]
    if not candidates:
        return []

    # linear constraints: for each bad place Q, coefficients of u^e for
    # e < -mult(Q) must vanish
    rows = []
    for q in bad_places:
        hi = -mult.get(q.key(), 0)
        expansions = {}
        for t in monos:
            if t not in i_caps:
                continue
            cur = _rr_base_series(curve, q, t, binv, hi + 1 + i_caps[t] * q.e)
            xs = q.x_series
            for i in range(i_caps[t] + 1):
                expansions[(t, i)] = cur
                if i < i_caps[t]:
                    cur = cur * xs
        vmin = 0
        for s in expansions.values():
            if not s.is_zero():
                vmin = min(vmin, s.valuation())
        for e in range(vmin, hi):
            row = []
            for key in candidates:
                s = expansions[key]
                row.append(s.coeff(e) if e < s.known else 0)
            if any(row):
                rows.append(tuple(row))
    ker = kernel_basis(field, rows, len(candidates))
    fes = []
    for v in ker:
        fe = FunctionElement.zero(field)
        for coef, (t, i) in zip(v, candidates):
            if coef:
                num = (0,) * i + (coef,)
                rf = RationalFunction(field, num) * binv
                fe = fe + FunctionElement(field, {t: rf})
        fes.append(fe)
    return fes


def _rr_base_series(curve, q, t, binv, need):
    """Expansion of z_T / B(x)^k at q, known at least up to max(need, 1)."""
    need = max(need, 1)
    for _ in range(10):
        s = binv.expand(q.x_series)
        if t:
            s = s * q.mono_series(t)
        if s.known >= need:
            return s
        q.ensure(max(2 * q.prec, q.prec + (need - s.known) + 8))
    raise PrecisionExhausted("candidate expansion failed to reach precision")


def _ppow(field, a, n):
    from .polys import ppow

    return ppow(field, a, n)


# ---------------------------------------------------------------------------
# differentials: div(dx) over the bad locus
# ---------------------------------------------------------------------------


def dx_divisor(curve: TowerCurve) -> Divisor:
    """div(dx) restricted to the bad locus (where all its zeros/poles lie)."""
    one = DifferentialElement(FunctionElement.const(curve.field, 1))
    mults = {}
    for q in curve.all_bad_places():
        v = curve.diff_valuation(one, q)
        if v:
            mults[q] = v
    return Divisor(mults)
