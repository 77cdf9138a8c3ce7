"""Truncated Laurent series over GF(2^m) with explicit precision accounting.

A :class:`LaurentSeries` stores a window of coefficients: ``val`` is the
exponent of the first stored coefficient and ``known`` is the first exponent
that is *not* known (exclusive precision bound).  Operations combine the
precision of their inputs pessimistically and never report coefficients at or
beyond ``known``.  Exact values (polynomials, monomials) carry the sentinel
precision :data:`EXACT`.

Also here: local differentials ``f(u) du``, antiderivative tails (finite maps
from negative exponents to coefficients), the local Cartier operator, series
solving of y^2 + y = f, and the tail-reduction used to compute ramification
breaks.
"""

from __future__ import annotations

from .errors import (
    NoRoot,
    NotSecondKind,
    OddExponentInSqrt,
    PrecisionExhausted,
)
from .gf2m import GF2m

EXACT = 10**9
PRECISION_CAP = 2**16


def _pack_planes(m: int, coeffs, s: int):
    """Bit plane p of the coefficient list, packed with stride s bits."""
    nbytes = (len(coeffs) * s + 7) // 8 + 1
    bufs = [bytearray(nbytes) for _ in range(m)]
    for i, c in enumerate(coeffs):
        pos = i * s
        byte, bit = pos >> 3, 1 << (pos & 7)
        p = 0
        while c:
            if c & 1:
                bufs[p][byte] |= bit
            c >>= 1
            p += 1
    return [int.from_bytes(buf, "little") for buf in bufs]


def _conv_packed(f: GF2m, a, b, n: int):
    """First ``n`` coefficients of the convolution of coefficient tuples,
    via big-integer multiplication on bit planes: coefficient bits are
    packed with enough spacing that column sums never collide, and the
    parity bit of each packed column of the integer product is the GF(2)
    convolution of a pair of planes."""
    s = min(len(a), len(b)).bit_length() + 1
    planes_a = _pack_planes(f.m, a, s)
    planes_b = _pack_planes(f.m, b, s)
    out = [0] * n
    for p, ap in enumerate(planes_a):
        if not ap:
            continue
        for q, bq in enumerate(planes_b):
            if not bq:
                continue
            unit = f.mul(1 << p, 1 << q)
            prod = ap * bq
            blob = prod.to_bytes((prod.bit_length() + 7) // 8 + 1, "little")
            top = min(n, (len(blob) * 8 - 1) // s + 1)
            for k in range(top):
                pos = k * s
                if (blob[pos >> 3] >> (pos & 7)) & 1:
                    out[k] ^= unit
    return out


def _invert_unit_newton(f: GF2m, unit, n: int):
    """First n coefficients of the inverse of a power series with constant
    term 1, by precision-doubling: y <- y + y(1 + unit*y) squares the error
    in characteristic 2."""
    us = LaurentSeries(f, 0, unit, n)
    one = LaurentSeries(f, 0, (1,), EXACT)
    y = LaurentSeries(f, 0, (1,), 1)
    t = 1
    while t < n:
        t = min(2 * t, n)
        yt = LaurentSeries(f, y.val, y.coeffs, t)
        err = (us.truncate(t) * yt).truncate(t) + one.truncate(t)
        y = yt + (yt * err).truncate(t)
    return [y.coeff(k) for k in range(n)]


def default_precision(max_break: int) -> int:
    """Initial working precision for a tower with largest ramification
    break ``max_break``."""
    return 4 * max(max_break, 0) + 16


class LaurentSeries:
    __slots__ = ("field", "val", "coeffs", "known")

    def __init__(self, field: GF2m, val: int, coeffs, known: int | None = None):
        if known is None:
            known = val + len(coeffs)
        if known >= EXACT // 2:
            known = EXACT
        coeffs = list(coeffs)
        if val + len(coeffs) > known:
            coeffs = coeffs[: known - val]
        # strip leading zeros (normalization: leading coefficient nonzero)
        i = 0
        while i < len(coeffs) and not coeffs[i]:
            i += 1
        val += i
        coeffs = coeffs[i:]
        # strip trailing zeros (they are implied by the window)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        if not coeffs:
            val = known
        self.field = field
        self.val = val
        self.coeffs = tuple(coeffs)
        self.known = known
        if self.val > self.known:
            raise PrecisionExhausted("series with no known coefficients")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, field, known=EXACT):
        return cls(field, known, (), known)

    @classmethod
    def const(cls, field, c, known=EXACT):
        return cls(field, 0, (c,), known)

    @classmethod
    def monomial(cls, field, c, e, known=EXACT):
        return cls(field, e, (c,), known)

    # -- inspection ------------------------------------------------------------

    def is_zero(self) -> bool:
        """Zero within precision."""
        return not self.coeffs

    def coeff(self, e: int) -> int:
        if e >= self.known:
            raise PrecisionExhausted(f"coefficient at u^{e} beyond precision")
        if e < self.val or e >= self.val + len(self.coeffs):
            return 0
        return self.coeffs[e - self.val]

    def valuation(self) -> int:
        """Valuation of the leading known term; raises if zero within
        precision (the true valuation may be anywhere >= known)."""
        if not self.coeffs:
            raise PrecisionExhausted("valuation of a series that is zero within precision")
        return self.val

    def terms(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.val + i, c

    # -- arithmetic ------------------------------------------------------------

    def truncate(self, known: int) -> "LaurentSeries":
        if known >= self.known:
            return self
        return LaurentSeries(self.field, self.val, self.coeffs, known)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        known = min(self.known, other.known)
        if self.is_zero():
            return other.truncate(known)
        if other.is_zero():
            return self.truncate(known)
        val = min(self.val, other.val)
        n = max(self.val + len(self.coeffs), other.val + len(other.coeffs)) - val
        out = [0] * n
        for i, c in enumerate(self.coeffs):
            out[self.val - val + i] ^= c
        for i, c in enumerate(other.coeffs):
            out[other.val - val + i] ^= c
        return LaurentSeries(self.field, val, out, known)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.is_zero() or other.is_zero():
            known = min(
                self.val + other.known,
                other.val + self.known,
            )
            return LaurentSeries.zero(self.field, known)
        known = min(self.val + other.known, other.val + self.known)
        f = self.field
        val = self.val + other.val
        n = min(len(self.coeffs) + len(other.coeffs) - 1, known - val)
        if len(self.coeffs) * len(other.coeffs) >= 256 and f.m <= 8:
            out = _conv_packed(f, self.coeffs, other.coeffs, n)
            return LaurentSeries(self.field, val, out, known)
        out = [0] * n
        mul = f.mul
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            if i >= n:
                break
            lim = min(len(other.coeffs), n - i)
            for j in range(lim):
                b = other.coeffs[j]
                if b:
                    out[i + j] ^= mul(a, b)
        return LaurentSeries(self.field, val, out, known)

    def scale(self, c: int) -> "LaurentSeries":
        f = self.field
        return LaurentSeries(
            f, self.val, [f.mul(c, x) for x in self.coeffs], self.known
        )

    def shift(self, e: int) -> "LaurentSeries":
        """Multiply by u^e."""
        return LaurentSeries(self.field, self.val + e, self.coeffs, self.known + e)

    def inverse(self, rel: int | None = None) -> "LaurentSeries":
        """Multiplicative inverse.  ``rel`` requests the number of correct
        coefficients (relative precision); defaults to the input's own
        relative precision, or a generous window for exact inputs."""
        if self.is_zero():
            raise PrecisionExhausted("inverse of a series that is zero within precision")
        f = self.field
        v = self.val
        exact_in = self.known >= EXACT
        c0 = self.coeffs[0]
        c0i = f.inv(c0)
        if exact_in and len(self.coeffs) == 1:
            out_known = EXACT if rel is None else -v + rel
            return LaurentSeries(f, -v, (c0i,), out_known)
        if rel is None:
            rel = (2 * len(self.coeffs) + 64) if exact_in else self.known - v
        # invert the unit part: self = c0 u^v (1 + e)
        unit = [f.mul(c0i, x) for x in self.coeffs]
        n = max(rel, 1)
        if n * min(n, len(unit)) >= 4096:
            out = _invert_unit_newton(f, unit, n)
        else:
            out = [0] * n
            out[0] = 1
            mul = f.mul
            for k in range(1, n):
                acc = 0
                for j in range(1, min(k, len(unit) - 1) + 1):
                    if unit[j] and out[k - j]:
                        acc ^= mul(unit[j], out[k - j])
                out[k] = acc
        out = [f.mul(c0i, x) for x in out]
        return LaurentSeries(f, -v, out, -v + rel)

    def derivative(self) -> "LaurentSeries":
        """d/du in characteristic 2: only odd exponents survive."""
        out = []
        val = self.val - 1
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            out.append(c if (e & 1) else 0)
        return LaurentSeries(self.field, val, out, self.known - 1)

    def sqrt(self) -> "LaurentSeries":
        f = self.field
        for e, c in self.terms():
            if e & 1:
                raise OddExponentInSqrt(f"nonzero coefficient at odd exponent {e}")
        out = {}
        for e, c in self.terms():
            out[e // 2] = f.ifrob(c)
        known = -(-(self.known) // 2)  # ceil(known/2)
        if self.known >= EXACT:
            known = EXACT
        if not out:
            return LaurentSeries.zero(f, known)
        lo = min(out)
        hi = max(out)
        coeffs = [out.get(i, 0) for i in range(lo, hi + 1)]
        return LaurentSeries(f, lo, coeffs, known)

    def square(self) -> "LaurentSeries":
        f = self.field
        out = {}
        for e, c in self.terms():
            out[2 * e] = f.frob(c)
        known = 2 * self.known if self.known < EXACT else EXACT
        # precision: exponent e known for e < known, so 2e < 2*known; odd
        # intermediate exponents are exactly zero
        if not out:
            return LaurentSeries.zero(f, known)
        lo, hi = min(out), max(out)
        coeffs = [out.get(i, 0) for i in range(lo, hi + 1)]
        return LaurentSeries(f, lo, coeffs, known)

    def pow_int(self, n: int) -> "LaurentSeries":
        if n == 0:
            return LaurentSeries.const(self.field, 1)
        base = self if n > 0 else self.inverse()
        e = abs(n)
        r = None
        b = base
        while e:
            if e & 1:
                r = b if r is None else r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def compose(self, g: "LaurentSeries") -> "LaurentSeries":
        """self(g); requires valuation of g >= 1."""
        f = self.field
        if g.is_zero():
            w = None
        else:
            w = g.valuation()
            if w < 1:
                raise PrecisionExhausted("composition requires inner valuation >= 1")
        if self.is_zero():
            known = self.known if self.known >= EXACT else self.known * (w or 1)
            return LaurentSeries.zero(f, min(known, EXACT))
        if w is None:
            # g is zero: f(0) = constant term; requires val >= 0
            if self.val < 0:
                raise PrecisionExhausted("composition of a pole with zero inner series")
            return LaurentSeries.const(f, self.coeff(0) if self.known > 0 else 0,
                                       known=g.known)
        # positive-exponent part by Horner; negative part via g^{-1}
        hi = self.val + len(self.coeffs)
        pos = None
        for e in range(hi - 1, -1, -1):
            c = self.coeff(e) if e < self.known else 0
            term = LaurentSeries.const(f, c) if c else LaurentSeries.zero(f)
            pos = term if pos is None else pos * g + term
        if pos is None:
            pos = LaurentSeries.zero(f)
        result = pos
        if self.val < 0:
            gi = g.inverse()
            acc = gi
            neg = LaurentSeries.zero(f)
            for e in range(-1, self.val - 1, -1):
                c = self.coeff(e)
                if c:
                    neg = neg + acc.scale(c)
                if e > self.val:
                    acc = acc * gi
            result = result + neg
        # truncation error of self contributes g^known ~ u^(known*w)
        if self.known < EXACT:
            cap = self.known * w
            result = result.truncate(min(result.known, cap))
        return result

    # -- formatting ------------------------------------------------------------

    def __repr__(self):
        parts = []
        for e, c in self.terms():
            parts.append(f"{self.field.fmt(c)}*u^{e}")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.known >= EXACT else f" + O(u^{self.known})"
        return body + tail

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        known = min(self.known, other.known)
        a = self.truncate(known)
        b = other.truncate(known)
        return a.val == b.val and a.coeffs == b.coeffs

    def __hash__(self):
        raise TypeError("LaurentSeries equality is precision-relative; unhashable")


class LocalDifferential:
    """f(u) du for a Laurent series f in the local uniformizer u."""

    __slots__ = ("body",)

    def __init__(self, body: LaurentSeries):
        self.body = body

    @property
    def field(self):
        return self.body.field

    def __add__(self, other):
        return LocalDifferential(self.body + other.body)

    def scale(self, c):
        return LocalDifferential(self.body.scale(c))

    def __repr__(self):
        return f"({self.body!r}) du"


def residue(omega: LocalDifferential) -> int:
    """Coefficient of u^-1 du."""
    return omega.body.coeff(-1)


def cartier_local(omega: LocalDifferential) -> LocalDifferential:
    """sum a_n u^n du  ->  sum over odd n of sqrt(a_n) u^((n-1)/2) du."""
    body = omega.body
    f = body.field
    out = {}
    for e, c in body.terms():
        if e & 1:
            out[(e - 1) // 2] = f.ifrob(c)
    known = body.known
    if known < EXACT:
        known = -(-(known - 1) // 2)  # ceil((known-1)/2)
    if not out:
        return LocalDifferential(LaurentSeries.zero(f, known))
    lo, hi = min(out), max(out)
    coeffs = [out.get(i, 0) for i in range(lo, hi + 1)]
    return LocalDifferential(LaurentSeries(f, lo, coeffs, known))


def solve_artin_schreier(
    f_series: LaurentSeries, seed: int, prec: int
) -> LaurentSeries:
    """The unique y with y^2 + y = f, y(0) = seed, modulo u^prec.

    Requires val(f) >= 0 and seed^2 + seed = f(0).  Computed by iterating
    y -> y^2 + f: the residual squares at each step, so its valuation
    doubles.
    """
    field = f_series.field
    if not f_series.is_zero() and f_series.valuation() < 0:
        raise NoRoot("y^2+y=f requires f regular (valuation >= 0)")
    prec = min(prec, f_series.known)
    if prec <= 0:
        raise PrecisionExhausted("no known coefficients for Artin-Schreier solve")
    f0 = f_series.coeff(0)
    if field.frob(seed) ^ seed != f0:
        raise NoRoot("seed does not solve c^2+c=f(0)")
    f_t = f_series.truncate(prec)
    y = LaurentSeries.const(field, seed, known=prec)
    # the residual valuation doubles each step, so log2(prec)+2 suffices
    for _ in range(prec.bit_length() + 2):
        resid = y.square() + y + f_t
        if resid.is_zero():
            return y
        y = (y.square() + f_t).truncate(prec)
    raise PrecisionExhausted("Artin-Schreier iteration failed to converge")


class TailClass:
    """An element of K_Q / O_Q: a finite map exponent -> coefficient with all
    exponents strictly negative."""

    __slots__ = ("field", "terms")

    def __init__(self, field: GF2m, terms=None):
        self.field = field
        t = {}
        for e, c in (terms or {}).items():
            if c:
                if e >= 0:
                    raise ValueError("tail exponents must be negative")
                t[e] = c
        self.terms = dict(sorted(t.items()))

    def is_zero(self):
        return not self.terms

    def pole_order(self):
        return -min(self.terms) if self.terms else 0

    def __add__(self, other: "TailClass") -> "TailClass":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) ^ c
        return TailClass(self.field, t)

    def scale(self, c: int) -> "TailClass":
        f = self.field
        return TailClass(f, {e: f.mul(c, x) for e, x in self.terms.items()})

    def square(self) -> "TailClass":
        f = self.field
        return TailClass(f, {2 * e: f.frob(c) for e, c in self.terms.items()})

    def d(self) -> LocalDifferential:
        """Exterior derivative of the lifted tail: sum over odd exponents e
        of c u^(e-1) du (even-exponent terms die in characteristic 2)."""
        f = self.field
        out = {e - 1: c for e, c in self.terms.items() if e & 1}
        if not out:
            return LocalDifferential(LaurentSeries.zero(f))
        lo, hi = min(out), max(out)
        coeffs = [out.get(i, 0) for i in range(lo, hi + 1)]
        return LocalDifferential(LaurentSeries(f, lo, coeffs, EXACT))

    def as_series(self, known=EXACT) -> LaurentSeries:
        f = self.field
        if not self.terms:
            return LaurentSeries.zero(f, known)
        lo, hi = min(self.terms), max(self.terms)
        coeffs = [self.terms.get(i, 0) for i in range(lo, hi + 1)]
        return LaurentSeries(f, lo, coeffs, known)

    def __eq__(self, other):
        return isinstance(other, TailClass) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "TailClass(0)"
        body = " + ".join(
            f"{self.field.fmt(c)}*u^{e}" for e, c in self.terms.items()
        )
        return f"TailClass({body})"


def integrate_tail(omega: LocalDifferential) -> TailClass:
    """The canonical antiderivative tail of the polar part of ``omega``.

    Every polar term a u^n du must have n even (second-kind condition); the
    tail term is then a u^(n+1) since n+1 is odd, hence invertible mod 2.
    Raises :class:`NotSecondKind` on an odd polar exponent.
    """
    body = omega.body
    if body.known < 0:
        raise PrecisionExhausted("polar part not fully known")
    out = {}
    for e, c in body.terms():
        if e >= 0:
            break
        if e & 1:
            raise NotSecondKind(f"odd polar exponent {e} in local differential")
        out[e + 1] = c
    return TailClass(body.field, out)


def reduce_tail(t: TailClass) -> tuple[TailClass, TailClass]:
    """Reduce a tail modulo {g^2 + g}: returns (reduced, g) with
    reduced = t + g^2 + g, where the leading (deepest) exponent of
    ``reduced`` is odd or the tail is empty.

    The negative of the reduced pole order is the local ramification-break
    contribution.
    """
    f = t.field
    cur = dict(t.terms)
    g = {}
    while cur:
        e = min(cur)
        if e & 1:
            break
        c = cur.pop(e)
        if not c:
            continue
        r = f.ifrob(c)
        half = e // 2
        g[half] = g.get(half, 0) ^ r
        # adding (r u^half)^2 cancels c u^e; the linear part adds r u^half
        cur[half] = cur.get(half, 0) ^ r
        cur = {k: v for k, v in cur.items() if v}
    return TailClass(f, cur), TailClass(f, g)


def reduce_series_artin_schreier(
    s: LaurentSeries,
) -> tuple[LaurentSeries, TailClass]:
    """Series-level analogue of :func:`reduce_tail`: returns (s_red, g) with
    s_red = s + g(u)^2 + g(u) and the polar part of s_red of odd order (or
    absent)."""
    f = s.field
    g = {}
    cur = s
    while not cur.is_zero():
        v = cur.valuation()
        if v >= 0 or (v & 1):
            break
        c = cur.coeff(v)
        r = f.ifrob(c)
        half = v // 2
        g[half] = g.get(half, 0) ^ r
        gterm = LaurentSeries.monomial(f, r, half)
        cur = cur + gterm.square() + gterm
    return cur, TailClass(f, g)
