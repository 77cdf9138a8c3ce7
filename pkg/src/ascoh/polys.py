"""Dense univariate polynomials and rational functions over GF(2^m).

Polynomials are tuples of coefficients indexed by degree, normalized with no
trailing zeros (the zero polynomial is the empty tuple).
"""

from __future__ import annotations

from .errors import AscohError
from .gf2m import GF2m
from .laurent import EXACT, LaurentSeries

ZERO = ()
ONE = (1,)


def pnorm(c) -> tuple:
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def pdeg(a) -> int:
    return len(a) - 1  # -1 for the zero polynomial


def padd(a, b) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] ^= c
    return pnorm(out)


def pmul(field: GF2m, a, b) -> tuple:
    if not a or not b:
        return ZERO
    out = [0] * (len(a) + len(b) - 1)
    mul = field.mul
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] ^= mul(x, y)
    return pnorm(out)


def pscale(field: GF2m, c, a) -> tuple:
    return pnorm([field.mul(c, x) for x in a])


def pdivmod(field: GF2m, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    inv_lead = field.inv(b[-1])
    for i in range(len(a) - len(b), -1, -1):
        c = field.mul(a[i + len(b) - 1], inv_lead)
        if c:
            q[i] = c
            for j, y in enumerate(b):
                if y:
                    a[i + j] ^= field.mul(c, y)
    return pnorm(q), pnorm(a)


def pgcd(field: GF2m, a, b) -> tuple:
    while b:
        a, b = b, pdivmod(field, a, b)[1]
    if a:
        a = pscale(field, field.inv(a[-1]), a)  # monic
    return a


def ppow(field: GF2m, a, n: int) -> tuple:
    r = ONE
    while n:
        if n & 1:
            r = pmul(field, r, a)
        a = pmul(field, a, a)
        n >>= 1
    return r


def peval(field: GF2m, a, x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = field.mul(acc, x) ^ c
    return acc


def pderiv(a) -> tuple:
    """Formal derivative in characteristic 2: only odd degrees survive."""
    return pnorm([a[i] if i & 1 else 0 for i in range(1, len(a))])


def psqrt(field: GF2m, a) -> tuple:
    """Square root of a polynomial in x^2 (all odd coefficients zero)."""
    out = []
    for i, c in enumerate(a):
        if i & 1:
            if c:
                raise AscohError("polynomial is not a square")
        else:
            out.append(field.ifrob(c))
    return pnorm(out)


def psplit_even_odd(a):
    """a(x) = p(x^2) + x q(x^2); returns (p, q) as polynomials in x."""
    p = pnorm([a[i] for i in range(0, len(a), 2)])
    q = pnorm([a[i] for i in range(1, len(a), 2)])
    return p, q


def proots(field: GF2m, a) -> list[int]:
    """All roots of a in GF(2^m) (multiplicities ignored)."""
    if not a:
        raise AscohError("every element is a root of the zero polynomial")
    roots = []
    deg = pdeg(a)
    if deg == 0:
        return roots
    for x in field.elements():
        if peval(field, a, x) == 0:
            roots.append(x)
            if len(roots) == deg:
                break
    return roots


def peval_series(field: GF2m, a, xs: LaurentSeries) -> LaurentSeries:
    """a(xs) by Horner."""
    acc = LaurentSeries.zero(field)
    for c in reversed(a):
        acc = acc * xs
        if c:
            acc = acc + LaurentSeries.const(field, c, known=EXACT)
    return acc


class RationalFunction:
    """num/den with den monic and gcd(num, den) = 1."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: GF2m, num, den=ONE, reduce=True):
        num = pnorm(num)
        den = pnorm(den)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce and num:
            g = pgcd(field, num, den)
            if pdeg(g) > 0:
                num = pdivmod(field, num, g)[0]
                den = pdivmod(field, den, g)[0]
        if den[-1] != 1:
            c = field.inv(den[-1])
            num = pscale(field, c, num)
            den = pscale(field, c, den)
        if not num:
            den = ONE
        self.field = field
        self.num = num
        self.den = den

    @classmethod
    def const(cls, field, c):
        return cls(field, (c,) if c else ())

    @classmethod
    def x(cls, field):
        return cls(field, (0, 1))

    def is_zero(self):
        return not self.num

    def __add__(self, other):
        f = self.field
        num = padd(pmul(f, self.num, other.den), pmul(f, other.num, self.den))
        return RationalFunction(f, num, pmul(f, self.den, other.den))

    def __mul__(self, other):
        f = self.field
        return RationalFunction(
            f, pmul(f, self.num, other.num), pmul(f, self.den, other.den)
        )

    def scale(self, c):
        return RationalFunction(self.field, pscale(self.field, c, self.num), self.den, reduce=False)

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return RationalFunction(self.field, self.den, self.num, reduce=False)

    def square(self):
        f = self.field
        return RationalFunction(
            f, pmul(f, self.num, self.num), pmul(f, self.den, self.den), reduce=False
        )

    def derivative(self):
        """d/dx; (n/d)' = (n'd + nd')/d^2 in characteristic 2."""
        f = self.field
        num = padd(
            pmul(f, pderiv(self.num), self.den), pmul(f, self.num, pderiv(self.den))
        )
        return RationalFunction(f, num, pmul(f, self.den, self.den))

    def expand(self, xs: LaurentSeries) -> LaurentSeries:
        n = peval_series(self.field, self.num, xs)
        if self.den == ONE:
            return n
        d = peval_series(self.field, self.den, xs)
        return n * d.inverse()

    def eval(self, x: int) -> int:
        f = self.field
        d = peval(f, self.den, x)
        if not d:
            raise ZeroDivisionError("pole of rational function")
        return f.mul(peval(f, self.num, x), f.inv(d))

    def __eq__(self, other):
        return (
            isinstance(other, RationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        def fmt(p):
            if not p:
                return "0"
            return " + ".join(
                f"{self.field.fmt(c)}*x^{i}" for i, c in enumerate(p) if c
            )

        if self.den == ONE:
            return fmt(self.num)
        return f"({fmt(self.num)})/({fmt(self.den)})"
