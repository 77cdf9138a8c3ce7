"""Closed-form predictors, combinatorics, and bounds for the mod-2
invariants of double covers.

Everything here is exact integer arithmetic on ramification data:

* the phi recursion on simple words in V and the orthogonal-complement
  letter (written 'p' for "perp" in formatted words);
* the closed-form module and final type when the base curve is ordinary;
* the V-type of a one-point cover of the supersingular elliptic curve,
  parametrized by an invariant mu extracted from the cover equation;
* codimensions of the V-type strata and of Ekedahl-Oort strata;
* lower/upper bounds L and U on dim w(L) for non-ordinary bases, and the
  derived intervals for individual final-type entries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dieudonne import (
    Word,
    direct_sum,
    final_type,
    m_branch,
    m_ord,
)
from .errors import AscohError
from .gf2m import GF2m
from .tower import DifferentialElement


# ---------------------------------------------------------------------------
# ramification data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RamificationData:
    """Base-curve invariants plus the ramification breaks of a double cover.

    a_x lists the higher a-numbers (a^1, a^2, ...) of the base; a^0 = 0 is
    implicit.  When omitted, the conservative value a^r = l_x is used, which
    keeps every bound valid (only weaker).  tango is an optional Tango
    number; absent, the conservative branch of L1 is always taken.
    """

    g_x: int
    f_x: int
    breaks: tuple
    a_x: tuple = None
    tango: int = None

    def __post_init__(self):
        if not 0 <= self.f_x <= self.g_x:
            raise AscohError("need 0 <= f_x <= g_x")
        if not self.breaks:
            raise AscohError("at least one branch point required")
        for d in self.breaks:
            if d < 1 or d % 2 == 0:
                raise AscohError(f"ramification break {d} must be odd >= 1")
        lx = self.g_x - self.f_x
        if self.a_x is not None:
            ax = tuple(self.a_x)
            if any(a < 0 or a > lx for a in ax):
                raise AscohError("higher a-numbers must lie in [0, l_x]")
            if any(ax[i] > ax[i + 1] for i in range(len(ax) - 1)):
                raise AscohError("higher a-numbers must be nondecreasing")
            object.__setattr__(self, "a_x", ax)
        object.__setattr__(self, "breaks", tuple(self.breaks))

    @property
    def l_x(self):
        return self.g_x - self.f_x

    @property
    def m(self):
        return len(self.breaks)

    @property
    def f_y(self):
        return 2 * self.f_x - 1 + self.m

    @property
    def g_y(self):
        return 2 * self.g_x - 1 + sum((d + 1) // 2 for d in self.breaks)

    @property
    def l_y(self):
        return self.g_y - self.f_y

    def a(self, r: int) -> int:
        """a^r of the base, conservatively l_x when unknown."""
        if r <= 0:
            return 0
        if self.a_x is None:
            return self.l_x
        if r <= len(self.a_x):
            return self.a_x[r - 1]
        return self.a_x[-1] if self.a_x else 0


# ---------------------------------------------------------------------------
# the phi recursion
# ---------------------------------------------------------------------------


def phi(d: int, w: Word) -> int:
    """phi(d, w) for a simple word; blocks apply right to left, and a
    leading perp flips x to d-1-x."""
    if d < 1 or d % 2 == 0:
        raise AscohError("d must be odd and positive")
    x = None
    for n in w.exponents:
        base = (d - 1) if x is None else (d - 1 - x)
        x = base >> n
    if w.leading_perp:
        x = d - 1 - x
    return x


def phi_total(rd: RamificationData, w: Word) -> int:
    return sum(phi(d, w) for d in rd.breaks)


def v_word(w: Word) -> Word:
    """The word V.w."""
    if w.leading_perp:
        return Word(tuple(w.exponents) + (1,), leading_perp=False)
    exps = tuple(w.exponents)
    return Word(exps[:-1] + (exps[-1] + 1,), leading_perp=False)


def _split_word(w: Word):
    """Decompose w = V^r perp w'; returns (r, t, w') with t the number of
    perps.  The bound formulas require a leading V-block and at least one
    perp: pure V-powers are handled exactly elsewhere, and words starting
    with perp are outside the scope of the dimension bounds."""
    t = w.num_perps
    if t < 1:
        raise AscohError("word must contain at least one perp")
    if w.leading_perp:
        raise AscohError("word must start with a V-block (V^r perp w')")
    exps = tuple(w.exponents)
    return exps[-1], t, Word(exps[:-1], leading_perp=False)


# ---------------------------------------------------------------------------
# ordinary base curves
# ---------------------------------------------------------------------------


def branch_final_type(d: int) -> tuple:
    """Final type of the weight-(d-1) branch summand: [0,1,1,2,2,...]."""
    g = (d - 1) // 2
    return tuple(min(l // 2, (d - 1) // 4) for l in range(1, g + 1))


def predict_ordinary(rd: RamificationData, field: GF2m = None):
    """Synthesized module and final type of a cover of an ordinary base.

    The cohomology is a direct sum of f_y unit summands and one branch
    summand of dimension d_i - 1 per branch point; the final type is read
    off that module.  The per-summand closed form is asserted on the way.
    """
    if rd.f_x != rd.g_x:
        raise AscohError("the closed form requires an ordinary base")
    if field is None:
        field = GF2m(1)
    parts = [m_ord(field) for _ in range(rd.f_y)]
    for d in rd.breaks:
        if d > 1:
            mod = m_branch(field, d)
            if final_type(mod) != branch_final_type(d):
                raise AscohError("branch summand closed form mismatch")
            parts.append(mod)
    if not parts:
        raise AscohError("empty module (g_y = 0)")
    module = direct_sum(*parts)
    nu = final_type(module)
    if len(nu) != rd.g_y:
        raise AscohError("synthesized module has the wrong genus")
    return module, nu


def ordinary_word_dimension(rd: RamificationData, w: Word) -> int:
    """dim w(H1) = f_y + phi(w) for an ordinary base."""
    if rd.f_x != rd.g_x:
        raise AscohError("requires an ordinary base")
    return rd.f_y + phi_total(rd, w)


# ---------------------------------------------------------------------------
# one-point covers of the supersingular elliptic curve
# ---------------------------------------------------------------------------


def _r(n: int) -> int:
    """floor(log2(n)) for n >= 1."""
    return n.bit_length() - 1


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


def admissible_mu(d: int) -> frozenset:
    if d < 3 or d % 2 == 0:
        raise AscohError("d must be odd and >= 3")
    r = _r(d - 1)
    return frozenset({r + 1} | set(range(_v2(d - 1), r)))


def predict_vtype_ss(d: int, mu: int) -> tuple:
    """V-type of the regular differentials of a one-point cover of the
    supersingular elliptic curve: iota(M_delta) + u(r_delta + 1) + u(mu)."""
    if mu not in admissible_mu(d):
        raise AscohError(f"mu = {mu} is not admissible for d = {d}")
    delta = (d - 1) // 2
    rd1 = _r(delta) + 1
    out = []
    i = 0
    while True:
        c = delta >> i
        if i <= rd1:
            c += 1
        if i <= mu:
            c += 1
        out.append(c)
        if c == 0:
            return tuple(out)
        i += 1


def mu_from_tail(curve, psi, place):
    """(mu, admissible set) for the cover z^2 + z = psi of the genus-1
    base, ramified at the given place only.

    mu is the largest r such that the r-th Cartier iterate of psi dx falls
    outside the r-th step of the pole-bounded filtration, which allows
    pole order delta//2^r + 1 for r <= floor(log2(d-1)) and degenerates
    to zero for r = floor(log2(d-1)) + 1.
    """
    omega = DifferentialElement(psi)
    d = -curve.diff_valuation(omega, place)
    if d < 3 or d % 2 == 0:
        raise AscohError(f"pole order {d} of psi must be odd and >= 3")
    delta = (d - 1) // 2
    adm = admissible_mu(d)
    rtop = _r(d - 1)
    mu = 0
    for r in range(1, rtop + 2):
        omega = curve.cartier_global(omega)
        if omega.is_zero():
            break
        if r > rtop:
            outside = True
        else:
            v = curve.diff_valuation(omega, place)
            outside = v < -((delta >> r) + 1)
        if outside:
            mu = r
    if mu not in adm:
        raise AscohError(f"extracted mu = {mu} outside admissible set {sorted(adm)}")
    return mu, adm


def mu_from_coefficients(coeffs: dict, d: int = None) -> int:
    """mu from the polar coefficients {e: c_e} (e < 0) of psi in a
    uniformizer t normalized so dt equals the invariant differential.

    The coefficient of t^-(i+1) matters for even i with delta < i <= d-1:
    if the one at i = 2^r(d-1) is nonzero, mu = r(d-1)+1; otherwise mu is
    the largest V-order minus one among the nonzero contributions.
    """
    polar = {-e: c for e, c in coeffs.items() if e < 0 and c}
    if d is None:
        d = max(polar, default=0)
    if d < 3 or d % 2 == 0 or not polar.get(d):
        raise AscohError("leading polar coefficient at odd order d >= 3 required")
    delta = (d - 1) // 2
    rtop = _r(d - 1)
    if polar.get(2 ** rtop + 1):
        return rtop + 1
    best = 0
    for i in range(delta + 1, d):
        if polar.get(i + 1):
            k = _v2(i)
            order = k + 2 if i == 1 << k else k + 1
            best = max(best, order)
    if best == 0:
        raise AscohError("no contributing coefficient found")
    return best - 1


def codim_stratum_ss(d: int, mu: int) -> int:
    if mu not in admissible_mu(d):
        raise AscohError(f"mu = {mu} is not admissible for d = {d}")
    if mu == _r(d - 1) + 1:
        return 0
    return (d - 1) // (1 << (mu + 1)) - (d - 1) // (1 << (mu + 2))


def codim_eo(ft) -> int:
    return sum((i + 1) - v for i, v in enumerate(ft))


def predict_2n1(d: int) -> tuple:
    """The unique final type of a one-point cover of the supersingular
    elliptic curve with break d = 2^n + 1."""
    n = d - 1
    if d < 3 or n & (n - 1):
        raise AscohError("d must be of the form 2^n + 1")
    g = (d + 3) // 2
    return tuple(min(l - 1, l // 2 + 1) for l in range(1, g + 1))


# ---------------------------------------------------------------------------
# bounds for non-ordinary bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    word: Word
    phi: int
    l1: int
    l2: int
    l3: int
    lower: int
    upper: int
    index: int = None
    nu_lower: int = None
    nu_upper: int = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise AscohError("lower bound exceeds upper bound")


def bounds(rd: RamificationData, w: Word) -> BoundsReport:
    """L(X, pi, w) <= dim w(L) <= U(X, pi, w) for a simple word of the
    form w = V^r perp w' (leading V-block, at least one perp).  Also
    carries the final-type interval at the index this word governs."""
    r, t, wp = _split_word(w)
    lx = rd.l_x
    phi_w = phi_total(rd, w)
    sharp = sum(d + 1 for d in rd.breaks) > 4 * rd.g_x - 4

    if rd.tango is not None and (
        sum(((d + 1) // 2) >> r for d in rd.breaks) >= rd.tango
    ):
        l1 = lx
    else:
        l1 = lx - rd.a(r)
    l2 = phi_w - (t * lx if sharp else (3 * t // 2) * lx)
    if r == 1 and sum((phi(d, wp) + 1) // 2 for d in rd.breaks) >= rd.g_x:
        l3 = lx
    else:
        l3 = lx - rd.a(r)
    lower = max(0, l1 + l2 + l3)
    upper = phi_w + ((t + 2) * lx if sharp else ((3 * t + 4 + 1) // 2) * lx)
    upper = min(upper, 2 * rd.l_y)
    idx, nu_lo, nu_hi = final_type_bounds(rd, w)
    return BoundsReport(w, phi_w, l1, l2, l3, lower, upper,
                        index=idx, nu_lower=nu_lo, nu_upper=nu_hi)


def final_type_bounds(rd: RamificationData, w: Word):
    """Interval for the final-type entry at l = f_y + phi(w) + 2 l_x.

    Returns (l, lo, hi) with the word-derived interval intersected with the
    structural constraints 0 <= nu_l <= l and nu_l >= f_y for l > f_y.
    """
    if w.leading_perp or w.num_perps < 1:
        raise AscohError("word must be V^{n_s} perp ... perp V^{n_1}")
    s = len(w.exponents)
    lx = rd.l_x
    sharp = sum(d + 1 for d in rd.breaks) > 4 * rd.g_x - 4
    l = rd.f_y + phi_total(rd, w) + 2 * lx
    center = rd.f_y + phi_total(rd, v_word(w)) + lx
    radius = (s + 1) * lx if sharp else ((3 * s + 2 + 1) // 2) * lx
    lo, hi = center - radius, center + radius
    lo = max(lo, 0, rd.f_y if l > rd.f_y else 0)
    hi = min(hi, l)
    return l, lo, hi


def one_point_bounds(rd: RamificationData, l: int):
    """Final-type interval (lo, hi) for index l of a one-point cover."""
    if rd.m != 1:
        raise AscohError("requires a single branch point")
    if not 1 <= l <= rd.g_y:
        raise AscohError(f"index {l} out of range 1..{rd.g_y}")
    d = rd.breaks[0]
    fy, lx = rd.f_y, rd.l_x
    if l <= fy:
        return l, l
    if l < fy + 2 * lx:
        return fy, l - 1
    center = fy + (l - fy) // 2
    log = _ceil_log2(d - 1)
    # radius 3*log/2 * lx in the small-d branch may be a half-integer
    if d <= 4 * rd.g_x - 5:
        twice = 3 * log * lx
    else:
        twice = 2 * log * lx
    lo = -((twice - 2 * center + 1) // 2)  # ceil(center - twice/2)
    hi = (2 * center + twice) // 2
    lo = max(lo, 0, fy if l > fy else 0)
    hi = min(hi, l)
    return lo, hi


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def word_for_target(d: int, m: int, max_perps: int = None) -> Word:
    """A simple word w with phi(d, w) = m, found by breadth-first search
    over the number of perps; minimal-perp witness.  Every target in
    [0, (d-1)/2] has one within ceil(log2((d-1)/2)) perps."""
    if d < 3 or d % 2 == 0:
        raise AscohError("d must be odd and >= 3")
    if not 0 <= m <= (d - 1) // 2:
        raise AscohError(f"target {m} out of range 0..{(d - 1) // 2}")
    if max_perps is None:
        max_perps = _ceil_log2(max((d - 1) // 2, 1)) + 1
    nmax = (d - 1).bit_length() + 1
    frontier = {}
    for n in range(1, nmax + 1):
        val = (d - 1) >> n
        if val not in frontier:
            frontier[val] = (n,)
    seen = dict(frontier)
    for _ in range(max_perps + 1):
        if m in seen:
            return Word(seen[m])
        nxt = {}
        for val, exps in frontier.items():
            for n in range(1, nmax + 1):
                new = (d - 1 - val) >> n
                if new not in seen and new not in nxt:
                    nxt[new] = exps + (n,)
        seen.update(nxt)
        frontier = nxt
        if not frontier:
            break
    if m in seen:
        return Word(seen[m])
    raise AscohError(f"no witness word for phi({d}, w) = {m}")
