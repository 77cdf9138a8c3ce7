"""Shared handlers behind the CLI and the HTTP service.

Every handler takes plain values and returns JSON-serializable dicts; the
CLI renders them as text, the service as response bodies.  All randomness
is seeded explicitly so that identical inputs give identical outputs.
"""

from __future__ import annotations

import random

from . import config as cfgmod
from .derham import build_space
from .dieudonne import (
    Word,
    final_type,
    fitting,
    format_final_type,
    format_kv_decomposition,
    module_v_data,
)
from .eotheory import (
    RamificationData,
    admissible_mu,
    bounds,
    codim_stratum_ss,
    final_type_bounds,
    mu_from_tail,
    one_point_bounds,
    phi,
    predict_2n1,
    predict_ordinary,
    predict_vtype_ss,
    word_for_target,
)
from .errors import AscohError, ConfigError, FieldTooSmall
from .gf2m import GF2m
from .polys import RationalFunction
from .tower import INF, FunctionElement, TowerCurve

MAX_AUTO_M = 16


# ---------------------------------------------------------------------------
# curve loading
# ---------------------------------------------------------------------------


def load_curve(config_text: str, field: str = None, m: int = None):
    """Parse a config and build the curve, growing an 'auto' field until
    all branch places are rational."""
    cfg = cfgmod.parse_curve_config(config_text)
    spec = field if field is not None else cfg.field_spec
    auto = m is None and spec.strip().lower() == "auto"
    fld = cfgmod.resolve_field(cfg, override=field, m=m)
    while True:
        curve = cfgmod.build_curve(cfg, fld)
        try:
            curve.all_bad_places()
            return curve, cfg, fld
        except FieldTooSmall as exc:
            if not auto:
                raise
            nxt = exc.suggested_m or 2 * fld.m
            if nxt > MAX_AUTO_M:
                raise
            fld = GF2m(nxt)


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def normalize_vtype(c):
    out = list(c)
    while len(out) >= 2 and out[-1] == out[-2]:
        out.pop()
    return tuple(out)


def compute_report(curve: TowerCurve, name: str = "", n: int = None,
                   dump_module: bool = False) -> dict:
    space = build_space(curve, n=n)
    module = space.assemble()
    c, a, b = module_v_data(module, on="H0")
    report = {
        "name": name,
        "field": curve.field.spec_string(),
        "genus": curve.genus,
        "p_rank": curve.p_rank,
        "local_rank": curve.genus - curve.p_rank,
        "pole_bound": space.n,
        "breaks": [list(q.breaks) for q in space.branch_places()],
        "a_numbers": list(a),
        "v_type": list(normalize_vtype(c)),
        "kv_decomposition": format_kv_decomposition(b, p_rank=module.p_rank),
        "final_type": list(final_type(module)),
    }
    if dump_module:
        fld = curve.field
        report["module"] = {
            "F": [" ".join(fld.fmt(x) for x in row) for row in module.F.rows],
            "V": [" ".join(fld.fmt(x) for x in row) for row in module.V.rows],
            "gram": [" ".join(fld.fmt(x) for x in row) for row in module.gram],
        }
    return report


# ---------------------------------------------------------------------------
# ramification data extracted from a computed cover
# ---------------------------------------------------------------------------


def ramification_of(curve: TowerCurve, space) -> RamificationData:
    if curve.depth == 1:
        g_x = f_x = 0
        a_x = None
    else:
        sub = curve.sub_curve(curve.depth - 1)
        g_x, f_x = sub.genus, sub.p_rank
        if g_x == f_x:
            a_x = None
        else:
            base_mod = build_space(sub).assemble()
            _, a, _ = module_v_data(base_mod, on="H0")
            a_x = a[1:]
    breaks = tuple(q.breaks[-1] for q in space.branch_places())
    return RamificationData(g_x=g_x, f_x=f_x, breaks=breaks, a_x=a_x)


def word_dim_on_nilpotent(module, nil_part, w: Word) -> int:
    """dim w(L): the word acts on the nilpotent part, with complements
    taken inside it."""
    s = nil_part
    for idx, nexp in enumerate(w.exponents):
        for _ in range(nexp):
            s = module.v_image(s)
        if idx < len(w.exponents) - 1:
            s = module.perp(s).intersect(nil_part)
    if w.leading_perp:
        s = module.perp(s).intersect(nil_part)
    return s.dim


def words_up_to(max_perps: int, max_exp: int, min_perps: int = 0,
                leading_perp: bool = True):
    out = []
    for blocks in range(1, max_perps + 2):
        for lp in ((False, True) if leading_perp else (False,)):
            perps = blocks - 1 + (1 if lp else 0)
            if not min_perps <= perps <= max_perps:
                continue
            stack = [()]
            for _ in range(blocks):
                stack = [e + (n,) for e in stack for n in range(1, max_exp + 1)]
            out.extend(Word(e, leading_perp=lp) for e in stack)
    return out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _hypothesis(msg):
    return {"status": "hypothesis-violation", "reason": msg}


def verify(curve: TowerCurve, mode: str, n: int = None) -> dict:
    space = build_space(curve, n=n)
    module = space.assemble()
    nu = final_type(module)
    if mode == "ordinary":
        return _verify_ordinary(curve, space, nu)
    if mode == "2n1":
        return _verify_2n1(curve, space, nu)
    if mode == "ss-vtype":
        return _verify_ss_vtype(curve, space, module)
    if mode == "bounds":
        return verify_bounds(curve, space, module)
    raise ConfigError(f"unknown verify mode {mode!r}")


def _verify_ordinary(curve, space, nu):
    try:
        rd = ramification_of(curve, space)
        if rd.f_x != rd.g_x:
            return _hypothesis("base curve is not ordinary")
        _, predicted = predict_ordinary(rd)
    except AscohError as exc:
        return _hypothesis(str(exc))
    return {
        "status": "pass" if predicted == nu else "fail",
        "mode": "ordinary",
        "predicted": list(predicted),
        "computed": list(nu),
    }


def _base_is_ss_elliptic(curve):
    if curve.depth < 2:
        return None
    sub = curve.sub_curve(curve.depth - 1)
    if sub.genus != 1 or sub.p_rank != 0:
        return None
    return sub


def _verify_2n1(curve, space, nu):
    sub = _base_is_ss_elliptic(curve)
    branch = space.branch_places()
    if sub is None or len(branch) != 1:
        return _hypothesis(
            "needs a one-point cover of a supersingular genus-1 base"
        )
    d = branch[0].breaks[-1]
    try:
        predicted = predict_2n1(d)
    except AscohError as exc:
        return _hypothesis(str(exc))
    return {
        "status": "pass" if predicted == nu else "fail",
        "mode": "2n1",
        "d": d,
        "predicted": list(predicted),
        "computed": list(nu),
    }


def _verify_ss_vtype(curve, space, module):
    sub = _base_is_ss_elliptic(curve)
    branch = space.branch_places()
    if sub is None or len(branch) != 1:
        return _hypothesis(
            "needs a one-point cover of a supersingular genus-1 base"
        )
    d = branch[0].breaks[-1]
    psi = curve.levels[-1]
    try:
        mu, _ = mu_from_tail(sub, psi, branch[0].parent)
        predicted = predict_vtype_ss(d, mu)
    except AscohError as exc:
        return _hypothesis(str(exc))
    c, _, _ = module_v_data(module, on="H0")
    measured = normalize_vtype(c)
    return {
        "status": "pass" if predicted == measured else "fail",
        "mode": "ss-vtype",
        "d": d,
        "mu": mu,
        "predicted": list(predicted),
        "computed": list(measured),
    }


def verify_bounds(curve, space, module, max_perps: int = 3,
                  max_exp: int = 4) -> dict:
    rd = ramification_of(curve, space)
    nil = fitting(module)[2]
    nu = final_type(module)
    failures = []
    checked = 0
    for w in words_up_to(max_perps, max_exp, min_perps=1, leading_perp=False):
        rep = bounds(rd, w)
        dim = word_dim_on_nilpotent(module, nil, w)
        checked += 1
        if not rep.lower <= dim <= rep.upper:
            failures.append(
                {"word": repr(w), "dim": dim,
                 "lower": rep.lower, "upper": rep.upper}
            )
        l, lo, hi = final_type_bounds(rd, w)
        if 1 <= l <= rd.g_y and not lo <= nu[l - 1] <= hi:
            failures.append(
                {"word": repr(w), "index": l, "entry": nu[l - 1],
                 "lower": lo, "upper": hi}
            )
    if rd.m == 1:
        for l in range(1, rd.g_y + 1):
            lo, hi = one_point_bounds(rd, l)
            checked += 1
            if not lo <= nu[l - 1] <= hi:
                failures.append(
                    {"index": l, "entry": nu[l - 1], "lower": lo, "upper": hi}
                )
    return {
        "status": "pass" if not failures else "fail",
        "mode": "bounds",
        "checked": checked,
        "failures": failures,
    }


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------


def predict(mode: str, d: int = None, g_x: int = 0, f_x: int = 0,
            breaks=None, a_x=None, mu: int = None,
            max_perps: int = 2, max_exp: int = 3) -> dict:
    if mode == "ordinary":
        rd = RamificationData(g_x=g_x, f_x=f_x, breaks=tuple(breaks or ()))
        _, nu = predict_ordinary(rd)
        return {
            "mode": mode,
            "f_y": rd.f_y,
            "g_y": rd.g_y,
            "final_type": list(nu),
        }
    if mode == "2n1":
        return {"mode": mode, "d": d, "final_type": list(predict_2n1(d))}
    if mode == "ss-vtype":
        mus = sorted(admissible_mu(d)) if mu is None else [mu]
        return {
            "mode": mode,
            "d": d,
            "strata": [
                {
                    "mu": m_,
                    "v_type": list(predict_vtype_ss(d, m_)),
                    "codim": codim_stratum_ss(d, m_),
                }
                for m_ in mus
            ],
        }
    if mode == "bounds":
        rd = RamificationData(
            g_x=g_x, f_x=f_x,
            breaks=tuple(breaks or ((d,) if d else ())),
            a_x=tuple(a_x) if a_x else None,
        )
        rows = []
        for w in words_up_to(max_perps, max_exp, min_perps=1,
                             leading_perp=False):
            rep = bounds(rd, w)
            rows.append(
                {
                    "d": list(rd.breaks),
                    "word": repr(w),
                    "phi": rep.phi,
                    "L": rep.lower,
                    "U": rep.upper,
                }
            )
        return {"mode": mode, "rows": rows}
    raise ConfigError(f"unknown predict mode {mode!r}")


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _search_monomials(base: TowerCurve, d: int):
    """Monomial of each free pole order at the totally ramified place over
    infinity of a genus-1 base with break 3: even order 2a is x^a, odd
    order 2a+3 is x^a z1.  Free orders: d (leading), odd ones in [3, d-2],
    and 2."""
    if base.depth != 1:
        raise ConfigError("search needs a depth-1 base curve")
    places = base.places_over(INF)
    if len(places) != 1 or places[0].breaks != [3]:
        raise ConfigError(
            "search needs a base totally ramified over infinity with break 3"
        )
    if d < 3 or d % 2 == 0:
        raise ConfigError("d must be odd and >= 3")

    def mono(order):
        if order % 2 == 0:
            a = order // 2
            return (
                f"x^{a}" if a > 1 else "x",
                FunctionElement(
                    base.field,
                    {frozenset(): RationalFunction(base.field, (0,) * a + (1,))},
                ),
            )
        a = (order - 3) // 2
        expr = f"x^{a}*z1" if a > 1 else ("x*z1" if a == 1 else "z1")
        return (
            expr,
            FunctionElement(
                base.field,
                {frozenset({1}): RationalFunction(base.field, (0,) * a + (1,))},
            ),
        )

    orders = [d] + [o for o in range(d - 2, 2, -2)] + [2]
    return places[0], {o: mono(o) for o in orders}


def sample_psi(base: TowerCurve, d: int, rng: random.Random):
    """One uniform draw from the reduced coefficient space: leading
    coefficient nonzero, one coefficient per odd pole order in [3, d-2],
    one at pole order 2."""
    _, monos = _search_monomials(base, d)
    fld = base.field
    coeffs = {}
    psi = FunctionElement.zero(fld)
    terms = []
    for order, (expr, fe) in monos.items():
        if order == d:
            c = 1 + rng.randrange(fld.order - 1)
        else:
            c = rng.randrange(fld.order)
        if not c:
            continue
        coeffs[order] = c
        psi = psi + fe.scale(c)
        terms.append(expr if c == 1 else f"{c}*{expr}")
    return psi, coeffs, " + ".join(terms)


def search(base: TowerCurve, d: int, count: int, seed: int) -> dict:
    rng = random.Random(seed)
    records = []
    freq = {}
    for index in range(count):
        psi, coeffs, expr = sample_psi(base, d, rng)
        cover = TowerCurve(base.field, list(base.levels) + [psi])
        space = build_space(cover)
        module = space.assemble()
        c, _, b = module_v_data(module, on="H0")
        nu = final_type(module)
        records.append(
            {
                "index": index,
                "coeffs": {str(k): base.field.fmt(v) for k, v in coeffs.items()},
                "psi": expr,
                "v_type": list(normalize_vtype(c)),
                "kv_decomposition": format_kv_decomposition(
                    b, p_rank=module.p_rank
                ),
                "final_type": list(nu),
            }
        )
        freq[nu] = freq.get(nu, 0) + 1
    table = [
        {"final_type": list(ft), "count": cnt}
        for ft, cnt in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return {
        "seed": seed,
        "d": d,
        "count": count,
        "field": base.field.spec_string(),
        "records": records,
        "frequencies": table,
    }


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _st_field_moduli():
    from .gf2m import _is_irreducible

    for m in range(1, 9):
        fld = GF2m(m)
        if not _is_irreducible(fld.modulus):
            raise AscohError(f"modulus for m={m} is not irreducible")
        rng = random.Random(m)
        for _ in range(8):
            a = fld.random_element(rng)
            if fld.ifrob(fld.frob(a)) != a:
                raise AscohError(f"frobenius not invertible in GF(2^{m})")
            if fld.trace(a) not in (0, 1):
                raise AscohError(f"trace outside prime field in GF(2^{m})")


def _st_series():
    from .laurent import LaurentSeries

    fld = GF2m(3)
    s = LaurentSeries(fld, -1, (1, 0, 1, 1, 0, 1, 1, 1), 12)
    if (s * s.inverse()).coeff(0) != 1:
        raise AscohError("series inverse failed")
    sq = s.square()
    if sq.sqrt().coeff(-1) != s.coeff(-1):
        raise AscohError("series square root failed")


def _elliptic(fld):
    return TowerCurve(
        fld, [FunctionElement(fld, {frozenset(): RationalFunction(fld, (0, 0, 0, 1))})]
    )


def _st_supersingular_cover():
    fld = GF2m(1)
    space = build_space(_elliptic(fld))
    module = space.assemble()
    if module.p_rank != 0 or final_type(module) != (0,):
        raise AscohError("genus-1 supersingular invariants wrong")
    b1 = space.class_of(space.build_omega_ij(1, 1))
    b2 = space.class_of(space.build_omega_ij(1, 2))
    if space.pairing(b1, b2) != 1 or space.pairing(b2, b2) != 0:
        raise AscohError("branch family pairing table wrong")


def _st_ordinary_cover():
    fld = GF2m(1)
    psi = FunctionElement(
        fld,
        {
            frozenset(): RationalFunction(fld, (1,), (0, 1))
            + RationalFunction(fld, (1,), (1, 1))
        },
    )
    curve = TowerCurve(fld, [psi])
    module = build_space(curve).assemble()
    if final_type(module) != (1,):
        raise AscohError("ordinary genus-1 final type wrong")


def _st_phi_witnesses():
    for d in (7, 15, 31):
        for m in range((d - 1) // 2 + 1):
            if phi(d, word_for_target(d, m)) != m:
                raise AscohError(f"phi witness failed for d={d}, m={m}")


def _st_two_level_tower():
    fld = GF2m(1)
    psi1 = FunctionElement(fld, {frozenset(): RationalFunction(fld, (0, 0, 0, 1))})
    psi2 = FunctionElement(fld, {frozenset({1}): RationalFunction(fld, (0, 0, 1))})
    curve = TowerCurve(fld, [psi1, psi2])
    space = build_space(curve)
    module = space.assemble()
    if module.genus != 5 or module.p_rank != 0:
        raise AscohError("two-level tower invariants wrong")
    report = verify_bounds(curve, space, module, max_perps=2, max_exp=3)
    if report["status"] != "pass":
        raise AscohError("bounds containment failed on the two-level tower")


def selftest(quick: bool = False) -> dict:
    checks = [
        ("field-modulus-table", _st_field_moduli),
        ("laurent-series-arithmetic", _st_series),
        ("supersingular-genus-1-cover", _st_supersingular_cover),
        ("ordinary-genus-1-cover", _st_ordinary_cover),
        ("phi-word-witnesses", _st_phi_witnesses),
    ]
    if not quick:
        checks.append(("two-level-tower-bounds", _st_two_level_tower))
    results = []
    ok = True
    for name, fn in checks:
        try:
            fn()
            results.append({"check": name, "status": "pass"})
        except Exception as exc:
            ok = False
            results.append({"check": name, "status": "fail", "error": str(exc)})
    return {"status": "pass" if ok else "fail", "checks": results}
