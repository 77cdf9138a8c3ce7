"""Curve configuration files and the expression language used in them.

A curve config is a small line-oriented text file:

    # comment
    name: d7-tower
    field: auto            # or "3" (GF(2^3)) or "3:0xb" (explicit modulus)
    level: x^3             # z1^2 + z1 = x^3
    level: x^2 * z1        # z2^2 + z2 = x^2 z1
    bad: 0, 1              # optional extra x-values to treat as bad

Expressions are rational in x and linear-ish in the tower generators
z1, z2, ... (y and z are aliases for z1).  +, *, /, ^ and parentheses are
supported; integer literals denote field elements in the bit-packed
encoding.  Products may join generators from distinct levels but never
repeat a generator (use the defining relation instead).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field as dc_field

from .errors import ConfigError
from .gf2m import GF2m
from .polys import RationalFunction
from .tower import FunctionElement, TowerCurve


@dataclass
class CurveConfig:
    field_spec: str = "auto"
    levels: list = dc_field(default_factory=list)
    extra_bad: tuple = ()
    name: str = ""

    @property
    def auto_field(self) -> bool:
        return self.field_spec.strip().lower() == "auto"


def parse_field_spec(spec: str) -> GF2m:
    """'3' -> GF(2^3) with the canonical modulus; '3:0xb' picks one."""
    spec = spec.strip()
    try:
        if ":" in spec:
            ms, mod = spec.split(":", 1)
            return GF2m(int(ms), int(mod, 0))
        return GF2m(int(spec))
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"bad field spec {spec!r}: {exc}") from exc
    except Exception as exc:  # field-construction errors
        raise ConfigError(f"bad field spec {spec!r}: {exc}") from exc


def parse_curve_config(text: str) -> CurveConfig:
    cfg = CurveConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {lineno}: expected 'key: value'")
        key, val = (s.strip() for s in line.split(":", 1))
        if key == "field":
            cfg.field_spec = val
        elif key == "level":
            cfg.levels.append(val)
        elif key == "bad":
            try:
                cfg.extra_bad = tuple(
                    int(v, 0) for v in val.split(",") if v.strip()
                )
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad 'bad' list") from exc
        elif key == "name":
            cfg.name = val
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if not cfg.levels:
        raise ConfigError("config defines no levels")
    return cfg


def resolve_field(cfg: CurveConfig, override: str = None, m: int = None) -> GF2m:
    if m is not None:
        return GF2m(m)
    spec = override if override is not None else cfg.field_spec
    if spec.strip().lower() == "auto":
        return GF2m(1)
    return parse_field_spec(spec)


def build_curve(cfg: CurveConfig, fld: GF2m) -> TowerCurve:
    levels = []
    for i, expr in enumerate(cfg.levels):
        psi = parse_expression(fld, expr, max_level=i)
        levels.append(psi)
    return TowerCurve(fld, levels, extra_bad=cfg.extra_bad, name=cfg.name)


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------


def _fe_mul(a: FunctionElement, b: FunctionElement) -> FunctionElement:
    out = {}
    for s, ra in a.coeffs.items():
        for t, rb in b.coeffs.items():
            if s & t:
                raise ConfigError(
                    "nonlinear product of tower generators in expression; "
                    "rewrite using the defining relations"
                )
            key = s | t
            r = ra * rb
            out[key] = out[key] + r if key in out else r
    return FunctionElement(a.field, out)


def _only_rational(v: FunctionElement) -> RationalFunction:
    bad = [k for k in v.coeffs if k]
    if bad:
        raise ConfigError("division by tower generators is not supported")
    return v.coeffs.get(frozenset(), RationalFunction(v.field, ()))


def _fe_pow(v: FunctionElement, n: int) -> FunctionElement:
    if n < 0:
        return _fe_pow(
            FunctionElement.from_rational(v.field, _only_rational(v).inverse()),
            -n,
        )
    out = FunctionElement.const(v.field, 1)
    for _ in range(n):
        out = _fe_mul(out, v)
    return out


def parse_expression(fld: GF2m, text: str, max_level: int = None) -> FunctionElement:
    """Evaluate an expression in x and z1..zk to a FunctionElement."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from exc

    def name(n: str) -> FunctionElement:
        if n == "x":
            return FunctionElement.x(fld)
        if n in ("y", "z"):
            n = "z1"
        if n.startswith("z") and n[1:].isdigit():
            i = int(n[1:])
            if i < 1 or (max_level is not None and i > max_level):
                raise ConfigError(f"generator {n} not available here")
            return FunctionElement.gen(fld, i)
        raise ConfigError(f"unknown name {n!r} in expression")

    def ev(node) -> FunctionElement:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, int):
                raise ConfigError("only integer literals are allowed")
            if not 0 <= node.value < fld.order:
                raise ConfigError(
                    f"literal {node.value} outside field of order {fld.order}"
                )
            return FunctionElement.const(fld, node.value)
        if isinstance(node, ast.Name):
            return name(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return ev(node.operand)  # characteristic 2
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (
                    isinstance(node.right, ast.Constant)
                    and isinstance(node.right.value, int)
                ):
                    raise ConfigError("exponent must be an integer literal")
                return _fe_pow(ev(node.left), node.right.value)
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, (ast.Add, ast.Sub)):
                return a + b
            if isinstance(node.op, ast.Mult):
                return _fe_mul(a, b)
            if isinstance(node.op, ast.Div):
                return a.scale_rational(_only_rational(b).inverse())
        raise ConfigError(f"unsupported syntax in expression {text!r}")

    return ev(tree)
