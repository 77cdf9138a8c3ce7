import pytest

from ascoh.config import (
    build_curve,
    parse_curve_config,
    parse_expression,
    parse_field_spec,
    resolve_field,
)
from ascoh.errors import ConfigError
from ascoh.gf2m import GF2m
from ascoh.polys import RationalFunction
from ascoh.tower import FunctionElement

GF2 = GF2m(1)
GF4 = GF2m(2)


class TestFieldSpec:
    def test_degree_only(self):
        fld = parse_field_spec("3")
        assert fld.m == 3

    def test_explicit_modulus(self):
        fld = parse_field_spec("3:0xb")
        assert fld.m == 3 and fld.modulus == 0xB

    def test_rejects_reducible(self):
        with pytest.raises(ConfigError):
            parse_field_spec("3:0x9")  # x^3 + 1 = (x+1)(x^2+x+1)

    def test_rejects_garbage(self):
        with pytest.raises(ConfigError):
            parse_field_spec("three")


class TestExpressions:
    def test_polynomial(self):
        f = parse_expression(GF2, "x^3 + x")
        assert f == FunctionElement(
            GF2, {frozenset(): RationalFunction(GF2, (0, 1, 0, 1))}
        )

    def test_generator_aliases(self):
        for src in ("y", "z", "z1"):
            assert parse_expression(GF2, src, max_level=1) == FunctionElement.gen(
                GF2, 1
            )

    def test_rational(self):
        f = parse_expression(GF2, "1/(x+1)")
        assert f == FunctionElement(
            GF2, {frozenset(): RationalFunction(GF2, (1,), (1, 1))}
        )

    def test_mixed_cover_equation(self):
        f = parse_expression(GF2, "(x^2*z1 + x^4 + 1)/(x+1)^7", max_level=1)
        num = RationalFunction(GF2, (0, 0, 1))
        den = RationalFunction(GF2, (1, 1))
        d7 = RationalFunction.const(GF2, 1)
        for _ in range(7):
            d7 = d7 * den
        assert f.coeffs[frozenset({1})] == num * d7.inverse()
        assert f.coeffs[frozenset()] == RationalFunction(
            GF2, (1, 0, 0, 0, 1)
        ) * d7.inverse()

    def test_field_literals(self):
        f = parse_expression(GF4, "2*x")
        assert f == FunctionElement(
            GF4, {frozenset(): RationalFunction(GF4, (0, 2))}
        )

    def test_rejects_literal_outside_field(self):
        with pytest.raises(ConfigError):
            parse_expression(GF2, "2*x")

    def test_rejects_generator_square(self):
        with pytest.raises(ConfigError):
            parse_expression(GF2, "z1*z1", max_level=1)

    def test_rejects_future_generator(self):
        with pytest.raises(ConfigError):
            parse_expression(GF2, "z2", max_level=1)

    def test_rejects_unknown_name(self):
        with pytest.raises(ConfigError):
            parse_expression(GF2, "q + x")

    def test_rejects_division_by_generator(self):
        with pytest.raises(ConfigError):
            parse_expression(GF2, "x/z1", max_level=1)


class TestCurveConfig:
    def test_roundtrip(self):
        cfg = parse_curve_config(
            "# comment\nname: demo\nfield: 1\nlevel: x^3\nlevel: x^2*z1\n"
        )
        assert cfg.name == "demo"
        assert len(cfg.levels) == 2
        curve = build_curve(cfg, resolve_field(cfg))
        assert curve.depth == 2
        assert curve.genus == 5

    def test_bad_values(self):
        cfg = parse_curve_config("level: x^3\nbad: 0, 1\n")
        assert cfg.extra_bad == (0, 1)

    def test_rejects_missing_levels(self):
        with pytest.raises(ConfigError):
            parse_curve_config("field: 1\n")

    def test_rejects_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_curve_config("wibble: 3\nlevel: x^3\n")

    def test_field_override(self):
        cfg = parse_curve_config("field: 1\nlevel: x^3\n")
        assert resolve_field(cfg, override="2").m == 2
        assert resolve_field(cfg, m=3).m == 3
        assert resolve_field(cfg).m == 1
