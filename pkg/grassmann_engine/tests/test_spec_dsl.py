"""Tests for the .gsl script lexer, parser and elaborator."""

import logging
import os

import pytest

from grassmann_engine.catalog import SCRIPTS_DIR
from grassmann_engine.errors import (
    DslBindingError,
    DslElaborationError,
    DslError,
    DslLexError,
    DslSyntaxError,
)
from grassmann_engine.exact_algebra import ONE, Z, ZB, ZERO, RationalFunction, gaussian
from grassmann_engine.harmonic_sequences import bundle_from_sections, pad_end, pad_front, veronese
from grassmann_engine.spec_dsl import (
    MAX_NESTING,
    BinOp,
    Num,
    Pow,
    Ref,
    Var,
    VectorLiteral,
    Veronese,
    elaborate,
    load_spec,
    parse,
    parse_gaussian,
    tokenize,
)

logger = logging.getLogger(__name__)

ERRORS_DIR = os.path.join(SCRIPTS_DIR, "errors")


def _error_fixture(name: str) -> str:
    return os.path.join(ERRORS_DIR, name)


class TestTokenizer:
    def test_kinds_and_columns(self):
        tokens = tokenize("map phi = span(veronese(2,0))  # comment")
        kinds = [t.kind for t in tokens]
        assert kinds[:4] == ["IDENT", "IDENT", "OP", "IDENT"]
        assert kinds[-1] == "EOF"
        assert tokens[1].span.column == 5
        assert tokens[1].span.end_column == 8

    def test_numbers(self):
        tokens = tokenize("3/4i 2 i 5/7 @weights")
        assert [(t.kind, t.text) for t in tokens[:-1]] == [
            ("NUMBER", "3/4i"),
            ("NUMBER", "2 i"),
            ("NUMBER", "5/7"),
            ("WEIGHTS", "@weights"),
        ]

    def test_lines_are_counted(self):
        tokens = tokenize("# header\nlet a = veronese(1,0)\n")
        assert tokens[0].text == "let"
        assert tokens[0].span.line == 2

    def test_unexpected_character(self):
        with pytest.raises(DslLexError) as info:
            tokenize("let a = $")
        assert (info.value.line, info.value.column) == (1, 9)


class TestParser:
    """Grammar coverage of section and polynomial expressions."""

    def test_let_bindings(self):
        ast = parse("let hat = pad_front(veronese(1,0),2)\nlet low = pad_end(veronese(1,0),2)\nmap phi = span(hat, low)\n")
        assert [s.name for s in ast.lets] == ["hat", "low"]
        assert ast.map.name == "phi"
        assert all(isinstance(s, Ref) for s in ast.map.sections)
        assert ast.map.index == 2

    def test_vector_literal_and_precedence(self):
        ast = parse("map phi = span([1, z+2*zb, -z^2/3] @weights [1, 2, 1/2])")
        literal = ast.map.sections[0]
        assert isinstance(literal, VectorLiteral)
        assert literal.weights == (gaussian(1), gaussian(2), gaussian("1/2"))
        second = literal.components[1]
        assert isinstance(second, BinOp) and second.op == "+"
        assert isinstance(second.right, BinOp) and second.right.op == "*"
        third = literal.components[2]
        assert third.operand.op == "/"
        assert isinstance(third.operand.left, Pow)
        assert isinstance(third.operand.right, Num)

    def test_veronese_node(self):
        node = parse("map phi = span(veronese(3,1))").map.sections[0]
        assert node == Veronese(3, 1, node.span)
        assert node.span.column == 16

    def test_scalar_names(self):
        literal = parse("map phi = span([theta, i])").map.sections[0]
        assert [c.name for c in literal.components] == ["theta", "i"]
        assert all(isinstance(c, Var) for c in literal.components)

    def test_map_must_be_last(self):
        with pytest.raises(DslSyntaxError) as info:
            parse("map phi = span(veronese(1,0))\nlet a = veronese(1,1)\n")
        assert info.value.line == 2

    def test_reserved_word_cannot_be_bound(self):
        with pytest.raises(DslSyntaxError):
            parse("let z = veronese(1,0)\nmap phi = span(z)")

    def test_map_name_is_not_visible_in_its_sections(self):
        with pytest.raises(DslBindingError):
            parse("map phi = span(phi)")

    def test_unknown_scalar(self):
        with pytest.raises(DslBindingError) as info:
            parse("map phi = span([1, w])")
        assert info.value.column == 20

    def test_zero_denominator(self):
        with pytest.raises(DslSyntaxError):
            parse("map phi = span([1/0, z])")

    def test_nesting_limit(self):
        depth = MAX_NESTING
        parse("map phi = span([" + "(" * depth + "z" + ")" * depth + ", 1])")
        with pytest.raises(DslSyntaxError, match="nested deeper"):
            parse("map phi = span([" + "(" * (depth + 1) + "z" + ")" * (depth + 1) + ", 1])")
        with pytest.raises(DslSyntaxError, match="nested deeper"):
            parse("map phi = span([1, " + "-" * 500 + "z])")
        with pytest.raises(DslSyntaxError, match="nested deeper"):
            parse("map phi = span(" + "pad_end(" * 500 + "veronese(1,0)" + ",1)" * 500 + ")")

    def test_long_sums_do_not_nest(self):
        spec = elaborate(parse("map phi = span([1, " + " + ".join(["z"] * 3000) + "])"))
        assert spec.sections[0].components[1] == Z * RationalFunction(3000)


class TestParseGaussian:
    def test_values(self):
        assert parse_gaussian("3/5+4/5i") == gaussian("3/5", "4/5")
        assert parse_gaussian("-3/7i") == gaussian(0, "-3/7")
        assert parse_gaussian("1/2") == gaussian("1/2")

    def test_rejects_non_constants(self):
        with pytest.raises(DslSyntaxError):
            parse_gaussian("z")
        with pytest.raises(DslSyntaxError):
            parse_gaussian("1/0")
        with pytest.raises(DslSyntaxError):
            parse_gaussian("1 2")


class TestElaboration:
    """Scripts elaborate to the same bundles as the direct constructors."""

    def test_padded_lines(self):
        spec = elaborate(parse("let hat = pad_front(veronese(1,0),2)\nlet low = pad_end(veronese(1,0),2)\nmap phi = span(hat, low)"))
        expected = bundle_from_sections([pad_front(veronese(1, 0), 2), pad_end(veronese(1, 0), 2)])
        assert spec.bundle.same_subbundle(expected)
        assert spec.name == "phi"
        assert spec.space.dim == 4

    def test_polynomial_components(self):
        spec = elaborate(parse("map phi = span([1, z^2/3])"))
        assert spec.sections[0].components == (ONE, Z * Z / RationalFunction(3))

    def test_theta_substitution(self):
        text = "map phi = span(concat(veronese(1,0), const(w=3, value=theta)))"
        spec = elaborate(parse(text), gaussian("3/5", "4/5"))
        assert spec.space.describe() == ["1", "1", "3"]
        assert spec.sections[0].components[2] == RationalFunction(gaussian("3/5", "4/5"))

    def test_declared_weighted_space(self):
        spec = elaborate(parse("space 3 @weights [1, 2, 1]\nmap phi = span(veronese(2,0), veronese(2,1))"))
        assert spec.space.describe() == ["1", "2", "1"]

    def test_veronese_index_out_of_range(self):
        with pytest.raises(DslElaborationError) as info:
            elaborate(parse("map phi = span(veronese(2,3))"))
        assert info.value.column == 16

    def test_const_weight_must_be_positive(self):
        with pytest.raises(DslElaborationError):
            elaborate(parse("map phi = span(concat(veronese(1,0), const(w=-1, value=1)))"))

    def test_const_value_must_be_constant(self):
        with pytest.raises(DslElaborationError):
            elaborate(parse("map phi = span(concat(veronese(1,0), const(w=1, value=z)))"))

    def test_division_by_zero(self):
        with pytest.raises(DslElaborationError):
            elaborate(parse("map phi = span([1, z/(z-z)])"))

    def test_zero_power(self):
        spec = elaborate(parse("map phi = span([1, z^0 + z], [0, 1])"))
        assert spec.sections[0].components[1] == ONE + Z
        with pytest.raises(DslElaborationError, match="zero to the power zero") as info:
            elaborate(parse("map phi = span([1, (z-z)^0 + z], [0, 1])"))
        assert info.value.line == 1

    def test_non_harmonic_script(self):
        spec = load_spec(os.path.join(SCRIPTS_DIR, "non_harmonic.gsl"))
        assert spec.bundle.rank == 2
        assert spec.sections[0].components[2] == ZERO
        assert spec.sections[0].components[1] == Z + ZB


class TestErrorFixtures:
    """Each malformed script fails with its error class and position."""

    @pytest.mark.parametrize(
        "name,error,line,column",
        [
            ("lex_error.gsl", DslLexError, 1, 30),
            ("syntax_error.gsl", DslSyntaxError, 1, 16),
            ("duplicate_binding.gsl", DslBindingError, 2, 5),
            ("undefined_identifier.gsl", DslBindingError, 1, 31),
            ("deep_nesting.gsl", DslSyntaxError, 1, 117),
        ],
    )
    def test_front_end_errors(self, name, error, line, column):
        with pytest.raises(error) as info:
            load_spec(_error_fixture(name))
        assert (info.value.line, info.value.column) == (line, column)
        logger.info("%s -> %s", name, info.value)

    def test_syntax_error_mentions_end_of_input(self):
        with pytest.raises(DslSyntaxError, match="end of input"):
            load_spec(_error_fixture("syntax_error.gsl"))

    @pytest.mark.parametrize(
        "name,fragment",
        [
            ("dependent_sections.gsl", "dependent sections"),
            ("weight_conflict.gsl", "weight conflict"),
            ("zero_section.gsl", "zero section"),
            ("dimension_mismatch.gsl", "dimension"),
            ("zero_power_zero.gsl", "zero to the power zero"),
        ],
    )
    def test_elaboration_errors(self, name, fragment):
        with pytest.raises(DslElaborationError, match=fragment) as info:
            load_spec(_error_fixture(name))
        assert isinstance(info.value, DslError)

    def test_dimension_mismatch_points_at_section(self):
        with pytest.raises(DslElaborationError) as info:
            load_spec(_error_fixture("dimension_mismatch.gsl"))
        assert (info.value.line, info.value.column) == (2, 16)
