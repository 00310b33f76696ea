"""
Tests for field expressions, normalization and evaluation
"""

import cmath

import pytest

from utils.cpoly import CPoly
from utils.error_handler import (DegenerateField, ExprSyntaxError, HoloError, NotRecognizedForm,
                                 PoleEvaluation, UnsupportedKind)
from utils.fieldspec import (Field, FieldKind, eval_field, field_from_json, field_to_json,
                             parse_field, print_field, to_planar, tokenize)


class TestParsing:
    """Test the expression grammar and kind detection"""

    def test_polynomial(self):
        """Test an expanded polynomial"""
        fld = parse_field("z^2 - 1")
        assert fld.kind is FieldKind.POLYNOMIAL
        assert fld.poly == CPoly([-1, 0, 1])

    def test_juxtaposition_multiplies(self):
        """Test implicit products of factors"""
        assert parse_field("(z-1)(z+1)") == parse_field("z**2 - 1")
        assert parse_field("2z").poly == CPoly([0, 2])

    def test_imaginary_literals(self):
        """Test 2i, i and rational imaginary literals"""
        assert parse_field("2i*z").poly == CPoly([0, 2j])
        assert parse_field("i z").poly == CPoly([0, 1j])
        assert parse_field("z - 1/4i").poly == CPoly([-0.25j, 1])

    def test_inverse(self):
        """Test 1/p is recognized as an inverse field"""
        fld = parse_field("1/(z*(z-1))")
        assert fld.kind is FieldKind.INVERSE
        assert fld.poly == CPoly([0, -1, 1])

    def test_inverse_constant_numerator(self):
        """Test that c/p is normalized to 1/(p/c)"""
        fld = parse_field("2/z^2")
        assert fld.kind is FieldKind.INVERSE
        assert fld.poly == CPoly([0, 0, 0.5])

    def test_conjugate(self):
        """Test conj(p)"""
        fld = parse_field("conj(z^2 + 1)")
        assert fld.kind is FieldKind.CONJUGATE
        assert fld.poly == CPoly([1, 0, 1])

    def test_moebius_from_quotient(self):
        """Test a linear quotient becomes a Moebius field"""
        fld = parse_field("(2z+1)/(z-3)")
        assert fld.kind is FieldKind.MOEBIUS
        assert fld.moebius_params == (2, 1, 1, -3)

    def test_moebius_call(self):
        """Test the explicit moebius(A;B;C;D) form"""
        fld = parse_field("moebius(1i;0;2;-1)")
        assert fld.moebius_params == (1j, 0, 2, -1)
        assert fld.poles == [(0.5, 1)]

    def test_essential(self):
        """Test the essential demo fields"""
        fld = parse_field("essential(1;2)")
        assert fld.kind is FieldKind.ESSENTIAL
        assert fld.demo_params == (1, 2)
        with pytest.raises(NotRecognizedForm):
            parse_field("essential(2;2)")

    def test_unsupported_rational(self):
        """Test rational fields outside the five kinds"""
        with pytest.raises(NotRecognizedForm):
            parse_field("z^2/(z+1)")
        with pytest.raises(NotRecognizedForm):
            parse_field("conj(z)*z")

    def test_degree_cap(self):
        """Test that huge degrees are refused"""
        with pytest.raises(NotRecognizedForm):
            parse_field("z^17")

    def test_degenerate(self):
        """Test constant, zero and singular Moebius fields"""
        for text in ("5", "z - z", "moebius(1;0;2;0)"):
            with pytest.raises(DegenerateField):
                parse_field(text)


class TestSyntaxErrors:
    """Test error positions for malformed input"""

    def test_unexpected_operator(self):
        """Test that the caret points at the stray operator"""
        with pytest.raises(ExprSyntaxError) as info:
            parse_field("z +* 2")
        assert info.value.position == 3
        assert info.value.caret().splitlines()[1] == "   ^"

    def test_bad_character(self):
        """Test an unknown character"""
        with pytest.raises(ExprSyntaxError) as info:
            tokenize("z $ 2")
        assert info.value.position == 2

    def test_negative_exponent(self):
        """Test exponents must be non-negative integers"""
        with pytest.raises(ExprSyntaxError) as info:
            parse_field("z^-1")
        assert info.value.position == 2
        assert info.value.expected == "a non-negative integer"

    def test_unbalanced(self):
        """Test a missing closing parenthesis"""
        with pytest.raises(ExprSyntaxError):
            parse_field("(z-1")

    def test_empty(self):
        """Test empty input"""
        with pytest.raises(ExprSyntaxError):
            parse_field("   ")


class TestPrinting:
    """Test canonical printing"""

    def test_print_parse_identity(self):
        """Test parse(print(f)) == f for every kind"""
        fields = [
            Field.polynomial([0.1 - 0.2j, 0, 3]),
            Field.inverse([1j, -2, 0.5]),
            Field.conjugate([0, 1, 1 + 1j]),
            Field.moebius(1 + 1j, -0.5, 2, 1j),
            Field.essential(3, 4),
        ]
        for fld in fields:
            assert parse_field(print_field(fld)) == fld

    def test_json(self):
        """Test the JSON form keeps the field"""
        fld = Field.moebius(1, 2j, 0, 1)
        assert field_from_json(field_to_json(fld)) == fld


class TestEvaluation:
    """Test evaluation and the planar expansion"""

    def test_eval_kinds(self):
        """Test values of each kind at one point"""
        z = 0.7 + 0.2j
        assert eval_field(parse_field("z^2+1"), z) == pytest.approx(z ** 2 + 1)
        assert eval_field(parse_field("1/(z-1)"), z) == pytest.approx(1 / (z - 1))
        assert eval_field(parse_field("conj(z^2)"), z) == pytest.approx((z ** 2).conjugate())
        assert eval_field(parse_field("(z+1)/(z-2)"), z) == pytest.approx((z + 1) / (z - 2))
        assert eval_field(parse_field("essential(1;2)"), z) == pytest.approx(z ** 2 * cmath.exp(1 / z))

    def test_pole_evaluation(self):
        """Test that evaluating at a pole raises"""
        with pytest.raises(PoleEvaluation) as info:
            eval_field(parse_field("1/(z-1)"), 1.0)
        assert info.value.pole == 1
        with pytest.raises(PoleEvaluation):
            eval_field(parse_field("essential(1;2)"), 0j)

    def test_essential_overflow(self):
        """Test values too large for a float near the essential singularity"""
        fld = parse_field("essential(1;2)")
        with pytest.raises(PoleEvaluation) as info:
            eval_field(fld, 0.001)
        assert info.value.pole == 0
        with pytest.raises(HoloError):
            eval_field(parse_field("essential(2;3)"), 0.01)
        assert eval_field(fld, -0.001) == pytest.approx(0)

    def test_scaled(self):
        """Test c·f for the rational kinds"""
        c = 2 - 1j
        z = -0.3 + 1.1j
        for text in ("z^3-z", "1/(z^2+1)", "conj(z-1i)", "(z+1)/(2z-1)"):
            fld = parse_field(text)
            assert eval_field(fld.scaled(c), z) == pytest.approx(c * eval_field(fld, z))
        with pytest.raises(UnsupportedKind):
            Field.essential(1, 2).scaled(2)

    def test_planar_expansion(self):
        """Test u + iv against the complex field"""
        for text in ("(1-2i)z^3 + z - 1i", "conj((2+1i)z^2 - 3)"):
            fld = parse_field(text)
            planar = to_planar(fld)
            for z in (0.3 - 0.4j, -1.2 + 0.5j):
                u, v = planar(z.real, z.imag)
                assert complex(u, v) == pytest.approx(eval_field(fld, z))

    def test_divergence_of_holomorphic_field(self):
        """Test div(u, v) = 2 Re f'"""
        fld = parse_field("z^2 + (1+1i)z")
        div = to_planar(fld).divergence()
        z = 0.5 + 0.25j
        assert div(z.real, z.imag) == pytest.approx(2 * (2 * z + 1 + 1j).real)
