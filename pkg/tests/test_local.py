"""
Tests for finite equilibria, normal forms and return-map quantities
"""

import math

import numpy as np
import pytest

from utils.config import AnalysisConfig
from utils.error_handler import EssentialNotSupported, NotSimple, NoRotation, WrongDegree
from utils.fieldspec import parse_field
from utils.local import (EquilibriumKind, NormalFormCase, bendixson_line, classify_equilibria,
                         classify_simple, jacobian, lyapunov_constants, normal_form,
                         quadratic_closed_forms)


class TestClassifySimple:
    """Test the eigenvalue rules for simple equilibria"""

    def setup_method(self):
        """Setup test environment"""
        self.config = AnalysisConfig()

    def test_center(self):
        """Test a purely imaginary eigenvalue"""
        assert classify_simple(2j, self.config) == (EquilibriumKind.CENTER, False)

    def test_nodes(self):
        """Test real eigenvalues of both signs"""
        assert classify_simple(3, self.config)[0] is EquilibriumKind.NODE_REPELLING
        assert classify_simple(-0.5, self.config)[0] is EquilibriumKind.NODE_ATTRACTING

    def test_foci(self):
        """Test complex eigenvalues off both axes"""
        assert classify_simple(1 + 1j, self.config)[0] is EquilibriumKind.FOCUS_REPELLING
        assert classify_simple(-1 + 1j, self.config)[0] is EquilibriumKind.FOCUS_ATTRACTING

    def test_tolerance_band(self):
        """Test that an eigenvalue barely off the real axis is flagged"""
        kind, in_band = classify_simple(1 + 1e-7j, self.config)
        assert kind is EquilibriumKind.FOCUS_REPELLING
        assert in_band

    def test_zero_eigenvalue(self):
        """Test that a zero eigenvalue is not simple"""
        with pytest.raises(NotSimple):
            classify_simple(0j, self.config)


class TestClassifyEquilibria:
    """Test finite points of every kind"""

    def test_three_nodes(self):
        """Test z(z-1)(z-2): eigenvalues 2, -1, 2"""
        points = classify_equilibria(parse_field("z*(z-1)*(z-2)"))
        assert [e.id for e in points] == ['E0', 'E1', 'E2']
        assert [e.token for e in points] == ['N+', 'N-', 'N+']
        assert points[1].eigenvalue == pytest.approx(-1)

    def test_multiple_point(self):
        """Test a triple zero has 4 elliptic sectors"""
        (e,) = classify_equilibria(parse_field("z^3"))
        assert e.kind is EquilibriumKind.MULTIPLE_ELLIPTIC
        assert e.order == 3
        assert e.sectors == 4
        assert e.token == 'M3'

    def test_residue_of_double_point(self):
        """Test res(1/p) = -A3/A2^2 at a double zero"""
        points = classify_equilibria(parse_field("z^2*(z-1)"))
        double = next(e for e in points if e.order == 2)
        assert double.residue_inv == pytest.approx(-1)

    def test_inverse_poles(self):
        """Test poles of 1/p carry 2m+2 sectors"""
        points = classify_equilibria(parse_field("1/(z^2*(z-1))"))
        assert [(e.id, e.order, e.sectors) for e in points] == [('P0', 2, 6), ('P1', 1, 4)]
        assert all(e.is_pole for e in points)

    def test_conjugate_saddles(self):
        """Test zeros of p are saddles of conj(p)"""
        (e,) = classify_equilibria(parse_field("conj(z^2)"))
        assert e.kind is EquilibriumKind.SADDLE_CONJUGATE
        assert e.sectors == 6
        assert e.eigenvalue is None

    def test_moebius(self):
        """Test a Moebius field has one equilibrium and one pole"""
        points = classify_equilibria(parse_field("(z+1)/(z-2)"))
        eq = next(e for e in points if not e.is_pole)
        pole = next(e for e in points if e.is_pole)
        assert eq.location == pytest.approx(-1)
        assert eq.eigenvalue == pytest.approx(-1 / 3)
        assert eq.kind is EquilibriumKind.NODE_ATTRACTING
        assert (pole.id, pole.location) == ('P0', 2)

    def test_essential_is_refused(self):
        """Test the essential singularity is not classified"""
        with pytest.raises(EssentialNotSupported):
            classify_equilibria(parse_field("essential(1;2)"))


class TestJacobian:
    """Test planar Jacobians"""

    def test_holomorphic(self):
        """Test [[a, -b], [b, a]] for f'(z0) = a + ib"""
        J = jacobian(parse_field("z*(z-(1+2i))"), 0)
        assert np.allclose(J, [[-1, 2], [-2, -1]])

    def test_conjugate(self):
        """Test conj(z) has a saddle Jacobian"""
        J = jacobian(parse_field("conj(z)"), 0)
        assert np.allclose(J, [[1, 0], [0, -1]])
        assert np.linalg.det(J) < 0

    def test_not_an_equilibrium(self):
        """Test a regular point is refused"""
        with pytest.raises(NotSimple):
            jacobian(parse_field("z^2-1"), 0.5)

    def test_multiple(self):
        """Test a double zero is refused"""
        with pytest.raises(NotSimple):
            jacobian(parse_field("z^2"), 0)


class TestNormalForm:
    """Test conformal normal forms"""

    def test_regular_and_linear(self):
        """Test a regular point and a simple zero"""
        fld = parse_field("z^2*(z-1)")
        assert normal_form(fld, 5).case is NormalFormCase.REGULAR
        linear = normal_form(fld, 1)
        assert linear.case is NormalFormCase.LINEAR
        assert linear.linear_coef == pytest.approx(1)

    def test_multiple_with_residue(self):
        """Test gamma = 1/res at a double zero"""
        form = normal_form(parse_field("z^2*(z-1)"), 0)
        assert form.case is NormalFormCase.MULTIPLE_RESIDUE_NONZERO
        assert form.n == 2
        assert form.gamma == pytest.approx(-1)

    def test_multiple_without_residue(self):
        """Test z^n has no residue term"""
        form = normal_form(parse_field("z^4"), 0)
        assert form.case is NormalFormCase.MULTIPLE_RESIDUE_ZERO
        assert form.model == "z^4"

    def test_poles(self):
        """Test pole normal forms of inverse and Moebius fields"""
        assert normal_form(parse_field("1/z^2"), 0).pole_order == 2
        assert normal_form(parse_field("(z+1)/(z-2)"), 2).case is NormalFormCase.POLE


class TestLyapunov:
    """Test Lyapunov quantities from the numeric return map"""

    def test_holomorphic_center(self):
        """Test every quantity vanishes at a holomorphic center"""
        report = lyapunov_constants(parse_field("z*(z-1i)"), 0, 3,
                                    [0.05, 0.08, 0.11, 0.14, 0.17, 0.2])
        assert report.is_center()

    def test_focus(self):
        """Test V1 = exp(2π a/b) - 1 for f'(0) = a + ib"""
        report = lyapunov_constants(parse_field("(-0.1+1i)z + z^2"), 0, 1,
                                    [0.0005, 0.001, 0.0015, 0.002, 0.0025])
        assert report.V[0] == pytest.approx(math.exp(-0.2 * math.pi) - 1, abs=1e-2)
        assert not report.is_center()

    def test_no_rotation(self):
        """Test a node has no return map"""
        with pytest.raises(NoRotation):
            lyapunov_constants(parse_field("z*(z-1)"), 0, 1, [0.01, 0.02, 0.03])


class TestQuadratic:
    """Test closed forms of quadratic fields"""

    def test_closed_forms(self):
        """Test z(z-(1+i)) with E1 at the origin"""
        forms = quadratic_closed_forms(parse_field("z*(z-(1+1i))"))
        assert forms.E1 == pytest.approx(0, abs=1e-12)
        assert forms.E2 == pytest.approx(1 + 1j)
        assert forms.traces == pytest.approx((-2, 2))
        assert forms.V1 == pytest.approx(-1)
        assert forms.V3 == pytest.approx(math.pi)

    def test_bendixson_line(self):
        """Test the zero-divergence line of z^2 - (1+i)z is x = 1/2"""
        assert bendixson_line(parse_field("z*(z-(1+1i))")) == pytest.approx((-1, 2, 0))

    def test_wrong_degree(self):
        """Test cubic fields are refused"""
        with pytest.raises(WrongDegree):
            quadratic_closed_forms(parse_field("z^3-1"))
