"""
Tests for trajectories, limits, separatrices and level curves
"""

import cmath
import math

import numpy as np
import pytest

from utils.config import AnalysisConfig
from utils.error_handler import BadStart, CriticalPointHit, InconclusiveLimit, Undetermined
from utils.fieldspec import eval_field, parse_field
from utils.flow import (Terminal, Trajectory, desingularized, integrate, omega_limit,
                        trace_level_curve, trace_orbit, trace_separatrices)
from utils.integrals import first_integral, potential


class TestIntegrate:
    """Test time integration"""

    def setup_method(self):
        """Setup test environment"""
        self.config = AnalysisConfig()

    def test_linear_spiral(self):
        """Test z' = (-1+i)z from 1 for t = π ends at -exp(-π)"""
        traj = integrate(parse_field("(-1+1i)*z"), 1, math.pi, config=self.config)
        assert traj.terminal is Terminal.TIME_EXHAUSTED
        assert traj.end == pytest.approx(-0.04321391826377226, abs=1e-8)
        assert traj.times[-1] == pytest.approx(math.pi)

    def test_backward(self):
        """Test backward integration retraces the spiral"""
        traj = integrate(parse_field("(-1+1i)*z"), -math.exp(-math.pi), math.pi, direction=-1)
        assert traj.end == pytest.approx(1, abs=1e-7)
        assert traj.times[-1] == pytest.approx(-math.pi)

    def test_closed_orbit(self):
        """Test z' = iz returns to its start after 2π"""
        traj = integrate(parse_field("1i*z"), 1, 10)
        assert traj.terminal is Terminal.CLOSED_ORBIT
        assert traj.period == pytest.approx(2 * math.pi, abs=1e-6)
        assert traj.end == pytest.approx(1, abs=1e-7)

    def test_converges(self):
        """Test an attracting node captures the orbit"""
        fld = parse_field("z*(z-1)")
        traj = integrate(fld, 0.5, 100)
        assert traj.terminal is Terminal.CONVERGED
        assert traj.target == 'E0'
        assert omega_limit(fld, traj).token == 'E0'

    def test_escapes(self):
        """Test z' = z^2 blows up along the positive axis"""
        fld = parse_field("z^2")
        traj = integrate(fld, 1, 2)
        assert traj.terminal is Terminal.ESCAPED
        assert traj.direction == pytest.approx(0, abs=1e-9)
        assert omega_limit(fld, traj).token == 'I0'

    def test_inverse_time(self):
        """Test z' = 1/z satisfies z^2 = 1 + 2t"""
        traj = integrate(parse_field("1/z"), 1, 1.5)
        assert traj.end == pytest.approx(2, abs=1e-6)
        assert traj.times[-1] == pytest.approx(1.5)

    def test_inverse_hits_pole(self):
        """Test z' = 1/z backward reaches the pole"""
        traj = integrate(parse_field("1/z"), 1, 1, direction=-1)
        assert traj.terminal is Terminal.HIT_SINGULARITY
        assert traj.target == 'P0'
        assert abs(traj.times[-1]) == pytest.approx(0.5, abs=1e-6)

    def test_bad_start(self):
        """Test starting on a pole"""
        with pytest.raises(BadStart):
            integrate(parse_field("1/z"), 0, 1)

    def test_bad_arguments(self):
        """Test non-positive times and bad directions"""
        with pytest.raises(ValueError):
            integrate(parse_field("z"), 1, 0)
        with pytest.raises(ValueError):
            integrate(parse_field("z"), 1, 1, direction=2)


class TestDesingularized:
    """Test the pole-free fields used for tracing"""

    def test_same_direction(self):
        """Test g = f·weight for the rational kinds"""
        z = 0.4 + 0.9j
        for text in ("1/(z^2-1)", "(z+1)/(z-2i)", "z^3+1"):
            fld = parse_field(text)
            g, weight, _ = desingularized(fld)
            assert g(z) == pytest.approx(eval_field(fld, z) * weight(z))

    def test_trace_parameter(self):
        """Test orbits are traced in compactified arclength"""
        traj = trace_orbit(parse_field("1i*z"), 1, arclength=20)
        assert traj.parameter == 'arclength'
        assert traj.terminal is Terminal.CLOSED_ORBIT


class TestLimits:
    """Test limit diagnosis"""

    def test_too_short(self):
        """Test that a short undecided trajectory is inconclusive"""
        traj = Trajectory(np.array([1, 1.1, 1.2], dtype=complex), np.array([0, 0.1, 0.2]),
                          Terminal.TIME_EXHAUSTED)
        with pytest.raises(Undetermined):
            omega_limit(parse_field("z^2"), traj)

    def test_closed(self):
        """Test closed orbits report the closed descriptor"""
        fld = parse_field("1i*z")
        assert omega_limit(fld, integrate(fld, 1, 10)).kind == 'closed'


class TestSeparatrices:
    """Test separatrix tracing"""

    def test_three_nodes(self):
        """Test the four infinity separatrices of z(z-1)(z-2) land on nodes"""
        seps = trace_separatrices(parse_field("z*(z-1)*(z-2)"))
        assert len(seps) == 4
        assert not any(s.flagged for s in seps)
        assert {s.origin for s in seps} == {'I0', 'I1', 'I2', 'I3'}
        assert all(s.far_end.token in ('E0', 'E1', 'E2') for s in seps)

    def test_elliptic_sectors(self):
        """Test launches inside the elliptic sectors of z^2 return to the origin"""
        seps = trace_separatrices(parse_field("z^2"))
        loops = [s for s in seps if s.origin == 'E0' and s.alpha.token == s.omega.token == 'E0']
        assert len(loops) == 2

    def test_conjugate_saddle(self):
        """Test conj(z) has four saddle separatrices to the equator"""
        seps = trace_separatrices(parse_field("conj(z)"))
        assert len(seps) == 4
        assert all(s.far_end.kind == 'infinity' for s in seps)

    def test_essential(self):
        """Test the essential demo has none"""
        assert trace_separatrices(parse_field("essential(1;2)")) == []


class TestTimeCap:
    """Test the time cap on integration and tracing"""

    def setup_method(self):
        """Setup test environment"""
        self.capped = AnalysisConfig(t_cap=1e-3)

    def test_integrate_stops_at_cap(self):
        """Test time integration ends at the cap instead of closing the orbit"""
        traj = integrate(parse_field("1i*z"), 1, 10, config=self.capped)
        assert traj.terminal is Terminal.TIME_EXHAUSTED
        assert traj.times[-1] == pytest.approx(1e-3)
        assert traj.end == pytest.approx(cmath.exp(1e-3j), abs=1e-9)

    def test_cap_with_varying_speed(self):
        """Test z' = 1/z stops at the cap where z^2 = 1 + 2t"""
        traj = integrate(parse_field("1/z"), 1, 1.5, config=AnalysisConfig(t_cap=0.5))
        assert traj.terminal is Terminal.TIME_EXHAUSTED
        assert traj.times[-1] == pytest.approx(0.5)
        assert traj.end == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_capped_orbit_is_inconclusive(self):
        """Test a capped trace has no limit"""
        fld = parse_field("1i*z")
        traj = trace_orbit(fld, 1, config=self.capped)
        assert traj.terminal is Terminal.TIME_EXHAUSTED
        assert traj.times[-1] == pytest.approx(1e-3)
        with pytest.raises(InconclusiveLimit):
            omega_limit(fld, traj, self.capped)

    def test_capped_separatrices_are_flagged(self):
        """Test separatrices cut by the cap are kept and flagged"""
        seps = trace_separatrices(parse_field("z*(z-1)*(z-2)"), self.capped)
        assert len(seps) == 4
        assert all(s.flagged for s in seps)
        assert all(s.far_end.kind == 'unknown' for s in seps)

    def test_step_limit_is_inconclusive(self):
        """Test running out of steps ends the orbit undecided"""
        fld = parse_field("1i*z")
        traj = trace_orbit(fld, 1, config=AnalysisConfig(max_steps=3))
        assert traj.terminal is Terminal.TIME_EXHAUSTED
        assert len(traj.points) == 4
        with pytest.raises(InconclusiveLimit):
            omega_limit(fld, traj)


class TestEssentialFlow:
    """Test integration next to the essential singularity"""

    def setup_method(self):
        """Setup test environment"""
        self.field = parse_field("essential(1;2)")

    def test_overflowing_start(self):
        """Test a start point where the field overflows"""
        with pytest.raises(BadStart):
            integrate(self.field, 0.001, 1)

    def test_runs_into_singularity(self):
        """Test z' = z^2 exp(1/z) backward from 1/2 reaches 0 in finite time"""
        traj = integrate(self.field, 0.5, 1, direction=-1)
        assert traj.terminal is Terminal.HIT_SINGULARITY
        assert traj.target == 'X0'
        assert omega_limit(self.field, traj).token == 'X0'
        assert abs(traj.times[-1]) < 0.2


class TestLevelCurves:
    """Test predictor-corrector level curves"""

    def test_closed_level_curve(self):
        """Test a level curve around a center closes"""
        fi = first_integral(parse_field("z*(z-1i)"))
        curve = trace_level_curve(fi, 0.3, 10.0)
        assert curve.closed
        assert curve.residual < 1e-8
        values = [fi.H(z.real, z.imag) for z in curve.points]
        assert np.ptp(values) < 1e-8

    def test_critical_seed(self):
        """Test a seed on a stagnation point"""
        with pytest.raises(CriticalPointHit):
            trace_level_curve(potential(parse_field("conj(z)")), 0j, 1.0)
