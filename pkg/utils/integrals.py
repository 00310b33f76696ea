"""
First integrals, complex potentials and travel times
"""

import cmath
import csv
import logging
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .config import AnalysisConfig
from .cpoly import CPoly, partial_fractions_inv
from .error_handler import (BranchJump, OutputError, SingularPath, UnsupportedKind)
from .fieldspec import BivariatePoly, Field, FieldKind, to_planar
from .local import classify_equilibria

logger = logging.getLogger(__name__)

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class FirstIntegral:
    """G = Σ c log(z-a) + Σ c (-1/(m-1)) (z-a)^(1-m) + poly(z) [+ exp(-1/z^n)/n]

    H = Im G is constant along trajectories. For conjugate fields G is the
    complex potential F and H its stream function.
    """

    log_terms: Tuple[Tuple[complex, complex], ...] = ()
    power_terms: Tuple[Tuple[complex, complex, int], ...] = ()
    poly_part: CPoly = dc_field(default_factory=lambda: CPoly([0]))
    essential_n: Optional[int] = None
    source: str = 'primitive'

    @property
    def singular_points(self) -> List[complex]:
        pts = [a for _, a in self.log_terms] + [a for _, a, _ in self.power_terms]
        if self.essential_n is not None:
            pts.append(0j)
        return pts

    def _regular_part(self, z: complex) -> complex:
        g = self.poly_part(z)
        for c, a, m in self.power_terms:
            g += c * (-1.0 / (m - 1)) * (z - a) ** (1 - m)
        if self.essential_n is not None:
            n = self.essential_n
            g += cmath.exp(-1 / z ** n) / n
        return complex(g)

    def G(self, z: complex) -> complex:
        """Principal-branch value of G"""
        g = self._regular_part(z)
        for c, a in self.log_terms:
            g += c * cmath.log(z - a)
        return g

    def H(self, x: float, y: float) -> float:
        return self.G(complex(x, y)).imag

    def delta(self, z_from: complex, z_to: complex) -> complex:
        """G(z_to) - G(z_from) continued along the short segment between them"""
        d = self._regular_part(z_to) - self._regular_part(z_from)
        for c, a in self.log_terms:
            d += c * cmath.log((z_to - a) / (z_from - a))
        return complex(d)

    def derivative(self, z: complex) -> complex:
        d = self.poly_part.derivative()(z)
        for c, a in self.log_terms:
            d += c / (z - a)
        for c, a, m in self.power_terms:
            d += c / (z - a) ** m
        if self.essential_n is not None:
            n = self.essential_n
            d += cmath.exp(-1 / z ** n) * z ** (-n - 1)
        return complex(d)

    def gradient(self, x: float, y: float) -> Tuple[float, float]:
        """∇H = (Im G', Re G')"""
        d = self.derivative(complex(x, y))
        return d.imag, d.real

    def to_json(self) -> Dict[str, Any]:
        return {
            'source': self.source,
            'log_terms': [[c.real, c.imag, a.real, a.imag] for c, a in self.log_terms],
            'power_terms': [[c.real, c.imag, a.real, a.imag, m] for c, a, m in self.power_terms],
            'poly_part': self.poly_part.to_json(),
            'essential_n': self.essential_n,
        }


@dataclass(frozen=True)
class PotentialPair:
    """F = φ + iψ with F' = p for the conjugate field conj(p)"""

    F: CPoly
    phi: BivariatePoly
    psi: BivariatePoly

    def gradient(self, x: float, y: float) -> Tuple[float, float]:
        """∇ψ = (Im F', Re F')"""
        d = self.F.derivative()(complex(x, y))
        return d.imag, d.real

    def H(self, x: float, y: float) -> float:
        return float(self.psi(x, y))

    def delta(self, z_from: complex, z_to: complex) -> complex:
        return complex(self.F(z_to) - self.F(z_from))


def first_integral(fld: Field, config: Optional[AnalysisConfig] = None) -> FirstIntegral:
    """Primitive G of 1/f, or the complex potential for conjugate fields"""
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.POLYNOMIAL:
        logs, powers = [], []
        for term in partial_fractions_inv(fld.poly, config=config):
            if term.power == 1:
                logs.append((term.coef, term.pole))
            else:
                powers.append((term.coef, term.pole, term.power))
        return FirstIntegral(tuple(logs), tuple(powers))

    if fld.kind is FieldKind.INVERSE:
        return FirstIntegral(poly_part=fld.poly.antiderivative())

    if fld.kind is FieldKind.CONJUGATE:
        return FirstIntegral(poly_part=fld.poly.antiderivative(), source='stream')

    if fld.kind is FieldKind.MOEBIUS:
        A, B, C, D = fld.moebius_params
        if A == 0:
            logger.debug("Moebius field with A = 0 has a polynomial primitive")
            return FirstIntegral(poly_part=CPoly([0, D / B, C / (2 * B)]))
        return FirstIntegral((((A * D - B * C) / (A * A), -B / A),),
                             poly_part=CPoly([0, C / A]))

    n, _ = fld.demo_params
    return FirstIntegral(essential_n=n)


def potential(fld: Field) -> PotentialPair:
    """Complex potential of a conjugate field; ψ is its stream function"""
    if fld.kind is not FieldKind.CONJUGATE:
        raise UnsupportedKind("complex potentials are defined for conjugate fields")
    F = fld.poly.antiderivative()
    planar = to_planar(Field.polynomial(F))
    return PotentialPair(F, planar.u, planar.v)


# Path evaluation

def _as_points(path) -> np.ndarray:
    points = getattr(path, 'points', path)
    return np.asarray(points, dtype=complex)


def _unwrapped_logs(fi: FirstIntegral, points: np.ndarray,
                    config: AnalysisConfig) -> np.ndarray:
    """Σ c·log(z - a) along the path with each argument tracked continuously"""
    total = np.zeros(len(points), dtype=complex)
    for c, a in fi.log_terms:
        d = points - a
        if np.any(np.abs(d) <= config.tau_pole * (1 + np.abs(points))):
            raise SingularPath(f"path passes through the logarithmic point {a}")
        steps = np.angle(d[1:] / d[:-1])
        bad = np.flatnonzero(np.abs(steps) >= math.pi / 2)
        if bad.size:
            raise BranchJump(f"argument around {a} jumps between points {bad[0]} and "
                             f"{bad[0] + 1}; refine the path", int(bad[0]) + 1)
        arg = np.angle(d[0]) + np.concatenate(([0.0], np.cumsum(steps)))
        total += c * (np.log(np.abs(d)) + 1j * arg)
    return total


def unwrapped_G(fi: FirstIntegral, path, config: Optional[AnalysisConfig] = None) -> np.ndarray:
    config = config or AnalysisConfig()
    points = _as_points(path)
    regular = np.array([fi._regular_part(z) for z in points], dtype=complex)
    return regular + _unwrapped_logs(fi, points, config)


def eval_H(fi: FirstIntegral, path, config: Optional[AnalysisConfig] = None) -> np.ndarray:
    """H along a path with continuous branch unwrapping"""
    return unwrapped_G(fi, path, config).imag


def complex_time(fi: FirstIntegral, path, config: Optional[AnalysisConfig] = None) -> complex:
    """G(end) - G(start) continued along the path"""
    values = unwrapped_G(fi, path, config)
    return complex(values[-1] - values[0])


def _segment_integral(h: Callable[[complex], complex], a: complex, b: complex,
                      depth: int = 0) -> complex:
    def gauss(p, q):
        mid, half = (p + q) / 2, (q - p) / 2
        return half * sum(w * h(mid + half * x) for x, w in zip(GAUSS_NODES, GAUSS_WEIGHTS))

    whole = gauss(a, b)
    m = (a + b) / 2
    halves = gauss(a, m) + gauss(m, b)
    if depth >= 12 or abs(whole - halves) <= 1e-13 * (1 + abs(halves)):
        return halves
    return _segment_integral(h, a, m, depth + 1) + _segment_integral(h, m, b, depth + 1)


def travel_time(fld: Field, traj, config: Optional[AnalysisConfig] = None) -> complex:
    """∫ dz / f(z) along the trajectory polyline"""
    config = config or AnalysisConfig()
    points = _as_points(traj)
    if fld.kind is FieldKind.CONJUGATE:
        raise UnsupportedKind("travel time is defined for holomorphic fields")

    if fld.kind is FieldKind.ESSENTIAL:
        singular = [0j]

        def h(z):
            n, m = fld.demo_params
            return z ** (-m) * cmath.exp(-1 / z ** n)
    else:
        num, den = fld.rational_parts()
        singular = [e.location for e in classify_equilibria(fld, config) if not e.is_pole]

        def h(z):
            return den(z) / num(z)

    for a, b in zip(points[:-1], points[1:]):
        for s in singular:
            seg = b - a
            t = 0.0 if seg == 0 else min(1.0, max(0.0, ((s - a) * seg.conjugate()).real / abs(seg) ** 2))
            if abs(a + t * seg - s) <= config.tau_pole * (1 + abs(s)):
                raise SingularPath(f"path passes within tolerance of the equilibrium {s}")

    total = 0j
    for a, b in zip(points[:-1], points[1:]):
        if a != b:
            total += _segment_integral(h, complex(a), complex(b))
    return complex(total)


# Grids for external contouring

@dataclass(frozen=True)
class LevelGrid:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    def rows(self):
        for j, y in enumerate(self.ys):
            for i, x in enumerate(self.xs):
                yield float(x), float(y), float(self.values[j, i])

    def write_csv(self, path: Union[str, Path], value_name: str = 'H') -> None:
        try:
            with open(path, 'w', newline='') as f:
                writer = csv.writer(f)
                writer.writerow(['x', 'y', value_name])
                for x, y, v in self.rows():
                    writer.writerow([repr(x), repr(y), '' if math.isnan(v) else repr(v)])
        except OSError as e:
            raise OutputError(f"Cannot write grid to {path}: {e}")


def level_grid(evaluator: Callable[[float, float], float], extent: float, n: int) -> LevelGrid:
    """n x n samples of evaluator on [-extent, extent]²; NaN where undefined"""
    if n < 2 or extent <= 0:
        raise ValueError("need n >= 2 and a positive extent")
    xs = np.linspace(-extent, extent, n)
    ys = np.linspace(-extent, extent, n)
    values = np.full((n, n), np.nan)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            try:
                value = float(evaluator(float(x), float(y)))
            except (ZeroDivisionError, ValueError, OverflowError):
                continue
            if math.isfinite(value):
                values[j, i] = value
    return LevelGrid(xs, ys, values)
