"""
Poincaré compactification: chart systems, equilibria on the equator and
the conformal model of rational fields near infinity.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import AnalysisConfig
from .cpoly import CPoly, roots
from .error_handler import DegenerateEquator, UnsupportedKind
from .fieldspec import BivariatePoly, Field, FieldKind, to_planar

logger = logging.getLogger(__name__)


class Chart(str, Enum):
    U1 = 'U1'
    U2 = 'U2'
    V1 = 'V1'
    V2 = 'V2'


ANTIPODE = {Chart.U1: Chart.V1, Chart.U2: Chart.V2, Chart.V1: Chart.U1, Chart.V2: Chart.U2}


class InfinityKind(str, Enum):
    SADDLE = 'Saddle'
    NODE_REPELLING = 'NodeRepelling'
    NODE_ATTRACTING = 'NodeAttracting'


@dataclass(frozen=True)
class ChartSystem:
    """s' = s_poly(s, w), w' = w_poly(s, w) on one chart; w = 0 is the equator"""

    chart: Chart
    s_poly: BivariatePoly
    w_poly: BivariatePoly

    def __call__(self, s: float, w: float) -> Tuple[float, float]:
        return float(self.s_poly(s, w)), float(self.w_poly(s, w))

    def equator(self) -> np.ndarray:
        """Ascending coefficients of s' restricted to w = 0"""
        return self.s_poly.coeffs[:, 0].copy()

    def jacobian(self, s: float, w: float = 0.0) -> np.ndarray:
        return np.array([
            [self.s_poly.partial('x')(s, w), self.s_poly.partial('y')(s, w)],
            [self.w_poly.partial('x')(s, w), self.w_poly.partial('y')(s, w)],
        ], dtype=float)


@dataclass(frozen=True)
class InfinityPoint:
    chart: Chart
    s: float
    kind: InfinityKind
    jac: np.ndarray
    theta: float
    antipode_linked: bool = True
    id: str = ''
    antipode_id: str = ''

    @property
    def trace(self) -> float:
        return float(np.trace(self.jac))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.jac))

    @property
    def direction(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def token(self) -> str:
        return {InfinityKind.SADDLE: 'S', InfinityKind.NODE_REPELLING: 'N+',
                InfinityKind.NODE_ATTRACTING: 'N-'}[self.kind]

    def to_json(self) -> Dict[str, Any]:
        return {'id': self.id, 'chart': self.chart.value, 's': self.s, 'theta': self.theta,
                'kind': self.kind.value, 'trace': self.trace, 'det': self.det,
                'antipode': self.antipode_id}


@dataclass(frozen=True)
class InfinityModel:
    """Conformal model of the field near infinity

    case 'a': (1/z)^k + c (1/z)^(2k+1) with k = m - n
    case 'b': coefficient * z
    case 'c': z^2
    case 'd': z^(n - m)
    """

    case: str
    n: int
    m: int
    exponent: int
    coefficient: complex
    boundary: bool = False

    @property
    def model(self) -> str:
        if self.case == 'a':
            k = self.exponent
            base = "1" if k == 0 else f"(1/z)^{k}"
            if self.coefficient == 0:
                return base
            return f"{base} + ({self.coefficient:.6g})*(1/z)^{2 * k + 1}"
        if self.case == 'b':
            return f"({self.coefficient:.6g})*z"
        return f"z^{self.exponent}"

    def to_json(self) -> Dict[str, Any]:
        return {'case': self.case, 'n': self.n, 'm': self.m, 'exponent': self.exponent,
                'coefficient': [self.coefficient.real, self.coefficient.imag],
                'model': self.model, 'boundary': self.boundary}


# Charts

def _sign_for(chart: Chart, degree: int) -> float:
    if chart in (Chart.U1, Chart.U2):
        return 1.0
    return -1.0 if (degree - 1) % 2 else 1.0


def compactify(fld: Field, chart: Chart) -> ChartSystem:
    """Chart system with u, v evaluated at the chart point and cleared by w^n"""
    if fld.kind not in (FieldKind.POLYNOMIAL, FieldKind.CONJUGATE):
        raise UnsupportedKind(f"{fld.kind.value} fields use infinity_local_model")
    chart = Chart(chart)
    planar = to_planar(fld)
    n = fld.poly.degree

    # U(s, w) = w^n u(point), V(s, w) = w^n v(point); indices are (s power, w power)
    U = np.zeros((n + 2, n + 2))
    V = np.zeros((n + 2, n + 2))
    first = chart in (Chart.U1, Chart.V1)
    for source, target in ((planar.u.coeffs, U), (planar.v.coeffs, V)):
        for (i, j), c in np.ndenumerate(source):
            if c == 0:
                continue
            s_power = j if first else i
            target[s_power, n - i - j] += c

    shift_s = np.zeros((n + 2, n + 2))
    shift_w = np.zeros((n + 2, n + 2))
    if first:
        # s' = -s U + V, w' = -w U
        shift_s[1:, :] -= U[:-1, :]
        shift_s += V
        shift_w[:, 1:] -= U[:, :-1]
    else:
        # s' = U - s V, w' = -w V
        shift_s += U
        shift_s[1:, :] -= V[:-1, :]
        shift_w[:, 1:] -= V[:, :-1]

    sign = _sign_for(chart, n)
    return ChartSystem(chart, BivariatePoly(sign * shift_s), BivariatePoly(sign * shift_w))


def chart_direction(chart: Chart, s: float) -> float:
    """Angle in [0, 2π) of the equator point (chart, s)"""
    if chart is Chart.U1:
        theta = math.atan2(s, 1.0)
    elif chart is Chart.V1:
        theta = math.atan2(-s, -1.0)
    elif chart is Chart.U2:
        theta = math.atan2(1.0, s)
    else:
        theta = math.atan2(-1.0, -s)
    return theta % (2 * math.pi)


def chart_to_plane(chart: Chart, s: float, w: float) -> complex:
    """Plane point of the chart point (s, w), w > 0"""
    if chart is Chart.U1:
        return complex(1 / w, s / w)
    if chart is Chart.V1:
        return complex(-1 / w, -s / w)
    if chart is Chart.U2:
        return complex(s / w, 1 / w)
    return complex(-s / w, -1 / w)


def chart_to_chart(point: InfinityPoint) -> Optional[Tuple[Chart, float]]:
    """The same equator point seen from the neighbouring chart, s -> 1/s"""
    if point.s == 0:
        return None
    other = {Chart.U1: Chart.U2, Chart.U2: Chart.U1, Chart.V1: Chart.V2, Chart.V2: Chart.V1}
    flip = point.s < 0
    target = other[point.chart]
    if flip:
        target = ANTIPODE[target]
    return target, 1.0 / point.s


def _real_roots(coeffs: np.ndarray, config: AnalysisConfig) -> List[float]:
    poly = CPoly(coeffs.astype(complex))
    if poly.is_zero:
        raise DegenerateEquator("the equator polynomial vanishes identically")
    if poly.degree == 0:
        return []
    out = []
    for r, m in roots(poly, config):
        if abs(r.imag) < 1e-9 * (1 + abs(r)):
            if m > 1:
                logger.warning(f"Equator root {r.real:.6g} has multiplicity {m}")
            out.append(float(r.real))
    return out


def _kind(jac: np.ndarray) -> InfinityKind:
    det = float(np.linalg.det(jac))
    scale = float(np.max(np.abs(jac))) ** 2 or 1.0
    if abs(det) <= 1e-12 * scale:
        logger.warning(f"Degenerate equator point with Jacobian {jac.tolist()}")
    if det < 0:
        return InfinityKind.SADDLE
    return InfinityKind.NODE_REPELLING if np.trace(jac) > 0 else InfinityKind.NODE_ATTRACTING


def infinite_equilibria(fld: Field, config: Optional[AnalysisConfig] = None) -> List[InfinityPoint]:
    """Equator equilibria of every chart, with antipodes, ids I0.. by angle"""
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.POLYNOMIAL and fld.poly.degree == 1:
        logger.debug("Linear field: the equator carries no isolated equilibria")
        return []
    found = []
    for chart, keep in ((Chart.U1, lambda s: abs(s) <= 1.0), (Chart.U2, lambda s: abs(s) < 1.0)):
        system = compactify(fld, chart)
        anti = compactify(fld, ANTIPODE[chart])
        for s in _real_roots(system.equator(), config):
            if not keep(s):
                continue
            for sys_ in (system, anti):
                jac = sys_.jacobian(s)
                found.append(InfinityPoint(sys_.chart, s, _kind(jac), jac,
                                           chart_direction(sys_.chart, s)))

    found.sort(key=lambda p: p.theta)
    ids = {(p.chart, p.s): f"I{i}" for i, p in enumerate(found)}
    result = [InfinityPoint(p.chart, p.s, p.kind, p.jac, p.theta, True, ids[(p.chart, p.s)],
                            ids[(ANTIPODE[p.chart], p.s)]) for p in found]
    logger.debug(f"Found {len(result)} equator points: {[p.token for p in result]}")
    return result


# Near-infinity model of rational fields

def _reversed(p: CPoly) -> np.ndarray:
    return p.coeffs[::-1].copy()


def _series_quotient(num: np.ndarray, den: np.ndarray, count: int) -> np.ndarray:
    """First count coefficients of num/den as a power series, den[0] != 0"""
    out = np.zeros(count, dtype=complex)
    for k in range(count):
        acc = num[k] if k < len(num) else 0j
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / den[0]
    return out


def infinity_local_model(fld: Field) -> InfinityModel:
    """Model of f = P/Q near infinity from the degrees n = deg P, m = deg Q"""
    if fld.kind is FieldKind.ESSENTIAL:
        raise UnsupportedKind("essential demo fields have no rational model at infinity")
    if fld.kind is FieldKind.CONJUGATE:
        # conj(p) has the orbits of 1/p
        num, den = CPoly([1]), fld.poly
    else:
        num, den = fld.rational_parts()
    n, m = num.degree, den.degree

    if n < m + 1:
        k = m - n
        # residue of Q(1/z) / (z^2 P(1/z)) = z^(n-m-2) Qrev/Prev at 0
        series = _series_quotient(_reversed(den), _reversed(num), k + 2)
        c = complex(series[k + 1])
        model = InfinityModel('a', n, m, k, c, boundary=(n == m))
        if model.boundary:
            logger.info("Infinity model sits on the n = m boundary of case (a)")
        return model
    if n == m + 1:
        return InfinityModel('b', n, m, 1, complex(num.leading / den.leading))
    if n == m + 2:
        return InfinityModel('c', n, m, 2, 1 + 0j)
    return InfinityModel('d', n, m, n - m, 1 + 0j)
