"""
Local analysis of finite singular points: equilibrium classification,
Jacobians, conformal normal forms, numeric Lyapunov quantities and the
Bendixson divergence line of quadratic fields.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .config import AnalysisConfig
from .cpoly import residue_inv, roots, taylor_coeffs
from .error_handler import (EssentialNotSupported, GridEscape, NoRotation, NotSimple,
                            UnsupportedKind, WrongDegree)
from .fieldspec import Field, FieldKind, to_planar

logger = logging.getLogger(__name__)


class EquilibriumKind(str, Enum):
    CENTER = 'Center'
    FOCUS_REPELLING = 'FocusRepelling'
    FOCUS_ATTRACTING = 'FocusAttracting'
    NODE_REPELLING = 'NodeRepelling'
    NODE_ATTRACTING = 'NodeAttracting'
    MULTIPLE_ELLIPTIC = 'MultipleElliptic'
    POLE = 'Pole'
    SADDLE_CONJUGATE = 'SaddleConjugate'


SIMPLE_KINDS = {EquilibriumKind.CENTER, EquilibriumKind.FOCUS_REPELLING,
                EquilibriumKind.FOCUS_ATTRACTING, EquilibriumKind.NODE_REPELLING,
                EquilibriumKind.NODE_ATTRACTING}

_TOKENS = {
    EquilibriumKind.CENTER: 'C',
    EquilibriumKind.FOCUS_REPELLING: 'F+',
    EquilibriumKind.FOCUS_ATTRACTING: 'F-',
    EquilibriumKind.NODE_REPELLING: 'N+',
    EquilibriumKind.NODE_ATTRACTING: 'N-',
}


@dataclass(frozen=True)
class Equilibrium:
    """A finite equilibrium or pole of a field"""

    location: complex
    order: int
    kind: EquilibriumKind
    eigenvalue: Optional[complex] = None
    residue_inv: Optional[complex] = None
    sectors: int = 0
    in_band: bool = False
    id: str = ''

    @property
    def is_pole(self) -> bool:
        return self.kind is EquilibriumKind.POLE

    @property
    def stability(self) -> int:
        """+1 repelling, -1 attracting, 0 otherwise"""
        if self.kind in (EquilibriumKind.FOCUS_REPELLING, EquilibriumKind.NODE_REPELLING):
            return 1
        if self.kind in (EquilibriumKind.FOCUS_ATTRACTING, EquilibriumKind.NODE_ATTRACTING):
            return -1
        return 0

    @property
    def token(self) -> str:
        """Short kind token: C, F+, F-, N+, N-, M<n>, P<n> or S<n>"""
        if self.kind in _TOKENS:
            return _TOKENS[self.kind]
        prefix = {EquilibriumKind.MULTIPLE_ELLIPTIC: 'M', EquilibriumKind.POLE: 'P',
                  EquilibriumKind.SADDLE_CONJUGATE: 'S'}[self.kind]
        return f"{prefix}{self.order}"

    def to_json(self) -> Dict[str, Any]:
        def pair(c):
            return None if c is None else [c.real, c.imag]
        return {
            'id': self.id,
            'z': pair(self.location),
            'order': self.order,
            'kind': self.kind.value,
            'eig': pair(self.eigenvalue),
            'res': pair(self.residue_inv),
            'sectors': self.sectors,
            'in_band': self.in_band,
        }


class NormalFormCase(str, Enum):
    REGULAR = 'Regular'
    LINEAR = 'Linear'
    MULTIPLE_RESIDUE_NONZERO = 'MultipleResidueNonzero'
    MULTIPLE_RESIDUE_ZERO = 'MultipleResidueZero'
    POLE = 'PoleCase'


@dataclass(frozen=True)
class NormalForm:
    case: NormalFormCase
    n: int = 0
    gamma: Optional[complex] = None
    linear_coef: Optional[complex] = None
    pole_order: Optional[int] = None

    @property
    def model(self) -> str:
        if self.case is NormalFormCase.REGULAR:
            return "1"
        if self.case is NormalFormCase.LINEAR:
            return f"({self.linear_coef:.6g})*z"
        if self.case is NormalFormCase.MULTIPLE_RESIDUE_NONZERO:
            return f"({self.gamma:.6g})*z^{self.n}/(1+z^{self.n - 1})"
        if self.case is NormalFormCase.MULTIPLE_RESIDUE_ZERO:
            return f"z^{self.n}"
        return f"1/z^{self.pole_order}"

    def to_json(self) -> Dict[str, Any]:
        def pair(c):
            return None if c is None else [c.real, c.imag]
        return {'case': self.case.value, 'n': self.n, 'gamma': pair(self.gamma),
                'linear_coef': pair(self.linear_coef), 'pole_order': self.pole_order,
                'model': self.model}


@dataclass(frozen=True)
class LyapunovReport:
    V: Tuple[float, ...]
    method: str
    est_error: Tuple[float, ...]
    rho_grid: Tuple[float, ...] = ()
    returns: Tuple[float, ...] = ()

    def is_center(self) -> bool:
        return all(abs(v) <= e for v, e in zip(self.V, self.est_error))


# Simple equilibria

def classify_simple(eigenvalue: complex,
                    config: Optional[AnalysisConfig] = None) -> Tuple[EquilibriumKind, bool]:
    """Kind of a simple equilibrium from f'(z0), plus the tolerance-band flag"""
    config = config or AnalysisConfig()
    size = abs(eigenvalue)
    if size == 0:
        raise NotSimple("zero eigenvalue")
    re_ratio = abs(eigenvalue.real) / size
    im_ratio = abs(eigenvalue.imag) / size
    in_band = config.tau_center < min(re_ratio, im_ratio) < config.tau_band

    if re_ratio <= config.tau_center:
        kind = EquilibriumKind.CENTER
    elif im_ratio <= config.tau_center:
        kind = (EquilibriumKind.NODE_REPELLING if eigenvalue.real > 0
                else EquilibriumKind.NODE_ATTRACTING)
    else:
        kind = (EquilibriumKind.FOCUS_REPELLING if eigenvalue.real > 0
                else EquilibriumKind.FOCUS_ATTRACTING)
    return kind, in_band


def _simple(location: complex, eigenvalue: complex, config: AnalysisConfig) -> Equilibrium:
    kind, in_band = classify_simple(eigenvalue, config)
    if in_band:
        logger.warning(f"Equilibrium at {location:.6g} has eigenvalue {eigenvalue:.6g} "
                       f"inside the tolerance band")
    return Equilibrium(location, 1, kind, eigenvalue, 1 / eigenvalue, 0, in_band)


def _assign_ids(items: List[Equilibrium]) -> List[Equilibrium]:
    items = sorted(items, key=lambda e: (round(e.location.real, 9), round(e.location.imag, 9)))
    counters = {'E': 0, 'P': 0}
    out = []
    for eq in items:
        prefix = 'P' if eq.is_pole else 'E'
        out.append(Equilibrium(eq.location, eq.order, eq.kind, eq.eigenvalue, eq.residue_inv,
                               eq.sectors, eq.in_band, f"{prefix}{counters[prefix]}"))
        counters[prefix] += 1
    return out


def classify_equilibria(fld: Field,
                        config: Optional[AnalysisConfig] = None) -> List[Equilibrium]:
    """Finite equilibria and poles, sorted by (re, im) with ids E0.. and P0.."""
    config = config or AnalysisConfig()
    found: List[Equilibrium] = []

    if fld.kind is FieldKind.ESSENTIAL:
        raise EssentialNotSupported("essential singularities are not classified")

    if fld.kind is FieldKind.POLYNOMIAL:
        p = fld.poly
        for r, m in roots(p, config):
            if m == 1:
                found.append(_simple(r, complex(taylor_coeffs(p, r)[1]), config))
            else:
                found.append(Equilibrium(r, m, EquilibriumKind.MULTIPLE_ELLIPTIC, None,
                                         residue_inv(p, r, m, config), 2 * m - 2))
    elif fld.kind is FieldKind.INVERSE:
        for r, m in roots(fld.poly, config):
            found.append(Equilibrium(r, m, EquilibriumKind.POLE, sectors=2 * m + 2))
    elif fld.kind is FieldKind.CONJUGATE:
        for r, m in roots(fld.poly, config):
            found.append(Equilibrium(r, m, EquilibriumKind.SADDLE_CONJUGATE, sectors=2 * m + 2))
    else:
        A, B, C, D = fld.moebius_params
        if A != 0:
            found.append(_simple(-B / A, A * A / (A * D - B * C), config))
        if C != 0:
            found.append(Equilibrium(-D / C, 1, EquilibriumKind.POLE, sectors=4))

    result = _assign_ids(found)
    logger.debug(f"Classified {len(result)} finite points: {[e.token for e in result]}")
    return result


# Jacobian and normal forms

def _value_and_derivative(fld: Field, z0: complex) -> Tuple[complex, complex, float]:
    """f(z0), f'(z0) and a magnitude scale for the holomorphic rational kinds"""
    num, den = fld.rational_parts()
    n0, n1 = taylor_coeffs(num, z0)[:2] if num.degree >= 1 else (num.coeffs[0], 0j)
    d0, d1 = taylor_coeffs(den, z0)[:2] if den.degree >= 1 else (den.coeffs[0], 0j)
    if d0 == 0:
        raise NotSimple(f"{z0} is a pole")
    value = n0 / d0
    derivative = (n1 * d0 - n0 * d1) / (d0 * d0)
    scale = num.scale_at(z0) / abs(d0) + abs(value)
    return complex(value), complex(derivative), scale


def jacobian(fld: Field, z0: complex, config: Optional[AnalysisConfig] = None) -> np.ndarray:
    """Jacobian of the planar field at a simple equilibrium"""
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.ESSENTIAL:
        raise EssentialNotSupported("no Jacobian at an essential singularity")
    if fld.kind is FieldKind.INVERSE:
        raise NotSimple("inverse polynomial fields have no finite equilibria")

    if fld.kind is FieldKind.CONJUGATE:
        tc = taylor_coeffs(fld.poly, z0)
        value, derivative, scale = complex(tc[0]), complex(tc[1]), fld.poly.scale_at(z0)
    else:
        value, derivative, scale = _value_and_derivative(fld, z0)

    if abs(value) > 1e-6 * scale:
        raise NotSimple(f"{z0} is not an equilibrium (|f| = {abs(value):.3e})")
    if abs(derivative) <= config.tau_order * scale:
        raise NotSimple(f"{z0} is a multiple equilibrium")

    a, b = derivative.real, derivative.imag
    if fld.kind is FieldKind.CONJUGATE:
        return np.array([[a, -b], [-b, -a]])
    return np.array([[a, -b], [b, a]])


def _zero_order(tc: np.ndarray, threshold: float) -> int:
    for k, c in enumerate(tc):
        if abs(c) > threshold:
            return k
    return len(tc) - 1


def normal_form(fld: Field, z0: complex, config: Optional[AnalysisConfig] = None) -> NormalForm:
    """Conformal normal form of the field near z0"""
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.ESSENTIAL:
        raise EssentialNotSupported("no conformal normal form at an essential singularity")
    if fld.kind is FieldKind.CONJUGATE:
        raise UnsupportedKind("conjugate fields are not holomorphic")

    if fld.kind is FieldKind.INVERSE:
        p = fld.poly
        order = _zero_order(taylor_coeffs(p, z0), config.tau_order * p.scale_at(z0))
        if order == 0:
            return NormalForm(NormalFormCase.REGULAR)
        return NormalForm(NormalFormCase.POLE, n=order, pole_order=order)

    if fld.kind is FieldKind.MOEBIUS:
        A, B, C, D = fld.moebius_params
        if abs(C * z0 + D) <= config.tau_pole * (abs(C) * abs(z0) + abs(D)):
            return NormalForm(NormalFormCase.POLE, n=1, pole_order=1)
        if abs(A * z0 + B) <= config.tau_pole * (abs(A) * abs(z0) + abs(B)):
            eig = A * A / (A * D - B * C)
            return NormalForm(NormalFormCase.LINEAR, n=1, linear_coef=eig)
        return NormalForm(NormalFormCase.REGULAR)

    p = fld.poly
    tc = taylor_coeffs(p, z0)
    order = _zero_order(tc, config.tau_order * p.scale_at(z0))
    if order == 0:
        return NormalForm(NormalFormCase.REGULAR)
    if order == 1:
        return NormalForm(NormalFormCase.LINEAR, n=1, linear_coef=complex(tc[1]))
    res = residue_inv(p, z0, order, config)
    if abs(res) <= config.tau_zero * max(1.0, 1.0 / abs(tc[order])):
        return NormalForm(NormalFormCase.MULTIPLE_RESIDUE_ZERO, n=order)
    return NormalForm(NormalFormCase.MULTIPLE_RESIDUE_NONZERO, n=order, gamma=1 / res)


# Lyapunov quantities from the numeric return map

def _singular_points(fld: Field, config: AnalysisConfig) -> List[complex]:
    return [e.location for e in classify_equilibria(fld, config)]


def _return_value(fld: Field, z0: complex, rho: float, turn: float, disk: float,
                  config: AnalysisConfig) -> float:
    """r after one revolution starting at radius rho, minus rho"""
    num, den = fld.rational_parts()

    def rhs(theta, state):
        w = np.exp(1j * theta)
        r = state[0]
        g = num(z0 + r * w) / den(z0 + r * w) / w
        if g.imag == 0:
            raise GridEscape(f"angular velocity vanished at radius {r:.3e}")
        return np.array([r * g.real / g.imag])

    def left_disk(theta, state):
        return min(state[0], disk - state[0])
    left_disk.terminal = True

    sol = solve_ivp(rhs, (0.0, turn), [rho], method='RK45', rtol=config.rtol, atol=config.atol,
                    events=left_disk)
    if sol.status == 1:
        raise GridEscape(f"return map left the analysis disk at rho={rho:.3e}")
    if not sol.success:
        raise GridEscape(f"return map integration failed at rho={rho:.3e}: {sol.message}")
    return float(sol.y[0, -1] - rho)


def lyapunov_constants(fld: Field, z0: complex, k: int, rho_grid: Sequence[float],
                       config: Optional[AnalysisConfig] = None) -> LyapunovReport:
    """Fit V_1..V_k of the return map pi(rho) = V_1 rho + V_2 rho^2 + ..."""
    config = config or AnalysisConfig()
    if fld.kind not in (FieldKind.POLYNOMIAL, FieldKind.MOEBIUS):
        raise UnsupportedKind(f"return maps need a holomorphic field, got {fld.kind.value}")
    if not 1 <= k <= 3:
        raise ValueError("k must lie in [1, 3]")
    rho = np.asarray(sorted(rho_grid), dtype=float)
    if rho.size < k + 2 or np.any(rho <= 0):
        raise ValueError(f"need at least {k + 2} positive radii")

    _, derivative, _ = _value_and_derivative(fld, z0)
    if abs(derivative.imag) <= config.tau_center * abs(derivative):
        raise NoRotation(f"f'({z0}) = {derivative} has no rotation")

    others = [abs(s - z0) for s in _singular_points(fld, config) if abs(s - z0) > 1e-9 * (1 + abs(z0))]
    disk = 0.5 * min(others) if others else math.inf
    if rho[-1] >= disk:
        raise GridEscape(f"largest radius {rho[-1]:.3e} exceeds the analysis disk {disk:.3e}")

    turn = math.copysign(2 * math.pi, derivative.imag)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        returns = np.array(list(pool.map(
            lambda r: _return_value(fld, z0, r, turn, disk, config), rho)))

    def fit(degree):
        basis = np.vstack([rho ** j for j in range(1, degree + 1)]).T
        coeffs = np.linalg.lstsq(basis, returns, rcond=None)[0]
        return coeffs, np.linalg.pinv(basis)

    coeffs_k, pinv = fit(k)
    coeffs_next, _ = fit(k + 1)
    noise = 1e3 * (config.rtol * rho + config.atol)
    errors = np.abs(coeffs_k - coeffs_next[:k]) + np.abs(pinv) @ noise

    logger.debug(f"Return map at {z0}: V={coeffs_k}, error={errors}")
    return LyapunovReport(tuple(float(v) for v in coeffs_k),
                          f"return-map least squares, degrees {k} and {k + 1}",
                          tuple(float(e) for e in errors),
                          tuple(float(r) for r in rho), tuple(float(v) for v in returns))


# Quadratic fields

def bendixson_line(fld: Field) -> Tuple[float, float, float]:
    """(alpha, beta, gamma) of the zero-divergence line alpha + beta x + gamma y = 0"""
    if fld.kind is not FieldKind.POLYNOMIAL or fld.poly.degree != 2:
        raise WrongDegree("the Bendixson line is defined for quadratic polynomial fields")
    div = to_planar(fld).divergence().coeffs
    padded = np.zeros((2, 2))
    padded[:min(2, div.shape[0]), :min(2, div.shape[1])] = div[:2, :2]
    return float(padded[0, 0] / 2), float(padded[1, 0] / 2), float(padded[0, 1] / 2)


@dataclass(frozen=True)
class QuadraticClosedForms:
    E1: complex
    E2: complex
    eigenvalues: Tuple[complex, complex]
    traces: Tuple[float, float]
    V1: float
    V2: float
    V3: Optional[float]
    line: Tuple[float, float, float]


def quadratic_closed_forms(fld: Field,
                           config: Optional[AnalysisConfig] = None) -> QuadraticClosedForms:
    """Closed-form data of a quadratic field, taken with E1 translated to the origin"""
    config = config or AnalysisConfig()
    if fld.kind is not FieldKind.POLYNOMIAL or fld.poly.degree != 2:
        raise WrongDegree("closed forms are defined for quadratic polynomial fields")
    e1 = roots(fld.poly, config).locations[0]
    shifted = fld.poly.shift(e1)
    A1, A2 = complex(shifted.coeffs[1]), complex(shifted.coeffs[2])
    a1, b1 = A1.real, A1.imag
    a2, b2 = A2.real, A2.imag
    v3 = math.pi * a1 * (a2 ** 2 + b2 ** 2) / b1 ** 3 if b1 != 0 else None
    return QuadraticClosedForms(
        E1=e1, E2=e1 - A1 / A2, eigenvalues=(A1, -A1), traces=(2 * a1, -2 * a1),
        V1=a1, V2=0.0, V3=v3, line=bendixson_line(fld))
