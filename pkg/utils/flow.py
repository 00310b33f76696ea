"""
Trajectories, limit sets, separatrices and level curves.

Rational kinds are integrated on the desingularized field N·conj(D), which
shares orbits and orientation with N/D; elapsed time is carried as a second
state component with dt/ds = |D|². Separatrices are traced with the
compactified arclength parameter dz/ds = (1+|z|)·g/|g|, so escapes and
approaches to multiple points finish in bounded parameter length.
Both are stepped with scipy's RK45; crossings are located on its dense output.
"""

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import RK45

from .config import AnalysisConfig
from .cpoly import taylor_coeffs
from .error_handler import (BadStart, CriticalPointHit, InconclusiveLimit, SingularPath,
                            Undetermined)
from .fieldspec import Field, FieldKind
from .infinity import (InfinityKind, InfinityPoint, chart_to_plane, compactify,
                       infinite_equilibria)
from .local import Equilibrium, EquilibriumKind, classify_equilibria

logger = logging.getLogger(__name__)


class Terminal(str, Enum):
    TIME_EXHAUSTED = 'TimeExhausted'
    CONVERGED = 'ConvergedToEquilibrium'
    ESCAPED = 'EscapedToInfinity'
    HIT_SINGULARITY = 'HitSingularity'
    CLOSED_ORBIT = 'ClosedOrbit'


@dataclass(frozen=True)
class Trajectory:
    points: np.ndarray
    times: np.ndarray
    terminal: Terminal
    target: Optional[str] = None
    direction: Optional[float] = None
    period: Optional[float] = None
    parameter: str = 'time'

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    def to_json(self) -> Dict[str, Any]:
        return {
            'terminal': self.terminal.value,
            'target': self.target,
            'direction': self.direction,
            'period': self.period,
            'parameter': self.parameter,
            'points': [[float(z.real), float(z.imag)] for z in self.points],
            'times': [float(t) for t in self.times],
        }


@dataclass(frozen=True)
class LimitDescriptor:
    """Where an orbit ends: an equilibrium, a singular point, infinity or a closed orbit"""

    kind: str
    id: Optional[str] = None
    angle: Optional[float] = None

    @property
    def token(self) -> str:
        if self.id:
            return self.id
        if self.kind == 'infinity' and self.angle is not None:
            return f"inf@{self.angle:.4f}"
        return self.kind

    def to_json(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'id': self.id, 'angle': self.angle}


UNKNOWN = LimitDescriptor('unknown')
CLOSED = LimitDescriptor('closed')


@dataclass(frozen=True)
class Separatrix:
    origin: str
    branch: int
    curve: Trajectory
    alpha: LimitDescriptor
    omega: LimitDescriptor
    launch_angle: float = 0.0
    flagged: bool = False

    @property
    def far_end(self) -> LimitDescriptor:
        return self.omega if self.alpha.token == self.origin else self.alpha

    def to_json(self) -> Dict[str, Any]:
        return {'origin': self.origin, 'branch': self.branch, 'alpha': self.alpha.token,
                'omega': self.omega.token, 'flagged': self.flagged,
                'curve': self.curve.to_json()['points']}


# Field geometry shared by every integration of one field

@dataclass(frozen=True)
class FlowGeometry:
    field: Field
    equilibria: Tuple[Equilibrium, ...]
    poles: Tuple[Equilibrium, ...]
    singular: Tuple[Tuple[str, complex], ...]
    infinity: Tuple[InfinityPoint, ...]
    scale: float


@lru_cache(maxsize=128)
def flow_geometry(fld: Field, config: AnalysisConfig) -> FlowGeometry:
    if fld.kind is FieldKind.ESSENTIAL:
        equilibria, poles, singular = (), (), (('X0', 0j),)
    else:
        points = classify_equilibria(fld, config)
        equilibria = tuple(e for e in points if not e.is_pole)
        poles = tuple(e for e in points if e.is_pole)
        singular = tuple((e.id, e.location) for e in poles)
    infinity = ()
    if fld.kind in (FieldKind.POLYNOMIAL, FieldKind.CONJUGATE):
        infinity = tuple(infinite_equilibria(fld, config))
    sizes = [abs(e.location) for e in equilibria] + [abs(z) for _, z in singular]
    return FlowGeometry(fld, equilibria, poles, singular, infinity, 1.0 + max(sizes, default=0.0))


def desingularized(fld: Field) -> Tuple[Callable[[complex], complex], Callable[[complex], float], bool]:
    """(g, weight, constant_weight) with g = f·weight and dt/ds = weight"""
    if fld.kind is FieldKind.POLYNOMIAL:
        p = fld.poly
        return p, (lambda z: 1.0), True
    if fld.kind in (FieldKind.CONJUGATE, FieldKind.INVERSE):
        p = fld.poly
        if fld.kind is FieldKind.CONJUGATE:
            return (lambda z: p(z).conjugate()), (lambda z: 1.0), True
        return (lambda z: p(z).conjugate()), (lambda z: abs(p(z)) ** 2), False
    if fld.kind is FieldKind.MOEBIUS:
        A, B, C, D = fld.moebius_params
        return ((lambda z: (A * z + B) * (C * z + D).conjugate()),
                (lambda z: abs(C * z + D) ** 2), C == 0)
    n, m = fld.demo_params

    def essential(z):
        if z == 0:
            return 0j
        try:
            return z ** m * cmath.exp(1 / z ** n)
        except OverflowError:
            return complex(math.inf, math.inf)
    return essential, (lambda z: 1.0), True


def _bisect(fn: Callable[[float], float], a: float, b: float, iterations: int = 60) -> float:
    fa = fn(a)
    for _ in range(iterations):
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if (fm >= 0) == (fa >= 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _near(z: complex, points, radius_fn) -> Optional[str]:
    for ident, loc in points:
        if abs(z - loc) <= radius_fn(loc):
            return ident
    return None


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    seg = b - a
    if seg == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * seg.conjugate()).real / abs(seg) ** 2))
    return abs(a + t * seg - p)


def _run(geom: FlowGeometry, z0: complex, direction: int, mode: str, limit: float,
         config: AnalysisConfig) -> Trajectory:
    """Integrate in 'time' mode up to elapsed time limit, or in 'trace' mode up to parameter limit

    Both modes stop at config.t_cap: elapsed time in 'time' mode, the trace
    parameter in 'trace' mode. Trace mode also stops once the path is longer
    than config.arclength_cap. A cap or config.max_steps ends the orbit as
    TimeExhausted, which omega_limit resolves only through a diagnosed trend.
    """
    g, weight, constant = desingularized(geom.field)
    timed = mode == 'time'
    t_stop = min(limit, config.t_cap)

    def field_at(z):
        v = g(z)
        if not cmath.isfinite(v):
            raise SingularPath(f"field is not finite at {z:.6g}")
        return v

    if timed:
        def rhs(s, y):
            z = y[0]
            return np.array([direction * field_at(z), weight(z)], dtype=complex)
        y0 = np.array([z0, 0], dtype=complex)
        s_end = t_stop if constant else math.inf
        capture = config.tau_conv
    else:
        def rhs(s, y):
            z = y[0]
            v = field_at(z)
            size = abs(v)
            if size == 0:
                return np.zeros(1, dtype=complex)
            return np.array([direction * (1 + abs(z)) * v / size])
        y0 = np.array([z0], dtype=complex)
        s_end = t_stop
        capture = 1e-6

    equilibria = [(e.id, e.location) for e in geom.equilibria]
    radius = (lambda loc: capture * (1 + abs(loc)))

    v0 = direction * g(z0)
    normal = v0 / abs(v0) if v0 != 0 else 1.0
    close_tol = config.tau_close * (1 + abs(z0))

    def sigma(z):
        return ((z - z0) * normal.conjugate()).real

    def elapsed(y, s):
        return y[1].real if timed else s

    points, params = [z0], [0.0]
    terminal, target, angle, period = Terminal.TIME_EXHAUSTED, None, None, None
    went_behind = False
    length, steps = 0.0, 0
    solver = RK45(rhs, 0.0, y0, s_end, rtol=config.rtol, atol=config.atol)

    def finish_at(dense, s_star: float):
        y = dense(s_star)
        points.append(complex(y[0]))
        params.append(elapsed(y, s_star))

    try:
        while solver.status == 'running':
            if steps >= config.max_steps:
                logger.warning(f"Integration from {z0:.6g} stopped after {config.max_steps} steps")
                break
            a, s_prev = complex(solver.y[0]), solver.t
            message = solver.step()
            steps += 1
            if solver.status == 'failed':
                # steps underflow as the speed blows up next to a pole or the essential point
                near = _near(a, geom.singular, lambda loc: 0.1 * geom.scale)
                if near:
                    terminal, target = Terminal.HIT_SINGULARITY, near
                else:
                    logger.warning(f"Integration from {z0:.6g} stopped: {message}")
                break
            z = complex(solver.y[0])
            if not cmath.isfinite(z):
                terminal = Terminal.HIT_SINGULARITY
                break

            if timed and not constant and solver.y[1].real >= t_stop:
                dense = solver.dense_output()
                s_star = _bisect(lambda s: dense(s)[1].real - t_stop, s_prev, solver.t)
                finish_at(dense, s_star)
                break

            side_prev = sigma(a)
            side_now = sigma(z)
            if side_prev < 0:
                went_behind = True
            if went_behind and side_prev < 0 <= side_now:
                dense = solver.dense_output()
                s_star = _bisect(lambda s: sigma(complex(dense(s)[0])), s_prev, solver.t)
                crossing = complex(dense(s_star)[0])
                if abs(crossing - z0) <= close_tol:
                    finish_at(dense, s_star)
                    terminal, period = Terminal.CLOSED_ORBIT, params[-1]
                    break

            points.append(z)
            params.append(elapsed(solver.y, solver.t))

            if abs(z) > config.r_escape:
                terminal, angle = Terminal.ESCAPED, cmath.phase(z) % (2 * math.pi)
                break
            hit = next((i for i, loc in equilibria if _segment_distance(a, z, loc) <= radius(loc)), None)
            if hit:
                terminal, target = Terminal.CONVERGED, hit
                break
            hit = next((i for i, loc in geom.singular if _segment_distance(a, z, loc) <= radius(loc)), None)
            if hit:
                terminal, target = Terminal.HIT_SINGULARITY, hit
                break
            length += abs(z - a)
            if not timed and length > config.arclength_cap:
                break
    except SingularPath as e:
        logger.debug(f"Integration from {z0:.6g} left the domain of the field: {e}")
        terminal = Terminal.HIT_SINGULARITY
        if geom.singular:
            target = min(geom.singular, key=lambda p: abs(points[-1] - p[1]))[0]

    if terminal is Terminal.TIME_EXHAUSTED and went_behind and len(points) > 2 \
            and abs(points[-1] - z0) <= close_tol:
        terminal, period = Terminal.CLOSED_ORBIT, params[-1]

    times = direction * np.asarray(params) if timed else np.asarray(params)
    return Trajectory(np.asarray(points, dtype=complex), times, terminal, target, angle,
                      period, 'time' if timed else 'arclength')


def _check_start(geom: FlowGeometry, z0: complex, config: AnalysisConfig):
    near = _near(z0, geom.singular, lambda loc: config.tau_pole * (1 + abs(loc)))
    if near:
        raise BadStart(f"start point {z0} is at the singular point {near}")
    g, _, _ = desingularized(geom.field)
    if not cmath.isfinite(g(z0)):
        raise BadStart(f"field is not finite at {z0}")


def integrate(fld: Field, z0: complex, t_max: float, direction: int = 1,
              rtol: Optional[float] = None, atol: Optional[float] = None,
              config: Optional[AnalysisConfig] = None) -> Trajectory:
    """Trajectory of z' = f(z) from z0 for elapsed time t_max, forward or backward"""
    config = (config or AnalysisConfig()).updated(rtol=rtol, atol=atol)
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    geom = flow_geometry(fld, config)
    z0 = complex(z0)
    _check_start(geom, z0, config)
    if t_max > config.t_cap:
        logger.warning(f"t_max {t_max:g} exceeds the time cap; stopping at t = {config.t_cap:g}")
    traj = _run(geom, z0, direction, 'time', t_max, config)
    logger.debug(f"Integrated from {z0:.6g}: {traj.terminal.value} after {len(traj.points)} points")
    return traj


def trace_orbit(fld: Field, z0: complex, direction: int = 1, arclength: Optional[float] = None,
                config: Optional[AnalysisConfig] = None) -> Trajectory:
    """Orbit through z0 in the compactified arclength parameter"""
    config = config or AnalysisConfig()
    geom = flow_geometry(fld, config)
    z0 = complex(z0)
    _check_start(geom, z0, config)
    return _run(geom, z0, direction, 'trace', arclength or config.arclength_cap, config)


# Limit sets

def _nearest_infinity(geom: FlowGeometry, angle: float) -> LimitDescriptor:
    if not geom.infinity:
        return LimitDescriptor('infinity', None, angle)

    def gap(p: InfinityPoint) -> float:
        d = abs(p.theta - angle) % (2 * math.pi)
        return min(d, 2 * math.pi - d)
    best = min(geom.infinity, key=gap)
    return LimitDescriptor('infinity', best.id, best.theta)


def _diagnose_trend(geom: FlowGeometry, traj: Trajectory) -> LimitDescriptor:
    pts = traj.points
    if len(pts) < 10:
        raise Undetermined("too few points to diagnose the limit")
    tail = pts[len(pts) // 2:]
    slack = 1e-12 * geom.scale

    candidates = [(e.id, e.location, 'equilibrium') for e in geom.equilibria]
    candidates += [(i, loc, 'singular') for i, loc in geom.singular]
    for ident, loc, kind in candidates:
        d = np.abs(tail - loc)
        if np.all(np.diff(d) <= slack) and d[-1] < 0.5 * d[0] and d[-1] < 0.05 * geom.scale:
            return LimitDescriptor(kind, ident)

    radii = np.abs(tail)
    if np.all(np.diff(radii) >= -slack) and radii[-1] > 2 * radii[0] and radii[-1] > 10 * geom.scale:
        return _nearest_infinity(geom, cmath.phase(tail[-1]) % (2 * math.pi))
    raise Undetermined(f"no monotone trend after {len(pts)} points")


def omega_limit(fld: Field, traj: Trajectory,
                config: Optional[AnalysisConfig] = None) -> LimitDescriptor:
    """Limit of the trajectory in its direction of integration"""
    config = config or AnalysisConfig()
    geom = flow_geometry(fld, config)
    if traj.terminal is Terminal.CONVERGED:
        return LimitDescriptor('equilibrium', traj.target)
    if traj.terminal is Terminal.HIT_SINGULARITY:
        if traj.target:
            return LimitDescriptor('singular', traj.target)
        return _diagnose_trend(geom, traj)
    if traj.terminal is Terminal.ESCAPED:
        return _nearest_infinity(geom, traj.direction)
    if traj.terminal is Terminal.CLOSED_ORBIT:
        return CLOSED
    return _diagnose_trend(geom, traj)


# Separatrices

@dataclass(frozen=True)
class _Launch:
    origin: str
    branch: int
    z: complex
    direction: int
    angle: float
    both_ways: bool = False


def _infinity_launches(geom: FlowGeometry, config: AnalysisConfig) -> List[_Launch]:
    g, _, _ = desingularized(geom.field)
    R = max(1.0 / config.eps_sep_infinity, 100.0 * geom.scale)
    w = 1.0 / R
    launches = []
    for point in geom.infinity:
        if point.kind is not InfinityKind.SADDLE:
            continue
        J = compactify(geom.field, point.chart).jacobian(point.s)
        lam = J[1, 1]
        v_s, v_w = J[0, 1], lam - J[0, 0]
        if v_w == 0:
            v_s, v_w = 0.0, 1.0
        z = chart_to_plane(point.chart, point.s + (v_s / v_w) * w, w)
        radial = (g(z) * z.conjugate()).real
        launches.append(_Launch(point.id, 0, z, 1 if radial < 0 else -1, point.theta))
    return launches


def _characteristic(origin: str, loc: complex, angles: List[float], g, eps: float,
                    with_midpoints: bool) -> List[_Launch]:
    launches = []
    for j, phi in enumerate(angles):
        z = loc + eps * cmath.exp(1j * phi)
        outward = (g(z) * cmath.exp(-1j * phi)).real > 0
        launches.append(_Launch(origin, j, z, 1 if outward else -1, phi))
    if with_midpoints:
        k = len(angles)
        for j, phi in enumerate(angles):
            mid = phi + math.pi / k
            launches.append(_Launch(origin, k + j, loc + eps * cmath.exp(1j * mid), 1, mid, True))
    return launches


def _finite_launches(geom: FlowGeometry, config: AnalysisConfig) -> List[_Launch]:
    fld = geom.field
    g, _, _ = desingularized(fld)
    launches = []
    for e in geom.equilibria:
        eps = config.eps_sep_finite * (1 + abs(e.location))
        if fld.kind is FieldKind.POLYNOMIAL and e.kind is EquilibriumKind.MULTIPLE_ELLIPTIC:
            m = e.order
            c = complex(taylor_coeffs(fld.poly, e.location)[m])
            angles = [(-cmath.phase(c) + j * math.pi) / (m - 1) for j in range(2 * m - 2)]
            launches += _characteristic(e.id, e.location, angles, g, eps, True)
        elif fld.kind is FieldKind.CONJUGATE:
            m = e.order
            K = complex(taylor_coeffs(fld.poly, e.location)[m]).conjugate()
            angles = [(cmath.phase(K) + j * math.pi) / (m + 1) for j in range(2 * m + 2)]
            launches += _characteristic(e.id, e.location, angles, g, eps, False)

    for pole in geom.poles:
        ident, loc = pole.id, pole.location
        if fld.kind is FieldKind.INVERSE:
            m = pole.order
            K = complex(taylor_coeffs(fld.poly, loc)[m]).conjugate()
        elif fld.kind is FieldKind.MOEBIUS:
            A, B, C, D = fld.moebius_params
            m, K = 1, (A * loc + B) * C.conjugate()
        else:
            continue
        eps = config.eps_sep_finite * (1 + abs(loc))
        angles = [(cmath.phase(K) + j * math.pi) / (m + 1) for j in range(2 * m + 2)]
        launches += _characteristic(ident, loc, angles, g, eps, False)
    return launches


def _limit_or_flag(geom: FlowGeometry, traj: Trajectory, config: AnalysisConfig):
    try:
        return omega_limit(geom.field, traj, config), False
    except InconclusiveLimit as e:
        logger.warning(f"Separatrix limit left unresolved: {e}")
        return UNKNOWN, True


def _trace_launch(geom: FlowGeometry, launch: _Launch, config: AnalysisConfig) -> Separatrix:
    origin = LimitDescriptor('origin', launch.origin)
    cap = config.arclength_cap
    if launch.both_ways:
        fwd = _run(geom, launch.z, 1, 'trace', cap, config)
        bwd = _run(geom, launch.z, -1, 'trace', cap, config)
        omega, flag_w = _limit_or_flag(geom, fwd, config)
        alpha, flag_a = _limit_or_flag(geom, bwd, config)
        points = np.concatenate((bwd.points[::-1], fwd.points[1:]))
        times = np.concatenate((-bwd.times[::-1], fwd.times[1:]))
        curve = Trajectory(points, times, fwd.terminal, fwd.target, fwd.direction,
                           None, 'arclength')
        return Separatrix(launch.origin, launch.branch, curve, alpha, omega,
                          launch.angle, flag_w or flag_a)

    traj = _run(geom, launch.z, launch.direction, 'trace', cap, config)
    far, flagged = _limit_or_flag(geom, traj, config)
    if launch.direction > 0:
        return Separatrix(launch.origin, launch.branch, traj, origin, far, launch.angle, flagged)
    return Separatrix(launch.origin, launch.branch, traj, far, origin, launch.angle, flagged)


def trace_separatrices(fld: Field, config: Optional[AnalysisConfig] = None) -> List[Separatrix]:
    """Separatrices from infinity saddles, multiple points, stagnation saddles and poles"""
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.ESSENTIAL:
        logger.info("Essential demo fields have no traced separatrices")
        return []
    geom = flow_geometry(fld, config)
    launches = _infinity_launches(geom, config) + _finite_launches(geom, config)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        traced = list(pool.map(lambda l: _trace_launch(geom, l, config), launches))

    traced.sort(key=lambda s: (s.origin, s.branch))
    kept: List[Separatrix] = []
    for sep in traced:
        far = sep.far_end.token
        duplicate = sep.origin != far and any(
            k.origin == far and k.far_end.token == sep.origin for k in kept)
        if duplicate:
            continue
        kept.append(sep)

    flagged = sum(s.flagged for s in kept)
    logger.info(f"Traced {len(kept)} separatrices ({flagged} flagged)")
    return kept


# Level curves

@dataclass(frozen=True)
class LevelCurve:
    points: np.ndarray
    level: float
    residual: float
    closed: bool
    length: float

    def to_json(self) -> Dict[str, Any]:
        return {'level': self.level, 'residual': self.residual, 'closed': self.closed,
                'points': [[float(z.real), float(z.imag)] for z in self.points]}


def trace_level_curve(fi, seed: complex, arc_len: float,
                      config: Optional[AnalysisConfig] = None, direction: int = 1) -> LevelCurve:
    """Predictor-corrector tracing of the level set of H = Im G through seed"""
    config = config or AnalysisConfig()
    seed = complex(seed)

    def grad(z):
        gx, gy = fi.gradient(z.real, z.imag)
        return complex(gx, gy)

    if abs(grad(seed)) <= config.tau_grad:
        raise CriticalPointHit(f"gradient vanishes at the seed {seed}", seed)

    level = fi.H(seed.real, seed.imag)

    def offset_from(z, off_z, w):
        if hasattr(fi, 'delta'):
            return off_z + fi.delta(z, w).imag
        return fi.H(w.real, w.imag) - level

    tol = 1e-9 * (1 + abs(level))
    points = [seed]
    off_z = 0.0
    residual = 0.0
    travelled = 0.0
    closed = False
    h_nominal = min(0.02, arc_len / 50)

    while travelled < arc_len:
        z = points[-1]
        n = grad(z)
        if abs(n) <= config.tau_grad:
            raise CriticalPointHit(f"level curve reached a critical point near {z}", z)
        tangent = direction * 1j * n / abs(n)
        h = min(h_nominal * (1 + abs(z)), arc_len - travelled)
        for _ in range(30):
            w = z + h * tangent
            offset = offset_from(z, off_z, w)
            for _ in range(10):
                if abs(offset) < tol:
                    break
                gw = grad(w)
                if abs(gw) <= config.tau_grad:
                    raise CriticalPointHit(f"level curve reached a critical point near {w}", w)
                w_next = w - offset * gw / abs(gw) ** 2
                offset = offset_from(w, offset, w_next)
                w = w_next
            if abs(offset) < tol and abs(w - z) < 2 * h:
                break
            h *= 0.5
        else:
            raise CriticalPointHit(f"corrector failed near {z}", z)

        residual = max(residual, abs(offset))
        off_z = offset
        travelled += abs(w - z)
        points.append(w)
        if travelled > 4 * h_nominal and _segment_distance(z, w, seed) < 0.5 * h_nominal * (1 + abs(seed)):
            closed = True
            points.append(seed)
            break

    return LevelCurve(np.asarray(points, dtype=complex), level, residual, closed, travelled)
