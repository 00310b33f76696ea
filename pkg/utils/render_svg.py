"""
SVG rendering of phase portraits on the Poincaré disk

Points are mapped to the disk by z -> z/(1+|z|); equator points sit on the
unit circle at their direction angle. All numbers are written with a fixed
precision so repeated renders are byte-identical.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import AnalysisConfig
from .error_handler import BadStart, CriticalPointHit, HoloError, OutputError
from .fieldspec import Field, FieldKind, print_field
from .flow import Separatrix, flow_geometry, trace_level_curve, trace_orbit, trace_separatrices
from .infinity import InfinityKind, InfinityPoint
from .integrals import first_integral
from .local import Equilibrium, EquilibriumKind

logger = logging.getLogger(__name__)

PREAMBLE = """\
<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">
<rect x="0" y="0" width="{size}" height="{size}" style="fill:#ffffff"/>
"""

POSTAMBLE = "</svg>\n"

DEFAULT_COLORS = {
    EquilibriumKind.CENTER.value: '#2e7d32',
    EquilibriumKind.FOCUS_REPELLING.value: '#c62828',
    EquilibriumKind.FOCUS_ATTRACTING.value: '#1565c0',
    EquilibriumKind.NODE_REPELLING.value: '#ef6c00',
    EquilibriumKind.NODE_ATTRACTING.value: '#283593',
    EquilibriumKind.MULTIPLE_ELLIPTIC.value: '#6a1b9a',
    EquilibriumKind.POLE.value: '#000000',
    EquilibriumKind.SADDLE_CONJUGATE.value: '#00838f',
    InfinityKind.SADDLE.value: '#00838f',
    InfinityKind.NODE_REPELLING.value: '#ef6c00',
    InfinityKind.NODE_ATTRACTING.value: '#283593',
    'separatrix': '#d81b60',
    'orbit': '#9e9e9e',
    'level': '#546e7a',
    'equator': '#000000',
}


@dataclass(frozen=True)
class RenderSpec:
    disk_radius_px: int = 300
    sample_orbit_count: int = 12
    seed: int = 0
    include_separatrices: bool = True
    levels: int = 0
    orbit_arclength: float = 60.0
    colors: Dict[str, str] = dc_field(default_factory=lambda: dict(DEFAULT_COLORS))

    def color(self, key: str) -> str:
        return self.colors.get(key, '#000000')


def disk_point(z: complex) -> complex:
    return z / (1 + abs(z))


class SvgCanvas:
    """Accumulates SVG elements in disk coordinates ([-1, 1]², y up)"""

    def __init__(self, radius_px: int, margin_px: int = 20):
        self.radius = radius_px
        self.margin = margin_px
        self.size = 2 * (radius_px + margin_px)
        self.commands: List[str] = []

    def _xy(self, w: complex) -> Tuple[str, str]:
        x = self.margin + self.radius * (1 + w.real)
        y = self.margin + self.radius * (1 - w.imag)
        return f"{x:.3f}", f"{y:.3f}"

    def circle(self, w: complex, r_px: float, stroke: str, fill: str = 'none',
               width: float = 1.0):
        x, y = self._xy(w)
        self.commands.append(
            f'<circle cx="{x}" cy="{y}" r="{r_px:.3f}" '
            f'style="fill:{fill};stroke:{stroke};stroke-width:{width:.2f}"/>')

    def polyline(self, points: Sequence[complex], color: str, width: float = 1.0):
        if len(points) < 2:
            return
        coords = ' '.join(','.join(self._xy(w)) for w in points)
        self.commands.append(
            f'<polyline points="{coords}" style="fill:none;stroke:{color};stroke-width:{width:.2f}"/>')

    def polygon(self, points: Sequence[complex], color: str, fill: str = 'none'):
        coords = ' '.join(','.join(self._xy(w)) for w in points)
        self.commands.append(
            f'<polygon points="{coords}" style="fill:{fill};stroke:{color};stroke-width:1.00"/>')

    def text(self, w: complex, text: str, color: str = '#666666'):
        x, y = self._xy(w)
        self.commands.append(
            f'<text x="{x}" y="{y}" fill="{color}" font-size="11" '
            f'font-family="monospace">{text}</text>')

    def svg(self) -> str:
        return PREAMBLE.format(size=self.size) + '\n'.join(self.commands) + '\n' + POSTAMBLE

    def save(self, path: Union[str, Path]) -> None:
        try:
            Path(path).write_text(self.svg())
        except OSError as e:
            raise OutputError(f"Cannot write SVG to {path}: {e}")


@dataclass(frozen=True)
class DiskScene:
    """Everything drawn on one portrait"""

    equilibria: Tuple[Equilibrium, ...]
    infinity: Tuple[InfinityPoint, ...]
    separatrices: Tuple[Separatrix, ...]
    orbits: Tuple[np.ndarray, ...]
    levels: Tuple[np.ndarray, ...]


def _seed_points(spec: RenderSpec, avoid: Sequence[complex], scale: float) -> List[complex]:
    rng = np.random.default_rng(spec.seed)
    seeds = []
    while len(seeds) < spec.sample_orbit_count:
        r = 0.9 * math.sqrt(rng.uniform())
        w = r * cmath.exp(2j * math.pi * rng.uniform())
        z = w / (1 - abs(w))
        if all(abs(z - a) > 1e-3 * scale for a in avoid):
            seeds.append(z)
    return seeds


def _sample_orbits(fld: Field, spec: RenderSpec, config: AnalysisConfig,
                   avoid: Sequence[complex], scale: float) -> List[np.ndarray]:
    orbits = []
    for z0 in _seed_points(spec, avoid, scale):
        try:
            fwd = trace_orbit(fld, z0, 1, spec.orbit_arclength * scale, config)
            bwd = trace_orbit(fld, z0, -1, spec.orbit_arclength * scale, config)
        except BadStart:
            continue
        orbits.append(np.concatenate((bwd.points[::-1], fwd.points[1:])))
    return orbits


def _level_curves(fld: Field, spec: RenderSpec, config: AnalysisConfig,
                  scale: float) -> List[np.ndarray]:
    fi = first_integral(fld, config)
    curves = []
    for k in range(spec.levels):
        seed = scale * cmath.exp(2j * math.pi * (k + 0.5) / spec.levels)
        for direction in (1, -1):
            try:
                curve = trace_level_curve(fi, seed, 8 * scale, config, direction)
            except CriticalPointHit as e:
                logger.debug(f"Level curve from {seed:.4g} stopped: {e}")
                continue
            curves.append(curve.points)
            if curve.closed:
                break
    return curves


def build_scene(fld: Field, spec: RenderSpec,
                config: Optional[AnalysisConfig] = None) -> DiskScene:
    config = config or AnalysisConfig()
    geom = flow_geometry(fld, config)
    points = geom.equilibria + geom.poles
    separatrices: List[Separatrix] = []
    if spec.include_separatrices:
        try:
            separatrices = trace_separatrices(fld, config)
        except HoloError as e:
            logger.warning(f"Separatrices left out of the portrait: {e}")
    avoid = [e.location for e in points] + [z for _, z in geom.singular]
    orbits = _sample_orbits(fld, spec, config, avoid, geom.scale)
    levels: List[np.ndarray] = []
    if spec.levels and fld.kind is not FieldKind.ESSENTIAL:
        levels = _level_curves(fld, spec, config, geom.scale)
    return DiskScene(tuple(points), geom.infinity, tuple(separatrices), tuple(orbits),
                     tuple(levels))


def _project(points: np.ndarray) -> List[complex]:
    return [disk_point(complex(z)) for z in points if cmath.isfinite(z)]


def render_portrait(fld: Field, scene: DiskScene, spec: RenderSpec) -> str:
    """SVG text of the portrait"""
    canvas = SvgCanvas(spec.disk_radius_px)
    canvas.circle(0j, spec.disk_radius_px, spec.color('equator'))

    for orbit in scene.orbits:
        canvas.polyline(_project(orbit), spec.color('orbit'), 0.6)
    for curve in scene.levels:
        canvas.polyline(_project(curve), spec.color('level'), 0.8)
    for sep in scene.separatrices:
        canvas.polyline(_project(sep.curve.points), spec.color('separatrix'), 1.4)

    for p in scene.infinity:
        w = p.direction
        color = spec.color(p.kind.value)
        if p.kind is InfinityKind.SADDLE:
            d = 6 / spec.disk_radius_px
            canvas.polygon([w + d, w + 1j * d, w - d, w - 1j * d], color, color)
        else:
            canvas.circle(w, 4, color, color)

    for e in scene.equilibria:
        w = disk_point(e.location)
        color = spec.color(e.kind.value)
        if e.is_pole:
            canvas.circle(w, 5, color, '#ffffff', 1.5)
        elif e.kind is EquilibriumKind.CENTER:
            canvas.circle(w, 5, color, 'none', 1.5)
        else:
            canvas.circle(w, 4, color, color)
        canvas.text(w + 0.02 + 0.02j, e.id)

    canvas.text(-1 + 0.02j - 0.02, print_field(fld)[:80])
    logger.debug(f"Rendered {len(canvas.commands)} SVG elements")
    return canvas.svg()
