#!/usr/bin/env python3
"""
Holomorphic phase-portrait analyzer
Ties parsing, local and infinity analysis, first integrals, flow and the
catalogs together behind one object used by the CLI
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from rich.console import Console
from rich.logging import RichHandler

from utils.catalog import CATALOG, Family, catalog
from utils.config import AnalysisConfig
from utils.error_handler import (BranchJump, HoloError, NoMatch, OutputError, SingularPath,
                                 UnsupportedKind, error_handler, safe_execute)
from utils.fieldspec import Field, FieldKind, parse_field, print_field
from utils.flow import integrate
from utils.infinity import infinite_equilibria, infinity_local_model
from utils.integrals import LevelGrid, eval_H, first_integral, level_grid, potential
from utils.local import classify_equilibria, normal_form
from utils.portrait import classify_portrait
from utils.render_svg import RenderSpec, build_scene, render_portrait

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

FieldLike = Union[str, Field]


def setup_logging(level: str = 'INFO', log_dir: Optional[Union[str, Path]] = None) -> logging.Logger:
    """Configure the root logger: rich output on stderr plus an optional log file"""
    handlers: List[logging.Handler] = [
        RichHandler(console=Console(stderr=True), show_path=False, markup=False)
    ]
    if log_dir:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_dir / 'holo.log')
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format='%(name)s - %(message)s', handlers=handlers, force=True)
    return logging.getLogger(__name__)


logger = logging.getLogger(__name__)


def _pair(c: complex) -> List[float]:
    return [float(c.real), float(c.imag)]


class PortraitAnalyzer:
    """Front door to the analysis modules"""

    def __init__(self, config: Optional[AnalysisConfig] = None):
        self.config = config or AnalysisConfig()

    def parse(self, expr: FieldLike) -> Field:
        if isinstance(expr, Field):
            return expr
        return parse_field(expr)

    # Reports

    def _normal_forms(self, fld: Field, points) -> List[Dict[str, Any]]:
        if fld.kind not in (FieldKind.POLYNOMIAL, FieldKind.INVERSE, FieldKind.MOEBIUS):
            return []
        forms = []
        for e in points:
            try:
                forms.append({'id': e.id, **normal_form(fld, e.location, self.config).to_json()})
            except HoloError as err:
                logger.warning(f"No normal form at {e.id}: {err}")
        return forms

    def analyze(self, expr: FieldLike, classify: bool = True) -> Dict[str, Any]:
        """Full report of one field"""
        fld = self.parse(expr)
        logger.info(f"Analyzing {print_field(fld)}")
        report: Dict[str, Any] = {
            'field': print_field(fld),
            'kind': fld.kind.value,
            'equilibria': [],
            'normal_forms': [],
            'infinity': [],
            'infinity_model': None,
            'first_integral': first_integral(fld, self.config).to_json(),
            'classification': None,
            'flags': [],
        }
        if fld.kind is FieldKind.ESSENTIAL:
            report['flags'].append('essential singularity: local analysis only')
            return report

        points = classify_equilibria(fld, self.config)
        report['equilibria'] = [e.to_json() for e in points]
        report['flags'] += [f"{e.id} in tolerance band" for e in points if e.in_band]
        report['normal_forms'] = self._normal_forms(fld, points)
        if fld.kind in (FieldKind.POLYNOMIAL, FieldKind.CONJUGATE):
            report['infinity'] = [p.to_json() for p in infinite_equilibria(fld, self.config)]
        model = infinity_local_model(fld)
        report['infinity_model'] = model.to_json()
        if model.boundary:
            report['flags'].append('infinity model on the n = m boundary')

        if classify:
            try:
                result = classify_portrait(fld, self.config)
                report['classification'] = result.to_json()
                if result.signature is not None and not result.signature.complete:
                    report['flags'].append('separatrix connections incomplete')
            except (UnsupportedKind, NoMatch) as e:
                error_handler.handle_error(e, 'classify')
                report['flags'].append(f"classification: {e}")
        return report

    def _analyze_or_report(self, expr: FieldLike) -> Dict[str, Any]:
        outcome = safe_execute(self.analyze, expr, context='analyze')
        if outcome['success']:
            return outcome['result']
        error = outcome['error']
        return {'field': str(expr), 'error': error['error_type'],
                'message': error['error_message'], 'exit_code': error['exit_code']}

    def analyze_many(self, exprs: Iterable[FieldLike]) -> List[Dict[str, Any]]:
        """Reports for a batch of fields, in input order; failures become error entries"""
        exprs = list(exprs)
        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            return list(pool.map(self._analyze_or_report, exprs))

    # Trajectories and grids

    def integrate(self, expr: FieldLike, z0: complex, t: float,
                  backward: bool = False) -> List[Tuple[float, float, float, float]]:
        """Rows (t, x, y, H) along the trajectory from z0"""
        fld = self.parse(expr)
        traj = integrate(fld, z0, t, -1 if backward else 1, config=self.config)
        fi = first_integral(fld, self.config)
        try:
            H = eval_H(fi, traj.points, self.config)
        except (BranchJump, SingularPath) as e:
            logger.warning(f"H column left empty: {e}")
            H = [math.nan] * len(traj.points)
        logger.info(f"Trajectory ended with {traj.terminal.value} after {len(traj.points)} points")
        return [(float(s), float(z.real), float(z.imag), float(h))
                for s, z, h in zip(traj.times, traj.points, H)]

    @staticmethod
    def write_rows(rows: List[Tuple[float, ...]], out, header=('t', 'x', 'y', 'H')) -> None:
        writer = csv.writer(out)
        writer.writerow(header)
        for row in rows:
            writer.writerow(['' if math.isnan(v) else repr(v) for v in row])

    def potential_grid(self, expr: FieldLike, n: int = 101,
                       extent: Optional[float] = None) -> LevelGrid:
        """Grid of the stream function (conjugate fields) or of H = Im G"""
        fld = self.parse(expr)
        if fld.kind is FieldKind.CONJUGATE:
            evaluator = potential(fld).H
        else:
            evaluator = first_integral(fld, self.config).H
        if extent is None:
            points = [] if fld.kind is FieldKind.ESSENTIAL else classify_equilibria(fld, self.config)
            extent = 2.0 * (1.0 + max((abs(e.location) for e in points), default=0.0))
        return level_grid(evaluator, extent, n)

    # Rendering

    def render(self, expr: FieldLike, spec: Optional[RenderSpec] = None,
               svg_path: Optional[Union[str, Path]] = None) -> str:
        fld = self.parse(expr)
        spec = spec or RenderSpec(seed=self.config.seed)
        scene = build_scene(fld, spec, self.config)
        text = render_portrait(fld, scene, spec)
        if svg_path:
            try:
                Path(svg_path).write_text(text)
            except OSError as e:
                raise OutputError(f"Cannot write SVG to {svg_path}: {e}")
            logger.info(f"Wrote portrait to {svg_path}")
        return text

    # Catalogs

    @staticmethod
    def catalog_rows(family: Optional[str] = None) -> List[Dict[str, str]]:
        families = [Family(family)] if family else list(CATALOG)
        return [e.to_row() for fam in families for e in catalog(fam)]
