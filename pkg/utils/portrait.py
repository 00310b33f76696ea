"""
Topological signatures of fields on the Poincaré disk and catalog matching
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import CUBIC_ALIASES, CatalogEntry, Family, catalog, entry
from .config import AnalysisConfig
from .error_handler import NoMatch, UnsupportedKind
from .fieldspec import Field, FieldKind, parse_field
from .flow import Separatrix, trace_separatrices
from .infinity import InfinityKind, InfinityPoint, infinite_equilibria, infinity_local_model
from .local import Equilibrium, EquilibriumKind, classify_equilibria, classify_simple

logger = logging.getLogger(__name__)


class Confidence(str, Enum):
    EXACT = 'Exact'
    MULTISET_ONLY = 'MultisetOnly'
    FLAGGED = 'Flagged'


class GeometryHint(str, Enum):
    COLLINEAR = 'Collinear'
    TRIANGLE = 'Triangle'
    BORDER = 'Border'
    QUADRILATERAL = 'Quadrilateral'
    NONE = 'None'


_REVERSED = {'F+': 'F-', 'F-': 'F+', 'N+': 'N-', 'N-': 'N+', '>': '<', '<': '>'}

# (order, normalized location, normalized eigenvalue) per finite point
Profile = Tuple[Tuple[int, complex, complex], ...]


def _reverse(token: str) -> str:
    return _REVERSED.get(token, token)


def reversal_key(tokens: Sequence[str]) -> Tuple[str, ...]:
    """Sorted token multiset, canonical under reversing time"""
    forward = tuple(sorted(tokens))
    backward = tuple(sorted(_reverse(t) for t in tokens))
    return min(forward, backward)


@dataclass(frozen=True)
class Signature:
    kind: FieldKind
    degree: Optional[int]
    finite_multiset: Tuple[str, ...]
    infinity_summary: Tuple[Optional[int], Tuple[str, ...]]
    connections: Tuple[Tuple[str, str], ...]
    geometry_hint: GeometryHint
    connection_code: Optional[str]
    complete: bool
    in_band: bool
    profile: Profile

    @property
    def key(self) -> Tuple[str, ...]:
        return reversal_key(self.finite_multiset)

    def to_json(self) -> Dict[str, Any]:
        pairs, kinds = self.infinity_summary
        return {
            'finite_multiset': list(self.finite_multiset),
            'infinity': {'pair_count': pairs, 'kinds': list(kinds)},
            'connections': [list(c) for c in self.connections],
            'geometry_hint': self.geometry_hint.value,
            'connection_code': self.connection_code,
            'complete': self.complete,
            'in_band': self.in_band,
        }


@dataclass(frozen=True)
class Classification:
    family: Family
    entry: CatalogEntry
    confidence: Confidence
    candidates: Tuple[str, ...]
    signature: Optional[Signature] = None

    @property
    def label(self) -> str:
        return self.entry.label

    @property
    def coarse(self) -> str:
        return self.entry.coarse_label

    def to_json(self) -> Dict[str, Any]:
        return {
            'family': self.family.value,
            'label': self.label,
            'coarse': self.coarse,
            'confidence': self.confidence.value,
            'candidates': list(self.candidates),
            'signature': self.signature.to_json() if self.signature else None,
        }


# Geometry of four simple equilibria

def _max_line_distance(points: np.ndarray) -> float:
    """Largest distance from the total least squares line through the points"""
    xy = np.column_stack((points.real, points.imag))
    centered = xy - xy.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    normal = vt[-1]
    return float(np.max(np.abs(centered @ normal)))


def _orientation(a: complex, b: complex, c: complex) -> int:
    cross = (b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real)
    return int(cross > 0) - int(cross < 0)


def geometry_hint(locations: Sequence[complex], config: Optional[AnalysisConfig] = None) -> GeometryHint:
    """How four points sit in the plane"""
    config = config or AnalysisConfig()
    if len(locations) != 4:
        return GeometryHint.NONE
    pts = np.array([complex(round(z.real, 12), round(z.imag, 12)) for z in locations])
    diameter = max(abs(a - b) for a, b in combinations(pts, 2))
    tol = config.tau_line * diameter

    if _max_line_distance(pts) <= tol:
        return GeometryHint.COLLINEAR
    if any(_max_line_distance(np.array(trio)) <= tol for trio in combinations(pts, 3)):
        return GeometryHint.BORDER
    for i in range(4):
        a, b, c = (pts[j] for j in range(4) if j != i)
        p = pts[i]
        signs = {_orientation(a, b, p), _orientation(b, c, p), _orientation(c, a, p)}
        if signs in ({1}, {-1}):
            return GeometryHint.TRIANGLE
    return GeometryHint.QUADRILATERAL


# Connection codes

def _separatrix_ends(saddles: List[InfinityPoint],
                     separatrices: List[Separatrix]) -> Dict[str, Tuple[str, str]]:
    """(direction, far end) of the interior separatrix of each infinity saddle"""
    ids = {p.id for p in saddles}
    ends: Dict[str, Tuple[str, str]] = {}
    for sep in separatrices:
        if sep.origin in ids and sep.origin in (sep.alpha.token, sep.omega.token):
            direction = '>' if sep.alpha.token == sep.origin else '<'
            ends[sep.origin] = (direction, sep.far_end.token)
    for sep in separatrices:
        a, w = sep.alpha.token, sep.omega.token
        if a in ids and a not in ends:
            ends[a] = ('>', w)
        if w in ids and w not in ends:
            ends[w] = ('<', a)
    return ends


def infinity_code(saddles: List[InfinityPoint], separatrices: List[Separatrix],
                  finite_tokens: Dict[str, str]) -> str:
    """Cyclic pattern of saddle separatrix targets, canonical under rotation,
    reflection and time reversal"""
    k = len(saddles)
    if k == 0:
        return ''
    index = {p.id: i for i, p in enumerate(saddles)}
    ends = _separatrix_ends(saddles, separatrices)
    rows = [ends.get(p.id, ('?', '?')) for p in saddles]

    best = None
    for backward in (False, True):
        for mirror in (False, True):
            for shift in range(k):
                order = [(shift - j if mirror else shift + j) % k for j in range(k)]
                position = {idx: pos for pos, idx in enumerate(order)}
                labels: Dict[str, int] = {}
                parts = []
                for idx in order:
                    direction, target = rows[idx]
                    if backward:
                        direction = _reverse(direction)
                    if target in index:
                        text = f"I{(position[index[target]] - position[idx]) % k}"
                    elif target in finite_tokens:
                        token = finite_tokens[target]
                        labels.setdefault(target, len(labels))
                        text = f"{_reverse(token) if backward else token}#{labels[target]}"
                    else:
                        text = '?'
                    parts.append(direction + text)
                code = ','.join(parts)
                if best is None or code < best:
                    best = code
    return best


def pole_code(points: List[Equilibrium], separatrices: List[Separatrix], F,
              config: AnalysisConfig) -> str:
    """Multiset of separatrix connections between critical points of the stream
    function, kept only where the stream values agree"""
    psi = {e.id: complex(F(e.location)).imag for e in points}
    order = {e.id: e.order for e in points}
    scale = 1.0 + max(abs(complex(F(e.location))) for e in points)
    edges = []
    for sep in separatrices:
        a, b = sep.alpha.token, sep.omega.token
        if a not in psi or b not in psi:
            continue
        if abs(psi[a] - psi[b]) > config.tau_psi * scale:
            logger.warning(f"Dropping connection {a}-{b}: stream values differ by "
                           f"{abs(psi[a] - psi[b]):.3g}")
            continue
        if a == b:
            edges.append(f"P{order[a]}o")
        else:
            lo, hi = sorted((order[a], order[b]))
            edges.append(f"P{lo}~P{hi}")
    return ','.join(sorted(edges))


# Signatures

def _profile(points: List[Equilibrium]) -> Profile:
    if not points:
        return ()
    locs = np.array([e.location for e in points])
    center = locs.mean()
    spread = float(np.max(np.abs(locs - center))) or 1.0
    eigs = [e.eigenvalue or 0j for e in points]
    size = max(abs(v) for v in eigs) or 1.0
    rows = [(e.order, complex((e.location - center) / spread), complex(v / size))
            for e, v in zip(points, eigs)]
    rows.sort(key=lambda r: (r[0], round(r[1].real, 9), round(r[1].imag, 9)))
    return tuple(rows)


def profile_distance(a: Optional[Profile], b: Optional[Profile]) -> float:
    """Distance between two configurations of equilibria and eigenvalues"""
    if a is None or b is None or len(a) != len(b) or [r[0] for r in a] != [r[0] for r in b]:
        return math.inf
    return float(sum(abs(x[1] - y[1]) + abs(x[2] - y[2]) for x, y in zip(a, b)))


def signature(fld: Field, config: Optional[AnalysisConfig] = None, trace: bool = True) -> Signature:
    """Finite points, equator points, separatrix connections and geometry of a field

    With trace=False the separatrices are skipped and connections stay empty.
    """
    config = config or AnalysisConfig()
    if fld.kind is FieldKind.ESSENTIAL:
        raise UnsupportedKind("essential demo fields have no catalog signature")

    points = classify_equilibria(fld, config)
    tokens = tuple(sorted(e.token for e in points))
    in_band = any(e.in_band for e in points)

    infinity: List[InfinityPoint] = []
    if fld.kind in (FieldKind.POLYNOMIAL, FieldKind.CONJUGATE):
        infinity = infinite_equilibria(fld, config)
        summary = (len(infinity) // 2, tuple(sorted(p.token for p in infinity)))
    else:
        summary = (None, (infinity_local_model(fld).model,))

    simple = [e for e in points if e.order == 1 and e.kind is not EquilibriumKind.POLE]
    hint = GeometryHint.NONE
    if fld.kind is FieldKind.POLYNOMIAL and fld.degree == 4 and len(simple) == 4:
        hint = geometry_hint([e.location for e in simple], config)

    connections: Tuple[Tuple[str, str], ...] = ()
    code = None
    complete = True
    if trace:
        seps = trace_separatrices(fld, config)
        connections = tuple(sorted((s.alpha.token, s.omega.token) for s in seps))
        complete = not any(s.flagged for s in seps)
        if fld.kind is FieldKind.POLYNOMIAL:
            saddles = [p for p in infinity if p.kind is InfinityKind.SADDLE]
            code = infinity_code(saddles, seps, {e.id: e.token for e in points})
        elif fld.kind in (FieldKind.INVERSE, FieldKind.CONJUGATE):
            code = pole_code(points, seps, fld.poly.antiderivative(), config)

    return Signature(fld.kind, fld.degree, tokens, summary, connections, hint, code,
                     complete, in_band, _profile(points))


# Matching

def family_of(fld: Field) -> Family:
    """Catalog family a field belongs to"""
    if fld.kind is FieldKind.MOEBIUS:
        return Family.MOEBIUS
    if fld.kind is FieldKind.ESSENTIAL:
        raise UnsupportedKind("essential demo fields have no catalog")
    n = fld.degree
    if n == 1:
        return Family.MOEBIUS
    if fld.kind is FieldKind.POLYNOMIAL:
        families = {2: Family.QUAD, 3: Family.CUBIC, 4: Family.QUARTIC}
    else:
        families = {2: Family.INV_QUAD, 3: Family.INV_CUBIC, 4: Family.INV_QUARTIC}
    if n not in families:
        raise UnsupportedKind(f"no catalog for {fld.kind.value} fields of degree {n}")
    return families[n]


def _moebius_params(fld: Field) -> Tuple[complex, complex, complex, complex]:
    if fld.kind is FieldKind.MOEBIUS:
        return fld.moebius_params
    a0, a1 = (complex(c) for c in fld.poly.coeffs[:2])
    if fld.kind is FieldKind.POLYNOMIAL:
        return a1, a0, 0j, 1 + 0j
    # 1/p and conj(p) share their orbits
    return 0j, 1 + 0j, a1, a0


_LINEAR_LABELS = {
    EquilibriumKind.CENTER: 'M2',
    EquilibriumKind.FOCUS_REPELLING: 'M3',
    EquilibriumKind.FOCUS_ATTRACTING: 'M4',
    EquilibriumKind.NODE_REPELLING: 'M5',
    EquilibriumKind.NODE_ATTRACTING: 'M6',
}


def _classify_moebius(fld: Field, config: AnalysisConfig) -> Classification:
    A, B, C, D = _moebius_params(fld)
    size = max(abs(A), abs(B), abs(C), abs(D))
    in_band = False
    if abs(A) <= config.tau_zero * size:
        label = 'M1'
    elif abs(C) <= config.tau_zero * size:
        kind, in_band = classify_simple(A / D, config)
        label = _LINEAR_LABELS[kind]
    else:
        eig = A * A / (A * D - B * C)
        kind, in_band = classify_simple(eig, config)
        if kind is EquilibriumKind.CENTER:
            label = 'M7' if eig.imag > 0 else 'M9'
        else:
            label = 'M8'
    confidence = Confidence.FLAGGED if in_band else Confidence.EXACT
    return Classification(Family.MOEBIUS, entry(Family.MOEBIUS, label), confidence, (label,))


def _classes(tokens: Sequence[str]) -> Tuple[str, ...]:
    letters = {'M2': 'D', 'M3': 'T'}
    return tuple(sorted(letters.get(t, t[0]) for t in tokens))


def _rule_match(family: Family, sig: Signature) -> Classification:
    classes = _classes(sig.finite_multiset)
    if family is Family.QUAD:
        label = 'DD' if 'D' in classes else ('CC' if set(classes) == {'C'} else 'FF')
    else:
        found = [e.label for e in catalog(family) if e.pattern == classes]
        label = found[0] if found else CUBIC_ALIASES.get(classes)
        if label is None:
            raise NoMatch(f"finite multiset {list(sig.finite_multiset)} fits no cubic portrait",
                          nearest=None, diff={'found': list(classes)})
    confidence = Confidence.FLAGGED if sig.in_band else Confidence.EXACT
    return Classification(family, entry(family, label), confidence, (label,), sig)


@lru_cache(maxsize=None)
def template(family: Family, label: str, config: AnalysisConfig) -> Optional[Signature]:
    """Signature of the realizing system of a catalog entry, without separatrices"""
    item = entry(family, label)
    if item.system is None:
        return None
    return signature(parse_field(item.system), config, trace=False)


@lru_cache(maxsize=None)
def template_code(family: Family, label: str, config: AnalysisConfig) -> Optional[str]:
    """Connection code of the realizing system; None when its tracing is incomplete"""
    item = entry(family, label)
    if item.system is None:
        return None
    sig = signature(parse_field(item.system), config, trace=True)
    if not sig.complete:
        logger.warning(f"Template {label} has unresolved separatrices")
        return None
    return sig.connection_code


def _entry_key(item: CatalogEntry, config: AnalysisConfig) -> Tuple[str, ...]:
    sig = template(item.family, item.label, config)
    return sig.key if sig is not None else reversal_key(item.pattern)


def _entry_geometry(item: CatalogEntry, config: AnalysisConfig) -> GeometryHint:
    sig = template(item.family, item.label, config)
    return sig.geometry_hint if sig is not None else GeometryHint.NONE


def _nearest(entries: List[CatalogEntry], key: Tuple[str, ...],
             config: AnalysisConfig) -> Tuple[CatalogEntry, Dict[str, Any]]:
    def gap(item):
        other = Counter(_entry_key(item, config))
        mine = Counter(key)
        return sum(((other - mine) + (mine - other)).values())
    best = min(entries, key=gap)
    return best, {'expected': list(_entry_key(best, config)), 'found': list(key)}


def _ranked(entries: List[CatalogEntry], sig: Signature,
            config: AnalysisConfig) -> List[CatalogEntry]:
    def rank(item):
        other = template(item.family, item.label, config)
        return (profile_distance(sig.profile, other.profile if other else None),
                item.label)
    return sorted(entries, key=rank)


def _template_match(family: Family, fld: Field, config: AnalysisConfig) -> Classification:
    sig = signature(fld, config, trace=False)
    entries = catalog(family)
    pool = [e for e in entries if _entry_key(e, config) == sig.key]
    if not pool:
        nearest, diff = _nearest(entries, sig.key, config)
        raise NoMatch(f"finite multiset {list(sig.finite_multiset)} fits no {family.value} "
                      f"portrait", nearest=nearest.label, diff=diff)

    shaped = [e for e in pool if _entry_geometry(e, config) == sig.geometry_hint]
    if not shaped:
        logger.warning(f"No {family.value} template has geometry {sig.geometry_hint.value}")
        ranked = _ranked(pool, sig, config)
        confidence = Confidence.FLAGGED if sig.in_band else Confidence.MULTISET_ONLY
        return Classification(family, ranked[0], confidence, tuple(e.label for e in ranked), sig)

    if len(shaped) == 1:
        confidence = Confidence.FLAGGED if sig.in_band else Confidence.EXACT
        return Classification(family, shaped[0], confidence, (shaped[0].label,), sig)

    sig = signature(fld, config, trace=True)
    candidates = shaped
    if sig.complete and sig.connection_code is not None:
        matching = [e for e in shaped
                    if template_code(family, e.label, config) == sig.connection_code]
        if len(matching) == 1:
            confidence = Confidence.FLAGGED if sig.in_band else Confidence.EXACT
            return Classification(family, matching[0], confidence, (matching[0].label,), sig)
        if matching:
            candidates = matching
    else:
        logger.warning("Separatrix connections are incomplete; matching on the multiset only")

    ranked = _ranked(candidates, sig, config)
    confidence = Confidence.FLAGGED if sig.in_band else Confidence.MULTISET_ONLY
    return Classification(family, ranked[0], confidence, tuple(e.label for e in ranked), sig)


def classify_portrait(fld: Field, config: Optional[AnalysisConfig] = None) -> Classification:
    """Catalog entry of the field's phase portrait, with the match confidence"""
    config = config or AnalysisConfig()
    family = family_of(fld)
    if family is Family.MOEBIUS:
        result = _classify_moebius(fld, config)
    elif family in (Family.QUAD, Family.CUBIC):
        result = _rule_match(family, signature(fld, config, trace=False))
    else:
        if fld.kind is FieldKind.CONJUGATE:
            fld = Field.inverse(fld.poly)
        result = _template_match(family, fld, config)
    logger.info(f"Classified as {family.value} {result.label} ({result.confidence.value})")
    return result
