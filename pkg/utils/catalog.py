"""
Phase-portrait catalogs of the holomorphic families

Each entry names a portrait of one family. Rule-based families (Quad,
Cubic, Moebius) carry the finite pattern they are recognized by; the
Quartic and inverse families carry a realizing system from which the
matcher computes the template.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple


class Family(str, Enum):
    QUAD = 'Quad'
    CUBIC = 'Cubic'
    QUARTIC = 'Quartic'
    INV_QUAD = 'InvQuad'
    INV_CUBIC = 'InvCubic'
    INV_QUARTIC = 'InvQuartic'
    MOEBIUS = 'Moebius'


@dataclass(frozen=True)
class CatalogEntry:
    family: Family
    label: str
    description: str
    system: Optional[str] = None
    pattern: Tuple[str, ...] = ()
    coarse: Optional[str] = None

    @property
    def coarse_label(self) -> str:
        return self.coarse or self.label

    def to_row(self) -> Dict[str, str]:
        return {
            'family': self.family.value,
            'label': self.label,
            'coarse': self.coarse_label,
            'description': self.description,
            'system': self.system or '',
            'pattern': ' '.join(self.pattern),
        }


# Quartic labels merged when nodes and foci are not told apart
QUARTIC_COARSE = {
    'Q4': 'Q22',
    'Q5': 'Q23',
    'Q11': 'Q7',
    'Q13': 'Q10',
    'Q16': 'Q15',
    'Q20': 'Q8',
    'Q21': 'Q8',
}

_QUAD = [
    ('DD', 'one double point', 'z^2', ('D',)),
    ('CC', 'two centers', 'z*(z-1i)', ('C', 'C')),
    ('FF', 'two foci or nodes', 'z*(z-(1+1i))', ('F', 'F')),
]

# finite classes: C center, N node, F focus, D double, T triple
_CUBIC = [
    ('c1', '3 centers', 'z*(z-(1+1i))*(z-(3+3i))', ('C', 'C', 'C')),
    ('c2', '3 nodes', 'z*(z-1)*(z-2)', ('N', 'N', 'N')),
    ('c3', '1 triple', 'z^3', ('T',)),
    ('c4', '3 foci', 'z*(z-(1-3i))*(z-(2+4i))', ('F', 'F', 'F')),
    ('c5', '1 center and 1 double', 'z*(z-(1-1i))^2', ('C', 'D')),
    ('c6', '1 node and 1 double', 'z*(z+1i)^2', ('D', 'N')),
    ('c7', '1 focus and 1 double', 'z*(z-(1+3i))^2', ('D', 'F')),
    ('c8', '1 center and 2 foci', 'z*(z-(3/2-1i))*(z-(2-3i))', ('C', 'F', 'F')),
    ('c9', '1 node and 2 foci', 'z*(z-(-2/3-1i))*(z-(2-3i))', ('F', 'F', 'N')),
]

# multisets that share a portrait with a listed entry
CUBIC_ALIASES = {
    ('C', 'F', 'N'): 'c8',
}

_QUARTIC = [
    ('Q1', '1 quadruple', 'z^4'),
    ('Q2', '4 centers collinear', 'z*(z-1i)*(z-2i)*(z-3i)'),
    ('Q3', '4 foci', 'z*(z-(1-3i))*(z-(2-2i))*(z-(3-3i))'),
    ('Q4', '4 nodes', 'z*(z-1)*(z-2)*(z-3)'),
    ('Q5', '4 nodes triangle', 'z*(z-(3+2i))*(z-5/3)*(z-(3-2i))'),
    ('Q6', '1 node, 2 foci and 1 center', 'z*(z-(1-3i))*(z-(2-2i))*(z-1i)'),
    ('Q7', '2 foci and 1 double', 'z^2*(z-(2-2i))*(z-(3-1i))'),
    ('Q8', '3 foci and 1 center', 'z*(z-(1-3i))*(z-2i)*(z-3)'),
    ('Q9', '2 centers and 1 double', 'z^2*(z-2i)*(z+1i)'),
    ('Q10', '1 focus and 2 double', 'z^3*(z-(3+1i))'),
    ('Q11', '1 double and 2 nodes', 'z^2*(z-1)*(z+1)'),
    ('Q12', '1 center and 2 double', 'z^3*(z-1i)'),
    ('Q13', '1 node and 2 double', 'z^3*(z+1)'),
    ('Q14', '2 foci and 1 double', 'z^2*(z-(1-3i))*(z-(2-2i))'),
    ('Q15', '1 center, 1 double and 1 focus', 'z^2*(z-(1+3i))*(z-1)'),
    ('Q16', '1 center, 1 double and 1 node', 'z^2*(z-(1-1i))*(z-1)'),
    ('Q17', '1 double, 1 focus and 1 node', 'z^2*(z-(2+2i))*(z-(2+1i))'),
    ('Q18', '2 foci and 2 centers', 'z*(z-(1+1i))*(z-(3/5+3i))*(z-(3-2i))'),
    ('Q19', '1 node, 1 focus and 1 double', 'z^2*(z-(1-3i))*(z-(-1/3-2i))'),
    ('Q20', '1 node, 1 center and 2 foci', 'z*(z-(2+2i))*(z-(4-2i))*(z-(3-1i))'),
    ('Q21', '2 nodes, 1 center and 1 focus',
     'z*(z-(3-1i))*(z-(39/25-52/25i))*(z-(507/125-169/125i))'),
    ('Q22', '4 foci collinear', '(-1+3i)*z*(z-1)*(z-4)*(z-8)'),
    ('Q23', '4 foci triangle', '(-1+3i)*z*(z-(1+3i))*(z-2)*(z-(3+12i))'),
    ('Q24', '4 foci border', '(-1+1i)*z*(z-1)*(z-2)*(z-(3+12i))'),
    ('Q25', '4 foci quadrilateral', '(-1+2i)*z*(z-3)*(z-2i)*(z-(2+2i))'),
    ('Q26', '4 foci quadrilateral', '(-1+2i)*z*(z-3)*(z-2i)*(z-(22/10+2i))'),
    ('Q27', '4 foci quadrilateral', '(-1+2i)*z*(z-3)*(z-2i)*(z-(3+2i))'),
    ('Q28', '4 centers', 'z*(z^3-1/3i)'),
]

# no realizing system is given for this portrait; matched by its multiset only
QUARTIC_UNREALIZED = {
    'Q29': ('2 repelling foci and 1 double', ('F+', 'F+', 'M2')),
}

_INV_QUAD = [
    ('S1', '1 pole of order 2', '1/z^2'),
    ('S2', '2 simple poles, connected', '1/(z*(z-1))'),
    ('S3', '2 simple poles', '1/(z*(z-1i))'),
]

_INV_CUBIC = [
    ('Sc1', '1 pole of order 3', '1/z^3'),
    ('Sc2', 'poles of order 1 and 2', '1/(z*(z-1)^2)'),
    ('Sc3', '3 simple poles, collinear', '1/(z*(z-1)*(z-2))'),
    ('Sc4', '3 simple poles', '1/(z*(z-1i)*(z-2))'),
]

_INV_QUARTIC = [
    ('Sq1', '1 pole of order 4', '1/z^4'),
    ('Sq2', 'poles of order 1 and 3, real', '1/(z*(z-3)^3)'),
    ('Sq3', '4 simple poles, collinear', '1/(z*(z-1)*(z-2)*(z-3))'),
    ('Sq4', '2 simple poles and a double pole, collinear', '1/(z*(z-1)*(z-2)^2)'),
    ('Sq5', 'poles of order 1 and 3, imaginary', '1/(z*(z-1i)^3)'),
    ('Sq6', '2 simple poles and a double pole', '1/(z*(z-1i)*(z-2)^2)'),
    ('Sq7', '4 simple poles', '1/(z*(z-1)*(z-2)*(z-1i))'),
    ('Sq8', '2 simple poles and a double pole on a line', '1/(z*(z-1i)*(z-2i)^2)'),
    ('Sq9', '2 double poles, real', '1/(z^2*(z-2)^2)'),
    ('Sq10', '2 double poles, imaginary', '1/(z^2*(z-1i)^2)'),
    ('Sq11', '2 simple poles and a double pole between them', '1/(z*(z-3)*(z-2)^2)'),
]

_MOEBIUS = [
    ('M1', 'simple pole only (A = 0)', 'moebius(0;1;1;0)', ('P1',)),
    ('M2', 'center, no pole', 'moebius(1i;0;0;1)', ('C',)),
    ('M3', 'repelling focus, no pole', 'moebius(1+1i;0;0;1)', ('F+',)),
    ('M4', 'attracting focus, no pole', 'moebius(-1+1i;0;0;1)', ('F-',)),
    ('M5', 'repelling node, no pole', 'moebius(1;0;0;1)', ('N+',)),
    ('M6', 'attracting node, no pole', 'moebius(-1;0;0;1)', ('N-',)),
    ('M7', 'counterclockwise center and a simple pole',
     '(3/13-2/13i)*((1+1i)*z-3/2+1i)/z', ('C+', 'P1')),
    ('M8', 'focus or node and a simple pole',
     '(3/13-2/13i)*((1+1i)*z-13/3+1i)/z', ('F', 'P1')),
    ('M9', 'clockwise center and a simple pole',
     '(12/37+2/37i)*((1-2i)*z-27/14+1i)/z', ('C-', 'P1')),
]


def _build() -> Dict[Family, List[CatalogEntry]]:
    table: Dict[Family, List[CatalogEntry]] = {}
    table[Family.QUAD] = [CatalogEntry(Family.QUAD, label, text, system, pattern)
                          for label, text, system, pattern in _QUAD]
    table[Family.CUBIC] = [CatalogEntry(Family.CUBIC, label, text, system, pattern)
                           for label, text, system, pattern in _CUBIC]
    quartic = [CatalogEntry(Family.QUARTIC, label, text, system, coarse=QUARTIC_COARSE.get(label))
               for label, text, system in _QUARTIC]
    for label, (text, pattern) in QUARTIC_UNREALIZED.items():
        quartic.append(CatalogEntry(Family.QUARTIC, label, text, None, pattern))
    table[Family.QUARTIC] = quartic
    for family, rows in ((Family.INV_QUAD, _INV_QUAD), (Family.INV_CUBIC, _INV_CUBIC),
                         (Family.INV_QUARTIC, _INV_QUARTIC)):
        table[family] = [CatalogEntry(family, label, text, system) for label, text, system in rows]
    table[Family.MOEBIUS] = [CatalogEntry(Family.MOEBIUS, label, text, system, pattern)
                             for label, text, system, pattern in _MOEBIUS]
    return table


CATALOG = _build()

FAMILY_SIZES = {family: len(entries) for family, entries in CATALOG.items()}


def catalog(family) -> List[CatalogEntry]:
    """All portraits of a family in label order"""
    return list(CATALOG[Family(family)])


def entry(family, label: str) -> CatalogEntry:
    for item in CATALOG[Family(family)]:
        if item.label == label:
            return item
    raise KeyError(f"{label} is not a {Family(family).value} portrait")


def coarse_classes() -> List[str]:
    """The quartic classes left when nodes and foci are not told apart"""
    return sorted({e.coarse_label for e in CATALOG[Family.QUARTIC]}, key=lambda s: int(s[1:]))
