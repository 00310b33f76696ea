"""
Complex polynomial algebra: evaluation, Taylor shifts, Aberth-Ehrlich roots
with multiplicity detection, residues of 1/p, harmonic rows and partial
fractions.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .config import AnalysisConfig
from .error_handler import IllConditioned, NonConvergence, OrderMismatch

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
MAX_DEGREE = 16

Number = Union[int, float, complex]


class CPoly:
    """Polynomial in z with complex coefficients A_0..A_n, ascending degree"""

    __slots__ = ('coeffs', '_desc')

    def __init__(self, coeffs: Union[Sequence[Number], np.ndarray]):
        c = np.array(np.atleast_1d(coeffs), dtype=complex)
        nonzero = np.flatnonzero(c)
        c = c[:nonzero[-1] + 1] if nonzero.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        self.coeffs = c
        self._desc = tuple(complex(a) for a in c[::-1])

    # construction

    @classmethod
    def from_roots(cls, roots: Sequence[Number], lead: Number = 1) -> 'CPoly':
        return cls(P.polyfromroots(np.asarray(roots, dtype=complex)) * lead)

    @classmethod
    def monomial(cls, k: int, coef: Number = 1) -> 'CPoly':
        return cls([0] * k + [coef])

    # properties

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def scale_at(self, z: complex) -> float:
        """Magnitude scale max|A_k|·(1+|z|)^n used by relative tolerances"""
        return self.norm * (1.0 + abs(z)) ** self.degree

    # evaluation

    def __call__(self, z):
        if np.ndim(z) == 0:
            acc = 0j
            for a in self._desc:
                acc = acc * z + a
            return acc
        return P.polyval(np.asarray(z), self.coeffs)

    def abs_eval(self, r: float) -> float:
        """Sum of |A_k| r^k, the rounding-noise envelope of p at |z| = r"""
        return float(P.polyval(r, np.abs(self.coeffs)))

    # algebra

    def derivative(self, k: int = 1) -> 'CPoly':
        if k > self.degree:
            return CPoly([0])
        return CPoly(P.polyder(self.coeffs, k))

    def antiderivative(self) -> 'CPoly':
        return CPoly(P.polyint(self.coeffs))

    def shift(self, c: Number) -> 'CPoly':
        """p(z + c)"""
        return CPoly(taylor_coeffs(self, complex(c)))

    def _coerce(self, other) -> Optional['CPoly']:
        if isinstance(other, CPoly):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return CPoly([other])
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CPoly(P.polyadd(self.coeffs, o.coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CPoly(P.polysub(self.coeffs, o.coeffs))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CPoly(P.polymul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return CPoly(-self.coeffs)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        return CPoly(P.polypow(self.coeffs, k))

    def __eq__(self, other):
        if not isinstance(other, CPoly):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self._desc)

    def __repr__(self):
        return f"CPoly({[complex(a) for a in self.coeffs]})"

    def to_json(self) -> List[List[float]]:
        return [[float(a.real), float(a.imag)] for a in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[float]]) -> 'CPoly':
        return cls([complex(re, im) for re, im in data])


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with multiplicities"""

    roots: Tuple[Tuple[complex, int], ...]

    def __iter__(self) -> Iterator[Tuple[complex, int]]:
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def locations(self) -> List[complex]:
        return [r for r, _ in self.roots]

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.roots)

    def min_separation(self) -> float:
        locs = self.locations
        if len(locs) < 2:
            return math.inf
        return min(abs(a - b) for i, a in enumerate(locs) for b in locs[i + 1:])

    def to_json(self) -> List[List[float]]:
        return [[r.real, r.imag, m] for r, m in self.roots]


@dataclass(frozen=True)
class HarmonicPair:
    """Rows of p_k = Re (x+iy)^k and q_k = Im (x+iy)^k over x^(k-j) y^j"""

    k: int
    p_row: Tuple[int, ...]
    q_row: Tuple[int, ...]

    def evaluate(self, x: float, y: float) -> Tuple[float, float]:
        pk = sum(c * x ** (self.k - j) * y ** j for j, c in enumerate(self.p_row))
        qk = sum(c * x ** (self.k - j) * y ** j for j, c in enumerate(self.q_row))
        return pk, qk


@dataclass(frozen=True)
class PFTerm:
    """coef / (z - pole)^power"""

    coef: complex
    pole: complex
    power: int

    def __call__(self, z):
        return self.coef / (z - self.pole) ** self.power


def taylor_coeffs(p: CPoly, z0: complex) -> np.ndarray:
    """c_k = p^(k)(z0)/k! by repeated synthetic division"""
    c = list(p._desc)
    n = len(c) - 1
    out = np.empty(n + 1, dtype=complex)
    for k in range(n + 1):
        for j in range(1, n - k + 1):
            c[j] = c[j] + z0 * c[j - 1]
        out[k] = c[n - k]
    return out


def eval_derivs(p: CPoly, z0: complex, upto: int) -> List[complex]:
    """p(z0), p'(z0), ..., p^(upto)(z0)"""
    if not 0 <= upto <= p.degree:
        raise ValueError(f"upto must lie in [0, {p.degree}]")
    tc = taylor_coeffs(p, z0)
    return [complex(tc[k]) * math.factorial(k) for k in range(upto + 1)]


def _abs_taylor(p: CPoly, z0: complex) -> np.ndarray:
    """Taylor coefficients of sum |A_k| z^k at |z0|; bounds rounding in taylor_coeffs"""
    return taylor_coeffs(CPoly(np.abs(p.coeffs)), abs(z0)).real


def _initial_circle(monic: np.ndarray) -> Tuple[complex, float]:
    n = len(monic) - 1
    center = -monic[n - 1] / n
    shifted = taylor_coeffs(CPoly(monic), center)
    radius = 0.0
    for k in range(n):
        if shifted[k] != 0:
            radius = max(radius, abs(shifted[k]) ** (1.0 / (n - k)))
    return center, 2.0 * radius


def _aberth(p: CPoly, max_iter: int, tol: float) -> Tuple[np.ndarray, bool]:
    n = p.degree
    monic = p.coeffs / p.coeffs[-1]
    center, radius = _initial_circle(monic)
    if radius == 0.0:
        return np.full(n, center, dtype=complex), True

    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = center + radius * np.exp(1j * angles)
    dmonic = P.polyder(monic)
    abs_monic = np.abs(monic)
    active = np.ones(n, dtype=bool)

    for _ in range(max_iter):
        pz = P.polyval(z, monic)
        dpz = P.polyval(z, dmonic)
        noise = 4 * EPS * P.polyval(np.abs(z), abs_monic)

        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        if np.any(diff == 0):
            z = z + 1e-12 * (1 + np.abs(z)) * np.exp(1j * (angles + 1.0))
            continue
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)

        denom = dpz - pz * s
        safe = denom != 0
        delta = np.where(safe, pz / np.where(safe, denom, 1.0), 0.0)
        delta[~active] = 0.0
        z = z - delta

        done = (np.abs(delta) <= tol * (1 + np.abs(z))) | (np.abs(pz) <= noise)
        active &= ~done
        if not active.any():
            return z, True
    return z, False


def _union_find_groups(z: np.ndarray, radius_fn) -> List[List[int]]:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= radius_fn(max(abs(z[i]), abs(z[j]))):
                parent[find(i)] = find(j)

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _refine_multiple(p: CPoly, c: complex, m: int) -> complex:
    """Newton on p^(m-1), for which an m-fold root of p is simple"""
    q = p.derivative(m - 1)
    dq = q.derivative()
    for _ in range(20):
        d = dq(c)
        if d == 0:
            break
        step = q(c) / d
        c = c - step
        if abs(step) <= 4 * EPS * (1 + abs(c)):
            break
    return c


def _is_numerically_multiple(p: CPoly, c: complex, m: int) -> bool:
    tc = taylor_coeffs(p, c)
    envelope = _abs_taylor(p, c)
    low = all(abs(tc[k]) <= 1e3 * EPS * envelope[k] for k in range(m))
    return low and abs(tc[m]) > 1e3 * EPS * envelope[m]


def _derivative_order(p: CPoly, c: complex, config: AnalysisConfig) -> int:
    tc = taylor_coeffs(p, c)
    threshold = config.tau_order * p.scale_at(c)
    for k in range(len(tc)):
        if abs(tc[k]) > threshold:
            return k
    return p.degree


def roots(p: CPoly, config: Optional[AnalysisConfig] = None) -> RootSet:
    """All roots of p with multiplicity"""
    config = config or AnalysisConfig()
    if p.degree < 1:
        raise ValueError("roots needs a polynomial of degree at least 1")

    z, converged = _aberth(p, config.max_root_iterations, config.tau_root)
    residual = max(abs(p(r)) / p.scale_at(r) for r in z)
    if not converged and residual >= config.tau_root:
        raise NonConvergence("Aberth iteration hit its cap", best=z, residual=residual)

    found: List[Tuple[complex, int]] = []
    loose = _union_find_groups(z, lambda r: config.cluster_search * (1 + r))
    for group in loose:
        m = len(group)
        centroid = complex(np.mean(z[group]))
        if m == 1:
            found.append((centroid, 1))
            continue
        refined = _refine_multiple(p, centroid, m)
        near = abs(refined - centroid) <= config.cluster_search * (1 + abs(centroid))
        if near and _is_numerically_multiple(p, refined, m):
            found.append((refined, m))
            continue

        logger.debug(f"Cluster of {m} roots near {centroid:.6g} is not a multiple root")
        sub = z[group]
        for tight in _union_find_groups(sub, lambda r: config.tau_cluster * (1 + r)):
            loc = complex(np.mean(sub[tight]))
            order = _derivative_order(p, loc, config)
            if order != len(tight):
                logger.warning(f"Root near {loc:.6g}: cluster size {len(tight)} "
                               f"but derivative order {order}")
            found.append((loc, len(tight)))

    found.sort(key=lambda rm: (round(rm[0].real, 9), round(rm[0].imag, 9)))
    return RootSet(tuple(found))


def _inverse_series(tc: np.ndarray, m: int, count: int) -> List[complex]:
    """Leading coefficients d_0.. of 1/(c_m + c_{m+1} w + ...)"""
    n = len(tc) - 1
    d = [1.0 / tc[m]]
    for k in range(1, count):
        acc = 0j
        for j in range(1, k + 1):
            if m + j <= n:
                acc += tc[m + j] * d[k - j]
        d.append(-acc / tc[m])
    return [complex(v) for v in d]


def residue_inv(p: CPoly, z0: complex, order: int,
                config: Optional[AnalysisConfig] = None) -> complex:
    """res(1/p, z0) for a root z0 of the given order, by series inversion"""
    config = config or AnalysisConfig()
    tc = taylor_coeffs(p, z0)
    threshold = config.tau_order * p.scale_at(z0)
    if order < 1 or order > p.degree:
        raise OrderMismatch(f"order {order} impossible for degree {p.degree}")
    if any(abs(tc[k]) > threshold for k in range(order)) or abs(tc[order]) <= threshold:
        raise OrderMismatch(f"{z0} is not a root of order {order}")
    return _inverse_series(tc, order, order)[order - 1]


def harmonic_pair(k: int) -> HarmonicPair:
    """p_k, q_k rows from the binomial expansion of (x+iy)^k"""
    if not 1 <= k <= MAX_DEGREE:
        raise ValueError(f"k must lie in [1, {MAX_DEGREE}]")
    real_part = (1, 0, -1, 0)
    imag_part = (0, 1, 0, -1)
    p_row = tuple(math.comb(k, j) * real_part[j % 4] for j in range(k + 1))
    q_row = tuple(math.comb(k, j) * imag_part[j % 4] for j in range(k + 1))
    return HarmonicPair(k, p_row, q_row)


def partial_fractions_inv(p: CPoly, rootset: Optional[RootSet] = None,
                          config: Optional[AnalysisConfig] = None) -> List[PFTerm]:
    """Principal parts of 1/p at every root; their sum is 1/p"""
    config = config or AnalysisConfig()
    rootset = rootset or roots(p, config)
    for i, (a, _) in enumerate(rootset.roots):
        for b, _ in rootset.roots[i + 1:]:
            if abs(a - b) <= config.tau_cluster * (1 + max(abs(a), abs(b))):
                raise IllConditioned(f"roots {a} and {b} are closer than the cluster tolerance")

    terms = []
    for r, m in rootset:
        d = _inverse_series(taylor_coeffs(p, r), m, m)
        for k in range(m):
            terms.append(PFTerm(d[k], r, m - k))
    return terms
