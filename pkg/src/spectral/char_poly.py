"""
Characteristic trigonometric polynomials of polygons

Key features:
- TrigPoly: finite cosine series sum a_f cos(f t) + constant, with analytic derivatives
- build_charpoly: expansion over sign vectors of the edge-length vector, float or exact
- canonicalize / equal_charpoly: merging, dropping and tolerance comparison
- reduced_charpoly_check: agreement with the polygon whose odd vertices are removed
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

import numpy as np

from src.geometry.polygon import BoundaryData
from src.utils.errors import IndeterminateError, PolygonDataError

logger = logging.getLogger(__name__)

FREQ_TOL = 1e-9
COEF_TOL = 1e-12

Number = float | Fraction | int


def _is_exact(value) -> bool:
    return isinstance(value, Rational)


@dataclass(frozen=True)
class TrigPoly:
    """Even trigonometric polynomial; ``terms`` are (frequency, coefficient) pairs by ascending frequency."""

    terms: tuple[tuple[Number, Number], ...]
    constant: Number = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((f, a) for f, a in self.terms))

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([float(f) for f, _ in self.terms], dtype=float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([float(a) for _, a in self.terms], dtype=float)

    @property
    def top_frequency(self) -> float:
        if not self.terms:
            return 0.0
        return float(self.terms[-1][0])

    @property
    def is_exact(self) -> bool:
        return _is_exact(self.constant) and all(_is_exact(f) and _is_exact(a) for f, a in self.terms)

    def evaluate(self, t):
        """Value at ``t`` (scalar or array)."""
        t = np.asarray(t, dtype=float)
        values = np.full(t.shape, float(self.constant))
        for f, a in zip(self.frequencies, self.coefficients):
            values = values + a * np.cos(f * t)
        return values if values.ndim else float(values)

    def derivative(self, t, order: int = 1):
        """Analytic ``order``-th derivative at ``t``."""
        if order == 0:
            return self.evaluate(t)
        t = np.asarray(t, dtype=float)
        shift = order * math.pi / 2
        values = np.zeros(t.shape)
        for f, a in zip(self.frequencies, self.coefficients):
            values = values + a * f ** order * np.cos(f * t + shift)
        return values if values.ndim else float(values)

    def coefficient_scale(self, order: int = 0) -> float:
        """Sum |a| f^order, plus |constant| for order 0; the natural size of the ``order``-th derivative."""
        scale = math.fsum(abs(a) * f ** order for f, a in zip(self.frequencies, self.coefficients))
        if order == 0:
            scale += abs(float(self.constant))
        return scale

    def scaled(self, factor: float) -> "TrigPoly":
        """The polynomial of the polygon scaled by ``factor``: every frequency is multiplied by it."""
        return TrigPoly(tuple((f * factor, a) for f, a in self.terms), self.constant)

    def to_floats(self) -> "TrigPoly":
        return TrigPoly(tuple((float(f), float(a)) for f, a in self.terms), float(self.constant))


def c_of_angle(alpha: float) -> float:
    """cos(pi^2 / (2 alpha))."""
    if not 0.0 < alpha < math.pi:
        raise PolygonDataError(f"angle {alpha} is outside (0, pi)")
    return math.cos(math.pi ** 2 / (2.0 * alpha))


def _s_of_angle(alpha: float) -> float:
    return math.sin(math.pi ** 2 / (2.0 * alpha))


def c_of_angle_pi(q: Fraction) -> Number:
    """c for the angle q*pi: exact for q = 1/k, float otherwise."""
    q = Fraction(q)
    if not 0 < q < 1:
        raise PolygonDataError(f"angle {q}*pi is outside (0, pi)")
    if q.numerator == 1:
        k = q.denominator
        return 0 if k % 2 else (-1) ** (k // 2)
    return c_of_angle(float(q) * math.pi)


def _s_of_angle_pi(q: Fraction) -> Number:
    q = Fraction(q)
    if q.numerator == 1:
        k = q.denominator
        return (-1) ** ((k - 1) // 2) if k % 2 else 0
    return _s_of_angle(float(q) * math.pi)


@lru_cache(maxsize=32)
def _sign_matrix(n: int) -> np.ndarray:
    """All sign vectors with the first entry fixed to +1, one per row."""
    tails = np.array(list(itertools.product((1, -1), repeat=n - 1)), dtype=np.int8).reshape(-1, n - 1)
    return np.hstack([np.ones((tails.shape[0], 1), dtype=np.int8), tails])


def _product(values: Sequence[Number]) -> Number:
    if all(_is_exact(v) for v in values):
        result = Fraction(1)
        for v in values:
            result *= v
        return result
    return math.prod(float(v) for v in values)


def _expand_float(lengths: np.ndarray, c_values: np.ndarray) -> list[tuple[float, float]]:
    signs = _sign_matrix(len(lengths))
    frequencies = np.abs(signs @ lengths)
    change = signs != np.roll(signs, -1, axis=1)
    coefficients = np.prod(np.where(change, c_values[None, :], 1.0), axis=1)
    return list(zip(frequencies.tolist(), coefficients.tolist()))


def _expand_exact(lengths: Sequence[Fraction], c_values: Sequence[Number]) -> list[tuple[Fraction, Number]]:
    signs = _sign_matrix(len(lengths))
    terms = []
    for row in signs:
        frequency = abs(sum((int(s) * length for s, length in zip(row, lengths)), Fraction(0)))
        factors = [c_values[j] for j in range(len(row)) if row[j] != row[(j + 1) % len(row)]]
        terms.append((frequency, _product(factors)))
    return terms


def expansion_from_vectors(lengths: Sequence, angles: Sequence[float] | None = None,
                           angles_pi: Sequence[Fraction] | None = None) -> tuple[list[tuple], Number]:
    """
    Un-merged expansion: one (|xi . l|, a_xi) term per sign vector with xi_0 = +1,
    and the constant -prod sin(pi^2 / (2 alpha_j)).

    Exact when ``lengths`` are rationals and ``angles_pi`` is given. Works for any
    n >= 1, so reduced 1-gons and 2-gons go through the same expansion.
    """
    if len(lengths) < 1:
        raise PolygonDataError("at least one edge is required")
    if angles_pi is not None:
        c_values = [c_of_angle_pi(q) for q in angles_pi]
        s_values = [_s_of_angle_pi(q) for q in angles_pi]
    else:
        c_values = [c_of_angle(a) for a in angles]
        s_values = [_s_of_angle(a) for a in angles]
    if len(c_values) != len(lengths):
        raise PolygonDataError(f"{len(lengths)} lengths but {len(c_values)} angles")

    constant = -_product(s_values)
    if all(_is_exact(v) for v in lengths):
        terms = _expand_exact([Fraction(v) for v in lengths], c_values)
    else:
        terms = _expand_float(np.asarray(lengths, dtype=float), np.asarray([float(c) for c in c_values]))
    return terms, constant


def _exact_inputs(data: BoundaryData, exact: bool | None) -> tuple[Sequence, Sequence | None]:
    use_exact = data.has_exact_lengths if exact is None else exact
    if use_exact and not data.has_exact_lengths:
        raise PolygonDataError("exact mode needs rational lengths")
    if use_exact:
        return data.exact_lengths, data.exact_angles_pi
    return data.lengths, None


def expansion_terms(data: BoundaryData, exact: bool | None = None) -> tuple[list[tuple], Number]:
    lengths, angles_pi = _exact_inputs(data, exact)
    return expansion_from_vectors(lengths, data.angles, angles_pi)


def _sum(values: list[Number]) -> Number:
    if all(_is_exact(v) for v in values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def _normalize(value: Number) -> Number:
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


def canonicalize(p: TrigPoly, freq_tol: float = FREQ_TOL, coef_tol: float = COEF_TOL) -> TrigPoly:
    """
    Merge frequencies closer than ``freq_tol`` (exact frequencies merge only when
    equal), fold frequencies below ``freq_tol`` into the constant and drop
    coefficients below ``coef_tol``.

    Summation runs over a stable frequency order, so the result does not
    depend on how the expansion was partitioned.
    """
    ordered = sorted(p.terms, key=lambda term: float(term[0]))
    groups: list[list[tuple]] = []
    for f, a in ordered:
        if groups:
            previous = groups[-1][-1][0]
            same = (f == previous) if _is_exact(f) and _is_exact(previous) else abs(float(f) - float(previous)) <= freq_tol
            if same:
                groups[-1].append((f, a))
                continue
        groups.append([(f, a)])

    constant_parts = [p.constant]
    merged = []
    for group in groups:
        frequency = group[0][0]
        coefficient = _sum([a for _, a in group])
        is_zero_frequency = frequency == 0 if _is_exact(frequency) else float(frequency) < freq_tol
        if is_zero_frequency:
            constant_parts.append(coefficient)
            continue
        if (coefficient == 0) if _is_exact(coefficient) else abs(coefficient) < coef_tol:
            continue
        merged.append((_normalize(frequency), _normalize(coefficient)))

    constant = _sum(constant_parts)
    if not _is_exact(constant) and abs(constant) < coef_tol:
        constant = 0.0
    return TrigPoly(tuple(merged), _normalize(constant))


def charpoly_from_vectors(lengths: Sequence, angles: Sequence[float] | None = None,
                          angles_pi: Sequence[Fraction] | None = None,
                          coef_tol: float = COEF_TOL) -> TrigPoly:
    terms, constant = expansion_from_vectors(lengths, angles, angles_pi)
    perimeter = math.fsum(float(v) for v in lengths)
    return canonicalize(TrigPoly(tuple(terms), constant), FREQ_TOL * perimeter, coef_tol)


def build_charpoly(data: BoundaryData, exact: bool | None = None, coef_tol: float = COEF_TOL) -> TrigPoly:
    """
    Characteristic polynomial of a polygon.

    Args:
        data: edge lengths and angles
        exact: rational mode; defaults to exact whenever the data carries rational lengths

    Returns:
        TrigPoly: canonicalized; the top frequency is the perimeter with coefficient 1
    """
    lengths, angles_pi = _exact_inputs(data, exact)
    return charpoly_from_vectors(lengths, data.angles, angles_pi, coef_tol)


def smooth_charpoly(perimeter: Number) -> TrigPoly:
    """cos(L t) - 1, the polynomial of a smoothly bounded domain."""
    if perimeter <= 0:
        raise PolygonDataError(f"perimeter must be positive, got {perimeter}")
    return TrigPoly(((_normalize(perimeter), 1),), -1)


def equal_charpoly(p: TrigPoly, q: TrigPoly, tol: float = 1e-8) -> bool:
    """
    Pair terms by frequency and compare coefficients and constants within ``tol``.

    A term present on one side only must have a coefficient below ``tol``.
    """
    if abs(float(p.constant) - float(q.constant)) > tol:
        return False
    first, second = p.to_floats().terms, q.to_floats().terms
    i = j = 0
    while i < len(first) or j < len(second):
        if i < len(first) and j < len(second):
            (f, a), (g, b) = first[i], second[j]
            if abs(f - g) <= tol * max(1.0, f, g):
                if abs(a - b) > tol:
                    return False
                i += 1
                j += 1
                continue
            if f < g:
                if abs(a) > tol:
                    return False
                i += 1
            else:
                if abs(b) > tol:
                    return False
                j += 1
        elif i < len(first):
            if abs(first[i][1]) > tol:
                return False
            i += 1
        else:
            if abs(second[j][1]) > tol:
                return False
            j += 1
    return True


def charpoly_distance(p: TrigPoly, q: TrigPoly, tol: float = 1e-8) -> float:
    """Largest coefficient mismatch after frequency pairing (constants included)."""
    worst = abs(float(p.constant) - float(q.constant))
    remaining = list(q.to_floats().terms)
    for f, a in p.to_floats().terms:
        match = next((k for k, (g, _) in enumerate(remaining) if abs(f - g) <= tol * max(1.0, f, g)), None)
        if match is None:
            worst = max(worst, abs(a))
        else:
            worst = max(worst, abs(a - remaining.pop(match)[1]))
    for _, b in remaining:
        worst = max(worst, abs(b))
    return worst


@dataclass(frozen=True)
class ReducedCharpolyCheck:
    match: bool
    constant_sign_flip: bool
    parity: int
    full: TrigPoly
    reduced: TrigPoly


def reduced_charpoly_check(data: BoundaryData, tol: float = 1e-8, exact: bool | None = None) -> ReducedCharpolyCheck:
    """
    Compare the polynomial of a polygon with that of its reduced polygon.

    Non-constant terms must agree; constants agree up to the product of the
    parities of the removed odd angles.

    Raises:
        PolygonDataError: the data is not weakly edge-admissible
        IndeterminateError: weak edge-admissibility cannot be decided in float mode
    """
    from src.inverse.admissibility import admissibility, reduce_polygon

    report = admissibility(data, exact=exact)
    if report.weak_verdict == "indeterminate":
        raise IndeterminateError(f"weak edge-admissibility is indeterminate: {'; '.join(report.reasons)}")
    if report.weak_verdict != "admissible":
        raise PolygonDataError(f"data is not weakly edge-admissible: {'; '.join(report.reasons)}")

    reduced = reduce_polygon(data)
    full = build_charpoly(data, exact=exact)
    reduced_poly = reduced.charpoly(exact=exact)
    parity = reduced.removed_parity

    expected_constant = parity * float(reduced_poly.constant)
    terms_match = equal_charpoly(TrigPoly(full.terms, 0), TrigPoly(reduced_poly.terms, 0), tol)
    constants_match = abs(float(full.constant) - expected_constant) <= tol
    logger.debug("reduced check: parity %d, full constant %s, reduced constant %s",
                 parity, full.constant, reduced_poly.constant)
    return ReducedCharpolyCheck(
        match=terms_match and constants_match,
        constant_sign_flip=parity == -1,
        parity=parity,
        full=full,
        reduced=reduced_poly,
    )
