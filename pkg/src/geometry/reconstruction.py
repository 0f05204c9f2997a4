"""
Constructive reconstruction of convex polygons from partial data

Key features:
- reconstruct_missing_angles: three blank angles completed by peeling triangles
- quad_from_asa_perimeter: quadrilateral from four angles, one side and the perimeter
- edge_split_solve: lengths of the two edge pairs around vertices 1 and m from their sums,
  either unique or a one-parameter deformation family
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from src.geometry.polygon import DEFAULT_TOL, BoundaryData, PartialBoundaryData
from src.utils.errors import NumericalError, PolygonDataError

logger = logging.getLogger(__name__)


def _cross(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _directions(angles: Sequence[float]) -> np.ndarray:
    turning = np.concatenate([[0.0], np.cumsum(math.pi - np.asarray(angles[:-1], dtype=float))])
    return np.column_stack([np.cos(turning), np.sin(turning)])


def _law_of_cosines_angle(adjacent_a: float, adjacent_b: float, opposite: float) -> float:
    cosine = (adjacent_a ** 2 + adjacent_b ** 2 - opposite ** 2) / (2.0 * adjacent_a * adjacent_b)
    return math.acos(min(1.0, max(-1.0, cosine)))


def _triangle_angles(lengths: Sequence[float], tol: float) -> list[float]:
    """Angles of the triangle with the given sides; vertex i sits between edges i and i+1."""
    a, b, c = lengths
    longest = max(a, b, c)
    if longest >= (a + b + c - longest) * (1.0 - tol):
        raise PolygonDataError(f"no polygon realizes data: sides {a:.6g}, {b:.6g}, {c:.6g} violate the triangle inequality")
    return [_law_of_cosines_angle(lengths[i], lengths[(i + 1) % 3], lengths[(i + 2) % 3]) for i in range(3)]


def _peel(lengths: list[float], angles: list[float | None], tol: float) -> list[float]:
    n = len(lengths)
    if n == 3:
        return _triangle_angles(lengths, tol)

    # rotate so that a known angle sits at the last vertex
    known = [i for i, a in enumerate(angles) if a is not None]
    shift = known[-1] - (n - 1)
    lengths = [lengths[(i + shift) % n] for i in range(n)]
    angles = [angles[(i + shift) % n] for i in range(n)]

    a, b, gamma = lengths[n - 1], lengths[0], angles[n - 1]
    diagonal = math.sqrt(max(0.0, a * a + b * b - 2.0 * a * b * math.cos(gamma)))
    if diagonal <= 0.0:
        raise PolygonDataError("no polygon realizes data: degenerate diagonal while peeling")
    beta_first = _law_of_cosines_angle(b, diagonal, a)
    beta_last = _law_of_cosines_angle(a, diagonal, b)

    sub_lengths = [diagonal] + lengths[1:n - 1]
    sub_angles: list[float | None] = [None] * (n - 1)
    for i in range(1, n - 2):
        sub_angles[i] = angles[i]
    for i, beta in ((0, beta_first), (n - 2, beta_last)):
        if angles[i] is not None:
            remainder = angles[i] - beta
            if remainder <= 0.0:
                raise PolygonDataError(
                    f"no polygon realizes data: angle at vertex {(i + shift) % n} is smaller than the peeled triangle's"
                )
            sub_angles[i] = remainder

    sub = _peel(sub_lengths, sub_angles, tol)

    completed = list(sub[:n - 1]) + [gamma]
    completed[0] = sub[0] + beta_first
    completed[n - 2] = sub[n - 2] + beta_last
    return [completed[(i - shift) % n] for i in range(n)]


def reconstruct_missing_angles(partial: PartialBoundaryData, tol: float = DEFAULT_TOL) -> BoundaryData:
    """
    Complete three blank angles of a convex polygon.

    Peels the triangle (v_{n-1}, v_n, v_1) at a known vertex and recurses on the
    remaining (n-1)-gon; the base case is a triangle known from its sides.

    Args:
        partial: full lengths, angles with exactly three blanks (or none)
        tol: geometric tolerance, relative to the perimeter

    Returns:
        BoundaryData: the unique completion

    Raises:
        PolygonDataError: wrong blank count for n > 3, or no polygon realizes the data
    """
    blanks = partial.blank_indices
    if not blanks:
        return BoundaryData(partial.lengths, tuple(partial.angles)).validate(tol)

    if partial.n > 3 and len(blanks) != 3:
        raise PolygonDataError(
            f"contract violation: reconstruction needs exactly 3 blank angles, got {len(blanks)}"
        )

    angles = _peel(list(partial.lengths), list(partial.angles), tol)
    for j, given in enumerate(partial.angles):
        if given is not None and abs(angles[j] - given) > math.sqrt(tol):
            raise PolygonDataError(f"no polygon realizes data: angle at vertex {j} is inconsistent with the sides")

    data = BoundaryData(partial.lengths, tuple(angles))
    try:
        return data.validate(math.sqrt(tol) if partial.n == 3 else tol)
    except PolygonDataError as exc:
        raise PolygonDataError(f"no polygon realizes data: {exc}") from exc


def quad_from_asa_perimeter(angles: Sequence[float], known_side_index: int, known_side: float,
                            perimeter: float, tol: float = DEFAULT_TOL) -> BoundaryData:
    """
    Quadrilateral from its four angles, one side and its perimeter.

    The side opposite the known one slides along parallel lines; edge lengths are
    affine in the slide parameter and the perimeter is strictly monotone in it.
    """
    angles = [float(a) for a in angles]
    if len(angles) != 4:
        raise PolygonDataError(f"expected 4 angles, got {len(angles)}")
    if any(not 0.0 < a < math.pi for a in angles):
        raise PolygonDataError("non-convex data: quadrilateral angles must lie in (0, pi)")
    if abs(math.fsum(angles) - 2.0 * math.pi) > tol * 4:
        raise PolygonDataError(f"quadrilateral angles sum to {math.fsum(angles):.12g}, not 2pi")
    if known_side <= 0.0 or perimeter <= 0.0:
        raise PolygonDataError("side and perimeter must be positive")

    shift = known_side_index % 4
    rotated = [angles[(i + shift) % 4] for i in range(4)]
    u = _directions(rotated)

    # l2(s), l3(s) solve l0*u0 + s*u1 + l2*u2 + l3*u3 = 0
    basis = np.column_stack([u[2], u[3]])
    constant = np.linalg.solve(basis, -known_side * u[0])
    slope = np.linalg.solve(basis, -u[1])

    lo, hi = 0.0, perimeter
    for p, q in zip(constant, slope):
        if abs(q) < 1e-15:
            if p <= 0.0:
                raise PolygonDataError("no convex quadrilateral has these angles and side")
            continue
        root = -p / q
        if q > 0.0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    if not lo < hi:
        raise PolygonDataError("no convex quadrilateral has these angles and side")

    def excess(s: float) -> float:
        l2, l3 = constant + slope * s
        return known_side + s + l2 + l3 - perimeter

    at_lo, at_hi = excess(lo), excess(hi)
    if at_lo * at_hi > 0.0:
        raise PolygonDataError(
            f"perimeter unreachable: the family spans ({at_lo + perimeter:.6g}, {at_hi + perimeter:.6g})"
        )

    s = brentq(excess, lo, hi, xtol=1e-15 * max(1.0, perimeter), rtol=4 * np.finfo(float).eps)
    l2, l3 = constant + slope * s
    side_lengths = [known_side, s, float(l2), float(l3)]
    if min(side_lengths) <= 0.0:
        raise PolygonDataError("perimeter unreachable: solution degenerates at the family boundary")

    lengths = [0.0] * 4
    for i in range(4):
        lengths[(i + shift) % 4] = side_lengths[i]
    return BoundaryData(tuple(lengths), tuple(angles)).validate(tol)


@dataclass(frozen=True)
class EdgeSplitData:
    """
    All angles plus every length except the pairs around vertices 1 and m (1-based),
    of which only the sums h = l_1 + l_2 and k = l_m + l_{m+1} are known.

    ``base_split`` optionally records (l_1, l_m) of a generating polygon; it
    becomes the x = 0 member of a returned family.
    """

    angles: tuple[float, ...]
    m: int
    h: float
    k: float
    lengths: tuple[float | None, ...]
    base_split: tuple[float, float] | None = None

    def __post_init__(self):
        n = len(self.angles)
        if len(self.lengths) != n:
            raise PolygonDataError("lengths and angles must have the same size")
        if not 3 <= self.m <= n - 1:
            raise PolygonDataError(f"m must satisfy 3 <= m <= n-1, got m={self.m} for n={n}")
        erased = self.erased_edges
        for j, length in enumerate(self.lengths):
            if (j in erased) != (length is None):
                raise PolygonDataError(f"edge {j} must be {'erased' if j in erased else 'given'}")

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def erased_edges(self) -> tuple[int, int, int, int]:
        # 0-based: vertex 0 joins edges 0, 1 and vertex m-1 joins edges m-1, m
        return (0, 1, self.m - 1, self.m)

    @classmethod
    def from_boundary(cls, data: BoundaryData, m: int) -> "EdgeSplitData":
        if not 3 <= m <= data.n - 1:
            raise PolygonDataError(f"m must satisfy 3 <= m <= n-1, got m={m} for n={data.n}")
        erased = {0, 1, m - 1, m}
        lengths = tuple(None if j in erased else v for j, v in enumerate(data.lengths))
        return cls(
            angles=data.angles,
            m=m,
            h=data.lengths[0] + data.lengths[1],
            k=data.lengths[m - 1] + data.lengths[m],
            lengths=lengths,
            base_split=(data.lengths[0], data.lengths[m - 1]),
        )

    def psi_phi(self) -> tuple[float, float]:
        """Turning sums over the two arcs strictly between the split vertices."""
        psi = math.fsum(math.pi - self.angles[i] for i in range(1, self.m - 1))
        phi = math.fsum(math.pi - self.angles[j] for j in range(self.m, self.n))
        return psi, phi

    def with_split(self, first: float, second: float) -> BoundaryData:
        lengths = list(self.lengths)
        lengths[0], lengths[1] = first, self.h - first
        lengths[self.m - 1], lengths[self.m] = second, self.k - second
        return BoundaryData(tuple(lengths), self.angles)


@dataclass(frozen=True)
class UniqueSolution:
    data: BoundaryData


@dataclass(frozen=True)
class OneParamFamily:
    """
    Members l_1 + x, l_2 - x, l_m + y, l_{m+1} - y with y = ratio * x,
    for x in the open interval (x_lo, x_hi).
    """

    base: BoundaryData
    m: int
    ratio: float
    x_lo: float
    x_hi: float

    def member(self, x: float) -> BoundaryData:
        if not self.x_lo < x < self.x_hi:
            raise PolygonDataError(f"x={x} outside the family interval ({self.x_lo}, {self.x_hi})")
        if x == 0.0:
            return self.base
        lengths = list(self.base.lengths)
        y = self.ratio * x
        lengths[0] += x
        lengths[1] -= x
        lengths[self.m - 1] += y
        lengths[self.m] -= y
        return BoundaryData(tuple(lengths), self.base.angles)


def _open_interval(constraints: list[tuple[float, float]]) -> tuple[float, float]:
    """Largest interval of x with p + q*x > 0 for every (p, q)."""
    lo, hi = -math.inf, math.inf
    for p, q in constraints:
        if q == 0.0:
            if p <= 0.0:
                return 0.0, 0.0
            continue
        root = -p / q
        if q > 0.0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    return lo, hi


def edge_split_solve(split: EdgeSplitData, tol: float = DEFAULT_TOL) -> UniqueSolution | OneParamFamily:
    """
    Recover the split edge lengths from their sums.

    Solves l_1 (u_1 - u_2) + l_m (u_m - u_{m+1}) = r, where r collects the known
    edges; the two basis vectors are the bisector directions at vertices 1 and m.
    Parallel bisectors (equivalently Psi == Phi) give a one-parameter family.

    Raises:
        PolygonDataError: "data realizes no convex polygon"
        NumericalError: bisector parallelism disagrees with the Psi/Phi test
    """
    n, m = split.n, split.m
    if any(not 0.0 < a < math.pi for a in split.angles):
        raise PolygonDataError("non-convex data: angles must lie in (0, pi)")
    u = _directions(split.angles)
    a_vec = u[0] - u[1]
    b_vec = u[m - 1] - u[m]

    known = np.zeros(2)
    for j, length in enumerate(split.lengths):
        if length is not None:
            known += length * u[j]
    rhs = -known - split.h * u[1] - split.k * u[m]

    scale = math.fsum(v for v in split.lengths if v is not None) + split.h + split.k
    normalized_cross = _cross(a_vec, b_vec) / (np.linalg.norm(a_vec) * np.linalg.norm(b_vec))
    parallel = abs(normalized_cross) < 1e-9

    psi, phi = split.psi_phi()
    gap = abs(psi - phi)
    if (parallel and gap > 1e-6) or (not parallel and gap < 1e-12):
        raise NumericalError(
            f"bisector parallelism ({normalized_cross:.3e}) disagrees with Psi-Phi = {psi - phi:.3e}"
        )

    if not parallel:
        first, second = np.linalg.solve(np.column_stack([a_vec, b_vec]), rhs)
        data = split.with_split(float(first), float(second))
        if min(data.lengths) <= 0.0:
            raise PolygonDataError("data realizes no convex polygon: split lengths are not all positive")
        try:
            data.validate(tol)
        except PolygonDataError as exc:
            raise PolygonDataError(f"data realizes no convex polygon: {exc}") from exc
        return UniqueSolution(data)

    # b = lam * a, so the system collapses to (l_1 + lam * l_m) a = rhs
    a_norm2 = float(a_vec @ a_vec)
    lam = float(b_vec @ a_vec) / a_norm2
    level = float(rhs @ a_vec) / a_norm2
    if np.linalg.norm(rhs - level * a_vec) > tol * scale:
        raise PolygonDataError("data realizes no convex polygon: closure cannot be met along the bisectors")

    if split.base_split is not None and abs(split.base_split[0] + lam * split.base_split[1] - level) <= 1e-9 * scale:
        base_first, base_second = split.base_split
    else:
        # l_1 = level - lam * z with 0 < l_1 < h and 0 < z < k
        z_lo, z_hi = _open_interval([
            (level, -lam), (split.h - level, lam), (0.0, 1.0), (split.k, -1.0),
        ])
        if not z_lo < z_hi:
            raise PolygonDataError("data realizes no convex polygon: no positive split exists")
        base_second = 0.5 * (z_lo + z_hi)
        base_first = level - lam * base_second

    ratio = -1.0 / lam
    x_lo, x_hi = _open_interval([
        (base_first, 1.0),
        (split.h - base_first, -1.0),
        (base_second, ratio),
        (split.k - base_second, -ratio),
    ])
    if not x_lo < x_hi or min(base_first, split.h - base_first, base_second, split.k - base_second) <= 0.0:
        raise PolygonDataError("data realizes no convex polygon: no positive split exists")

    base = split.with_split(base_first, base_second).validate(max(tol, 1e-9))
    logger.info("edge split is not unique: family on (%.6g, %.6g) with y/x = %.6g", x_lo, x_hi, ratio)
    return OneParamFamily(base=base, m=m, ratio=ratio, x_lo=x_lo, x_hi=x_hi)


def deformation_sweep(family: OneParamFamily, points: int = 21, margin: float = 0.05) -> list[tuple[float, BoundaryData]]:
    """Evenly spaced members across the family interval, staying ``margin`` (relative) away from its ends."""
    if points < 1:
        raise PolygonDataError("points must be positive")
    width = family.x_hi - family.x_lo
    xs = np.linspace(family.x_lo + margin * width, family.x_hi - margin * width, points)
    return [(float(x), family.member(float(x))) for x in xs]
