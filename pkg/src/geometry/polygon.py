"""
Convex polygon data model

Key features:
- PlanarPoint / ConvexPolygon: vertex representation with convexity validation
- BoundaryData: cyclic edge-length and interior-angle vectors (float, optionally exact)
- extract_boundary_data / build_polygon: conversion in both directions
- DihedralLabeling / congruent: the 2n relabelings and congruence testing

Labeling convention: vertex j sits between edges j and j+1. With 0-based
indices, edge i runs from point p[i] to p[i+1] and vertex i is the point p[i+1].
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from src.utils.errors import PolygonDataError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PolygonDataError(f"non-finite coordinates ({self.x}, {self.y})")


def _turn_crosses(points: np.ndarray) -> np.ndarray:
    """Cross product of consecutive edge vectors at every point (index k is the turn at points[k])."""
    incoming = points - np.roll(points, 1, axis=0)
    outgoing = np.roll(points, -1, axis=0) - points
    return incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]


def _signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Counterclockwise convex polygon with every interior angle strictly in (0, pi)."""

    vertices: tuple[PlanarPoint, ...]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        n = len(self.vertices)
        if n < 3:
            raise PolygonDataError(f"a polygon needs at least 3 vertices, got {n}")

        points = self.as_array()
        perimeter = float(np.sum(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)))
        if perimeter <= 0.0:
            raise PolygonDataError("degenerate polygon with zero perimeter")

        if _signed_area(points) <= 0.0:
            raise PolygonDataError("vertices are not in counterclockwise order")

        crosses = _turn_crosses(points)
        scale = self.tol * perimeter * perimeter
        for k, cross in enumerate(crosses):
            if abs(cross) <= scale:
                raise PolygonDataError(f"collinear triple at vertex {k} ({points[k][0]:.6g}, {points[k][1]:.6g})")
            if cross < 0.0:
                raise PolygonDataError(f"reflex angle at vertex {k} ({points[k][0]:.6g}, {points[k][1]:.6g})")

        # left turns summing to 4pi or more mean the boundary winds twice
        if not self.to_shapely().is_valid:
            raise PolygonDataError("self-intersecting boundary")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], tol: float = DEFAULT_TOL) -> "ConvexPolygon":
        """Build from raw coordinates, reversing clockwise input."""
        array = np.asarray([[float(p[0]), float(p[1])] for p in points], dtype=float)
        if len(array) >= 3 and _signed_area(array) < 0.0:
            array = array[::-1]
        return cls(tuple(PlanarPoint(float(x), float(y)) for x, y in array), tol=tol)

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.vertices], dtype=float)

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon([(p.x, p.y) for p in self.vertices])

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def perimeter(self) -> float:
        points = self.as_array()
        return float(np.sum(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)))

    @property
    def area(self) -> float:
        return _signed_area(self.as_array())


def _as_fraction_tuple(values) -> tuple[Fraction, ...] | None:
    if values is None:
        return None
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class BoundaryData:
    """
    Cyclic edge lengths and interior angles of a polygon.

    ``exact_lengths`` and ``exact_angles_pi`` (angles divided by pi) carry
    rational values when the data came from exact input; they switch
    charpoly construction and admissibility into exact mode.
    """

    lengths: tuple[float, ...]
    angles: tuple[float, ...]
    exact_lengths: tuple[Fraction, ...] | None = None
    exact_angles_pi: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        angles = tuple(float(v) for v in self.angles)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "exact_lengths", _as_fraction_tuple(self.exact_lengths))
        object.__setattr__(self, "exact_angles_pi", _as_fraction_tuple(self.exact_angles_pi))

        if len(lengths) < 3:
            raise PolygonDataError(f"boundary data needs at least 3 edges, got {len(lengths)}")
        if len(lengths) != len(angles):
            raise PolygonDataError(f"{len(lengths)} lengths but {len(angles)} angles")
        for name, values in (("length", lengths), ("angle", angles)):
            for j, v in enumerate(values):
                if not math.isfinite(v):
                    raise PolygonDataError(f"non-finite {name} at index {j}")
        for exact in (self.exact_lengths, self.exact_angles_pi):
            if exact is not None and len(exact) != len(lengths):
                raise PolygonDataError("exact values must match the vector length")

    @classmethod
    def from_rational(cls, lengths: Sequence, angles_pi: Sequence) -> "BoundaryData":
        """Data from rational lengths and angles given as rational multiples of pi."""
        exact_lengths = tuple(Fraction(v) for v in lengths)
        exact_angles = tuple(Fraction(v) for v in angles_pi)
        return cls(
            lengths=tuple(float(v) for v in exact_lengths),
            angles=tuple(float(q) * math.pi for q in exact_angles),
            exact_lengths=exact_lengths,
            exact_angles_pi=exact_angles,
        )

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def perimeter(self) -> float:
        return math.fsum(self.lengths)

    @property
    def has_exact_lengths(self) -> bool:
        return self.exact_lengths is not None

    @property
    def has_exact_angles(self) -> bool:
        return self.exact_angles_pi is not None

    def edge_directions(self) -> np.ndarray:
        """Unit direction of every edge when edge 0 points along +x."""
        turning = np.concatenate([[0.0], np.cumsum(math.pi - np.asarray(self.angles[:-1]))])
        return np.column_stack([np.cos(turning), np.sin(turning)])

    def closure_residual(self) -> float:
        return float(np.linalg.norm(np.asarray(self.lengths) @ self.edge_directions()))

    def angle_sum_residual(self) -> float:
        return abs(math.fsum(self.angles) - (self.n - 2) * math.pi)

    def validate(self, tol: float = DEFAULT_TOL) -> "BoundaryData":
        """Check positivity, convexity, angle sum and closure; return self."""
        for j, length in enumerate(self.lengths):
            if length <= 0.0:
                raise PolygonDataError(f"edge {j} has non-positive length {length}")
        for j, angle in enumerate(self.angles):
            if not 0.0 < angle < math.pi:
                raise PolygonDataError(f"non-convex data: angle {angle} at vertex {j} is outside (0, pi)")
        if self.angle_sum_residual() > tol * max(1.0, self.n):
            raise PolygonDataError(
                f"non-closing data: angle sum {math.fsum(self.angles):.12g} differs from (n-2)pi"
            )
        if self.closure_residual() > tol * self.perimeter:
            raise PolygonDataError(f"non-closing data: closure residual {self.closure_residual():.3e}")
        return self

    def scaled(self, factor: float) -> "BoundaryData":
        exact = None
        if self.exact_lengths is not None and isinstance(factor, (int, Fraction)):
            exact = tuple(v * factor for v in self.exact_lengths)
        return BoundaryData(
            lengths=tuple(v * factor for v in self.lengths),
            angles=self.angles,
            exact_lengths=exact,
            exact_angles_pi=self.exact_angles_pi,
        )

    def without_exact(self) -> "BoundaryData":
        return BoundaryData(self.lengths, self.angles)


@dataclass(frozen=True)
class PartialBoundaryData:
    """Full cyclic lengths with up to three angles left blank (None)."""

    lengths: tuple[float, ...]
    angles: tuple[float | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "angles", tuple(None if a is None else float(a) for a in self.angles))
        if len(self.lengths) != len(self.angles):
            raise PolygonDataError(f"{len(self.lengths)} lengths but {len(self.angles)} angles")
        if len(self.lengths) < 3:
            raise PolygonDataError("partial data needs at least 3 edges")
        if len(self.blank_indices) > 3:
            raise PolygonDataError(f"at most 3 blank angles allowed, got {len(self.blank_indices)}")

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def blank_indices(self) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.angles) if a is None)

    @classmethod
    def blanking(cls, data: BoundaryData, blanks: Iterable[int]) -> "PartialBoundaryData":
        blanks = set(blanks)
        return cls(data.lengths, tuple(None if j in blanks else a for j, a in enumerate(data.angles)))


@dataclass(frozen=True)
class DihedralLabeling:
    """One of the 2n relabelings: optional reflection followed by a cyclic shift."""

    offset: int
    reflected: bool = False

    def _permute(self, values: Sequence, is_angle: bool) -> tuple:
        n = len(values)
        if self.reflected:
            if is_angle:
                values = [values[(n - 2 - i) % n] for i in range(n)]
            else:
                values = [values[n - 1 - i] for i in range(n)]
        return tuple(values[(i + self.offset) % n] for i in range(n))

    def apply(self, data: BoundaryData) -> BoundaryData:
        return BoundaryData(
            lengths=self._permute(data.lengths, False),
            angles=self._permute(data.angles, True),
            exact_lengths=None if data.exact_lengths is None else self._permute(data.exact_lengths, False),
            exact_angles_pi=None if data.exact_angles_pi is None else self._permute(data.exact_angles_pi, True),
        )

    def edge_index(self, i: int, n: int) -> int:
        """Original index of the edge that lands at position ``i``."""
        j = (i + self.offset) % n
        return n - 1 - j if self.reflected else j

    def vertex_index(self, i: int, n: int) -> int:
        """Original index of the vertex that lands at position ``i``."""
        j = (i + self.offset) % n
        return (n - 2 - j) % n if self.reflected else j


def all_labelings(n: int) -> list[DihedralLabeling]:
    return [DihedralLabeling(offset, reflected) for reflected in (False, True) for offset in range(n)]


def _labeling_key(data: BoundaryData) -> tuple:
    return tuple((round(length, 10), round(angle, 10)) for length, angle in zip(data.lengths, data.angles))


def canonical_labeling(data: BoundaryData) -> DihedralLabeling:
    """Relabeling whose (length, angle) sequence is lexicographically smallest."""
    return min(all_labelings(data.n), key=lambda lab: (_labeling_key(lab.apply(data)), lab.reflected, lab.offset))


def canonicalize_labeling(data: BoundaryData) -> BoundaryData:
    return canonical_labeling(data).apply(data)


def congruent(a: BoundaryData, b: BoundaryData, tol: float = DEFAULT_TOL) -> bool:
    """True iff some dihedral relabeling maps a onto b entrywise within tol (lengths scaled by perimeter)."""
    if a.n != b.n:
        return False
    length_tol = tol * max(a.perimeter, b.perimeter)
    target_lengths = np.asarray(b.lengths)
    target_angles = np.asarray(b.angles)
    for labeling in all_labelings(a.n):
        moved = labeling.apply(a)
        if (np.max(np.abs(np.asarray(moved.lengths) - target_lengths)) <= length_tol
                and np.max(np.abs(np.asarray(moved.angles) - target_angles)) <= tol):
            return True
    return False


def extract_boundary_data(poly: ConvexPolygon) -> BoundaryData:
    """Read (lengths, angles) off a convex polygon."""
    points = poly.as_array()
    outgoing = np.roll(points, -1, axis=0) - points
    lengths = np.linalg.norm(outgoing, axis=1)

    # vertex i is points[i+1], between edge i (incoming) and edge i+1 (outgoing)
    incoming = outgoing
    following = np.roll(outgoing, -1, axis=0)
    back = -incoming
    cross = back[:, 0] * following[:, 1] - back[:, 1] * following[:, 0]
    dot = back[:, 0] * following[:, 0] + back[:, 1] * following[:, 1]
    angles = np.arctan2(np.abs(cross), dot)

    return BoundaryData(tuple(lengths.tolist()), tuple(angles.tolist()))


def polygon_points(data: BoundaryData) -> np.ndarray:
    """Vertex coordinates at canonical placement (no validation); the closing point is dropped."""
    steps = np.asarray(data.lengths)[:, None] * data.edge_directions()
    return np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)[:-1]])


def build_polygon(data: BoundaryData, tol: float = DEFAULT_TOL) -> ConvexPolygon:
    """
    Lay the data out with the first point at the origin and edge 0 along +x.

    Raises:
        PolygonDataError: "non-convex data" for an angle outside (0, pi),
            "non-closing data" when the angle sum or closure residual fails.
    """
    data.validate(tol)
    points = polygon_points(data)
    return ConvexPolygon(tuple(PlanarPoint(float(x), float(y)) for x, y in points), tol=tol)
