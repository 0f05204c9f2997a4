"""
Sample polygon generators used by tests, the CLI data files and sweeps
"""

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from src.geometry.polygon import BoundaryData, ConvexPolygon, extract_boundary_data
from src.utils.errors import PolygonDataError


def regular_polygon(n: int, perimeter: float = 1.0) -> BoundaryData:
    if n < 3:
        raise PolygonDataError(f"a regular polygon needs n >= 3, got {n}")
    angle = (n - 2) * math.pi / n
    return BoundaryData((perimeter / n,) * n, (angle,) * n).validate()


def inscribed_regular_polygon(n: int, radius: float = 1.0) -> BoundaryData:
    """Regular n-gon inscribed in the circle of the given radius."""
    side = 2.0 * radius * math.sin(math.pi / n)
    return regular_polygon(n, perimeter=n * side)


def rectangle(width: float, height: float) -> BoundaryData:
    half = math.pi / 2
    return BoundaryData((width, height, width, height), (half,) * 4).validate()


def parallelogram(first: float, second: float, angle: float) -> BoundaryData:
    """Sides (first, second, first, second); the angle at vertex 0 is ``angle``."""
    return BoundaryData(
        (first, second, first, second),
        (angle, math.pi - angle, angle, math.pi - angle),
    ).validate()


def random_convex_polygon(n: int, rng: np.random.Generator, perimeter: float = 1.0,
                          concentration: float = 3.0) -> BoundaryData:
    """
    Random convex n-gon inscribed in a circle, rescaled to the given perimeter.

    Gaps between consecutive vertices on the circle are Dirichlet distributed,
    so no gap reaches pi and every angle stays inside (0, pi).
    """
    if n < 3:
        raise PolygonDataError(f"n must be at least 3, got {n}")
    for _ in range(100):
        gaps = rng.dirichlet(np.full(n, concentration)) * 2.0 * math.pi
        if gaps.max() >= math.pi * 0.98:
            continue
        theta = np.cumsum(gaps)
        points = np.column_stack([np.cos(theta), np.sin(theta)])
        try:
            data = extract_boundary_data(ConvexPolygon.from_points(points))
        except PolygonDataError:
            continue
        return data.scaled(perimeter / data.perimeter)
    raise PolygonDataError(f"could not sample a non-degenerate {n}-gon")


def polygon_with_angles(angles: Sequence[float], rng: np.random.Generator,
                        perimeter: float = 1.0, attempts: int = 200) -> BoundaryData:
    """
    Random lengths that close up around a prescribed angle vector.

    All but the last two lengths are drawn uniformly; the last two are fixed by
    closure. Draws that make either one non-positive are rejected.
    """
    angles = tuple(float(a) for a in angles)
    n = len(angles)
    unit_sides = BoundaryData((1.0,) * n, angles)
    if abs(math.fsum(angles) - (n - 2) * math.pi) > 1e-9 * n:
        raise PolygonDataError("angle sum differs from (n-2)pi")
    u = unit_sides.edge_directions()
    basis = np.column_stack([u[n - 2], u[n - 1]])

    for _ in range(attempts):
        free = rng.uniform(0.2, 1.0, size=n - 2)
        last_two = np.linalg.solve(basis, -(free @ u[:n - 2]))
        if min(last_two) <= 1e-3:
            continue
        lengths = np.concatenate([free, last_two])
        lengths *= perimeter / lengths.sum()
        return BoundaryData(tuple(lengths.tolist()), angles).validate()
    raise PolygonDataError("no positive lengths found for the prescribed angles")


def symmetric_odd_quadrilateral(first_odd_pi: Fraction = Fraction(1, 3), second_odd_pi: Fraction = Fraction(1, 5),
                                first_lengths: tuple[float, float] = (0.3, 0.2)) -> BoundaryData:
    """
    Quadrilateral with odd angles at the non-adjacent vertices 0 and 2 and two
    equal angles at vertices 1 and 3, so that the edge-split system around the
    odd vertices is degenerate.
    """
    first = float(Fraction(first_odd_pi)) * math.pi
    second = float(Fraction(second_odd_pi)) * math.pi
    other = math.pi - 0.5 * (first + second)
    angles = (first, other, second, other)

    u = BoundaryData((1.0,) * 4, angles).edge_directions()
    head = np.asarray(first_lengths, dtype=float)
    tail = np.linalg.solve(np.column_stack([u[2], u[3]]), -(head @ u[:2]))
    if min(tail) <= 0.0:
        raise PolygonDataError("first_lengths do not close into a convex quadrilateral")
    return BoundaryData(tuple(head.tolist() + tail.tolist()), angles).validate()


def thirty_sixty_ninety(short_side: float = 1.0) -> BoundaryData:
    """Right triangle with angles (pi/2, pi/3, pi/6) at vertices 0, 1, 2."""
    return BoundaryData(
        (math.sqrt(3.0) * short_side, short_side, 2.0 * short_side),
        (math.pi / 2, math.pi / 3, math.pi / 6),
    ).validate()
