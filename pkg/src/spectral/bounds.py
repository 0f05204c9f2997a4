"""
Steklov eigenvalue upper bounds

Key features:
- Closed-form bounds for domains containing a rectangle, a polar rectangle,
  a long thin quadrilateral or triangle, or fitting in a thin box
- Triangle and convex n-gon bounds in terms of the smallest angle, and the
  angle lower bound they imply
- applicable_bounds: every bound the geometry of one polygon supports

Bounds never raise on a failed hypothesis; they return a BoundResult with
``hypotheses_ok=False`` and no value.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Point

from src.geometry.polygon import BoundaryData, build_polygon, polygon_points
from src.utils.errors import NumericalError, PolygonDataError

logger = logging.getLogger(__name__)

DELTA_MARGIN = 1e-12


@dataclass(frozen=True)
class BoundResult:
    """Upper bound on sigma_index (divided by the perimeter where the formula is perimeter-normalized)."""

    value: float | None
    formula: str
    hypotheses_ok: bool
    hypothesis_report: str
    index: int
    geometry: str = ""
    extras: dict = field(default_factory=dict)


def _ok(value: float, formula: str, index: int, report: str = "ok", geometry: str = "", **extras) -> BoundResult:
    return BoundResult(value, formula, True, report, index, geometry, dict(extras))


def _failed(formula: str, index: int, report: str, geometry: str = "", **extras) -> BoundResult:
    return BoundResult(None, formula, False, report, index, geometry, dict(extras))


def _check_index(k: int) -> None:
    if k < 0:
        raise PolygonDataError(f"eigenvalue index must be nonnegative, got {k}")


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0.0:
            raise PolygonDataError(f"{name} must be positive, got {value}")


def bound_rectangle(ell: float, w: float, k: int) -> BoundResult:
    """Domain containing an ell-by-w rectangle whose two long sides lie on the boundary."""
    _check_index(k)
    _check_positive(ell=ell, w=w)
    return _ok(2.0 * math.pi ** 2 * k ** 2 * w / ell ** 2, "rectangle", k)


@dataclass(frozen=True)
class PolarRectangle:
    """Sector of a disk (r1 = 0) or of an annulus."""

    r1: float
    r2: float
    alpha: float

    def __post_init__(self):
        if self.r1 < 0.0 or not self.r2 > self.r1:
            raise PolygonDataError(f"polar rectangle needs 0 <= r1 < r2, got r1={self.r1}, r2={self.r2}")
        if not 0.0 < self.alpha < 2.0 * math.pi:
            raise PolygonDataError(f"opening angle must lie in (0, 2pi), got {self.alpha}")

    @property
    def L(self) -> float:
        return self.r2 - self.r1

    @property
    def s1(self) -> float:
        return self.r1 * self.alpha

    @property
    def s2(self) -> float:
        return self.r2 * self.alpha


def bound_polar_rectangle(sector: PolarRectangle, k: int) -> BoundResult:
    """
    Domain containing a polar rectangle whose radial edges lie on the boundary.

    Raises:
        NumericalError: the two algebraic forms of the bound disagree
    """
    _check_index(k)
    L = sector.L
    radial_form = sector.alpha * k ** 2 * math.pi ** 2 / L * (1.0 + 2.0 * sector.r1 / L)
    arc_form = k ** 2 * math.pi ** 2 * (sector.s1 + sector.s2) / L ** 2
    if abs(radial_form - arc_form) > 1e-12 * max(abs(radial_form), abs(arc_form), 1e-300):
        raise NumericalError(f"polar rectangle forms disagree: {radial_form!r} vs {arc_form!r}")
    return _ok(radial_form, "polar_rectangle", k, arc_form=arc_form)


def bound_passage(shape: str, ell: float, w: float, k: int) -> BoundResult:
    """
    Long thin quadrilateral ("quad": long sides on the boundary, needs ell > 3w)
    or triangle ("tri": two sides of length at least ell from one boundary
    vertex, third side w < ell/2).
    """
    _check_index(k)
    _check_positive(ell=ell, w=w)
    if shape == "quad":
        if not ell > 3.0 * w:
            return _failed("passage_quad", k, f"needs ell > 3w, got ell={ell:.6g}, w={w:.6g}")
        return _ok(2.0 * k ** 2 * math.pi ** 3 * w / (ell - 3.0 * w) ** 2, "passage_quad", k)
    if shape == "tri":
        if not w < ell / 2.0:
            return _failed("passage_tri", k, f"needs w < ell/2, got ell={ell:.6g}, w={w:.6g}")
        return _ok(k ** 2 * math.pi ** 3 * w / (ell - 2.0 * w) ** 2, "passage_tri", k)
    raise PolygonDataError(f"unknown passage shape {shape!r}; expected 'quad' or 'tri'")


def bound_triangle_min_angle(alpha: float, perimeter: float, k: int) -> BoundResult:
    """Any triangle with smallest angle alpha: sigma_k L <= (8 sqrt3 / 3) pi^2 k^2 alpha."""
    _check_index(k)
    _check_positive(perimeter=perimeter)
    if not 0.0 < alpha <= math.pi / 3 + 1e-15:
        return _failed("triangle_min_angle", k, f"not a smallest triangle angle: {alpha:.6g} is outside (0, pi/3]")
    value = 8.0 * math.sqrt(3.0) / 3.0 * math.pi ** 2 * k ** 2 * alpha / perimeter
    return _ok(value, "triangle_min_angle", k)


def bound_isosceles_even(alpha: float, k: int, perimeter: float = 1.0) -> BoundResult:
    """
    Isosceles triangle whose two equal angles alpha do not exceed the third:
    a bound on sigma_{2k}. ``value`` is the sharp form; ``extras["simplified"]``
    is 6 pi^2 k^2 alpha (both divided by the perimeter).
    """
    _check_index(k)
    _check_positive(perimeter=perimeter)
    index = 2 * k
    if not 0.0 < alpha <= math.pi / 3 + 1e-15:
        return _failed("isosceles_even", index, f"equal angles must lie in (0, pi/3], got {alpha:.6g}")
    sharp = math.pi ** 2 * k ** 2 * 2.0 * (1.0 + math.cos(alpha)) / math.cos(alpha) * alpha / perimeter
    simplified = 6.0 * math.pi ** 2 * k ** 2 * alpha / perimeter
    return _ok(sharp, "isosceles_even", index, simplified=simplified)


def bound_thin_ngon(ell_star: float, w_star: float, n: int, k: int) -> BoundResult:
    """n-gon (convex or not) inside an ell*-by-w* box touching both short sides."""
    _check_index(k)
    _check_positive(ell_star=ell_star, w_star=w_star)
    if n < 3:
        raise PolygonDataError(f"n must be at least 3, got {n}")
    if not w_star < ell_star / (3.0 * (n - 1)):
        return _failed("thin_ngon", k, f"needs w* < ell*/(3(n-1)), got ell*={ell_star:.6g}, w*={w_star:.6g}")
    value = 2.0 * k ** 2 * (n - 1) ** 2 * math.pi ** 3 * w_star / (ell_star - 3.0 * (n - 1) * w_star) ** 2
    return _ok(value, "thin_ngon", k)


def ngon_delta_limit(n: int) -> float:
    """The open upper limit 0.98/(3n-2) on the angle threshold."""
    if n < 3:
        raise PolygonDataError(f"n must be at least 3, got {n}")
    return 0.98 / (3 * n - 2)


@dataclass(frozen=True)
class NgonConstants:
    delta: float
    C: float


def convex_ngon_constants(n: int, delta: float | None = None) -> NgonConstants:
    """Angle threshold delta_n and the constant C_n it produces."""
    limit = ngon_delta_limit(n)
    if delta is None:
        delta = limit - DELTA_MARGIN
    elif not 0.0 < delta < limit:
        raise PolygonDataError(f"delta must lie in (0, {limit:.12g}), got {delta}")
    C = (n - 1) ** 2 * math.pi ** 3 / (0.98 * (0.5 - (3 * n - 2) * delta / (2.0 * 0.98)) ** 2)
    return NgonConstants(delta=delta, C=C)


def bound_convex_ngon(n: int, alpha_min: float, perimeter: float, k: int, delta: float | None = None) -> BoundResult:
    """Convex n-gon with smallest angle below delta_n: sigma_k L <= C_n k^2 alpha."""
    _check_index(k)
    _check_positive(perimeter=perimeter, alpha_min=alpha_min)
    constants = convex_ngon_constants(n, delta)
    if not alpha_min < constants.delta:
        return _failed("convex_ngon", k,
                       f"smallest angle {alpha_min:.6g} is not below delta_{n} = {constants.delta:.6g}",
                       delta=constants.delta, C=constants.C)
    value = constants.C * k ** 2 * alpha_min / perimeter
    return _ok(value, "convex_ngon", k, delta=constants.delta, C=constants.C)


def angle_lower_bound(n: int, sigma_k: float, perimeter: float, k: int, delta: float | None = None) -> float:
    """Every angle of a convex n-gon with this sigma_k and perimeter is at least min(delta_n, sigma_k L / (C_n k^2))."""
    if k < 1:
        raise PolygonDataError("angle_lower_bound needs k >= 1")
    if sigma_k < 0.0:
        raise PolygonDataError(f"sigma_k must be nonnegative, got {sigma_k}")
    constants = convex_ngon_constants(n, delta)
    return min(constants.delta, sigma_k * perimeter / (constants.C * k ** 2))


def weinstock_bound(perimeter: float) -> float:
    """sigma_1 <= 2 pi / L for simply connected planar domains."""
    _check_positive(perimeter=perimeter)
    return 2.0 * math.pi / perimeter


def _antiparallel_rectangles(points: np.ndarray, k: int) -> list[BoundResult]:
    n = len(points)
    results = []
    for i, j in itertools.combinations(range(n), 2):
        a0, a1 = points[i], points[(i + 1) % n]
        b0, b1 = points[j], points[(j + 1) % n]
        u = (a1 - a0) / np.linalg.norm(a1 - a0)
        v = (b1 - b0) / np.linalg.norm(b1 - b0)
        if float(u @ v) > -1.0 + 1e-9:
            continue
        normal = np.array([-u[1], u[0]])
        width = abs(float((b0 - a0) @ normal))
        a_range = sorted((0.0, float((a1 - a0) @ u)))
        b_range = sorted((float((b0 - a0) @ u), float((b1 - a0) @ u)))
        overlap = min(a_range[1], b_range[1]) - max(a_range[0], b_range[0])
        if overlap <= 0.0 or width <= 0.0:
            continue
        result = bound_rectangle(overlap, width, k)
        results.append(BoundResult(result.value, result.formula, True, "ok", k,
                                   f"edges {i},{j}: ell={overlap:.6g}, w={width:.6g}", {}))
    return results


def _vertex_sectors(data: BoundaryData, points: np.ndarray, k: int) -> list[BoundResult]:
    n = data.n
    results = []
    for v in range(n):
        corner = points[(v + 1) % n]
        adjacent = min(data.lengths[v], data.lengths[(v + 1) % n])
        clearance = math.inf
        for e in range(n):
            if e in (v, (v + 1) % n):
                continue
            segment = LineString([tuple(points[e]), tuple(points[(e + 1) % n])])
            clearance = min(clearance, segment.distance(Point(tuple(corner))))
        radius = min(adjacent, clearance)
        sector = PolarRectangle(0.0, radius, data.angles[v])
        result = bound_polar_rectangle(sector, k)
        results.append(BoundResult(result.value, "disk_sector", True, "ok", k,
                                   f"vertex {v}: R={radius:.6g}, alpha={data.angles[v]:.6g}", result.extras))
    return results


def _vertex_passages(data: BoundaryData, k: int) -> list[BoundResult]:
    results = []
    for v in range(data.n):
        ell = min(data.lengths[v], data.lengths[(v + 1) % data.n])
        w = 2.0 * ell * math.sin(data.angles[v] / 2.0)
        result = bound_passage("tri", ell, w, k)
        results.append(BoundResult(result.value, result.formula, result.hypotheses_ok, result.hypothesis_report,
                                   k, f"vertex {v}: ell={ell:.6g}, w={w:.6g}", {}))
    return results


def _best_thin_box(points: np.ndarray, k: int) -> BoundResult:
    n = len(points)
    directions = [points[(i + 1) % n] - points[i] for i in range(n)]
    directions += [points[j] - points[i] for i, j in itertools.combinations(range(n), 2)]
    best: BoundResult | None = None
    tightest: tuple[float, float] | None = None
    for d in directions:
        d = d / np.linalg.norm(d)
        normal = np.array([-d[1], d[0]])
        along, across = points @ d, points @ normal
        ell_star = float(along.max() - along.min())
        w_star = float(across.max() - across.min())
        if tightest is None or w_star / ell_star < tightest[1] / tightest[0]:
            tightest = (ell_star, w_star)
        result = bound_thin_ngon(ell_star, w_star, n, k)
        if result.hypotheses_ok and (best is None or result.value < best.value):
            best = BoundResult(result.value, result.formula, True, "ok", k,
                               f"box ell*={ell_star:.6g}, w*={w_star:.6g}", {})
    if best is not None:
        return best
    ell_star, w_star = tightest
    return bound_thin_ngon(ell_star, w_star, n, k)


def applicable_bounds(data: BoundaryData, k: int) -> list[BoundResult]:
    """
    Every bound on sigma_k supported by the geometry of one convex polygon.

    Perimeter-normalized bounds are divided by the perimeter, so every value
    is directly comparable with sigma_k.
    """
    _check_index(k)
    poly = build_polygon(data)
    points = polygon_points(data)
    n, perimeter = data.n, data.perimeter
    alpha_min = min(data.angles)

    results = _antiparallel_rectangles(points, k)
    results += _vertex_sectors(data, points, k)
    results += _vertex_passages(data, k)

    if n == 3:
        results.append(bound_triangle_min_angle(alpha_min, perimeter, k))
        if k % 2 == 0 and k > 0:
            ordered = sorted(data.angles)
            if abs(ordered[0] - ordered[1]) <= 1e-9 and ordered[1] <= ordered[2] + 1e-12:
                results.append(bound_isosceles_even(ordered[0], k // 2, perimeter))

    results.append(_best_thin_box(points, k))
    results.append(bound_convex_ngon(n, alpha_min, perimeter, k))
    logger.debug("%d bounds evaluated for sigma_%d of a %d-gon (area %.6g)", len(results), k, n, poly.area)
    return results
