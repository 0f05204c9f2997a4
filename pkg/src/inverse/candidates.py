"""
Enumeration of polygons sharing a characteristic polynomial

Key features:
- enumerate_admissible_candidates: admissible targets, searched over component
  orientations and obtuse-angle positions, completed by three-blank reconstruction
- enumerate_weak_candidates: weakly edge-admissible targets with one or two odd
  angles, searched over reduced-angle branches, odd values and curved-edge placements
- classify_weak_quadrilateral: the equal/unequal non-odd angle dichotomy of
  quadrilaterals with two odd angles
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from src.config.steklov_config import DEFAULT_CONFIG, SteklovConfig
from src.geometry.polygon import (
    BoundaryData,
    DihedralLabeling,
    PartialBoundaryData,
    canonicalize_labeling,
    congruent,
)
from src.geometry.reconstruction import (
    EdgeSplitData,
    OneParamFamily,
    edge_split_solve,
    quad_from_asa_perimeter,
    reconstruct_missing_angles,
)
from src.inverse.admissibility import (
    AdmissibilityReport,
    admissibility,
    b_plus_refinement_applies,
    exceptional_components,
    reduce_polygon,
    theorem_cap,
)
from src.inverse.angles import (
    as_rational_pi,
    classify_angles,
    inverse_c_preimages,
    obtuse_preimage,
    odd_sum_after_swap,
)
from src.spectral.bounds import angle_lower_bound, ngon_delta_limit
from src.spectral.char_poly import TrigPoly, build_charpoly, c_of_angle, equal_charpoly
from src.utils.errors import NumericalError, PolygonDataError
from src.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

CONGRUENCE_TOL = 1e-7

SetVerdict = Literal["finite", "continuum", "indeterminate"]


@dataclass(frozen=True)
class CandidateSet:
    """
    Mutually non-congruent polygons with the target's characteristic polynomial.

    ``cap`` is the theorem cap when one applies; ``family`` carries the
    deformation family of a continuum verdict.
    """

    candidates: tuple[BoundaryData, ...]
    cap: int | None
    verdict: SetVerdict
    notes: tuple[str, ...] = ()
    family: OneParamFamily | None = None
    configurations_checked: int = 0

    def __len__(self) -> int:
        return len(self.candidates)


def _candidate_key(data: BoundaryData) -> tuple:
    return tuple((round(length, 9), round(angle, 9)) for length, angle in zip(data.lengths, data.angles))


def _dedupe(found: Sequence[BoundaryData]) -> tuple[BoundaryData, ...]:
    unique: list[BoundaryData] = []
    for data in found:
        if not any(congruent(data, other, CONGRUENCE_TOL) for other in unique):
            unique.append(data)
    return tuple(sorted((canonicalize_labeling(d) for d in unique), key=_candidate_key))


def _with_exact(data: BoundaryData, exact_lengths: Sequence[Fraction] | None, rational_angles: bool) -> BoundaryData:
    """Attach rational lengths and, when every angle is one, rational angles."""
    exact_angles = None
    if rational_angles:
        converted = [as_rational_pi(a, tol=1e-9) for a in data.angles]
        if all(q is not None for q in converted):
            exact_angles = tuple(converted)
    if exact_lengths is None and exact_angles is None:
        return data
    return BoundaryData(data.lengths, data.angles, exact_lengths=exact_lengths, exact_angles_pi=exact_angles)


def _angle_floor(target: BoundaryData, sigma_k: float | None, k: int, config: SteklovConfig) -> float:
    """Lower bound on every angle of a polygon sharing sigma_k and the perimeter; 0 without sigma_k."""
    if sigma_k is None:
        return 0.0
    if sigma_k < 0.0 or k < 1:
        raise PolygonDataError("sigma_k must be nonnegative and k at least 1")
    n = target.n
    delta = config.enumeration.ngon_delta_fraction * ngon_delta_limit(n)
    floor = angle_lower_bound(n, config.enumeration.weak_sigma_safety * sigma_k, target.perimeter, k, delta=delta)
    if floor > min(target.angles) + config.tolerances.geometry_tol:
        raise PolygonDataError(
            f"angle floor {floor:.6g} from sigma_{k} = {sigma_k:.6g} exceeds the smallest target angle "
            f"{min(target.angles):.6g}; sigma_k is too large for this polygon"
        )
    return floor


def _matches(candidate: BoundaryData, target_poly: TrigPoly, floor: float, config: SteklovConfig) -> bool:
    if min(candidate.angles) < floor - config.tolerances.geometry_tol:
        return False
    return equal_charpoly(build_charpoly(candidate, exact=False), target_poly, config.tolerances.charpoly_match_tol)


@dataclass(frozen=True)
class _Arrangement:
    """Target edges and vertices in a candidate's order: vertex j sits between edges j and j+1."""

    edge_order: tuple[int, ...]
    vertex_order: tuple[int, ...]
    even_positions: frozenset[int]


def _arrangements(target: BoundaryData, tol: float) -> list[_Arrangement]:
    components = exceptional_components(target, tol)
    n = target.n
    if not components:
        return [_Arrangement(tuple(range(n)), tuple(range(n)), frozenset())]

    closing = [component.edge_indices[-1] for component in components]
    arrangements: list[_Arrangement] = []
    seen: set[tuple] = set()
    for flips in itertools.product((False, True), repeat=len(components)):
        edges: list[int] = []
        vertices: list[int] = []
        evens: set[int] = set()
        for component, flip, even_vertex in zip(components, flips, closing):
            oriented = component.inverse() if flip else component
            edges.extend(oriented.edge_indices)
            vertices.extend(oriented.vertex_indices)
            evens.add(len(vertices))
            vertices.append(even_vertex)
        key = (
            tuple(round(target.lengths[e], 12) for e in edges),
            tuple(round(target.angles[v], 12) for v in vertices),
        )
        if key in seen:
            continue
        seen.add(key)
        arrangements.append(_Arrangement(tuple(edges), tuple(vertices), frozenset(evens)))
    return arrangements


def enumerate_admissible_candidates(target: BoundaryData, *, sigma_k: float | None = None, k: int = 1,
                                    exact: bool | None = None, tol: float | None = None,
                                    config: SteklovConfig | None = None) -> CandidateSet:
    """
    Every convex n-gon (up to congruence) with the characteristic polynomial
    of an admissible target.

    Args:
        target: validated boundary data
        sigma_k: optional k-th eigenvalue; its angle floor prunes candidates
        k: index of sigma_k
        exact: admissibility mode (defaults to exact for rational lengths)
        tol: overrides every acceptance tolerance of ``config``
        config: tolerances, thread count and floor settings

    Returns:
        CandidateSet: verdict "finite" with the theorem cap, or "indeterminate"
            (no cap) when float arithmetic cannot certify admissibility

    Raises:
        PolygonDataError: the target is not admissible
    """
    config = config or DEFAULT_CONFIG
    if tol is not None:
        config = config.with_tolerance(tol)
    tolerances = config.tolerances

    report = admissibility(target, exact=exact, tol=tolerances.commensurability_tol)
    if report.verdict == "not_admissible":
        raise PolygonDataError(f"target is not admissible: {'; '.join(report.reasons)}")
    indeterminate = report.verdict == "indeterminate"
    cap = None if indeterminate else theorem_cap(target, tolerances.classify_tol)

    floor = _angle_floor(target, sigma_k, k, config)
    target_poly = build_charpoly(target, exact=False)
    C = [c_of_angle(a) for a in target.angles]
    C_abs = [abs(c) for c in C]
    restrict_to_negative = b_plus_refinement_applies(target, tolerances.classify_tol)
    n = target.n

    tasks = []
    for arrangement in _arrangements(target, tolerances.classify_tol):
        positions = [i for i in range(n) if i not in arrangement.even_positions]
        if restrict_to_negative:
            positions = [i for i in positions if C[arrangement.vertex_order[i]] < 0.0]
        for obtuse in itertools.combinations(positions, n - 3):
            tasks.append((arrangement, obtuse))

    rational_angles = target.has_exact_angles

    def attempt(task) -> BoundaryData | None:
        arrangement, obtuse = task
        lengths = [target.lengths[e] for e in arrangement.edge_order]
        s_values = [C_abs[v] for v in arrangement.vertex_order]
        angles: list[float | None] = [None] * n
        try:
            for i in obtuse:
                angles[i] = obtuse_preimage(s_values[i])
            candidate = reconstruct_missing_angles(PartialBoundaryData(tuple(lengths), tuple(angles)),
                                                   tolerances.geometry_tol)
        except PolygonDataError as exc:
            logger.debug("rejected obtuse positions %s: %s", obtuse, exc)
            return None

        blanks = [i for i in range(n) if angles[i] is None]
        if any(abs(abs(c_of_angle(candidate.angles[i])) - s_values[i]) > tolerances.c_match_tol for i in blanks):
            logger.debug("rejected obtuse positions %s: |c| mismatch at the completed angles", obtuse)
            return None
        if not _matches(candidate, target_poly, floor, config):
            logger.debug("rejected obtuse positions %s: characteristic polynomial differs", obtuse)
            return None
        exact_lengths = None
        if target.has_exact_lengths:
            exact_lengths = tuple(target.exact_lengths[e] for e in arrangement.edge_order)
        return _with_exact(candidate, exact_lengths, rational_angles)

    found = [c for c in parallel_map(attempt, tasks, config.threads) if c is not None]
    candidates = _dedupe(found)
    logger.info("admissible enumeration: %d configurations, %d accepted, %d classes (cap %s)",
                len(tasks), len(found), len(candidates), cap)

    notes = []
    if indeterminate:
        notes.append("admissibility is indeterminate in float mode; the cap is not certified")
    if cap is not None and len(candidates) > cap:
        raise NumericalError(f"{len(candidates)} candidates exceed the theorem cap {cap}")
    return CandidateSet(
        candidates=candidates,
        cap=cap,
        verdict="indeterminate" if indeterminate else "finite",
        notes=tuple(notes),
        configurations_checked=len(tasks),
    )


@dataclass(frozen=True)
class WeakQuadrilateralClass:
    odd_vertices: tuple[int, int]
    adjacent: bool
    equal_non_odd: bool
    continuum: bool
    # sum of the odd angles of a polygon obtained by swapping one equal angle to its acute partner
    swapped_odd_sum: float | None


def classify_weak_quadrilateral(data: BoundaryData, tol: float = 1e-9) -> WeakQuadrilateralClass:
    """
    Quadrilateral with exactly two odd angles: adjacency of the odd vertices and
    whether the other two angles are equal. Non-adjacent odd vertices with equal
    remaining angles admit an isospectral deformation.
    """
    if data.n != 4:
        raise PolygonDataError(f"expected a quadrilateral, got n={data.n}")
    odd = [i for i, c in enumerate(classify_angles(data, tol)) if c.is_odd]
    if len(odd) != 2:
        raise PolygonDataError(f"expected exactly two odd angles, got {len(odd)}")
    first, second = odd
    adjacent = (second - first) % 4 in (1, 3)
    others = [data.angles[i] for i in range(4) if i not in odd]
    equal = abs(others[0] - others[1]) <= math.sqrt(tol)
    swapped = None
    if equal:
        x = (data.angles[first] + data.angles[second]) / math.pi
        swapped = odd_sum_after_swap(x)
    return WeakQuadrilateralClass(
        odd_vertices=(first, second),
        adjacent=adjacent,
        equal_non_odd=equal,
        continuum=(not adjacent) and equal,
        swapped_odd_sum=swapped,
    )


def _odd_values(floor: float) -> list[float]:
    """Odd angles pi/3, pi/5, ... not below ``floor``."""
    if floor <= 0.0:
        raise PolygonDataError("odd-angle enumeration needs a positive angle floor")
    values = []
    j = 1
    while math.pi / (2 * j + 1) >= floor:
        values.append(math.pi / (2 * j + 1))
        j += 1
    return values


def _reduced_angle_vectors(C_abs: Sequence[float], max_non_obtuse: int, floor: float) -> list[tuple[float, ...]]:
    """Angle vectors with the given |c| values and at most ``max_non_obtuse`` non-obtuse entries."""
    n = len(C_abs)
    obtuse: list[float | None] = []
    non_obtuse: list[list[float]] = []
    for s in C_abs:
        obtuse.append(obtuse_preimage(s) if 0.0 < s < 1.0 - 1e-15 else None)
        lower = max(floor, 1e-6) * (1.0 - 1e-12)
        non_obtuse.append([a for a in inverse_c_preimages(min(s, 1.0), lower) if a <= math.pi / 2 + 1e-12])

    forced = {j for j in range(n) if obtuse[j] is None}
    vectors = []
    for size in range(len(forced), max_non_obtuse + 1):
        for chosen in itertools.combinations(range(n), size):
            if not forced.issubset(chosen):
                continue
            options = [non_obtuse[j] if j in chosen else [obtuse[j]] for j in range(n)]
            if any(not option for option in options):
                continue
            vectors.extend(itertools.product(*options))
    return vectors


def _odd_assignments(remainder: float, count: int, odd_table: np.ndarray, tol: float) -> list[tuple[float, ...]]:
    """Ordered tuples of ``count`` odd angles summing to ``remainder``."""
    if count == 1:
        hit = np.flatnonzero(np.abs(odd_table - remainder) <= tol)
        return [(float(odd_table[i]),) for i in hit]
    ascending = np.sort(odd_table)
    result = []
    for first in odd_table:
        need = remainder - first
        pos = np.searchsorted(ascending, need - tol)
        while pos < len(ascending) and ascending[pos] <= need + tol:
            result.append((float(first), float(ascending[pos])))
            pos += 1
    return result


@dataclass(frozen=True)
class _WeakConfiguration:
    reduced_angles: tuple[float, ...]
    odd_angles: tuple[float, ...]
    curved: tuple[int, ...]


def _assemble(reduced_lengths: Sequence[float], config: _WeakConfiguration) -> tuple[list[float | None], list[float], list[int]]:
    """
    Full edge/vertex lists starting at reduced edge 0; split edges are None.
    Returns (lengths, angles, odd vertex positions).
    """
    lengths: list[float | None] = []
    angles: list[float] = []
    odd_positions: list[int] = []
    odd_iter = iter(config.odd_angles)
    if len(config.curved) == 1:
        inside = {config.curved[0]: len(config.odd_angles)}
    else:
        inside = {j: 1 for j in config.curved}
    for j, length in enumerate(reduced_lengths):
        for _ in range(inside.get(j, 0)):
            lengths.append(None)
            odd_positions.append(len(angles))
            angles.append(next(odd_iter))
        lengths.append(None if j in inside else length)
        angles.append(config.reduced_angles[j])
    return lengths, angles, odd_positions


def _directions(angles: Sequence[float]) -> np.ndarray:
    return BoundaryData((1.0,) * len(angles), tuple(angles)).edge_directions()


def _close_weak(reduced_lengths: Sequence[float], config: _WeakConfiguration,
                tol: float) -> BoundaryData | OneParamFamily | None:
    lengths, angles, odd_positions = _assemble(reduced_lengths, config)
    n = len(angles)
    u = _directions(angles)
    known = sum((lengths[j] * u[j] for j in range(n) if lengths[j] is not None), np.zeros(2))
    unknown = [j for j in range(n) if lengths[j] is None]
    perimeter = math.fsum(reduced_lengths)

    if len(config.curved) == 1:
        total = reduced_lengths[config.curved[0]]
        if len(unknown) == 3 and n == 4:
            straight = next(j for j in range(n) if lengths[j] is not None)
            return quad_from_asa_perimeter(angles, straight, lengths[straight], perimeter, tol)
        # closure (2 rows) plus the sum of the pieces
        matrix = np.vstack([u[unknown].T, np.ones(len(unknown))])
        rhs = np.concatenate([-known, [total]])
        pieces, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
        if np.linalg.norm(matrix @ pieces - rhs) > tol * perimeter * 10:
            return None
        for j, piece in zip(unknown, pieces):
            lengths[j] = float(piece)
        if min(lengths) <= 0.0:
            return None
        return BoundaryData(tuple(lengths), tuple(angles)).validate(max(tol, 1e-9))

    # two non-adjacent odd vertices: rotate the first to position 0
    first, second = odd_positions
    rotated_angles = tuple(angles[(i + first) % n] for i in range(n))
    rotated_lengths = tuple(lengths[(i + first) % n] for i in range(n))
    m = (second - first) % n + 1
    split = EdgeSplitData(
        angles=rotated_angles,
        m=m,
        h=reduced_lengths[config.curved[0]],
        k=reduced_lengths[config.curved[1]],
        lengths=rotated_lengths,
    )
    solution = edge_split_solve(split, tol)
    if isinstance(solution, OneParamFamily):
        return solution
    return solution.data


def _non_adjacent_split_of(data: BoundaryData, odd: Sequence[int], tol: float):
    """edge_split_solve on the target itself with its odd vertices moved to 0 and m-1."""
    n = data.n
    first, second = odd
    rotated = DihedralLabeling(first).apply(data)
    m = (second - first) % n + 1
    return edge_split_solve(EdgeSplitData.from_boundary(rotated, m), tol)


def enumerate_weak_candidates(target: BoundaryData, sigma_k: float, k: int = 1, *,
                              exact: bool | None = None, tol: float | None = None,
                              config: SteklovConfig | None = None) -> CandidateSet:
    """
    Convex n-gons (up to congruence) with the characteristic polynomial of a
    weakly edge-admissible target whose k-th eigenvalue is at least sigma_k.

    Candidates keep the target's vertex count. The reduced polygon fixes the
    merged edge lengths and the |c| values of the remaining angles; the search
    runs over the branch of every reduced angle, the odd-angle values above
    the eigenvalue angle floor, and the placement of the odd vertices on the
    reduced edges. Configurations that close up into a deformation family are
    noted and left out.

    Raises:
        PolygonDataError: target not weakly edge-admissible, or sigma_k
            inconsistent with its angles
    """
    config = config or DEFAULT_CONFIG
    if tol is not None:
        config = config.with_tolerance(tol)
    tolerances = config.tolerances

    report: AdmissibilityReport = admissibility(target, exact=exact, tol=tolerances.commensurability_tol)
    if report.weak_verdict == "not_admissible":
        raise PolygonDataError(f"target is not weakly edge-admissible: {'; '.join(report.reasons)}")
    indeterminate = report.weak_verdict == "indeterminate"
    odd = report.odd_vertices
    n = target.n

    if not odd:
        return enumerate_admissible_candidates(target, sigma_k=sigma_k, k=k, exact=exact, config=config)
    if len(odd) == 3:
        # only the equilateral triangle has three odd angles
        return CandidateSet((canonicalize_labeling(target),), cap=1, verdict="finite",
                            notes=("three odd angles: equilateral triangle",))

    adjacent = len(odd) == 2 and (odd[1] - odd[0]) % n in (1, n - 1)
    if len(odd) == 2 and not adjacent:
        try:
            own = _non_adjacent_split_of(target, odd, tolerances.geometry_tol)
        except PolygonDataError:
            own = None
        if isinstance(own, OneParamFamily):
            logger.info("target lies in a deformation family: not finitely determined")
            return CandidateSet(
                candidates=(canonicalize_labeling(target),),
                cap=None,
                verdict="continuum",
                notes=("not finitely determined: the split edges deform continuously "
                       "without changing the characteristic polynomial",),
                family=own,
            )

    floor = _angle_floor(target, sigma_k, k, config)
    reduced = reduce_polygon(target, tolerances.classify_tol)
    reduced_lengths = reduced.lengths
    C_abs = reduced.C_abs
    n_red = reduced.n
    k_odd = len(odd)
    target_poly = build_charpoly(target, exact=False)

    odd_table = np.array(_odd_values(floor))
    reduced_vectors = _reduced_angle_vectors(C_abs, 3 - k_odd, floor)

    placements: list[tuple[int, ...]] = [(j,) for j in range(n_red)]
    if k_odd == 2 and n_red >= 2:
        placements += list(itertools.combinations(range(n_red), 2))

    configurations = []
    sum_tol = 1e-9 * n
    for vector in reduced_vectors:
        remainder = (n - 2) * math.pi - math.fsum(vector)
        if remainder <= 0.0:
            continue
        for odd_angles in _odd_assignments(remainder, k_odd, odd_table, sum_tol):
            for curved in placements:
                configurations.append(_WeakConfiguration(tuple(vector), odd_angles, curved))

    family_notes: list[str] = []

    def attempt(configuration: _WeakConfiguration) -> BoundaryData | None:
        try:
            closed = _close_weak(reduced_lengths, configuration, tolerances.geometry_tol)
        except (PolygonDataError, NumericalError, np.linalg.LinAlgError) as exc:
            logger.debug("configuration %s does not close: %s", configuration, exc)
            return None
        if closed is None:
            return None
        if isinstance(closed, OneParamFamily):
            family_notes.append("continuum excluded: a configuration closes into a deformation family")
            return None
        if not _matches(closed, target_poly, floor, config):
            return None
        return _with_exact(closed, None, target.has_exact_angles)

    results = parallel_map(attempt, configurations, config.threads)
    found = [c for c in results if c is not None]
    accepted_vectors = {
        tuple(round(a, 9) for a in configuration.reduced_angles)
        for configuration, result in zip(configurations, results) if result is not None
    }
    candidates = _dedupe(found)
    logger.info("weak enumeration: %d configurations, %d accepted, %d classes",
                len(configurations), len(found), len(candidates))

    notes = sorted(set(family_notes))
    if len(accepted_vectors) > 1:
        notes.append(f"reduced angle vector not unique: {len(accepted_vectors)} coincident branch choices accepted")
    if indeterminate:
        notes.append("weak edge-admissibility is indeterminate in float mode")
    return CandidateSet(
        candidates=candidates,
        cap=None,
        verdict="indeterminate" if indeterminate else "finite",
        notes=tuple(notes),
        configurations_checked=len(configurations),
    )
