"""
Admissibility, reduced polygons and exceptional components

Key features:
- admissibility: {-1,0,1} incommensurability of the lengths (exact or float) and the odd-angle test
- reduce_polygon: odd vertices removed, their incident edges merged into curved edges
- exceptional_components: boundary arcs between consecutive even vertices
- theorem_cap: the isospectral-set size cap, with the B+ and adjacency improvements
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from src.geometry.polygon import BoundaryData
from src.inverse.angles import AngleClass, classify_angles
from src.spectral.char_poly import TrigPoly, c_of_angle, charpoly_from_vectors, smooth_charpoly
from src.utils.errors import PolygonDataError

logger = logging.getLogger(__name__)

Verdict = Literal["admissible", "not_admissible", "indeterminate"]


@lru_cache(maxsize=16)
def _combination_matrix(n: int) -> np.ndarray:
    """Every {-1,0,1} coefficient vector whose first nonzero entry is +1."""
    rows = np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=np.int8)
    nonzero = rows != 0
    has_any = nonzero.any(axis=1)
    first = np.argmax(nonzero, axis=1)
    leading = rows[np.arange(rows.shape[0]), first]
    return rows[has_any & (leading == 1)]


def _incommensurable_float(lengths: Sequence[float], tol: float) -> tuple[Verdict, tuple[int, ...] | None]:
    combos = _combination_matrix(len(lengths))
    values = np.abs(combos @ np.asarray(lengths, dtype=float))
    worst = int(np.argmin(values))
    if values[worst] <= tol * math.fsum(lengths):
        return "indeterminate", tuple(int(c) for c in combos[worst])
    return "admissible", None


def _incommensurable_exact(lengths: Sequence[Fraction]) -> tuple[Verdict, tuple[int, ...] | None]:
    common = math.lcm(*(Fraction(v).denominator for v in lengths))
    integers = np.array([int(Fraction(v) * common) for v in lengths], dtype=object)
    combos = _combination_matrix(len(lengths))
    values = combos.astype(object) @ integers
    zero = np.flatnonzero(values == 0)
    if zero.size:
        return "not_admissible", tuple(int(c) for c in combos[zero[0]])
    return "admissible", None


def incommensurability(lengths: Sequence, exact: bool, tol: float = 1e-9) -> tuple[Verdict, tuple[int, ...] | None]:
    """Verdict on whether a nontrivial {-1,0,1} combination vanishes, plus the witness coefficients."""
    if exact:
        return _incommensurable_exact(lengths)
    return _incommensurable_float([float(v) for v in lengths], tol)


@dataclass(frozen=True)
class ReducedEdge:
    length: float
    curved: bool
    members: tuple[int, ...]
    exact_length: Fraction | None = None


@dataclass(frozen=True)
class ReducedPolygon:
    """
    Vertex j of the reduced polygon sits between reduced edges j and j+1,
    as in the full polygon.
    """

    edges: tuple[ReducedEdge, ...]
    angles: tuple[float, ...]
    kept_vertices: tuple[int, ...]
    removed_vertices: tuple[int, ...]
    removed_classes: tuple[AngleClass, ...]
    smooth_domain: bool = False
    exact_angles_pi: tuple[Fraction, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(edge.length for edge in self.edges)

    @property
    def exact_lengths(self) -> tuple[Fraction, ...] | None:
        if any(edge.exact_length is None for edge in self.edges):
            return None
        return tuple(edge.exact_length for edge in self.edges)

    @property
    def perimeter(self) -> float:
        return math.fsum(self.lengths)

    @property
    def removed_parity(self) -> int:
        return math.prod(angle_class.parity for angle_class in self.removed_classes)

    @property
    def C_abs(self) -> tuple[float, ...]:
        return tuple(abs(c_of_angle(a)) for a in self.angles)

    def charpoly(self, exact: bool | None = None) -> TrigPoly:
        """Characteristic polynomial of the reduced curvilinear polygon."""
        use_exact = self.exact_lengths is not None if exact is None else exact
        if use_exact and self.exact_lengths is None:
            raise PolygonDataError("exact mode needs rational lengths")
        lengths = self.exact_lengths if use_exact else self.lengths
        if self.smooth_domain:
            return smooth_charpoly(sum(lengths) if use_exact else math.fsum(lengths))
        angles_pi = self.exact_angles_pi if use_exact else None
        return charpoly_from_vectors(lengths, self.angles, angles_pi)


def reduce_polygon(data: BoundaryData, tol: float = 1e-9) -> ReducedPolygon:
    """
    Remove the odd vertices and merge their incident edges.

    A run of consecutive odd vertices merges into one curved edge; with every
    vertex odd the result is a smoothly bounded domain with one closed edge.
    """
    classes = classify_angles(data, tol)
    n = data.n
    exact_lengths = data.exact_lengths
    odd = [c.is_odd for c in classes]

    removed = tuple(i for i in range(n) if odd[i])
    removed_classes = tuple(classes[i] for i in removed)
    if all(odd):
        exact_total = sum(exact_lengths, Fraction(0)) if exact_lengths is not None else None
        edge = ReducedEdge(data.perimeter, True, tuple(range(n)), exact_total)
        return ReducedPolygon((edge,), (), (), removed, removed_classes, smooth_domain=True)

    last_kept = max(i for i in range(n) if not odd[i])
    edges: list[ReducedEdge] = []
    kept: list[int] = []
    members: list[int] = []
    for step in range(1, n + 1):
        e = (last_kept + step) % n
        members.append(e)
        if odd[e]:
            continue
        exact = sum((exact_lengths[j] for j in members), Fraction(0)) if exact_lengths is not None else None
        edges.append(ReducedEdge(
            length=math.fsum(data.lengths[j] for j in members),
            curved=len(members) > 1,
            members=tuple(members),
            exact_length=exact,
        ))
        kept.append(e)
        members = []

    exact_angles = None
    if data.exact_angles_pi is not None:
        exact_angles = tuple(data.exact_angles_pi[v] for v in kept)
    return ReducedPolygon(
        edges=tuple(edges),
        angles=tuple(data.angles[v] for v in kept),
        kept_vertices=tuple(kept),
        removed_vertices=removed,
        removed_classes=removed_classes,
        exact_angles_pi=exact_angles,
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    verdict: Verdict
    weak_verdict: Verdict
    exact: bool
    odd_vertices: tuple[int, ...]
    reasons: tuple[str, ...] = ()
    witness: tuple[int, ...] | None = None
    classes: tuple[AngleClass, ...] = field(default=(), repr=False)

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"

    @property
    def weakly_edge_admissible(self) -> bool:
        return self.weak_verdict == "admissible"


def _describe_combination(coefficients: Sequence[int]) -> str:
    parts = []
    for j, c in enumerate(coefficients):
        if c:
            parts.append(f"{'+' if c > 0 else '-'} l_{j + 1}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def admissibility(data: BoundaryData, exact: bool | None = None, tol: float = 1e-9) -> AdmissibilityReport:
    """
    Decide admissibility and weak edge-admissibility.

    Args:
        data: validated boundary data
        exact: rational mode; defaults to exact whenever the data carries rational lengths
        tol: float-mode threshold, relative to the perimeter, below which a
            combination cannot be certified nonzero

    Returns:
        AdmissibilityReport: "indeterminate" replaces a verdict that float
            arithmetic cannot certify; it is never silently upgraded
    """
    use_exact = data.has_exact_lengths if exact is None else exact
    if use_exact and not data.has_exact_lengths:
        raise PolygonDataError("exact admissibility needs rational lengths")

    classes = tuple(classify_angles(data, tol))
    odd_vertices = tuple(i for i, c in enumerate(classes) if c.is_odd)
    reasons: list[str] = []

    lengths = data.exact_lengths if use_exact else data.lengths
    edge_verdict, witness = incommensurability(lengths, use_exact, tol)
    if edge_verdict == "not_admissible":
        reasons.append(f"lengths are commensurable: {_describe_combination(witness)} = 0")
    elif edge_verdict == "indeterminate":
        reasons.append(f"combination {_describe_combination(witness)} vanishes within tolerance")

    if odd_vertices:
        labels = ", ".join(f"vertex {i} ({classes[i].label()})" for i in odd_vertices)
        reasons.append(f"odd angles at {labels}")
        verdict: Verdict = "not_admissible"
    else:
        verdict = edge_verdict

    if odd_vertices:
        reduced = reduce_polygon(data, tol)
        reduced_lengths = reduced.exact_lengths if use_exact else reduced.lengths
        weak_verdict, weak_witness = incommensurability(reduced_lengths, use_exact, tol)
        if weak_verdict != "admissible":
            reasons.append(
                f"reduced lengths: {_describe_combination(weak_witness)} "
                f"{'= 0' if weak_verdict == 'not_admissible' else 'vanishes within tolerance'}"
            )
    else:
        weak_verdict = edge_verdict

    logger.debug("admissibility: %s, weak: %s (%s mode)", verdict, weak_verdict, "exact" if use_exact else "float")
    return AdmissibilityReport(
        verdict=verdict,
        weak_verdict=weak_verdict,
        exact=use_exact,
        odd_vertices=odd_vertices,
        reasons=tuple(reasons),
        witness=witness,
        classes=classes,
    )


@dataclass(frozen=True)
class ExceptionalComponent:
    """
    Boundary arc between two consecutive even vertices: its edges in order and
    the angles (with their c-values) at the vertices strictly inside it.
    """

    lengths: tuple[float, ...]
    angles: tuple[float, ...]
    C: tuple[float, ...]
    edge_indices: tuple[int, ...]
    vertex_indices: tuple[int, ...]
    reversed: bool = False

    def inverse(self) -> "ExceptionalComponent":
        """The same arc traversed with the opposite orientation."""
        return ExceptionalComponent(
            lengths=self.lengths[::-1],
            angles=self.angles[::-1],
            C=self.C[::-1],
            edge_indices=self.edge_indices[::-1],
            vertex_indices=self.vertex_indices[::-1],
            reversed=not self.reversed,
        )

    @property
    def is_symmetric(self) -> bool:
        """True when reversing changes nothing, e.g. for a single edge."""
        return self.lengths == self.lengths[::-1] and self.angles == self.angles[::-1]


def even_vertices(data: BoundaryData, tol: float = 1e-9) -> tuple[int, ...]:
    return tuple(i for i, c in enumerate(classify_angles(data, tol)) if c.is_even)


def exceptional_components(data: BoundaryData, tol: float = 1e-9) -> list[ExceptionalComponent]:
    """Components in boundary order, starting after the first even vertex."""
    evens = even_vertices(data, tol)
    if not evens:
        logger.info("no even angles: the boundary has no exceptional components")
        return []

    n = data.n
    components = []
    for a, start in enumerate(evens):
        end = evens[(a + 1) % len(evens)]
        span = (end - start) % n or n
        edge_indices = tuple((start + 1 + i) % n for i in range(span))
        vertex_indices = edge_indices[:-1]
        angles = tuple(data.angles[v] for v in vertex_indices)
        components.append(ExceptionalComponent(
            lengths=tuple(data.lengths[e] for e in edge_indices),
            angles=angles,
            C=tuple(c_of_angle(alpha) for alpha in angles),
            edge_indices=edge_indices,
            vertex_indices=vertex_indices,
        ))
    return components


def rebuild_from_components(components: Sequence[ExceptionalComponent],
                            even_angles: Sequence[float]) -> BoundaryData:
    """
    Concatenate components, closing each one with the matching even angle.

    The result is the original data relabeled to start after the first even vertex.
    """
    if len(components) != len(even_angles):
        raise PolygonDataError("one even angle is needed per component")
    lengths: list[float] = []
    angles: list[float] = []
    for component, even in zip(components, even_angles):
        lengths.extend(component.lengths)
        angles.extend(component.angles)
        angles.append(even)
    return BoundaryData(tuple(lengths), tuple(angles))


def _same_component(a: ExceptionalComponent, b: ExceptionalComponent, tol: float) -> bool:
    if len(a.lengths) != len(b.lengths):
        return False
    return (np.allclose(a.lengths, b.lengths, rtol=0.0, atol=tol)
            and np.allclose(a.C, b.C, rtol=0.0, atol=tol))


def component_orientations_compatible(first: BoundaryData, second: BoundaryData, tol: float = 1e-9) -> bool:
    """
    True when the exceptional components of ``second`` are those of ``first``
    in the same cyclic order (up to relabeling), each possibly reversed.
    """
    comps_a = exceptional_components(first, tol)
    comps_b = exceptional_components(second, tol)
    if len(comps_a) != len(comps_b):
        return False
    if not comps_a:
        return True
    count = len(comps_a)
    orders = [comps_b, comps_b[::-1]]
    for order in orders:
        for shift in range(count):
            if all(
                _same_component(comps_a[i], order[(i + shift) % count], tol)
                or _same_component(comps_a[i], order[(i + shift) % count].inverse(), tol)
                for i in range(count)
            ):
                return True
    return False


def in_b_plus(alpha: float) -> bool:
    """0 < c(alpha) < 1."""
    c = c_of_angle(alpha)
    return 0.0 < c < 1.0 - 1e-15


def _cyclic_adjacent_pairs(vertices: Sequence[int], n: int) -> int:
    chosen = set(vertices)
    return sum(1 for v in chosen if (v + 1) % n in chosen)


def theorem_cap(data: BoundaryData, tol: float = 1e-9) -> int:
    """
    Upper bound on the number of non-congruent convex n-gons sharing the
    characteristic polynomial of an admissible polygon.

    Raises:
        PolygonDataError: four or more even angles (a rectangle is the only
            convex polygon with four non-obtuse angles and it is not admissible)
    """
    n = data.n
    evens = even_vertices(data, tol)
    e = len(evens)
    b = sum(1 for alpha in data.angles if in_b_plus(alpha))

    if e == 0:
        if n >= 5:
            return math.comb(n - b, 3)
        return math.comb(n, 3)
    if e == 1:
        if n >= 6 or (n == 5 and b <= 1):
            return math.comb(n - 1 - b, 2 - b)
        return math.comb(n - 1, 2)
    if e == 2:
        adjacent = _cyclic_adjacent_pairs(evens, n) > 0
        return 2 * (n - 2) if adjacent else 4 * (n - 2)
    if e == 3:
        pairs = _cyclic_adjacent_pairs(evens, n)
        if pairs >= 2:
            return 2
        return 4 if pairs == 1 else 8
    raise PolygonDataError(f"{e} even angles: no isospectral cap applies")


def b_plus_refinement_applies(data: BoundaryData, tol: float = 1e-9) -> bool:
    """Whether the sign of C is spectrally determined, so obtuse positions are restricted to c < 0."""
    n = data.n
    e = len(even_vertices(data, tol))
    b = sum(1 for alpha in data.angles if in_b_plus(alpha))
    if e == 0:
        return n >= 5
    if e == 1:
        return n >= 6 or (n == 5 and b <= 1)
    return False
