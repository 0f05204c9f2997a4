"""
Triangle meshes of convex polygons

Key features:
- triangulate: constrained quality mesh through the ``triangle`` package
- refine_uniform: red refinement (every triangle split into four), nested in the parent
- dump_mesh: plain-text mesh writer for debugging
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.geometry.polygon import ConvexPolygon
from src.utils.errors import NumericalError, PolygonDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TriangleMesh:
    """
    ``triangles`` are counterclockwise; ``boundary_edges`` follow the boundary
    counterclockwise, so the outward normal of (a, b) points to the right.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    h: float

    @property
    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    @property
    def boundary_length(self) -> float:
        segments = self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]]
        return float(np.linalg.norm(segments, axis=1).sum())

    def min_angle_deg(self) -> float:
        p = self.nodes[self.triangles]
        smallest = math.pi
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosine = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            smallest = min(smallest, float(np.arccos(np.clip(cosine, -1.0, 1.0)).min()))
        return math.degrees(smallest)


def _split_boundary(points: np.ndarray, h: float) -> np.ndarray:
    """Boundary points with every polygon edge cut into pieces no longer than h."""
    n = len(points)
    pieces = []
    for i in range(n):
        a, b = points[i], points[(i + 1) % n]
        count = max(1, math.ceil(np.linalg.norm(b - a) / h))
        t = np.arange(count)[:, None] / count
        pieces.append(a + t * (b - a))
    return np.vstack(pieces)


def _boundary_edges(triangles: np.ndarray) -> np.ndarray:
    directed = np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    return directed[counts[inverse] == 1]


def _mesh_from_arrays(nodes: np.ndarray, triangles: np.ndarray, h: float) -> TriangleMesh:
    p = nodes[triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    signed = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    triangles = np.where((signed < 0.0)[:, None], triangles[:, [0, 2, 1]], triangles)
    mesh = TriangleMesh(nodes, triangles.astype(np.int64), _boundary_edges(triangles).astype(np.int64), h)
    if mesh.areas.min() <= 0.0:
        raise NumericalError("mesh contains a degenerate triangle")
    return mesh


def triangulate(poly: ConvexPolygon, h: float, min_angle: float = 20.0) -> TriangleMesh:
    """
    Quality triangulation with target edge length ``h``.

    Raises:
        PolygonDataError: non-positive h
        NumericalError: the mesher lost a polygon corner or produced a degenerate triangle
    """
    from triangle import triangulate as triangle_triangulate

    if not h > 0.0:
        raise PolygonDataError(f"mesh size must be positive, got {h}")
    corners = poly.as_array()
    boundary = _split_boundary(corners, h)
    count = len(boundary)
    segments = np.column_stack([np.arange(count), (np.arange(count) + 1) % count])

    max_area = math.sqrt(3.0) / 4.0 * h * h
    options = f"pq{min_angle:g}a{max_area:.12f}Q"
    output = triangle_triangulate(dict(vertices=boundary, segments=segments), options)
    nodes = np.asarray(output["vertices"], dtype=float)
    mesh = _mesh_from_arrays(nodes, np.asarray(output["triangles"]), h)

    for corner in corners:
        if np.min(np.linalg.norm(nodes - corner, axis=1)) > 1e-12 * max(1.0, poly.perimeter):
            raise NumericalError(f"polygon corner {corner.tolist()} is not a mesh node")
    logger.debug("triangulated: %d nodes, %d triangles, %d boundary edges (h=%.4g)",
                 len(nodes), len(mesh.triangles), len(mesh.boundary_edges), h)
    return mesh


def refine_uniform(mesh: TriangleMesh) -> TriangleMesh:
    """Split every triangle into four through its edge midpoints."""
    tri = mesh.triangles
    n_nodes = len(mesh.nodes)
    edges = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    unique_edges, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    midpoints = 0.5 * (mesh.nodes[unique_edges[:, 0]] + mesh.nodes[unique_edges[:, 1]])
    nodes = np.vstack([mesh.nodes, midpoints])

    count = len(tri)
    m01 = n_nodes + inverse[:count]
    m12 = n_nodes + inverse[count:2 * count]
    m20 = n_nodes + inverse[2 * count:]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    triangles = np.vstack([
        np.column_stack([a, m01, m20]),
        np.column_stack([b, m12, m01]),
        np.column_stack([c, m20, m12]),
        np.column_stack([m01, m12, m20]),
    ])

    lookup = {tuple(edge): n_nodes + i for i, edge in enumerate(unique_edges.tolist())}
    boundary = []
    for start, end in mesh.boundary_edges.tolist():
        middle = lookup[(min(start, end), max(start, end))]
        boundary.append((start, middle))
        boundary.append((middle, end))
    return TriangleMesh(nodes, triangles.astype(np.int64), np.asarray(boundary, dtype=np.int64), mesh.h / 2.0)


def dump_mesh(mesh: TriangleMesh, path: str | Path) -> Path:
    """Write nodes, triangles and boundary edges as plain text."""
    path = Path(path)
    lines = ["STEKMESH", f"{len(mesh.nodes)} {len(mesh.triangles)} {len(mesh.boundary_edges)} {mesh.h!r}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines += [" ".join(str(v) for v in row) for row in mesh.triangles.tolist()]
    lines += [" ".join(str(v) for v in row) for row in mesh.boundary_edges.tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
