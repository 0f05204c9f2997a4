"""
Finite-element Steklov eigenvalues

Key features:
- assemble: P1 stiffness and boundary mass matrices
- solve_steklov: interior unknowns eliminated by a Schur complement (the discrete
  Dirichlet-to-Neumann operator), then a dense symmetric-definite eigensolve
- steklov_spectrum / solve_levels: polygon to spectrum, on one mesh or on nested
  refinements with Richardson extrapolation
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import splu

from src.config.steklov_config import DEFAULT_CONFIG, SteklovConfig
from src.fem.mesh import TriangleMesh, refine_uniform, triangulate
from src.geometry.polygon import BoundaryData, build_polygon, canonicalize_labeling
from src.utils.errors import NumericalError
from src.utils.parallel import parallel_map
from src.utils.retry_helper import retry_with_refinement

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SteklovSolution:
    sigmas: np.ndarray
    boundary_nodes: np.ndarray
    boundary_traces: np.ndarray
    mesh_h: float


def assemble(mesh: TriangleMesh) -> tuple[csr_matrix, csr_matrix]:
    """
    Stiffness K (Dirichlet energy) and boundary mass M (L2 on the boundary).
    M is exact for piecewise linear boundary data.
    """
    tri = mesh.triangles
    p = mesh.nodes[tri]
    x, y = p[:, :, 0], p[:, :, 1]
    # b_i = y_{i+1} - y_{i+2}, c_i = x_{i+2} - x_{i+1}
    b = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    c = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    area = mesh.areas
    local = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area)[:, None, None]

    n = len(mesh.nodes)
    rows = np.repeat(tri, 3, axis=1)
    cols = np.tile(tri, (1, 3))
    K = coo_matrix((local.reshape(-1), (rows.reshape(-1), cols.reshape(-1))), shape=(n, n)).tocsr()

    edges = mesh.boundary_edges
    lengths = np.linalg.norm(mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]], axis=1)
    edge_local = lengths[:, None, None] / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    edge_rows = np.repeat(edges, 2, axis=1)
    edge_cols = np.tile(edges, (1, 2))
    M = coo_matrix((edge_local.reshape(-1), (edge_rows.reshape(-1), edge_cols.reshape(-1))), shape=(n, n)).tocsr()
    return K, M


def solve_steklov(K: csr_matrix, M: csr_matrix, count: int, mesh_h: float = float("nan")) -> SteklovSolution:
    """
    sigma_0 .. sigma_count of the pencil (K, M) after eliminating interior nodes.

    Raises:
        NumericalError: fewer boundary nodes than requested eigenvalues, or a
            singular interior block
    """
    boundary = np.flatnonzero(M.diagonal() > 0.0)
    interior = np.setdiff1d(np.arange(K.shape[0]), boundary)
    if len(boundary) < count + 1:
        raise NumericalError(f"{len(boundary)} boundary nodes cannot resolve {count + 1} eigenvalues")

    K_bb = K[boundary][:, boundary].toarray()
    if len(interior):
        K_ii = K[interior][:, interior].tocsc()
        K_ib = K[interior][:, boundary].toarray()
        try:
            factor = splu(K_ii)
        except RuntimeError as exc:
            raise NumericalError(f"interior stiffness block is singular: {exc}") from exc
        S = K_bb - K_ib.T @ factor.solve(K_ib)
    else:
        S = K_bb
    S = 0.5 * (S + S.T)
    M_b = M[boundary][:, boundary].toarray()

    try:
        sigmas, traces = eigh(S, M_b, subset_by_index=[0, count])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"generalized eigensolve failed: {exc}") from exc
    return SteklovSolution(sigmas=sigmas, boundary_nodes=boundary, boundary_traces=traces, mesh_h=mesh_h)


def _mesh_for(data: BoundaryData, h: float, config: SteklovConfig) -> TriangleMesh:
    poly = build_polygon(canonicalize_labeling(data), config.tolerances.geometry_tol)
    return triangulate(poly, h, config.fem.min_angle_deg)


@retry_with_refinement(max_retries=2, factor=0.5, h_arg="h")
def steklov_spectrum(data: BoundaryData, *, h: float, k: int, config: SteklovConfig | None = None) -> SteklovSolution:
    """sigma_0 .. sigma_k of the polygon on one mesh of size h; retried on a finer mesh on failure."""
    config = config or DEFAULT_CONFIG
    mesh = _mesh_for(data, h, config)
    K, M = assemble(mesh)
    return solve_steklov(K, M, k, mesh_h=mesh.h)


@dataclass(frozen=True)
class LevelResults:
    """Solutions from coarse to fine plus the per-index extrapolation."""

    levels: tuple[SteklovSolution, ...]
    extrapolated: np.ndarray
    rates: np.ndarray
    was_extrapolated: np.ndarray = field(repr=False)
    meshes: tuple[TriangleMesh, ...] = field(default=(), repr=False)

    @property
    def finest(self) -> SteklovSolution:
        return self.levels[-1]


def richardson(values: Sequence[Sequence[float]], rate_range: tuple[float, float] = (0.5, 4.0)):
    """
    Extrapolate each index from its values on successively halved meshes.

    The observed rate p = log2(d1/d2) from the last three levels is used only
    when it lies in ``rate_range``; otherwise the finest value is kept, as it is
    for index 0 and when fewer than three levels exist.

    Returns:
        (extrapolated, rates, was_extrapolated)
    """
    table = np.asarray(values, dtype=float)
    finest = table[-1].copy()
    rates = np.full(table.shape[1], np.nan)
    used = np.zeros(table.shape[1], dtype=bool)
    if table.shape[0] < 3:
        return finest, rates, used

    v0, v1, v2 = table[-3], table[-2], table[-1]
    for j in range(1, table.shape[1]):
        d1, d2 = v0[j] - v1[j], v1[j] - v2[j]
        if d2 == 0.0 or d1 / d2 <= 0.0:
            continue
        p = math.log2(d1 / d2)
        rates[j] = p
        if rate_range[0] <= p <= rate_range[1]:
            finest[j] = v2[j] - d2 / (2.0 ** p - 1.0)
            used[j] = True
    return finest, rates, used


def base_mesh_size(data: BoundaryData, h: float, k: int) -> float:
    """h, shrunk when the boundary would carry fewer than 2(k+1) nodes."""
    limit = data.perimeter / (2.0 * (k + 1))
    if h > limit:
        logger.info("mesh size %.4g too coarse for sigma_%d; using %.4g", h, k, limit)
        return limit
    return h


@retry_with_refinement(max_retries=2, factor=0.5, h_arg="h")
def solve_levels(data: BoundaryData, *, h: float, k: int, levels: int | None = None,
                 config: SteklovConfig | None = None) -> LevelResults:
    """
    Solve on a base mesh of size h and on its uniform refinements; the meshes
    are nested, so each sigma_j is nonincreasing from level to level.
    """
    config = config or DEFAULT_CONFIG
    levels = levels or config.fem.levels
    meshes = [_mesh_for(data, base_mesh_size(data, h, k), config)]
    for _ in range(levels - 1):
        meshes.append(refine_uniform(meshes[-1]))

    def solve(mesh: TriangleMesh) -> SteklovSolution:
        K, M = assemble(mesh)
        logger.info("level h=%.4g: %d nodes, %d boundary nodes", mesh.h, len(mesh.nodes), len(mesh.boundary_edges))
        return solve_steklov(K, M, k, mesh_h=mesh.h)

    solutions = parallel_map(solve, meshes, config.threads)
    extrapolated, rates, used = richardson([s.sigmas for s in solutions])
    logger.info("richardson rates: %s", np.array2string(rates, precision=3))
    return LevelResults(tuple(solutions), extrapolated, rates, used, tuple(meshes))
