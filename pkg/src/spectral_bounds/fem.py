"""P1 finite-element eigenvalues of the Laplacian on polygons.

A quality Delaunay mesh is refined uniformly (every triangle split into four
similar ones), the generalized eigenproblem ``K u = lambda M u`` is solved at
each level, and Richardson extrapolation across levels gives the returned
values together with error estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import triangle
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .geometry import Box, Polygon
from .spectra import Spectrum, normalize_bc


class MeshError(RuntimeError):
    pass


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class FemOptions:
    target_h: float = 0.05
    refinements: int = 2
    min_angle: float = 25.0
    tol: float = 1e-10


@dataclass
class Mesh:
    nodes: np.ndarray
    triangles: np.ndarray

    @property
    def boundary_nodes(self) -> np.ndarray:
        edges = np.sort(np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                                   self.triangles[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        return np.unique(uniq[counts == 1])

    @property
    def max_edge(self) -> float:
        p = self.nodes[self.triangles]
        e = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2)
        return float(e.max())


def base_mesh(poly: Polygon, target_h: float, min_angle: float = 25.0) -> Mesh:
    v = poly.array
    n = len(v)
    segs = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    area = math.sqrt(3) / 4 * target_h**2
    try:
        out = triangle.triangulate({"vertices": v, "segments": segs}, f"pq{min_angle:g}a{area:.17g}Q")
    except Exception as exc:  # triangle raises bare RuntimeErrors
        raise MeshError(f"mesh generation failed: {exc}") from exc
    if "triangles" not in out or not len(out["triangles"]):
        raise MeshError("mesh generation produced no triangles")
    return Mesh(np.asarray(out["vertices"], dtype=float), np.asarray(out["triangles"], dtype=np.int64))


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four by joining edge midpoints."""
    t = mesh.triangles
    n = len(mesh.nodes)
    edges = np.vstack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
    key = np.sort(edges, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    m = (inverse + n).reshape(3, -1).T  # m[:, i] is the midpoint opposite vertex i
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    ma, mb, mc = m[:, 0], m[:, 1], m[:, 2]
    new = np.vstack([np.column_stack([a, mc, mb]), np.column_stack([mc, b, ma]),
                     np.column_stack([mb, ma, c]), np.column_stack([ma, mb, mc])])
    return Mesh(np.vstack([mesh.nodes, mids]), new)


def assemble(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness and consistent mass matrices for continuous P1 elements."""
    p = mesh.nodes[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of the barycentric coordinates
    grads = np.empty((len(p), 3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        edge = p[:, k] - p[:, j]
        grads[:, i, 0] = -edge[:, 1] / det
        grads[:, i, 1] = edge[:, 0] / det
    kloc = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    mloc = area[:, None, None] * (np.ones((3, 3)) + np.eye(3)) / 12.0
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = len(mesh.nodes)
    K = sp.coo_matrix((kloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((mloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def solve_level(mesh: Mesh, bc: str, count: int, tol: float = 1e-10) -> np.ndarray:
    K, M = assemble(mesh)
    if bc == "dirichlet":
        keep = np.setdiff1d(np.arange(len(mesh.nodes)), mesh.boundary_nodes)
        K = K[keep][:, keep]
        M = M[keep][:, keep]
        sigma = 0.0
    else:
        sigma = -1.0
    n = K.shape[0]
    if count >= n - 1:
        raise EigensolverError(f"mesh has only {n} free nodes for {count} eigenvalues")
    try:
        vals = eigsh(K.tocsc(), k=count, M=M.tocsc(), sigma=sigma, which="LM", tol=tol,
                     return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise EigensolverError(f"Lanczos did not converge: {len(exc.eigenvalues)} of {count} "
                               "eigenvalues found") from exc
    return np.sort(vals)


def richardson(levels: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate per sorted index with mesh ratio 2.

    With three or more levels the order is estimated from the last three
    (clipped to [1, 4], default 2 when the differences are not monotone);
    the error estimate is the size of the extrapolation step plus the change
    between the last two extrapolants.
    """
    fine = levels[-1]
    if len(levels) < 2:
        raise ValueError("need at least two refinement levels")
    if len(levels) == 2:
        step = (fine - levels[0]) / 3.0
        return fine + step, np.abs(step)
    l0, l1, l2 = levels[-3], levels[-2], levels[-1]
    d1, d2 = l1 - l0, l2 - l1
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / d2
        p = np.where((ratio > 1) & np.isfinite(ratio), np.log2(np.abs(ratio)), 2.0)
    p = np.clip(p, 1.0, 4.0)
    factor = 2.0**p - 1.0
    ext = l2 + d2 / factor
    ext_prev = l1 + d1 / factor
    err = np.abs(ext - l2) + np.abs(ext - ext_prev)
    return ext, err


def fem_spectrum(polygon: Polygon | Box, bc: str, count: int, target_h: float = 0.05,
                 refinements: int = 2, options: FemOptions | None = None) -> Spectrum:
    """Lowest ``count`` eigenvalues by P1 FEM with Richardson extrapolation."""
    bc = normalize_bc(bc)
    opts = options or FemOptions(target_h=target_h, refinements=refinements)
    if isinstance(polygon, Box):
        polygon = polygon.as_polygon()
    if count < 1:
        raise ValueError("count must be >= 1")
    if opts.refinements < 1:
        raise ValueError("need at least one refinement for extrapolation")
    mesh = base_mesh(polygon, opts.target_h, opts.min_angle)
    levels = []
    for level in range(opts.refinements + 1):
        if level:
            mesh = refine(mesh)
        levels.append(solve_level(mesh, bc, count, opts.tol))
    values, err = richardson(levels)
    if bc == "neumann":
        # the constant mode: exact value 0 for a connected domain
        zero_tol = 1e-8 * max(1.0, float(np.abs(levels[-1]).max()))
        if abs(levels[-1][0]) < zero_tol:
            err[0] = max(abs(levels[-1][0]), abs(values[0]))
            values[0] = 0.0
        values = np.maximum(values, 0.0)
    values = np.maximum.accumulate(values)
    return Spectrum(bc, values, "fem", err, levels=levels)
