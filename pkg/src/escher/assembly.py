"""P1 surface finite element assembly on a triangulated surface.

Assembles the mass matrix M, the (Laplace-Beltrami) stiffness matrix A, the
nonlinear load vector with entries ``integral F1'(U_h) phi_j``, and its
Jacobian with entries ``integral F1''(U_h) phi_i phi_j``.  Hat-function
gradients are taken in each triangle's plane, so A is the standard
cotangent-equivalent operator with ``A @ 1 = 0``.

Everything is vectorised over triangles.  The scatter from element entries
to CSR storage is precomputed once per connectivity and cached on the mesh,
which makes repeated assembly inside Newton iterations cheap; summation
order is fixed by triangle index, so assembled values are reproducible
bit for bit.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTriangle, LengthMismatch
from .quadrature import quadrature_rule

DEGENERACY_TOL = 1e-14
NONLINEAR_QUAD_DEGREE = 4  # exact for the quartic well composed with P1


class _Pattern:
    """CSR sparsity of vertex-adjacency plus the element-entry scatter map."""

    def __init__(self, triangles, node_count):
        rows = np.repeat(triangles, 3, axis=1).ravel()
        cols = np.tile(triangles, (1, 3)).ravel()
        order = np.lexsort((cols, rows))
        sr, sc = rows[order], cols[order]
        fresh = np.empty(len(sr), dtype=bool)
        fresh[0] = True
        fresh[1:] = (sr[1:] != sr[:-1]) | (sc[1:] != sc[:-1])
        group = np.cumsum(fresh) - 1
        self.nnz = int(group[-1]) + 1
        self.indices = sc[fresh]
        self.indptr = np.zeros(node_count + 1, dtype=self.indices.dtype)
        np.add.at(self.indptr, sr[fresh] + 1, 1)
        self.indptr = np.cumsum(self.indptr)
        self.slots = np.empty_like(group)
        self.slots[order] = group
        self.shape = (node_count, node_count)

    def assemble(self, element_values):
        """Sum (nt, 3, 3) element matrices into a CSR matrix."""
        data = np.bincount(self.slots, weights=element_values.ravel(),
                           minlength=self.nnz)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)


def _pattern(mesh):
    pat = mesh._cache.get("pattern")
    if pat is None:
        pat = _Pattern(mesh.triangles, mesh.node_count)
        mesh._cache["pattern"] = pat
    return pat


def element_geometry(mesh):
    """Per-triangle areas and in-plane P1 hat gradients, cached on the mesh."""
    geo = mesh._cache.get("geometry")
    if geo is None:
        p = mesh.nodes[mesh.triangles]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        doubled = np.linalg.norm(cross, axis=1)
        areas = 0.5 * doubled
        if areas.min() <= DEGENERACY_TOL:
            raise DegenerateTriangle(
                f"triangle area {areas.min():.3e} <= {DEGENERACY_TOL:g}"
            )
        normals = cross / doubled[:, None]
        # edge opposite vertex i, rotated into the plane: grad phi_i
        edges = np.roll(p, 1, axis=1) - np.roll(p, 2, axis=1)
        grads = np.cross(normals[:, None, :], edges) / doubled[:, None, None]
        geo = (areas, grads)
        mesh._cache["geometry"] = geo
    return geo


_MASS_LOCAL = (np.ones((3, 3)) + np.eye(3)) / 12.0


def assemble_mass(mesh):
    """Consistent P1 mass matrix: |K|/12 * [[2,1,1],[1,2,1],[1,1,2]] per element."""
    areas, _ = element_geometry(mesh)
    return _pattern(mesh).assemble(areas[:, None, None] * _MASS_LOCAL)


def assemble_stiffness(mesh):
    """Stiffness of the surface gradient; symmetric PSD with A @ 1 = 0."""
    areas, grads = element_geometry(mesh)
    local = np.einsum("tid,tjd->tij", grads, grads)
    return _pattern(mesh).assemble(areas[:, None, None] * local)


@dataclass(frozen=True)
class AssembledOperators:
    """Mass and stiffness on one mesh at one time."""

    M: sp.csr_matrix
    A: sp.csr_matrix
    node_count: int
    time: float


def assemble_operators(mesh):
    """Mass and stiffness for a mesh, cached on the mesh instance."""
    ops = mesh._cache.get("operators")
    if ops is None:
        ops = AssembledOperators(
            M=assemble_mass(mesh),
            A=assemble_stiffness(mesh),
            node_count=mesh.node_count,
            time=mesh.current_time,
        )
        mesh._cache["operators"] = ops
    return ops


def _check_length(mesh, alpha):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (mesh.node_count,):
        raise LengthMismatch(
            f"nodal vector of length {alpha.shape} on a mesh with "
            f"{mesh.node_count} nodes"
        )
    return alpha


def assemble_nonlinear_load(mesh, alpha, pot, degree=NONLINEAR_QUAD_DEGREE):
    """Load vector with entries ``integral F1'(U_h) phi_j``.

    The default degree-4 rule integrates the quartic well composed with P1
    functions exactly; higher degrees serve as over-integration oracles.
    """
    alpha = _check_length(mesh, alpha)
    areas, _ = element_geometry(mesh)
    rule = quadrature_rule(degree)
    lam, w = rule.points, rule.weights
    u_q = alpha[mesh.triangles] @ lam.T              # (nt, nq)
    element = areas[:, None] * ((pot.df1(u_q) * w) @ lam)
    return np.bincount(mesh.triangles.ravel(), weights=element.ravel(),
                       minlength=mesh.node_count)


def assemble_nonlinear_jacobian(mesh, alpha, pot, degree=NONLINEAR_QUAD_DEGREE):
    """Jacobian of the nonlinear load: entries ``integral F1''(U_h) phi_i phi_j``."""
    alpha = _check_length(mesh, alpha)
    areas, _ = element_geometry(mesh)
    rule = quadrature_rule(degree)
    lam, w = rule.points, rule.weights
    u_q = alpha[mesh.triangles] @ lam.T
    coeff = pot.d2f1(u_q) * w
    # sum_q coeff[t,q] * lam[q,i] * lam[q,j] as one matmul over flattened (i,j)
    pairs = (lam[:, :, None] * lam[:, None, :]).reshape(len(w), 9)
    local = (coeff @ pairs).reshape(-1, 3, 3)
    return _pattern(mesh).assemble(areas[:, None, None] * local)


def integrate_composed(mesh, alpha, func, degree=NONLINEAR_QUAD_DEGREE):
    """Quadrature of ``func(U_h)`` over the triangulated surface."""
    alpha = _check_length(mesh, alpha)
    areas, _ = element_geometry(mesh)
    rule = quadrature_rule(degree)
    u_q = alpha[mesh.triangles] @ rule.points.T
    return float(areas @ (func(u_q) @ rule.weights))


def quadrature_points_3d(mesh, degree):
    """Quadrature point positions on every triangle, shape (nt, nq, 3)."""
    rule = quadrature_rule(degree)
    return np.einsum("qk,tkd->tqd", rule.points, mesh.nodes[mesh.triangles])
