"""Lagrange Q1 / Q2 spaces on quadrilateral meshes

Reference cell `[-1, 1]^2` with vertices numbered counterclockwise from
`(-1, -1)`. Degree 2 adds one dof per edge (local ids 4 to 7, edge `k`
joins vertices `k` and `k + 1`) and one at the center (local id 8).
Global numbering: mesh vertices first, then unique edges, then cells.
"""

import logging
import functools

import numpy as np

from .. import MeshError
from .mesh import Mesh2D, BoundaryTag

logger = logging.getLogger(__name__)

_REF_NODES = {
    1: np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float),
    2: np.array([[-1, -1], [1, -1], [1, 1], [-1, 1],
                 [0, -1], [1, 0], [0, 1], [-1, 0], [0, 0]], dtype=float),
}
_LOCAL_EDGES = [[0, 1], [1, 2], [2, 3], [3, 0]]


def _lagrange_1d(order: int, x: np.ndarray, node: float):
    "value and derivative of the 1D Lagrange polynomial attached to `node`"
    if order == 1:
        return (1 + node * x) / 2, np.full_like(x, node / 2)
    if node == 0:
        return 1 - x * x, -2 * x
    return x * (x + node) / 2, (2 * x + node) / 2


def reference_basis(order: int, points: np.ndarray):
    """values `(Q, nb)` and reference gradients `(Q, nb, 2)` at `points`

    >>> phi, _ = reference_basis(2, _REF_NODES[2])
    >>> bool(np.allclose(phi, np.eye(9)))
    True
    """
    pts = np.asarray(points, dtype=float)
    ref = _REF_NODES[order]
    phi = np.empty((len(pts), len(ref)))
    grad = np.empty((len(pts), len(ref), 2))
    for k, (a, b) in enumerate(ref):
        fx, dfx = _lagrange_1d(order, pts[:, 0], a)
        fy, dfy = _lagrange_1d(order, pts[:, 1], b)
        phi[:, k] = fx * fy
        grad[:, k, 0] = dfx * fy
        grad[:, k, 1] = fx * dfy
    return phi, grad


@functools.lru_cache(maxsize=None)
def gauss_rule(order: int):
    """tensor Gauss rule with `order + 1` points per direction"""
    x, w = np.polynomial.legendre.leggauss(order + 1)
    px, py = np.meshgrid(x, x, indexing="ij")
    return (np.stack([px.ravel(), py.ravel()], axis=1),
            np.outer(w, w).ravel())


class FunctionSpace:
    """dof numbering, Dirichlet dofs and cell-wise quadrature data

    >>> from .mesh import build_halfplane_mesh
    >>> s = FunctionSpace(build_halfplane_mesh(1.0, 4), 2)
    >>> s.num_dofs, len(s.dirichlet), len(s.free)
    (153, 33, 120)
    """

    def __init__(self, mesh: Mesh2D, order: int = 2):
        if order not in (1, 2):
            raise MeshError("element order must be 1 or 2", "FunctionSpace", order=order)
        mesh.check_tags()
        self.mesh = mesh
        self.order = order
        nv = mesh.num_nodes
        if order == 1:
            self.cell_dofs = np.asarray(mesh.quads, dtype=int)
            self.edges = np.empty((0, 2), dtype=int)
            self.dof_coords = np.asarray(mesh.nodes, dtype=float)
        else:
            pairs = np.sort(mesh.quads[:, _LOCAL_EDGES], axis=-1).reshape(-1, 2)
            self.edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
            inverse = np.asarray(inverse).reshape(len(mesh.quads), 4)
            ne = len(self.edges)
            centers = nv + ne + np.arange(len(mesh.quads))
            self.cell_dofs = np.concatenate(
                [mesh.quads, nv + inverse, centers[:, None]], axis=1)
            self.dof_coords = np.concatenate([
                mesh.nodes,
                mesh.nodes[self.edges].mean(axis=1),
                mesh.nodes[mesh.quads].mean(axis=1),
            ])
        self._edge_index = {(int(a), int(b)): nv + k for k, (a, b) in enumerate(self.edges)}
        self.num_dofs = len(self.dof_coords)
        dirichlet = set()
        for (a, b), tag in mesh.boundary_tags.items():
            if tag is BoundaryTag.DIRICHLET:
                dirichlet.update((a, b))
                if order == 2:
                    dirichlet.add(self.edge_dof(a, b))
        self.dirichlet = np.array(sorted(dirichlet), dtype=int)
        mask = np.ones(self.num_dofs, dtype=bool)
        mask[self.dirichlet] = False
        self.free = np.flatnonzero(mask)
        logger.debug("Q%d space: %d dofs, %d free", order, self.num_dofs, len(self.free))

    def edge_dof(self, a: int, b: int) -> int:
        key = (int(a), int(b)) if a < b else (int(b), int(a))
        try:
            return self._edge_index[key]
        except KeyError:
            raise MeshError("no such edge", "FunctionSpace.edge_dof", edge=key)

    @functools.cached_property
    def quadrature(self):
        """`(points, weights, phi, grads)` on every cell

        `points (E, Q, 2)` and `weights (E, Q)` are physical, `phi (Q, nb)`
        are the reference values and `grads (E, Q, nb, 2)` the physical
        gradients. Raises `MeshError` on inverted cells.
        """
        ref_pts, ref_w = gauss_rule(self.order)
        phi, dphi = reference_basis(self.order, ref_pts)
        geo, dgeo = reference_basis(1, ref_pts)
        xv = self.mesh.nodes[self.mesh.quads]
        points = np.einsum("qi,eid->eqd", geo, xv)
        jac = np.einsum("qik,eid->eqdk", dgeo, xv)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        if not np.all(det > 0):
            bad = int(np.argmin(det.min(axis=1)))
            raise MeshError("inverted or degenerate cell", "FunctionSpace",
                            cell=bad, det=float(det[bad].min()))
        # inverse transpose of the Jacobian, (E, Q, 2, 2)
        inv_t = np.empty_like(jac)
        inv_t[..., 0, 0] = jac[..., 1, 1] / det
        inv_t[..., 0, 1] = -jac[..., 1, 0] / det
        inv_t[..., 1, 0] = -jac[..., 0, 1] / det
        inv_t[..., 1, 1] = jac[..., 0, 0] / det
        grads = np.einsum("eqdk,qik->eqid", inv_t, dphi)
        return points, det * ref_w[None, :], phi, grads

    def evaluate(self, vector: np.ndarray) -> np.ndarray:
        "values `(E, Q)` of a dof vector at the quadrature points"
        _, _, phi, _ = self.quadrature
        return np.einsum("qi,ei->eq", phi, np.asarray(vector)[self.cell_dofs])

    def extend(self, free_values: np.ndarray) -> np.ndarray:
        "full dof vector with zeros on Dirichlet dofs"
        free_values = np.asarray(free_values)
        full = np.zeros(self.num_dofs, dtype=free_values.dtype)
        full[self.free] = free_values
        return full

    def boundary_cells(self) -> np.ndarray:
        "cells having at least one Dirichlet dof"
        mask = np.zeros(self.num_dofs, dtype=bool)
        mask[self.dirichlet] = True
        return np.flatnonzero(mask[self.cell_dofs].any(axis=1))


@functools.lru_cache(maxsize=64)
def function_space(mesh: Mesh2D, order: int) -> FunctionSpace:
    "shared `FunctionSpace` per `(mesh, order)`, meshes hash by identity"
    return FunctionSpace(mesh, order)
