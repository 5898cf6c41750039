"""Structured quadrilateral meshes of truncated sectors and half-planes

Every mesh is the image of a uniform grid of the unit square under an
affine map. Boundary edges are keyed by their sorted pair of vertex ids.
"""

import enum
import math
import collections
import logging

from dataclasses import dataclass, field

import numpy as np

from .. import MeshError

logger = logging.getLogger(__name__)

MIN_ALPHA = 0.02 * math.pi
MIN_CELLS = 4


class BoundaryTag(enum.Enum):
    NEUMANN_UPPER = "neumann+"
    NEUMANN_LOWER = "neumann-"
    DIRICHLET = "dirichlet"

    @property
    def neumann(self) -> bool:
        return self is not BoundaryTag.DIRICHLET


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """quadrilateral mesh with tagged boundary edges

    `quads[e]` lists the four vertices of element `e` counterclockwise,
    `boundary_tags` maps `(a, b)` with `a < b` to a `BoundaryTag`.
    """

    nodes: np.ndarray = field(repr=False)
    quads: np.ndarray = field(repr=False)
    boundary_tags: dict = field(repr=False)
    alpha: float
    L: float
    n: int
    kind: str = "rhombus"

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_cells(self) -> int:
        return len(self.quads)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """unique sorted edges and the number of cells sharing each"""
        pairs = np.sort(self.quads[:, [[0, 1], [1, 2], [2, 3], [3, 0]]], axis=-1)
        return np.unique(pairs.reshape(-1, 2), axis=0, return_counts=True)

    def boundary_edges(self) -> np.ndarray:
        edges, counts = self.edges()
        return edges[counts == 1]

    def check_tags(self):
        """every boundary edge must be tagged exactly once"""
        boundary = {tuple(int(v) for v in e) for e in self.boundary_edges()}
        untagged = boundary - set(self.boundary_tags)
        if untagged:
            raise MeshError("untagged boundary edges", "Mesh2D",
                            count=len(untagged), example=min(untagged))
        inner = set(self.boundary_tags) - boundary
        if inner:
            raise MeshError("tags on interior or missing edges", "Mesh2D",
                            count=len(inner), example=min(inner))

    def cell_areas(self) -> np.ndarray:
        "exact areas of the (straight-sided) cells, shoelace formula"
        x = self.nodes[self.quads]
        xs, ys = x[..., 0], x[..., 1]
        return 0.5 * (xs * np.roll(ys, -1, axis=1) - np.roll(xs, -1, axis=1) * ys).sum(axis=1)

    def reflection(self) -> np.ndarray | None:
        """permutation mapping each node to its image under `x2 -> -x2`

        `None` when the node set is not closed under the reflection.
        """
        scale = max(1.0, float(np.abs(self.nodes).max()))
        key = np.round(self.nodes / scale * 1e9).astype(np.int64)
        index = {(int(a), int(b)): i for i, (a, b) in enumerate(key)}
        perm = []
        for a, b in key:
            j = index.get((int(a), int(-b)))
            if j is None:
                return None
            perm.append(j)
        return np.array(perm)

    def retagged(self, tag: BoundaryTag) -> "Mesh2D":
        "same mesh with every boundary edge tagged `tag`"
        return Mesh2D(self.nodes, self.quads,
                      {e: tag for e in self.boundary_tags},
                      self.alpha, self.L, self.n, self.kind)

    def dirichlet_vertices(self) -> np.ndarray:
        ids = {v for e, t in self.boundary_tags.items()
               if t is BoundaryTag.DIRICHLET for v in e}
        return np.array(sorted(ids), dtype=int)


def _edge(a, b) -> tuple[int, int]:
    return (int(a), int(b)) if a < b else (int(b), int(a))


def _grid(origin, e_u, e_v, nu: int, nv: int):
    """nodes `origin + i e_u + j e_v` (`id = j (nu + 1) + i`) and ccw cells"""
    i, j = np.meshgrid(np.arange(nu + 1), np.arange(nv + 1))
    i, j = i.ravel(), j.ravel()
    nodes = (np.asarray(origin, float)[None, :]
             + i[:, None] * np.asarray(e_u, float)[None, :]
             + j[:, None] * np.asarray(e_v, float)[None, :])
    ci, cj = np.meshgrid(np.arange(nu), np.arange(nv))
    ci, cj = ci.ravel(), cj.ravel()
    base = cj * (nu + 1) + ci
    quads = np.stack([base, base + 1, base + nu + 2, base + nu + 1], axis=1)
    return nodes, quads, i, j


def _side_edges(ids) -> list[tuple[int, int]]:
    return [_edge(a, b) for a, b in zip(ids[:-1], ids[1:])]


def build_rhombus_mesh(alpha: float, L: float, n: int) -> Mesh2D:
    """mesh of the rhombus `R(alpha, L)` with `n x n` cells

    The unit grid on `(0, L)^2` is rotated by `-pi/4`, then `x2` is scaled
    by `tan(alpha/2)`. The sides through the origin lie on the wedge faces
    and are Neumann, the two far sides are the artificial (Dirichlet)
    boundary. The diagonal on the `x1`-axis has length `sqrt(2) L`.

    >>> m = build_rhombus_mesh(math.pi / 2, 4.0, 4)
    >>> m.num_cells, m.num_nodes, len(m.dirichlet_vertices())
    (16, 25, 9)
    >>> sorted(collections.Counter(str(t.value) for t in m.boundary_tags.values()).items())
    [('dirichlet', 8), ('neumann+', 4), ('neumann-', 4)]
    >>> build_rhombus_mesh(0.01, 1.0, 4)
    Traceback (most recent call last):
      ...
    wedgespectra.MeshError: In 'build_rhombus_mesh' (alpha=0.01)
    -> opening below 0.02 pi is ill-conditioned, use the bounds module for small angles
    """
    if not (alpha < math.pi):
        raise MeshError("opening must be below pi (the map degenerates)",
                        "build_rhombus_mesh", alpha=alpha)
    if not (alpha >= MIN_ALPHA):
        raise MeshError("opening below 0.02 pi is ill-conditioned,"
                        " use the bounds module for small angles",
                        "build_rhombus_mesh", alpha=alpha)
    if not (L > 0 and n >= MIN_CELLS):
        raise MeshError(f"need L > 0 and n >= {MIN_CELLS}", "build_rhombus_mesh", L=L, n=n)
    h = L / n
    t = math.tan(alpha / 2)
    s = h / math.sqrt(2)
    nodes, quads, i, j = _grid((0.0, 0.0), (s, -s * t), (s, s * t), n, n)
    ids = np.arange(len(nodes))
    tags = {}
    for e in _side_edges(ids[i == 0]):
        tags[e] = BoundaryTag.NEUMANN_UPPER
    for e in _side_edges(ids[j == 0]):
        tags[e] = BoundaryTag.NEUMANN_LOWER
    for e in _side_edges(ids[i == n]) + _side_edges(ids[j == n]):
        tags[e] = BoundaryTag.DIRICHLET
    mesh = Mesh2D(nodes, quads, tags, float(alpha), float(L), int(n), "rhombus")
    mesh.check_tags()
    logger.debug("rhombus mesh alpha=%g L=%g n=%d: %d nodes", alpha, L, n, len(nodes))
    return mesh


def build_halfplane_mesh(L: float, n: int) -> Mesh2D:
    """mesh of `(0, L) x (-L, L)` with `n x 2n` cells

    The side `x1 = 0` is Neumann (tagged `+` above the axis and `-` below),
    the three others are artificial.

    >>> m = build_halfplane_mesh(1.0, 4)
    >>> m.num_cells, float(m.cell_areas().sum())
    (32, 2.0)
    >>> build_halfplane_mesh(1.0, 2)
    Traceback (most recent call last):
      ...
    wedgespectra.MeshError: In 'build_halfplane_mesh' (L=1.0, n=2)
    -> need L > 0 and n >= 4
    """
    if not (L > 0 and n >= MIN_CELLS):
        raise MeshError(f"need L > 0 and n >= {MIN_CELLS}", "build_halfplane_mesh", L=L, n=n)
    h = L / n
    nodes, quads, i, j = _grid((0.0, -L), (h, 0.0), (0.0, h), n, 2 * n)
    ids = np.arange(len(nodes))
    tags = {}
    for a, b in _side_edges(ids[i == 0]):
        upper = nodes[a, 1] + nodes[b, 1] > 0
        tags[(a, b)] = BoundaryTag.NEUMANN_UPPER if upper else BoundaryTag.NEUMANN_LOWER
    for e in (_side_edges(ids[i == n]) + _side_edges(ids[j == 0])
              + _side_edges(ids[j == 2 * n])):
        tags[e] = BoundaryTag.DIRICHLET
    mesh = Mesh2D(nodes, quads, tags, math.pi, float(L), int(n), "halfplane")
    mesh.check_tags()
    return mesh


def renumber(mesh: Mesh2D, perm) -> Mesh2D:
    """same mesh with node `perm[k]` renamed `k`"""
    perm = np.asarray(perm, dtype=int)
    if sorted(perm.tolist()) != list(range(mesh.num_nodes)):
        raise MeshError("not a permutation of the nodes", "renumber",
                        size=len(perm), expected=mesh.num_nodes)
    new_id = np.empty_like(perm)
    new_id[perm] = np.arange(len(perm))
    tags = {_edge(new_id[a], new_id[b]): t for (a, b), t in mesh.boundary_tags.items()}
    return Mesh2D(mesh.nodes[perm], new_id[mesh.quads], tags,
                  mesh.alpha, mesh.L, mesh.n, mesh.kind)


def refine(mesh: Mesh2D) -> Mesh2D:
    """split every cell `2 x 2` through its edge midpoints and center

    The new vertices are numbered like the degree 2 dofs of `mesh`, so the
    finite element spaces of `mesh` are nested in those of the result.

    >>> m = refine(build_halfplane_mesh(1.0, 4))
    >>> m.num_cells, m.num_nodes, m.n
    (128, 153, 8)
    """
    from .space import FunctionSpace

    space = FunctionSpace(mesh, 2)
    local = space.cell_dofs
    sub = [(0, 4, 8, 7), (4, 1, 5, 8), (8, 5, 2, 6), (7, 8, 6, 3)]
    quads = np.concatenate([local[:, list(s)] for s in sub])
    tags = {}
    for (a, b), t in mesh.boundary_tags.items():
        mid = space.edge_dof(a, b)
        tags[_edge(a, mid)] = t
        tags[_edge(mid, b)] = t
    out = Mesh2D(space.dof_coords, quads, tags, mesh.alpha, mesh.L, 2 * mesh.n, mesh.kind)
    out.check_tags()
    return out
