"""Post-processing of computed eigenvectors"""

import math
import logging

from pathlib import Path

import numpy as np

from .. import MeshError
from ..geometry import MagneticField, distance_to_zero_line
from .eigen import EigenPair
from .mesh import Mesh2D

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-13
EXPORT_HEADER = "x1 x2 re(v) im(v) |v|"


def radial_envelope(pair: EigenPair, mesh: Mesh2D, bins: int = 40, window=(0.2, 0.6)):
    """centers and values of `max |v|` over annuli of `|x|`

    Annuli cover `[window[0] D, window[1] D]` where `D = max |x|` over the
    vertices of `mesh`; empty annuli and those below the noise floor are
    dropped.
    """
    coords = pair.space.dof_coords
    if mesh.num_nodes > len(coords) or not np.allclose(mesh.nodes, coords[:mesh.num_nodes]):
        raise MeshError("eigenpair was computed on another mesh", "radial_envelope",
                        nodes=mesh.num_nodes, dofs=len(coords))
    radius = np.hypot(coords[:, 0], coords[:, 1])
    diam = float(np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1]).max())
    mod = np.abs(pair.vector)
    peak = float(mod.max())
    edges = np.linspace(window[0] * diam, window[1] * diam, bins + 1)
    which = np.digitize(radius, edges) - 1
    centers, values = [], []
    for b in range(bins):
        inside = which == b
        if not inside.any():
            continue
        top = float(mod[inside].max())
        if top <= NOISE_FLOOR * peak:
            continue
        centers.append((edges[b] + edges[b + 1]) / 2)
        values.append(top)
    return np.array(centers), np.array(values)


def decay_rate(pair: EigenPair, mesh: Mesh2D) -> float:
    """least-squares exponential rate of the radial envelope on `mesh`

    `+inf` means the envelope is below the noise floor on most of the
    window ("fully decayed").
    """
    centers, values = radial_envelope(pair, mesh)
    if len(centers) < 3:
        logger.info("envelope below noise floor, reporting full decay")
        return math.inf
    slope, _ = np.polyfit(centers, np.log(values), 1)
    return float(-slope)


def artificial_boundary_ratio(pair: EigenPair) -> float:
    "`max |v|` on cells touching the artificial boundary over `max |v|`"
    space = pair.space
    cells = space.boundary_cells()
    mod = np.abs(pair.vector)
    if len(cells) == 0:
        return 0.0
    return float(mod[space.cell_dofs[cells]].max() / mod.max())


def localization(pair: EigenPair, field: MagneticField, tau: float):
    """centroid of `|v|^2` and its distance to the zero line of `V^tau`"""
    points, weights, _, _ = pair.space.quadrature
    dens = weights * np.abs(pair.space.evaluate(pair.vector)) ** 2
    total = float(dens.sum())
    centroid = np.array([float((dens * points[..., 0]).sum()) / total,
                         float((dens * points[..., 1]).sum()) / total])
    dist = float(distance_to_zero_line(centroid[None, :], field, tau)[0])
    return centroid, dist


def export_eigenvector(pair: EigenPair, path) -> Path:
    """write the vertex values of `pair` as an ASCII table

    Columns are `x1 x2 re(v) im(v) |v|`, one mesh vertex per line in mesh
    order.
    """
    path = Path(path)
    mesh = pair.space.mesh
    vals = pair.vector[:mesh.num_nodes]
    table = np.column_stack([mesh.nodes[:, 0], mesh.nodes[:, 1],
                             np.real(vals), np.imag(vals), np.abs(vals)])
    np.savetxt(path, table, fmt="%.12e", header=EXPORT_HEADER, comments="")
    logger.info("exported %d nodes to %s", len(table), path)
    return path
