"""Galerkin matrices of the reduced magnetic Schrodinger operator

For a field `B = (b1, b2, b3)` and a Fourier parameter `tau` the form is

    Q(u) = int |d1 u|^2 + |(d2 - i b3 x1) u|^2 + V |u|^2
    V(x) = (x1 b2 - x2 b1 - tau)^2

(potential `A = (0, b3 x1)`). Dirichlet dofs are eliminated, Neumann
boundaries need no action.
"""

import logging

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import AssemblyError
from ..geometry import MagneticField
from .mesh import Mesh2D
from .space import FunctionSpace, function_space

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SparseHermitian:
    """Hermitian CSR matrix acting on the free dofs of `space`"""

    matrix: sp.csr_matrix
    space: FunctionSpace

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data)

    def hermitian_defect(self) -> float:
        "`max |A - A^H|`, zero by construction"
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0


def _hermitian(mat: sp.spmatrix) -> sp.csr_matrix:
    upper = sp.triu(mat, format="csr")
    strict = sp.triu(mat, k=1, format="csr")
    out = (upper + strict.conj().T).tocsr()
    out.sort_indices()
    return out


def _scatter(space: FunctionSpace, local: np.ndarray) -> sp.csr_matrix:
    dofs = space.cell_dofs
    nb = dofs.shape[1]
    rows = np.repeat(dofs, nb, axis=1).ravel()
    cols = np.tile(dofs, (1, nb)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)),
                         shape=(space.num_dofs, space.num_dofs)).tocsr()


def assemble_form(space: FunctionSpace, b3: float = 0.0,
                  potential=None) -> tuple[SparseHermitian, SparseHermitian]:
    """matrices of `|d1 u|^2 + |(d2 - i b3 x1) u|^2 + V |u|^2` and of `|u|^2`

    `potential(x1, x2)` is vectorized over the quadrature points, `None`
    means `V = 0`. The operator is real when `b3 = 0`.
    """
    points, weights, phi, grads = space.quadrature
    x1, x2 = points[..., 0], points[..., 1]
    # local matrices are (E, nb, nb), row = test function
    local = np.einsum("eq,eqid,eqjd->eij", weights, grads, grads)
    mass = np.einsum("eq,qi,qj->eij", weights, phi, phi)
    coef = np.zeros_like(weights)
    if potential is not None:
        coef = coef + np.asarray(potential(x1, x2), dtype=float)
    if b3 != 0:
        a = b3 * x1
        coef = coef + a * a
        cross = np.einsum("eq,eqj,qi->eij", weights * a, grads[..., 1], phi)
        local = local + 1j * (cross - cross.transpose(0, 2, 1))
    local = local + np.einsum("eq,qi,qj->eij", weights * coef, phi, phi)
    if not (np.all(np.isfinite(local)) and np.all(np.isfinite(mass))):
        raise AssemblyError("non-finite quadrature values", "assemble_form",
                            b3=b3, order=space.order)
    free = space.free
    a_mat = _hermitian(_scatter(space, local)[free][:, free])
    m_mat = _hermitian(_scatter(space, mass)[free][:, free])
    logger.debug("assembled %s operator on %d dofs, %d nonzeros",
                 "complex" if np.iscomplexobj(local) else "real",
                 a_mat.shape[0], a_mat.nnz)
    return SparseHermitian(a_mat, space), SparseHermitian(m_mat, space)


def reduced_potential(b1: float, b2: float, tau: float):
    "`V^tau(x) = (x1 b2 - x2 b1 - tau)^2` as a vectorized callable"
    def potential(x1, x2):
        return (x1 * b2 - x2 * b1 - tau) ** 2
    return potential


def assemble(mesh: Mesh2D, field, tau: float,
             order: int = 2) -> tuple[SparseHermitian, SparseHermitian]:
    """matrices of the fiber operator at `tau` for `field` on `mesh`

    `field` is a canonical `MagneticField` or, for symmetry checks, any
    3-tuple of (possibly negative) components used as is.
    """
    if isinstance(field, MagneticField):
        b1, b2, b3 = field.components
    else:
        b1, b2, b3 = (float(b) for b in field)
    space = function_space(mesh, order)
    return assemble_form(space, b3, reduced_potential(b1, b2, tau))
