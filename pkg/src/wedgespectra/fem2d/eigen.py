"""Lowest eigenpairs of `A v = lambda M v` by shift-invert Lanczos"""

import logging

from dataclasses import dataclass, field

import numpy as np

from scipy.sparse.linalg import LinearOperator, eigsh, splu, ArpackNoConvergence

from .. import SolverError
from .assembly import SparseHermitian
from .space import FunctionSpace

logger = logging.getLogger(__name__)

SHIFT = -0.5
SHIFT_RETRIES = 4


@dataclass(frozen=True, eq=False)
class EigenPair:
    """eigenvalue, full dof vector (zero on Dirichlet dofs) and residual

    The vector is `M`-normalized and its largest entry is real positive.
    """

    value: float
    vector: np.ndarray = field(repr=False)
    residual: float
    space: FunctionSpace = field(repr=False)

    @property
    def free_vector(self) -> np.ndarray:
        return self.vector[self.space.free]


def _factorize(A: SparseHermitian, M: SparseHermitian, sigma: float):
    for attempt in range(SHIFT_RETRIES + 1):
        shifted = (A.matrix - sigma * M.matrix).tocsc()
        try:
            return splu(shifted), sigma
        except RuntimeError as err:
            logger.warning("factorization at shift %g failed (%s), retrying", sigma, err)
            sigma -= 0.5
    raise SolverError("factorization of A - sigma M broke down", "lowest_eigenpairs",
                      shift=sigma, retries=SHIFT_RETRIES)


def residual(A: SparseHermitian, M: SparseHermitian, value: float, vec) -> float:
    "`||A v - lambda M v|| / ||M v||`"
    mv = M.matrix @ vec
    return float(np.linalg.norm(A.matrix @ vec - value * mv) / np.linalg.norm(mv))


def _normalize(M: SparseHermitian, vec: np.ndarray) -> np.ndarray:
    vec = vec / np.sqrt(np.real(np.vdot(vec, M.matrix @ vec)))
    top = vec[np.argmax(np.abs(vec))]
    return vec * (np.conj(top) / abs(top))


def lowest_eigenpairs(A: SparseHermitian, M: SparseHermitian, k: int = 1,
                      tol: float = 1e-8, sigma: float = SHIFT) -> list[EigenPair]:
    """`k` smallest eigenpairs, sorted by increasing value

    All operators handled here are nonnegative, so a negative shift is
    always below the spectrum. Raises `SolverError` (with the best residual
    reached) when some pair does not meet `tol`.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = A.dimension
    if k >= n - 1:
        raise SolverError("too few free dofs for the requested pairs",
                          "lowest_eigenpairs", k=k, dofs=n)
    dtype = np.result_type(A.matrix.dtype, M.matrix.dtype)
    lu, sigma = _factorize(A, M, sigma)
    op_inv = LinearOperator((n, n), matvec=lu.solve, dtype=dtype)
    v0 = np.ones(n, dtype=dtype)
    best = np.inf
    for arpack_tol, ncv in ((tol * 1e-4, None), (0.0, min(n - 1, max(4 * k + 1, 40)))):
        try:
            values, vectors = eigsh(A.matrix, k=k, M=M.matrix, sigma=sigma, which="LM",
                                    OPinv=op_inv, v0=v0, tol=arpack_tol, ncv=ncv)
        except ArpackNoConvergence as err:
            logger.warning("ARPACK did not converge (tol=%g), %d pairs",
                           arpack_tol, len(err.eigenvalues))
            continue
        order = np.argsort(values)
        pairs = []
        for i in order:
            vec = _normalize(M, vectors[:, i])
            value = float(np.real(values[i]))
            res = residual(A, M, value, vec)
            pairs.append(EigenPair(value, A.space.extend(vec), res, A.space))
        worst = max(p.residual for p in pairs)
        best = min(best, worst)
        logger.debug("eigsh: %d dofs, shift %g, lambda1=%.12g, residual %.3g",
                     n, sigma, pairs[0].value, worst)
        if worst <= tol:
            return pairs
        logger.warning("residual %.3g above %.3g, refining", worst, tol)
    raise SolverError("eigenpairs did not converge", "lowest_eigenpairs",
                      best_residual=float(best), tol=tol, k=k)
