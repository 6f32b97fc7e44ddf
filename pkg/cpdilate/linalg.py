""" Dense complex linear algebra used by every construction in cpdilate:
Hermitian eigendecomposition, positive square roots, Gram quotients and
least-squares definition of operators on spanning families.

All matrices are plain ``numpy.ndarray`` objects of dtype complex128. The
functions never modify their arguments. """

import logging
from dataclasses import dataclass, field
from typing import Tuple, Optional

import numpy as np
import scipy.linalg

from cpdilate import definitions
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError

logger = logging.getLogger('cpdilate')

# Used throughout for type hints; a CMatrix is a 2-D complex128 ndarray
CMatrix = np.ndarray


@dataclass(frozen=True)
class Tolerances(object):
    """ Numerical cutoffs. rank_tol is relative to the largest eigenvalue of
    the form being quotiented, psd_tol is the allowed magnitude of negative
    eigenvalues, and residual_tol is the acceptance threshold for equation
    residuals (max entry modulus). """

    rank_tol: float = definitions.DEFAULT_RANK_TOL
    psd_tol: float = definitions.DEFAULT_PSD_TOL
    residual_tol: float = definitions.DEFAULT_RESIDUAL_TOL

    def __post_init__(self):
        for name in ('rank_tol', 'psd_tol', 'residual_tol'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not 0 < value <= definitions.MAX_TOLERANCE:
                raise InvalidInputError(ErrorCode.INVALID_TOLERANCE,
                                        f"Tolerance '{name}' must be in (0, {definitions.MAX_TOLERANCE}], "
                                        f"got {value!r}.")

    def replace(self, **kwargs) -> 'Tolerances':
        """ Returns a copy with the provided fields replaced. None values are ignored. """

        values = {'rank_tol': self.rank_tol, 'psd_tol': self.psd_tol, 'residual_tol': self.residual_tol}
        values.update({key: float(value) for key, value in kwargs.items() if value is not None})
        return Tolerances(**values)

    def get_json(self) -> dict:
        return {'rank_tol': self.rank_tol, 'psd_tol': self.psd_tol, 'residual_tol': self.residual_tol}


DEFAULT_TOLERANCES = Tolerances()


def _tol(tol: Optional[Tolerances]) -> Tolerances:
    return DEFAULT_TOLERANCES if tol is None else tol


def as_cmatrix(value, name: str = "matrix") -> CMatrix:
    """ Converts the value to a 2-D complex128 array and checks that every
    entry is finite. """

    matrix = np.array(value, dtype=np.complex128)
    if matrix.ndim != 2:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"The {name} must be two dimensional, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, f"The {name} contains NaN or Inf entries.")
    return matrix


def max_abs(matrix: np.ndarray) -> float:
    """ Largest entry modulus, 0 for empty arrays. """

    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix)))


def dagger(matrix: CMatrix) -> CMatrix:
    return matrix.conj().T


def hermitian_residual(matrix: CMatrix) -> float:
    return max_abs(matrix - dagger(matrix))


def _check_square(matrix: CMatrix) -> None:
    if matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(ErrorCode.NON_SQUARE, f"Expected a square matrix, got shape {matrix.shape}.")


def herm_eig(matrix: CMatrix, tol: Tolerances = None) -> Tuple[np.ndarray, CMatrix]:
    """ Eigendecomposition of a Hermitian matrix. Returns the eigenvalues in
    descending order and the unitary matrix whose columns are the matching
    eigenvectors, so that matrix = V diag(w) V*. """

    tol = _tol(tol)
    matrix = as_cmatrix(matrix)
    _check_square(matrix)
    residual = hermitian_residual(matrix)
    if residual > tol.residual_tol:
        raise VerdictError(ErrorCode.NON_HERMITIAN,
                           f"Matrix is not Hermitian: max |m - m*| = {residual:.3e}.",
                           {'hermitian_residual': residual})
    if matrix.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)

    eigenvalues, eigenvectors = scipy.linalg.eigh((matrix + dagger(matrix)) / 2)
    return eigenvalues[::-1].copy(), eigenvectors[:, ::-1].copy()


def min_eigenvalue(matrix: CMatrix, tol: Tolerances = None) -> float:
    """ Smallest eigenvalue of a Hermitian matrix (0 for empty matrices). """

    eigenvalues, _ = herm_eig(matrix, tol)
    if eigenvalues.size == 0:
        return 0.0
    return float(eigenvalues[-1])


def is_psd(matrix: CMatrix, tol: Tolerances = None) -> bool:
    """ True iff the matrix is Hermitian within residual_tol and its smallest
    eigenvalue is at least -psd_tol. """

    tol = _tol(tol)
    matrix = as_cmatrix(matrix)
    if matrix.shape[0] != matrix.shape[1] or hermitian_residual(matrix) > tol.residual_tol:
        return False
    return min_eigenvalue(matrix, tol) >= -tol.psd_tol


def _clamped_eig(matrix: CMatrix, tol: Tolerances) -> Tuple[np.ndarray, CMatrix]:
    eigenvalues, eigenvectors = herm_eig(matrix, tol)
    if eigenvalues.size and eigenvalues[-1] < -tol.psd_tol:
        raise VerdictError(ErrorCode.NOT_PSD,
                           f"Matrix is not positive semidefinite: min eigenvalue {eigenvalues[-1]:.3e}.",
                           {'min_eigenvalue': float(eigenvalues[-1])})
    if eigenvalues.size and eigenvalues[-1] < 0:
        logger.warning('Clamping eigenvalues down to %.3e to zero.', eigenvalues[-1])
    return np.clip(eigenvalues, 0, None), eigenvectors


def psd_sqrt(matrix: CMatrix, tol: Tolerances = None) -> CMatrix:
    """ The positive square root of a positive semidefinite matrix.
    Eigenvalues in [-psd_tol, 0) are treated as zero. """

    tol = _tol(tol)
    eigenvalues, eigenvectors = _clamped_eig(matrix, tol)
    root = (eigenvectors * np.sqrt(eigenvalues)) @ dagger(eigenvectors)
    return (root + dagger(root)) / 2


@dataclass(frozen=True)
class GramQuotient(object):
    """ The quotient of a coefficient space by the null space of a positive
    semidefinite Gram form.

    coord_map (r x N) sends a raw coefficient vector to coordinates in the
    quotient and preserves inner products: coord_map* coord_map = gram.
    range_basis (r x N) is the co-isometry onto the same coordinates:
    range_basis range_basis* = I. coord_pinv (N x r) is a right inverse of
    coord_map. """

    gram: CMatrix
    rank: int
    coord_map: CMatrix
    range_basis: CMatrix
    coord_pinv: CMatrix = field(repr=False)

    @property
    def raw_dim(self) -> int:
        return self.gram.shape[0]

    def gram_residual(self) -> float:
        return max_abs(dagger(self.coord_map) @ self.coord_map - self.gram)

    def coisometry_residual(self) -> float:
        return max_abs(self.range_basis @ dagger(self.range_basis) - np.eye(self.rank))


def gram_quotient(gram: CMatrix, tol: Tolerances = None) -> GramQuotient:
    """ Builds the quotient of C^N by the null space of the form given by the
    Hermitian PSD matrix `gram`. The rank is the number of eigenvalues
    above rank_tol times the largest eigenvalue. """

    tol = _tol(tol)
    gram = as_cmatrix(gram, "Gram matrix")
    eigenvalues, eigenvectors = _clamped_eig(gram, tol)
    size = gram.shape[0]

    if size == 0 or eigenvalues[0] <= 0:
        rank = 0
    else:
        rank = int(np.count_nonzero(eigenvalues > tol.rank_tol * eigenvalues[0]))

    kept_values = eigenvalues[:rank]
    kept_vectors = eigenvectors[:, :rank]
    roots = np.sqrt(kept_values)
    range_basis = dagger(kept_vectors)
    coord_map = roots[:, None] * range_basis
    coord_pinv = kept_vectors / roots[None, :] if rank else np.zeros((size, 0), dtype=np.complex128)

    logger.debug('Gram quotient of size %d has rank %d.', size, rank)
    return GramQuotient(gram=gram, rank=rank, coord_map=coord_map, range_basis=range_basis, coord_pinv=coord_pinv)


def lsq_define(generators_in: CMatrix, generators_out: CMatrix, tol: Tolerances = None) -> Tuple[CMatrix, float]:
    """ Finds the operator that sends each column of generators_in to the
    matching column of generators_out, in the least-squares sense. Returns
    the operator and the Frobenius norm of the misfit; callers decide
    whether the misfit is small enough for the operator to be well defined. """

    tol = _tol(tol)
    generators_in = as_cmatrix(generators_in, "input generators")
    generators_out = as_cmatrix(generators_out, "output generators")
    if generators_in.shape[1] != generators_out.shape[1]:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"Generator counts differ: {generators_in.shape[1]} input columns and "
                                f"{generators_out.shape[1]} output columns.")

    source_dim, target_dim = generators_in.shape[0], generators_out.shape[0]
    if source_dim == 0 or target_dim == 0 or generators_in.shape[1] == 0:
        operator = np.zeros((target_dim, source_dim), dtype=np.complex128)
    else:
        solution = scipy.linalg.lstsq(generators_in.T, generators_out.T, cond=tol.rank_tol)[0]
        operator = solution.T
    residual = float(np.linalg.norm(operator @ generators_in - generators_out))
    return operator, residual


def orthonormal_range(matrix: CMatrix, tol: Tolerances = None) -> CMatrix:
    """ Orthonormal basis (as columns) of the column space of the matrix,
    ignoring singular values below rank_tol times the largest one. """

    tol = _tol(tol)
    matrix = as_cmatrix(matrix)
    if matrix.size == 0 or max_abs(matrix) == 0:
        return np.zeros((matrix.shape[0], 0), dtype=np.complex128)
    return scipy.linalg.orth(matrix, rcond=tol.rank_tol)


def null_space(matrix: CMatrix, tol: Tolerances = None) -> CMatrix:
    """ Orthonormal basis (as columns) of the null space of the matrix. """

    tol = _tol(tol)
    matrix = as_cmatrix(matrix)
    if matrix.shape[1] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if matrix.shape[0] == 0 or max_abs(matrix) == 0:
        return np.eye(matrix.shape[1], dtype=np.complex128)
    return scipy.linalg.null_space(matrix, rcond=tol.rank_tol)


def numerical_rank(matrix: CMatrix, tol: Tolerances = None) -> int:
    """ Number of singular values above rank_tol times the largest one. """

    return orthonormal_range(matrix, tol).shape[1]


def unitarity_residual(matrix: CMatrix) -> float:
    """ max(|U*U - I|, |UU* - I|); zero for a 0x0 matrix. """

    rows, cols = matrix.shape
    if rows != cols:
        return float('inf')
    identity = np.eye(rows)
    return max(max_abs(dagger(matrix) @ matrix - identity), max_abs(matrix @ dagger(matrix) - identity))
