""" Finite-dimensional C*-algebras A = M_{d_1} (+) ... (+) M_{d_b} together
with a finite chain of C*-seminorms. Level alpha of the chain is given by a
subset of the blocks; p_alpha(a) is the operator norm of those blocks of a.
For a finite chain the inverse limit of the A_alpha is the top algebra, so an
element is stored once and the A_alpha are views of it. """

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple, Iterable, Union

import numpy as np

from cpdilate.exceptions import ErrorCode, InvalidInputError
from cpdilate.linalg import CMatrix, Tolerances, DEFAULT_TOLERANCES, as_cmatrix, dagger, hermitian_residual, max_abs

logger = logging.getLogger('cpdilate')


@dataclass(frozen=True)
class CStarAlgebra(object):
    """ A direct sum of full matrix algebras. `chain` lists, for every level
    alpha = 1..m, the (0-based) indices of the blocks seen by the seminorm
    p_alpha. The chain must be nested and end with every block. """

    block_dims: Tuple[int, ...]
    chain: Tuple[Tuple[int, ...], ...] = None

    def __post_init__(self):
        block_dims = tuple(int(x) for x in self.block_dims)
        if len(block_dims) == 0 or any(d < 1 for d in block_dims):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Block dimensions must be a non-empty list of positive integers, got "
                                    f"{list(self.block_dims)}. Only unital algebras are supported.")
        all_blocks = tuple(range(len(block_dims)))
        chain = self.chain
        if chain is None:
            chain = (all_blocks,)
        chain = tuple(tuple(sorted(set(int(b) for b in level))) for level in chain)
        if len(chain) == 0:
            raise InvalidInputError(ErrorCode.LEVEL_OUT_OF_RANGE, "The seminorm chain needs at least one level.")
        for level in chain:
            if any(b < 0 or b >= len(block_dims) for b in level):
                raise InvalidInputError(ErrorCode.INDEX_OUT_OF_RANGE,
                                        f"Seminorm level {list(level)} refers to a block that does not exist.")
        for lower, upper in zip(chain, chain[1:]):
            if not set(lower) <= set(upper):
                raise InvalidInputError(ErrorCode.LEVEL_OUT_OF_RANGE,
                                        f"The seminorm chain is not nested: {list(lower)} is not contained in "
                                        f"{list(upper)}.")
        if chain[-1] != all_blocks:
            raise InvalidInputError(ErrorCode.LEVEL_OUT_OF_RANGE,
                                    "The last level of the seminorm chain must contain every block.")
        object.__setattr__(self, 'block_dims', block_dims)
        object.__setattr__(self, 'chain', chain)

    def __repr__(self) -> str:
        return f"<cpdilate.CStarAlgebra {'+'.join(f'M{d}' for d in self.block_dims)}, {len(self.chain)} levels>"

    @classmethod
    def full_matrix(cls, d: int) -> 'CStarAlgebra':
        """ M_d with the trivial one-level chain. """
        return cls((d,))

    @property
    def dim(self) -> int:
        """ Linear dimension, the sum of d_k^2. """
        return sum(d * d for d in self.block_dims)

    @property
    def rep_dim(self) -> int:
        """ Dimension of the identity representation, the sum of d_k. """
        return sum(self.block_dims)

    @property
    def num_levels(self) -> int:
        return len(self.chain)

    @property
    def block_offsets(self) -> List[int]:
        """ Offsets of each block inside a vectorized element. """
        offsets, position = [], 0
        for d in self.block_dims:
            offsets.append(position)
            position += d * d
        return offsets

    def identity(self) -> 'AlgElement':
        return AlgElement(self, [np.eye(d, dtype=np.complex128) for d in self.block_dims])

    def zero(self) -> 'AlgElement':
        return AlgElement(self, [np.zeros((d, d), dtype=np.complex128) for d in self.block_dims])

    def matrix_unit(self, block: int, row: int, col: int) -> 'AlgElement':
        """ The matrix unit E_{row,col} inside block `block`. """

        element = self.zero()
        element.blocks[block][row, col] = 1
        return element

    def basis(self) -> List['AlgElement']:
        """ The matrix units, ordered the same way as AlgElement.vec(). """

        return [self.matrix_unit(k, a, b) for k, d in enumerate(self.block_dims) for a in range(d) for b in range(d)]

    def from_vector(self, vector: Sequence[complex]) -> 'AlgElement':
        """ Inverse of AlgElement.vec(). """

        vector = np.asarray(vector, dtype=np.complex128).ravel()
        if vector.size != self.dim:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Expected a vector of length {self.dim}, got {vector.size}.")
        blocks = [vector[offset:offset + d * d].reshape(d, d).copy()
                  for offset, d in zip(self.block_offsets, self.block_dims)]
        return AlgElement(self, blocks)

    def random_element(self, rng: np.random.Generator) -> 'AlgElement':
        return AlgElement(self, [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                                 for d in self.block_dims])

    def left_multiplication(self, a: 'AlgElement') -> CMatrix:
        """ The matrix of x -> a x acting on vectorized elements. """

        _check_same(self, a.algebra)
        return _block_diag([np.kron(block, np.eye(d)) for block, d in zip(a.blocks, self.block_dims)])

    def identity_representation(self, a: 'AlgElement') -> CMatrix:
        """ a as a block-diagonal matrix of size rep_dim. """

        _check_same(self, a.algebra)
        return _block_diag(a.blocks)

    def level_blocks(self, level: int) -> Tuple[int, ...]:
        if not 1 <= level <= self.num_levels:
            raise InvalidInputError(ErrorCode.LEVEL_OUT_OF_RANGE,
                                    f"Level {level} is outside the seminorm chain 1..{self.num_levels}.")
        return self.chain[level - 1]

    def get_json(self) -> dict:
        return {'block_dims': list(self.block_dims), 'chain': [list(level) for level in self.chain]}


def _block_diag(blocks: Iterable[np.ndarray]) -> CMatrix:
    blocks = list(blocks)
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    result = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for block in blocks:
        result[r:r + block.shape[0], c:c + block.shape[1]] = block
        r += block.shape[0]
        c += block.shape[1]
    return result


def _check_same(first: CStarAlgebra, second: CStarAlgebra) -> None:
    if first != second:
        raise InvalidInputError(ErrorCode.ALGEBRA_MISMATCH, f"Elements belong to different algebras: {first!r} and "
                                                            f"{second!r}.")


class AlgElement(object):
    """ An element of a :py:class:`CStarAlgebra`, stored as one square
    matrix per block. Supports +, -, scalar *, the algebra product (*) and
    the involution (.adjoint()). """

    __slots__ = ('algebra', 'blocks')

    def __init__(self, algebra: CStarAlgebra, blocks: Sequence[Union[CMatrix, list]]):
        if len(blocks) != len(algebra.block_dims):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Expected {len(algebra.block_dims)} blocks, got {len(blocks)}.")
        converted = []
        for position, (block, d) in enumerate(zip(blocks, algebra.block_dims)):
            block = as_cmatrix(block, f"block {position}")
            if block.shape != (d, d):
                raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                        f"Block {position} must be {d}x{d}, got {block.shape}.")
            converted.append(block)
        self.algebra = algebra
        self.blocks = converted

    def __repr__(self) -> str:
        return f"<cpdilate.AlgElement of {self.algebra!r}>"

    def __add__(self, other: 'AlgElement') -> 'AlgElement':
        _check_same(self.algebra, other.algebra)
        return AlgElement(self.algebra, [x + y for x, y in zip(self.blocks, other.blocks)])

    def __sub__(self, other: 'AlgElement') -> 'AlgElement':
        _check_same(self.algebra, other.algebra)
        return AlgElement(self.algebra, [x - y for x, y in zip(self.blocks, other.blocks)])

    def __neg__(self) -> 'AlgElement':
        return AlgElement(self.algebra, [-x for x in self.blocks])

    def __mul__(self, other: Union['AlgElement', complex]) -> 'AlgElement':
        if isinstance(other, AlgElement):
            return element_product(self, other)
        return AlgElement(self.algebra, [x * other for x in self.blocks])

    def __rmul__(self, other: complex) -> 'AlgElement':
        return AlgElement(self.algebra, [other * x for x in self.blocks])

    def adjoint(self) -> 'AlgElement':
        return element_adjoint(self)

    def vec(self) -> np.ndarray:
        """ Row-major concatenation of the blocks. """
        if not self.blocks:
            return np.zeros(0, dtype=np.complex128)
        return np.concatenate([block.ravel() for block in self.blocks])

    def max_abs(self) -> float:
        return max(max_abs(block) for block in self.blocks)

    def get_json(self) -> List[list]:
        return [[[[z.real, z.imag] for z in row] for row in block] for block in self.blocks]


def element_product(a: AlgElement, b: AlgElement) -> AlgElement:
    """ The blockwise matrix product ab. """

    _check_same(a.algebra, b.algebra)
    return AlgElement(a.algebra, [x @ y for x, y in zip(a.blocks, b.blocks)])


def element_adjoint(a: AlgElement) -> AlgElement:
    """ The involution a -> a*, blockwise conjugate transpose. """

    return AlgElement(a.algebra, [dagger(block) for block in a.blocks])


def positivity_check(a: AlgElement, tol: Tolerances = None) -> bool:
    """ True iff a is Hermitian within residual_tol and no block has an
    eigenvalue below -psd_tol. """

    tol = tol or DEFAULT_TOLERANCES
    for block in a.blocks:
        if hermitian_residual(block) > tol.residual_tol:
            return False
        if np.linalg.eigvalsh((block + dagger(block)) / 2)[0] < -tol.psd_tol:
            return False
    return True


def seminorm_eval(a: AlgElement, level: int) -> float:
    """ p_alpha(a): the largest operator norm among the blocks of level
    alpha (1-based). Zero when the level sees no block. """

    blocks = a.algebra.level_blocks(level)
    if not blocks:
        return 0.0
    return max(float(np.linalg.norm(a.blocks[k], 2)) for k in blocks)


@lru_cache(maxsize=64)
def product_table(algebra: CStarAlgebra) -> np.ndarray:
    """ Structure constants: table[b, c] is vec(e_b e_c) for the matrix unit
    basis. Cached per algebra; do not modify the returned array. """

    size = algebra.dim
    table = np.zeros((size, size, size), dtype=np.complex128)
    for k, (offset, d) in enumerate(zip(algebra.block_offsets, algebra.block_dims)):
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    # E_ab E_bc = E_ac
                    table[offset + a * d + b, offset + b * d + c, offset + a * d + c] = 1
    return table


@lru_cache(maxsize=64)
def adjoint_permutation(algebra: CStarAlgebra) -> np.ndarray:
    """ For every basis index b, the index of e_b*. """

    permutation = np.zeros(algebra.dim, dtype=int)
    for offset, d in zip(algebra.block_offsets, algebra.block_dims):
        for a in range(d):
            for b in range(d):
                permutation[offset + a * d + b] = offset + b * d + a
    return permutation
