""" Hilbert modules over the finite-dimensional algebras of
:py:mod:`cpdilate.algebra`, and the flag model of locally Hilbert spaces.

Every supported module is a "rectangular" module: an element is a list of
p_k x d_k matrices, one per algebra block, the right action is blockwise
multiplication and <x, y> = x_k* y_k blockwise. The self module has p_k = d_k
and the free module A^m stacks its m coordinates, p_k = m d_k. """

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cpdilate import definitions
from cpdilate.algebra import AlgElement, CStarAlgebra, _block_diag
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.linalg import CMatrix, Tolerances, _tol, as_cmatrix, dagger, max_abs, numerical_rank, orthonormal_range

logger = logging.getLogger('cpdilate')


@dataclass(frozen=True)
class HilbertModule(object):
    """ A Hilbert module over `algebra`. `kind` is one of 'self', 'free' or
    'rect'. For 'free' `multiplicity` is the number of copies of A; for
    'rect' `rows` holds p_k per block (zero is allowed and gives a module that
    does not touch that block). """

    algebra: CStarAlgebra
    kind: str = 'self'
    multiplicity: int = 1
    rows: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in definitions.MODULE_KINDS:
            raise InvalidInputError(ErrorCode.MODULE_MISMATCH,
                                    f"Unknown module kind '{self.kind}'. Choose from {definitions.MODULE_KINDS}.")
        if self.kind == 'self':
            rows = self.algebra.block_dims
        elif self.kind == 'free':
            if int(self.multiplicity) < 1:
                raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                        f"A free module needs at least one copy, got {self.multiplicity}.")
            rows = tuple(int(self.multiplicity) * d for d in self.algebra.block_dims)
        else:
            if self.rows is None or len(self.rows) != len(self.algebra.block_dims) or \
                    any(int(p) < 0 for p in self.rows):
                raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                        f"A rectangular module needs one non-negative row count per block, got "
                                        f"{self.rows}.")
            rows = tuple(int(p) for p in self.rows)
        object.__setattr__(self, 'rows', rows)

    def __repr__(self) -> str:
        if self.kind == 'free':
            return f"<cpdilate.HilbertModule free({self.multiplicity}) over {self.algebra!r}>"
        return f"<cpdilate.HilbertModule {self.kind} rows={list(self.rows)} over {self.algebra!r}>"

    @property
    def dim(self) -> int:
        """ Linear dimension of the module. """
        return sum(p * d for p, d in zip(self.rows, self.algebra.block_dims))

    @property
    def rep_dim(self) -> int:
        """ Row dimension of the identity representation, the sum of p_k. """
        return sum(self.rows)

    @property
    def block_offsets(self) -> List[int]:
        offsets, position = [], 0
        for p, d in zip(self.rows, self.algebra.block_dims):
            offsets.append(position)
            position += p * d
        return offsets

    def zero(self) -> 'ModuleElement':
        return ModuleElement(self, [np.zeros((p, d), dtype=np.complex128)
                                    for p, d in zip(self.rows, self.algebra.block_dims)])

    def unit_vector(self, block: int, row: int, col: int) -> 'ModuleElement':
        element = self.zero()
        element.blocks[block][row, col] = 1
        return element

    def basis(self) -> List['ModuleElement']:
        """ Matrix units, ordered the same way as ModuleElement.vec(). """

        return [self.unit_vector(k, r, c) for k, (p, d) in enumerate(zip(self.rows, self.algebra.block_dims))
                for r in range(p) for c in range(d)]

    def from_vector(self, vector: Sequence[complex]) -> 'ModuleElement':
        vector = np.asarray(vector, dtype=np.complex128).ravel()
        if vector.size != self.dim:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Expected a module vector of length {self.dim}, got {vector.size}.")
        return ModuleElement(self, [vector[offset:offset + p * d].reshape(p, d).copy() for offset, p, d in
                                    zip(self.block_offsets, self.rows, self.algebra.block_dims)])

    def random_element(self, rng: np.random.Generator) -> 'ModuleElement':
        return ModuleElement(self, [rng.standard_normal((p, d)) + 1j * rng.standard_normal((p, d))
                                    for p, d in zip(self.rows, self.algebra.block_dims)])

    def identity_representation(self, x: 'ModuleElement') -> CMatrix:
        """ x as a block-diagonal (rep_dim x algebra.rep_dim) matrix. This is
        a module representation over the identity representation of A:
        rep(x)* rep(y) = <x, y> as a block-diagonal matrix. """

        _check_module(self, x.module)
        return _block_diag(x.blocks)

    def get_json(self) -> dict:
        result = {'kind': self.kind}
        if self.kind == 'free':
            result['multiplicity'] = self.multiplicity
        if self.kind == 'rect':
            result['rows'] = list(self.rows)
        return result


def _check_module(first: HilbertModule, second: HilbertModule) -> None:
    if first != second:
        raise InvalidInputError(ErrorCode.MODULE_MISMATCH, f"Elements belong to different modules: {first!r} and "
                                                           f"{second!r}.")


class ModuleElement(object):
    """ An element of a :py:class:`HilbertModule`, one p_k x d_k matrix per
    block. """

    __slots__ = ('module', 'blocks')

    def __init__(self, module: HilbertModule, blocks: Sequence[CMatrix]):
        if len(blocks) != len(module.rows):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Expected {len(module.rows)} blocks, got {len(blocks)}.")
        converted = []
        for position, (block, p, d) in enumerate(zip(blocks, module.rows, module.algebra.block_dims)):
            if p * d == 0 and np.size(block) == 0:
                block = np.zeros((p, d), dtype=np.complex128)
            else:
                block = as_cmatrix(block, f"block {position}")
            if block.shape != (p, d):
                raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                        f"Block {position} must be {p}x{d}, got {block.shape}.")
            converted.append(block)
        self.module = module
        self.blocks = converted

    def __repr__(self) -> str:
        return f"<cpdilate.ModuleElement of {self.module!r}>"

    def __add__(self, other: 'ModuleElement') -> 'ModuleElement':
        _check_module(self.module, other.module)
        return ModuleElement(self.module, [x + y for x, y in zip(self.blocks, other.blocks)])

    def __sub__(self, other: 'ModuleElement') -> 'ModuleElement':
        _check_module(self.module, other.module)
        return ModuleElement(self.module, [x - y for x, y in zip(self.blocks, other.blocks)])

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            return module_right_action(self, other)
        return ModuleElement(self.module, [x * other for x in self.blocks])

    __rmul__ = __mul__

    def vec(self) -> np.ndarray:
        return np.concatenate([block.ravel() for block in self.blocks])

    def max_abs(self) -> float:
        return max(max_abs(block) for block in self.blocks)


def module_inner_product(x: ModuleElement, y: ModuleElement) -> AlgElement:
    """ The A-valued inner product <x, y> = x* y, linear in y. """

    _check_module(x.module, y.module)
    return AlgElement(x.module.algebra, [dagger(a) @ b for a, b in zip(x.blocks, y.blocks)])


def module_right_action(x: ModuleElement, a: AlgElement) -> ModuleElement:
    """ The right action x.a, computed blockwise. """

    if x.module.algebra != a.algebra:
        raise InvalidInputError(ErrorCode.MODULE_MISMATCH,
                                f"Cannot act on {x.module!r} with an element of {a.algebra!r}.")
    return ModuleElement(x.module, [b @ c for b, c in zip(x.blocks, a.blocks)])


def fullness_check(module: HilbertModule, tol: Tolerances = None) -> bool:
    """ Returns True if the inner products of module basis pairs span the
    whole algebra. """

    tol = _tol(tol)
    basis = module.basis()
    if not basis:
        return False
    span = np.array([module_inner_product(x, y).vec() for x in basis for y in basis]).T
    rank = numerical_rank(span, tol)
    logger.debug('Inner products of %r span a space of dimension %d of %d.', module, rank, module.algebra.dim)
    return rank == module.algebra.dim


@dataclass(frozen=True)
class FlagSpace(object):
    """ A finite-dimensional locally Hilbert space: C^h with the nested
    coordinate subspaces H_alpha = span(e_1, ..., e_{h_alpha}). """

    flag_dims: Tuple[int, ...]

    def __post_init__(self):
        flag_dims = tuple(int(x) for x in self.flag_dims)
        if len(flag_dims) == 0 or flag_dims[0] < 0 or any(b < a for a, b in zip(flag_dims, flag_dims[1:])):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Flag dimensions must be a non-empty non-decreasing list of non-negative "
                                    f"integers, got {list(self.flag_dims)}.")
        object.__setattr__(self, 'flag_dims', flag_dims)

    def __repr__(self) -> str:
        return f"<cpdilate.FlagSpace {list(self.flag_dims)}>"

    @classmethod
    def trivial(cls, dim: int, levels: int = 1) -> 'FlagSpace':
        """ C^dim with every level equal to the whole space. """
        return cls((dim,) * levels)

    @classmethod
    def from_subspaces(cls, ambient_dim: int, subspaces: Sequence[CMatrix],
                       tol: Tolerances = None) -> Tuple['FlagSpace', CMatrix]:
        """ Canonicalizes a flag of nested subspaces of C^ambient_dim, each
        given by spanning columns. Returns the canonical flag and the unitary
        that maps each subspace onto its leading coordinates. """

        tol = _tol(tol)
        collected = np.zeros((ambient_dim, 0), dtype=np.complex128)
        dims = []
        for level, spanning in enumerate(subspaces):
            spanning = np.asarray(spanning, dtype=np.complex128).reshape(ambient_dim, -1)
            span_basis = orthonormal_range(spanning, tol)
            if max_abs(collected - span_basis @ (dagger(span_basis) @ collected)) > tol.residual_tol:
                raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                        f"Subspace {level} does not contain subspace {level - 1}.")
            leftover = span_basis - collected @ (dagger(collected) @ span_basis)
            collected = np.hstack([collected, orthonormal_range(leftover, tol)])
            dims.append(collected.shape[1])
        if not dims or dims[-1] != ambient_dim:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"The last subspace must be all of C^{ambient_dim}.")
        return cls(tuple(dims)), dagger(collected)

    @property
    def dim(self) -> int:
        return self.flag_dims[-1]

    @property
    def num_levels(self) -> int:
        return len(self.flag_dims)

    def level_dim(self, level: int) -> int:
        if not 1 <= level <= self.num_levels:
            raise InvalidInputError(ErrorCode.LEVEL_OUT_OF_RANGE,
                                    f"Level {level} is outside the flag 1..{self.num_levels}.")
        return self.flag_dims[level - 1]

    def differences(self) -> List[Tuple[int, int]]:
        """ The coordinate ranges [start, stop) of H_alpha minus H_alpha-1. """

        starts = (0,) + self.flag_dims[:-1]
        return list(zip(starts, self.flag_dims))

    def coordinate_levels(self) -> np.ndarray:
        """ For every coordinate, the first (0-based) level that contains it. """

        levels = np.zeros(self.dim, dtype=int)
        for position, (start, stop) in enumerate(self.differences()):
            levels[start:stop] = position
        return levels

    def get_json(self) -> List[int]:
        return list(self.flag_dims)


def _check_levels(source: FlagSpace, target: FlagSpace) -> None:
    if source.num_levels != target.num_levels:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"Flags have different lengths: {source!r} and {target!r}.")


def compatibility_mask(source: FlagSpace, target: FlagSpace) -> np.ndarray:
    """ Boolean (target.dim x source.dim) mask of the entries a
    flag-compatible operator may have non-zero. """

    _check_levels(source, target)
    return target.coordinate_levels()[:, None] == source.coordinate_levels()[None, :]


def flag_compat_residual(matrix: CMatrix, source: FlagSpace, target: FlagSpace) -> float:
    """ Largest entry of the matrix outside the allowed block pattern. """

    matrix = np.asarray(matrix)
    if matrix.shape != (target.dim, source.dim):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"A map from {source!r} to {target!r} must have shape {(target.dim, source.dim)}, "
                                f"got {matrix.shape}.")
    return max_abs(matrix[~compatibility_mask(source, target)])


def flag_compat_check(matrix: CMatrix, source: FlagSpace, target: FlagSpace, tol: Tolerances = None) -> bool:
    """ True iff the matrix maps H_alpha into K_alpha and its adjoint maps
    K_alpha into H_alpha for every level. """

    return flag_compat_residual(matrix, source, target) <= _tol(tol).residual_tol


@dataclass(frozen=True)
class FlagOperator(object):
    """ A linear map between two flag spaces. Nothing is checked at
    construction; use :py:meth:`is_compatible`. """

    source: FlagSpace
    target: FlagSpace
    matrix: CMatrix

    def __post_init__(self):
        if self.target.dim * self.source.dim == 0 and np.size(self.matrix) == 0:
            matrix = np.zeros((self.target.dim, self.source.dim), dtype=np.complex128)
        else:
            matrix = as_cmatrix(self.matrix, "flag operator")
        if matrix.shape != (self.target.dim, self.source.dim):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"A map from {self.source!r} to {self.target!r} must have shape "
                                    f"{(self.target.dim, self.source.dim)}, got {matrix.shape}.")
        object.__setattr__(self, 'matrix', matrix)

    def __repr__(self) -> str:
        return f"<cpdilate.FlagOperator {self.source!r} -> {self.target!r}>"

    def __matmul__(self, other: 'FlagOperator') -> 'FlagOperator':
        if other.target != self.source:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, f"Cannot compose {self!r} after {other!r}.")
        return FlagOperator(other.source, self.target, self.matrix @ other.matrix)

    def is_compatible(self, tol: Tolerances = None) -> bool:
        return flag_compat_check(self.matrix, self.source, self.target, tol)

    def restriction(self, level: int) -> CMatrix:
        """ T_alpha, the leading block from H_alpha to K_alpha. """
        return self.matrix[:self.target.level_dim(level), :self.source.level_dim(level)]

    def inner(self, other: 'FlagOperator') -> CMatrix:
        """ The operator-valued inner product <T1, T2> = T1* T2. """
        if other.source != self.source or other.target != self.target:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, f"Cannot pair {self!r} with {other!r}.")
        return dagger(self.matrix) @ other.matrix


def flag_adjoint(operator: FlagOperator, tol: Tolerances = None) -> FlagOperator:
    """ The adjoint T*, a map from the target flag back to the source flag. """

    residual = flag_compat_residual(operator.matrix, operator.source, operator.target)
    if residual > _tol(tol).residual_tol:
        raise VerdictError(ErrorCode.NOT_FLAG_COMPATIBLE,
                           f"The operator leaves the flag pattern by {residual:.3e}, so its adjoint is not an "
                           f"operator of the same class.", {'flag_residual': residual})
    return FlagOperator(operator.target, operator.source, dagger(operator.matrix))


def flag_seminorm(operator: FlagOperator, level: int) -> float:
    """ ||T||_alpha = ||T_alpha* T_alpha||^(1/2), the operator norm of the
    restriction to level alpha. """

    restriction = operator.restriction(level)
    if restriction.size == 0:
        return 0.0
    return float(np.sqrt(max(0.0, float(np.linalg.norm(dagger(restriction) @ restriction, 2)))))


@lru_cache(maxsize=64)
def inner_product_table(module: HilbertModule) -> np.ndarray:
    """ table[b, c] is vec(<x_b, x_c>) for the module basis. Cached per
    module; do not modify the returned array. """

    algebra = module.algebra
    table = np.zeros((module.dim, module.dim, algebra.dim), dtype=np.complex128)
    for module_offset, algebra_offset, p, d in zip(module.block_offsets, algebra.block_offsets, module.rows,
                                                   algebra.block_dims):
        for r in range(p):
            for c in range(d):
                for c2 in range(d):
                    # <E_rc, E_rc2> = E_c,c2
                    table[module_offset + r * d + c, module_offset + r * d + c2, algebra_offset + c * d + c2] = 1
    return table


@lru_cache(maxsize=64)
def action_table(module: HilbertModule) -> np.ndarray:
    """ table[b, c] is vec(x_b e_c), the right action on basis elements. """

    algebra = module.algebra
    table = np.zeros((module.dim, algebra.dim, module.dim), dtype=np.complex128)
    for module_offset, algebra_offset, p, d in zip(module.block_offsets, algebra.block_offsets, module.rows,
                                                   algebra.block_dims):
        for r in range(p):
            for c in range(d):
                for c2 in range(d):
                    # E_rc E_c,c2 = E_r,c2
                    table[module_offset + r * d + c, algebra_offset + c * d + c2, module_offset + r * d + c2] = 1
    return table
