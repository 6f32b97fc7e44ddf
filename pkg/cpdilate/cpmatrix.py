""" Matrices of maps: completely n-positive matrices [phi] of maps A -> L(H)
and [phi]-completely positive matrices [Phi] of maps M -> L(H, K).

Both are stored densely as their values on a basis, so maps that are not
completely positive can be represented and tested. The Choi matrix is the
positivity oracle. Instances with a known dilation are generated by
:py:func:`pair_from_witness` and :py:func:`random_cp_pair`. """

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from cpdilate.algebra import AlgElement, CStarAlgebra, _block_diag, adjoint_permutation
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.hilbert import FlagOperator, FlagSpace, HilbertModule, ModuleElement, compatibility_mask, \
    inner_product_table
from cpdilate.linalg import CMatrix, Tolerances, _tol, dagger, hermitian_residual, max_abs, min_eigenvalue
from cpdilate.utils import complex_to_json

logger = logging.getLogger('cpdilate')


def _check_index(n: int, i: int, j: int) -> None:
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidInputError(ErrorCode.INDEX_OUT_OF_RANGE, f"Index ({i}, {j}) is outside the {n}x{n} grid.")


class NPositiveMatrixMap(object):
    """ An n x n matrix [phi] = (phi_ij) of linear maps A -> L(H).

    `values` has shape (n, n, dim A, h, h); values[i, j, b] is phi_ij(e_b)
    for the matrix unit basis e_b of the algebra. Indices i, j are 0-based. """

    def __init__(self, algebra: CStarAlgebra, space: FlagSpace, values: np.ndarray):
        values = np.array(values, dtype=np.complex128)
        if values.ndim != 5 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Map values must have shape (n, n, dim A, h, h), got {values.shape}.")
        expected = (values.shape[0], values.shape[0], algebra.dim, space.dim, space.dim)
        if values.shape != expected:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Map values must have shape {expected}, got {values.shape}.")
        if space.num_levels != algebra.num_levels:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"The flag of H has {space.num_levels} levels but the seminorm chain has "
                                    f"{algebra.num_levels}.")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, "Map values contain NaN or Inf entries.")
        self.algebra = algebra
        self.space = space
        self.values = values

    def __repr__(self) -> str:
        return f"<cpdilate.NPositiveMatrixMap n={self.n} on {self.algebra!r}, H={self.space!r}>"

    def __add__(self, other: 'NPositiveMatrixMap') -> 'NPositiveMatrixMap':
        _check_same_shape(self, other)
        return NPositiveMatrixMap(self.algebra, self.space, self.values + other.values)

    def __sub__(self, other: 'NPositiveMatrixMap') -> 'NPositiveMatrixMap':
        _check_same_shape(self, other)
        return NPositiveMatrixMap(self.algebra, self.space, self.values - other.values)

    def __mul__(self, scalar: complex) -> 'NPositiveMatrixMap':
        return NPositiveMatrixMap(self.algebra, self.space, self.values * scalar)

    __rmul__ = __mul__

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zero(cls, algebra: CStarAlgebra, space: FlagSpace, n: int = 1) -> 'NPositiveMatrixMap':
        return cls(algebra, space, np.zeros((n, n, algebra.dim, space.dim, space.dim), dtype=np.complex128))

    def evaluate(self, i: int, j: int, a: AlgElement) -> CMatrix:
        _check_index(self.n, i, j)
        if a.algebra != self.algebra:
            raise InvalidInputError(ErrorCode.ALGEBRA_MISMATCH,
                                    f"The map is defined on {self.algebra!r}, not on {a.algebra!r}.")
        return np.tensordot(a.vec(), self.values[i, j], axes=1)

    def diagonal(self, i: int) -> 'NPositiveMatrixMap':
        """ The single map phi_ii as a 1 x 1 matrix map. """
        _check_index(self.n, i, i)
        return NPositiveMatrixMap(self.algebra, self.space, self.values[i:i + 1, i:i + 1])

    def hermiticity_residual(self) -> float:
        """ max |phi_ji(e_b*) - phi_ij(e_b)*| over the basis. """

        adjoint = adjoint_permutation(self.algebra)
        swapped = self.values.transpose(1, 0, 2, 4, 3).conj()[:, :, adjoint]
        return max_abs(self.values - swapped)

    def flag_residual(self) -> float:
        """ Largest value of any phi_ij(e_b) outside the flag pattern of H. """

        outside = ~compatibility_mask(self.space, self.space)
        return max_abs(self.values[..., outside])

    def validate(self, tol: Tolerances = None) -> None:
        """ Raises VerdictError unless every value is flag compatible and the
        hermiticity pairing phi_ji(a*) = phi_ij(a)* holds. """

        tol = _tol(tol)
        flag_residual = self.flag_residual()
        if flag_residual > tol.residual_tol:
            raise VerdictError(ErrorCode.NOT_FLAG_COMPATIBLE,
                               f"phi leaves the flag pattern of H by {flag_residual:.3e}.",
                               {'flag_residual': flag_residual})
        pairing = self.hermiticity_residual()
        if pairing > tol.residual_tol:
            raise VerdictError(ErrorCode.NON_HERMITIAN, f"phi_ji(a*) differs from phi_ij(a)* by {pairing:.3e}.",
                               {'hermiticity_residual': pairing})

    def get_json(self) -> list:
        return complex_to_json(self.values)


class ModuleCPMatrix(object):
    """ An n x n matrix [Phi] = (Phi_ij) of linear maps M -> L(H, K) with its
    scalar part [phi].

    `values` has shape (n, n, dim M, k, h); values[i, j, b] is Phi_ij(x_b)
    for the matrix unit basis x_b of the module. """

    def __init__(self, module: HilbertModule, source: FlagSpace, target: FlagSpace, values: np.ndarray,
                 scalar_part: NPositiveMatrixMap):
        values = np.array(values, dtype=np.complex128)
        n = scalar_part.n
        expected = (n, n, module.dim, target.dim, source.dim)
        if values.shape != expected:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Module map values must have shape {expected}, got {values.shape}.")
        if module.algebra != scalar_part.algebra:
            raise InvalidInputError(ErrorCode.ALGEBRA_MISMATCH,
                                    f"The module is over {module.algebra!r} but phi is defined on "
                                    f"{scalar_part.algebra!r}.")
        if source != scalar_part.space:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"Phi starts on {source!r} but phi acts on {scalar_part.space!r}.")
        if target.num_levels != source.num_levels:
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                    f"The flags of H and K have different lengths: {source!r}, {target!r}.")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, "Module map values contain NaN or Inf entries.")
        self.module = module
        self.source = source
        self.target = target
        self.values = values
        self.scalar_part = scalar_part

    def __repr__(self) -> str:
        return f"<cpdilate.ModuleCPMatrix n={self.n} on {self.module!r}, H={self.source!r}, K={self.target!r}>"

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def algebra(self) -> CStarAlgebra:
        return self.module.algebra

    def same_shape(self, other: 'ModuleCPMatrix') -> bool:
        return self.module == other.module and self.source == other.source and self.target == other.target and \
            self.n == other.n

    def evaluate(self, i: int, j: int, x: ModuleElement) -> CMatrix:
        _check_index(self.n, i, j)
        if x.module != self.module:
            raise InvalidInputError(ErrorCode.MODULE_MISMATCH,
                                    f"The map is defined on {self.module!r}, not on {x.module!r}.")
        return np.tensordot(x.vec(), self.values[i, j], axes=1)

    def column_outputs(self, x: ModuleElement) -> np.ndarray:
        """ All Phi_ij(x) at once, shape (n, n, k, h). """
        if x.module != self.module:
            raise InvalidInputError(ErrorCode.MODULE_MISMATCH,
                                    f"The map is defined on {self.module!r}, not on {x.module!r}.")
        return np.tensordot(x.vec(), self.values, axes=(0, 2))

    def flag_residual(self) -> float:
        outside = ~compatibility_mask(self.source, self.target)
        return max_abs(self.values[..., outside])

    def validate(self, tol: Tolerances = None) -> None:
        """ Raises VerdictError if a value leaves the flag pattern or the
        compatibility law with the scalar part fails. """

        tol = _tol(tol)
        flag_residual = self.flag_residual()
        if flag_residual > tol.residual_tol:
            raise VerdictError(ErrorCode.NOT_FLAG_COMPATIBLE,
                               f"Phi leaves the flag pattern of (H, K) by {flag_residual:.3e}.",
                               {'flag_residual': flag_residual})
        residual = compatibility_residual(self)
        if residual > tol.residual_tol:
            raise VerdictError(ErrorCode.COMPAT_FAIL,
                               f"sum_r Phi_ri(x)* Phi_rj(y) differs from phi_ij(<x, y>) by {residual:.3e}.",
                               {'compatibility_residual': residual})

    def get_json(self) -> list:
        return complex_to_json(self.values)


def _check_same_shape(first: NPositiveMatrixMap, second: NPositiveMatrixMap) -> None:
    if first.algebra != second.algebra or first.space != second.space or first.n != second.n:
        raise InvalidInputError(ErrorCode.SHAPE_MISMATCH, f"Cannot combine {first!r} with {second!r}.")


def evaluate_phi(phi: NPositiveMatrixMap, i: int, j: int, a: AlgElement) -> FlagOperator:
    """ phi_ij(a) as an operator on H. """

    return FlagOperator(phi.space, phi.space, phi.evaluate(i, j, a))


def evaluate_Phi(Phi: ModuleCPMatrix, i: int, j: int, x: ModuleElement) -> FlagOperator:
    """ Phi_ij(x) as an operator from H to K. """

    return FlagOperator(Phi.source, Phi.target, Phi.evaluate(i, j, x))


def choi_blocks(phi: NPositiveMatrixMap) -> List[CMatrix]:
    """ The Choi matrix of Theta((a_ij)) = (phi_ij(a_ij)) restricted to each
    algebra block, as a list of (n d_k n h) square matrices. """

    n, h = phi.n, phi.space.dim
    blocks = []
    for offset, d in zip(phi.algebra.block_offsets, phi.algebra.block_dims):
        choi = np.zeros((n, d, n, h, n, d, n, h), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                # (a, b, p, q) -> (a, p, b, q)
                values = phi.values[i, j, offset:offset + d * d].reshape(d, d, h, h).transpose(0, 2, 1, 3)
                choi[i, :, i, :, j, :, j, :] = values
        size = n * d * n * h
        blocks.append(choi.reshape(size, size))
    return blocks


def choi_matrix(phi: NPositiveMatrixMap) -> CMatrix:
    """ The Choi matrix of the amplified map Theta, block diagonal over the
    algebra blocks; size n d_tot n h. """

    return _block_diag(choi_blocks(phi))


def choi_min_eigenvalue(phi: NPositiveMatrixMap, tol: Tolerances = None) -> float:
    """ Smallest eigenvalue of the Choi matrix. Raises NON_HERMITIAN if the
    Choi matrix is not Hermitian. """

    return min(min_eigenvalue(block, tol) for block in choi_blocks(phi))


def cp_check(phi: NPositiveMatrixMap, tol: Tolerances = None) -> bool:
    """ True iff the Choi matrix is Hermitian within residual_tol and its
    smallest eigenvalue is at least -psd_tol. """

    tol = _tol(tol)
    for block in choi_blocks(phi):
        if hermitian_residual(block) > tol.residual_tol:
            return False
        if min_eigenvalue(block, tol) < -tol.psd_tol:
            return False
    return True


def form_table(Phi: ModuleCPMatrix) -> np.ndarray:
    """ table[i, j, b, c] = sum_r Phi_ri(x_b)* Phi_rj(x_c), shape
    (n, n, dim M, dim M, h, h). """

    return np.einsum('ribkp,rjckq->ijbcpq', Phi.values.conj(), Phi.values)


def scalar_form_table(phi: NPositiveMatrixMap, module: HilbertModule) -> np.ndarray:
    """ table[i, j, b, c] = phi_ij(<x_b, x_c>), same shape as form_table. """

    return np.einsum('bcd,ijdpq->ijbcpq', inner_product_table(module), phi.values)


def compatibility_residual(Phi: ModuleCPMatrix) -> float:
    """ max over i, j and module basis pairs of
    |sum_r Phi_ri(x)* Phi_rj(y) - phi_ij(<x, y>)|. """

    return max_abs(form_table(Phi) - scalar_form_table(Phi.scalar_part, Phi.module))


@dataclass(frozen=True, eq=False)
class StinespringWitness(object):
    """ Explicit dilation data used to generate a pair: a representation pi
    of A on V (pi_basis[b] = pi(e_b)), a module representation Pi from V to
    V' (Pi_basis[b] = Pi(x_b)), S_j: H -> V and W_i: K -> V' with
    phi_ij(a) = S_i* pi(a) S_j and Phi_ij(x) = W_i* Pi(x) S_j. """

    pi_basis: np.ndarray
    Pi_basis: np.ndarray
    S: Tuple[CMatrix, ...]
    W: Tuple[CMatrix, ...]

    @property
    def dim_h(self) -> int:
        return self.pi_basis.shape[1]

    @property
    def dim_k(self) -> int:
        return self.Pi_basis.shape[1]


def pair_from_witness(algebra: CStarAlgebra, module: HilbertModule, source: FlagSpace, target: FlagSpace,
                      witness: StinespringWitness) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix]:
    """ Builds ([phi], [Phi]) from explicit Stinespring data. """

    n = len(witness.S)
    if len(witness.W) != n or n < 1:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"Need the same positive number of S and W operators, got {len(witness.S)} and "
                                f"{len(witness.W)}.")
    if witness.pi_basis.shape[0] != algebra.dim or witness.Pi_basis.shape[0] != module.dim:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                "The witness representations must be given on the algebra and module bases.")
    S = np.array(witness.S, dtype=np.complex128)
    W = np.array(witness.W, dtype=np.complex128)
    if S.shape[1:] != (witness.dim_h, source.dim) or W.shape[1:] != (witness.dim_k, target.dim):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"S must be {witness.dim_h}x{source.dim} and W must be {witness.dim_k}x{target.dim}.")
    phi_values = np.einsum('iva,bvw,jwc->ijbac', S.conj(), witness.pi_basis, S)
    Phi_values = np.einsum('iva,bvw,jwc->ijbac', W.conj(), witness.Pi_basis, S)
    phi = NPositiveMatrixMap(algebra, source, phi_values)
    return phi, ModuleCPMatrix(module, source, target, Phi_values, phi)


def _level_representations(algebra: CStarAlgebra, module: HilbertModule, blocks: Sequence[int],
                           multiplicity: int) -> Tuple[np.ndarray, np.ndarray]:
    """ pi(e_b) = I_mult (x) (e_b restricted to `blocks`) and the matching
    module representation, as arrays over the bases. """

    identity = np.eye(multiplicity)
    rows = multiplicity * sum(module.rows[k] for k in blocks)
    cols = multiplicity * sum(algebra.block_dims[k] for k in blocks)
    pi_basis = np.zeros((algebra.dim, cols, cols), dtype=np.complex128)
    for b, e in enumerate(algebra.basis()):
        pi_basis[b] = np.kron(identity, _block_diag([e.blocks[k] for k in blocks]))
    Pi_basis = np.zeros((module.dim, rows, cols), dtype=np.complex128)
    for b, x in enumerate(module.basis()):
        Pi_basis[b] = np.kron(identity, _block_diag([x.blocks[k] for k in blocks]))
    return pi_basis, Pi_basis


def random_cp_pair(algebra: CStarAlgebra, module: HilbertModule, source: FlagSpace, target: FlagSpace, n: int,
                   dilation_dim: int, seed: int) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix, StinespringWitness]:
    """ Generates a pair in dilation form. On every flag level alpha the
    representation is `multiplicity` copies of the identity representation
    of the blocks that level sees, where multiplicity = dilation_dim / sum d_k.
    S_j and W_i are random and block diagonal with respect to the flag
    differences; the W_i are the blocks of a random isometry, so
    sum_i W_i W_i* = I and the compatibility law holds exactly.

    The same seed always produces the same output. """

    if n < 1:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, f"n must be positive, got {n}.")
    if dilation_dim < algebra.rep_dim or dilation_dim % algebra.rep_dim:
        raise InvalidInputError(ErrorCode.BAD_MULTIPLICITY,
                                f"The dilation dimension {dilation_dim} is not a positive multiple of the "
                                f"represented dimension {algebra.rep_dim} of the algebra.")
    if source.num_levels != algebra.num_levels or target.num_levels != algebra.num_levels:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"H and K need {algebra.num_levels} flag levels, got {source.num_levels} and "
                                f"{target.num_levels}.")
    multiplicity = dilation_dim // algebra.rep_dim
    rng = np.random.default_rng(seed)
    scale = 1 / np.sqrt(dilation_dim)

    pi_parts, Pi_parts, S_parts, W_parts = [], [], [], []
    for level, ((h_start, h_stop), (k_start, k_stop)) in enumerate(zip(source.differences(), target.differences())):
        delta_h, delta_k = h_stop - h_start, k_stop - k_start
        blocks = algebra.chain[level] if delta_h else ()
        pi_level, Pi_level = _level_representations(algebra, module, blocks, multiplicity)
        v_dim, v_out = pi_level.shape[1], Pi_level.shape[1]
        if n * delta_k < v_out:
            raise InvalidInputError(ErrorCode.BAD_MULTIPLICITY,
                                    f"Flag level {level + 1} needs n * dim(K difference) >= {v_out} to carry the "
                                    f"module representation, got {n * delta_k}.")
        S_level = scale * (rng.standard_normal((n, v_dim, delta_h)) + 1j * rng.standard_normal((n, v_dim, delta_h)))
        gaussian = rng.standard_normal((n * delta_k, v_out)) + 1j * rng.standard_normal((n * delta_k, v_out))
        isometry = np.linalg.qr(gaussian)[0] if v_out else np.zeros((n * delta_k, 0), dtype=np.complex128)
        # rows of the isometry are indexed (i, K coordinate); W_i* is block i
        W_level = isometry.reshape(n, delta_k, v_out).transpose(0, 2, 1).conj()
        pi_parts.append(pi_level)
        Pi_parts.append(Pi_level)
        S_parts.append(S_level)
        W_parts.append(W_level)

    pi_basis = np.array([_block_diag([part[b] for part in pi_parts]) for b in range(algebra.dim)])
    Pi_basis = np.array([_block_diag([part[b] for part in Pi_parts]) for b in range(module.dim)])
    S = tuple(_block_diag([part[i] for part in S_parts]) for i in range(n))
    W = tuple(_block_diag([part[i] for part in W_parts]) for i in range(n))
    witness = StinespringWitness(pi_basis=pi_basis.reshape(algebra.dim, S[0].shape[0], S[0].shape[0]),
                                 Pi_basis=Pi_basis.reshape(module.dim, W[0].shape[0], S[0].shape[0]),
                                 S=S, W=W)
    phi, Phi = pair_from_witness(algebra, module, source, target, witness)
    logger.debug('Generated a random pair with n=%d, dilation dimension %d and seed %s.', n, dilation_dim, seed)
    return phi, Phi, witness


def identity_pair(d: int, copies: int = 1) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix]:
    """ phi(a) = a (+) ... (+) a and Phi(x) = x (+) ... (+) x on the self module
    of M_d, with H = K = C^(copies d). With one copy this is the identity map
    and the left multiplication representation. """

    algebra = CStarAlgebra.full_matrix(d)
    module = HilbertModule(algebra, 'self')
    space = FlagSpace.trivial(copies * d)
    identity = np.eye(copies)
    pi_basis = np.array([np.kron(identity, e.blocks[0]) for e in algebra.basis()])
    witness = StinespringWitness(pi_basis=pi_basis, Pi_basis=pi_basis.copy(),
                                 S=(np.eye(copies * d),), W=(np.eye(copies * d),))
    return pair_from_witness(algebra, module, space, space, witness)


def trace_pair(d: int) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix]:
    """ phi(a) = tr(a) on H = C^1, and Phi(x) = vec(x) in K = C^(d^2) on the
    self module of M_d. """

    algebra = CStarAlgebra.full_matrix(d)
    module = HilbertModule(algebra, 'self')
    identity = np.eye(d)
    pi_basis = np.array([np.kron(e.blocks[0], identity) for e in algebra.basis()])
    witness = StinespringWitness(pi_basis=pi_basis, Pi_basis=pi_basis.copy(),
                                 S=(identity.reshape(d * d, 1),), W=(np.eye(d * d),))
    return pair_from_witness(algebra, module, FlagSpace.trivial(1), FlagSpace.trivial(d * d), witness)


def transpose_map(d: int) -> NPositiveMatrixMap:
    """ a -> a^T on M_d; positive but not completely positive. """

    algebra = CStarAlgebra.full_matrix(d)
    values = np.array([e.blocks[0].T for e in algebra.basis()]).reshape(1, 1, d * d, d, d)
    return NPositiveMatrixMap(algebra, FlagSpace.trivial(d), values)


def zero_pair(algebra: CStarAlgebra, module: HilbertModule, source: FlagSpace, target: FlagSpace,
              n: int = 1) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix]:
    phi = NPositiveMatrixMap.zero(algebra, source, n)
    values = np.zeros((n, n, module.dim, target.dim, source.dim), dtype=np.complex128)
    return phi, ModuleCPMatrix(module, source, target, values, phi)


def scaled(Phi: ModuleCPMatrix, factor: complex) -> ModuleCPMatrix:
    """ factor [Phi], whose scalar part is |factor|^2 [phi]. """

    phi = Phi.scalar_part * (abs(factor) ** 2)
    return ModuleCPMatrix(Phi.module, Phi.source, Phi.target, Phi.values * factor, phi)


def rotated(Phi: ModuleCPMatrix, unitary: CMatrix, tol: Tolerances = None) -> ModuleCPMatrix:
    """ U Phi_ij(x) for a flag-compatible unitary U on K. The scalar part is
    unchanged. """

    tol = _tol(tol)
    unitary = np.asarray(unitary, dtype=np.complex128)
    if unitary.shape != (Phi.target.dim, Phi.target.dim):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"The unitary must be {Phi.target.dim}x{Phi.target.dim}, got {unitary.shape}.")
    residual = max_abs(dagger(unitary) @ unitary - np.eye(Phi.target.dim))
    if residual > tol.residual_tol:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"The rotation is not unitary (residual {residual:.3e}).")
    values = np.einsum('kl,ijblh->ijbkh', unitary, Phi.values)
    return ModuleCPMatrix(Phi.module, Phi.source, Phi.target, values, Phi.scalar_part)


def combine(first: NPositiveMatrixMap, second: NPositiveMatrixMap, weight: float) -> NPositiveMatrixMap:
    """ The convex combination (1 - weight) first + weight second. """

    if not 0 <= weight <= 1:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, f"The weight must be in [0, 1], got {weight}.")
    return first * (1 - weight) + second * weight


