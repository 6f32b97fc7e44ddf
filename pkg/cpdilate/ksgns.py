""" The matrix KSGNS construction.

Given a completely n-positive [phi] on A and a [phi]-completely positive [Phi]
on the module M, :py:func:`build_dilation` produces

 * H^Phi, the quotient of (A (x) H)^n by the null space of the Gram form
   <(a_i (x) xi_i), (b_j (x) eta_j)> = sum <xi_i, phi_ij(a_i* b_j) eta_j>,
 * the representation pi^phi(a) induced by left multiplication,
 * S_i: H -> H^Phi, xi -> class of 1 (x) xi in slot i,
 * K^Phi, the span of the tuples (Phi_1j(x) xi, ..., Phi_nj(x) xi) in K^n,
 * pi^Phi(x): H^Phi -> K^Phi and W_i: K -> K^Phi (the adjoint of the i-th
   coordinate map), so that sum_i W_i W_i* = I,

with phi_ij(a) = S_i* pi^phi(a) S_j and Phi_ij(x) = W_i* pi^Phi(x) S_j.
Coordinates on the dilation spaces are arbitrary; every check is a residual.

Raw coefficient vectors are indexed (i, b, p): slot i, algebra basis
element e_b, coordinate p of H. """

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.stats import unitary_group

from cpdilate.algebra import CStarAlgebra, adjoint_permutation, product_table
from cpdilate.cpmatrix import ModuleCPMatrix, NPositiveMatrixMap, choi_min_eigenvalue, cp_check, form_table, \
    scalar_form_table
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.hilbert import FlagSpace, HilbertModule, action_table, inner_product_table
from cpdilate.linalg import CMatrix, GramQuotient, Tolerances, _tol, dagger, gram_quotient, lsq_define, max_abs, \
    numerical_rank, orthonormal_range, unitarity_residual
from cpdilate.utils import complex_from_json, complex_to_json

logger = logging.getLogger('cpdilate')


@dataclass(frozen=True, eq=False)
class DilationData(object):
    """ The output of :py:func:`build_dilation`.

    rep_pi_phi[b] is pi^phi(e_b) (r x r), S[i] is S_i (r x h),
    rep_pi_Phi[b] is pi^Phi(x_b) (s x r) and W[i] is W_i (s x k), where
    r = dim H^Phi and s = dim K^Phi. k_basis (n k x s) has orthonormal
    columns spanning K^Phi inside K^n, and component_bases[i] spans K_i^Phi
    inside K. quotient and k_basis are None for dilations that were not
    built from a Gram form (rotated or padded copies). """

    algebra: CStarAlgebra
    module: HilbertModule
    source: FlagSpace
    target: FlagSpace
    rep_pi_phi: np.ndarray
    S: np.ndarray
    rep_pi_Phi: np.ndarray
    W: np.ndarray
    component_bases: Tuple[CMatrix, ...] = ()
    quotient: Optional[GramQuotient] = field(default=None, repr=False)
    k_basis: Optional[CMatrix] = field(default=None, repr=False)
    welldef_residuals: Dict[str, float] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"<cpdilate.DilationData n={self.n}, dim H^Phi={self.dim_h}, dim K^Phi={self.dim_k}>"

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def dim_h(self) -> int:
        return self.S.shape[1]

    @property
    def dim_k(self) -> int:
        return self.W.shape[1]

    @property
    def dil_space_H(self) -> FlagSpace:
        return FlagSpace.trivial(self.dim_h)

    @property
    def dil_space_K(self) -> FlagSpace:
        return FlagSpace.trivial(self.dim_k)

    def pi_phi(self, a) -> CMatrix:
        """ pi^phi(a) for an algebra element. """
        if a.algebra != self.algebra:
            raise InvalidInputError(ErrorCode.ALGEBRA_MISMATCH, f"Expected an element of {self.algebra!r}.")
        return np.tensordot(a.vec(), self.rep_pi_phi, axes=1)

    def pi_Phi(self, x) -> CMatrix:
        """ pi^Phi(x) for a module element. """
        if x.module != self.module:
            raise InvalidInputError(ErrorCode.MODULE_MISMATCH, f"Expected an element of {self.module!r}.")
        return np.tensordot(x.vec(), self.rep_pi_Phi, axes=1)

    def h_generators(self) -> CMatrix:
        """ The vectors pi^phi(e_b) S_i e_q as columns, ordered (b, i, q). """
        return np.einsum('bvw,iwq->vbiq', self.rep_pi_phi, self.S).reshape(self.dim_h, -1)

    def k_generators(self) -> CMatrix:
        """ The vectors pi^Phi(x_b) S_i e_q as columns, ordered (b, i, q). """
        return np.einsum('bvw,iwq->vbiq', self.rep_pi_Phi, self.S).reshape(self.dim_k, -1)

    def get_json(self) -> dict:
        return {'dim_h': self.dim_h,
                'dim_k': self.dim_k,
                'pi_phi': complex_to_json(self.rep_pi_phi),
                'S': complex_to_json(self.S),
                'pi_Phi': complex_to_json(self.rep_pi_Phi),
                'W': complex_to_json(self.W)}

    @classmethod
    def from_json(cls, data: dict, algebra: CStarAlgebra, module: HilbertModule, source: FlagSpace,
                  target: FlagSpace, n: int, path: str = "$.dilation") -> 'DilationData':
        """ Rebuilds the operators recorded by :py:meth:`get_json`. """

        r, s = int(data['dim_h']), int(data['dim_k'])
        return cls(algebra=algebra, module=module, source=source, target=target,
                   rep_pi_phi=complex_from_json(data['pi_phi'], f"{path}.pi_phi", (algebra.dim, r, r)),
                   S=complex_from_json(data['S'], f"{path}.S", (n, r, source.dim)),
                   rep_pi_Phi=complex_from_json(data['pi_Phi'], f"{path}.pi_Phi", (module.dim, s, r)),
                   W=complex_from_json(data['W'], f"{path}.W", (n, s, target.dim)))


@dataclass(frozen=True, eq=False)
class EquivalenceWitness(object):
    """ Unitaries U1: H^Phi -> H'^Phi and U2: K^Phi -> K'^Phi intertwining two
    dilations, with the residual of every identity they satisfy. """

    U1: CMatrix
    U2: CMatrix
    residuals: Dict[str, float]

    def get_json(self) -> dict:
        return {'U1': complex_to_json(self.U1), 'U2': complex_to_json(self.U2)}


def gram_matrix(phi: NPositiveMatrixMap) -> CMatrix:
    """ G[(i,b,p), (j,c,q)] = phi_ij(e_b* e_c)[p, q], the Gram form of the
    raw space (A (x) H)^n in its standard basis. """

    n, h, size = phi.n, phi.space.dim, phi.algebra.dim
    star_products = product_table(phi.algebra)[adjoint_permutation(phi.algebra)]
    gram = np.einsum('bcd,ijdpq->ibpjcq', star_products, phi.values)
    return gram.reshape(n * size * h, n * size * h)


def _raw_left_multiplication(phi: NPositiveMatrixMap) -> np.ndarray:
    """ For every basis element e_d, the raw operator (a_i (x) xi_i) -> (e_d a_i (x) xi_i). """

    n, h = phi.n, phi.space.dim
    # table[d, c, e] = coefficient of e_e in e_d e_c, so the operator is table[d].T on the b index
    table = product_table(phi.algebra)
    eye_n, eye_h = np.eye(n), np.eye(h)
    return np.array([np.kron(eye_n, np.kron(table[d].T, eye_h)) for d in range(phi.algebra.dim)])


def _raw_unit_embeddings(phi: NPositiveMatrixMap) -> np.ndarray:
    """ E_i (N x h): xi -> 1 (x) xi in slot i. """

    n, h, size = phi.n, phi.space.dim, phi.algebra.dim
    unit = phi.algebra.identity().vec()
    embeddings = np.zeros((n, n, size, h, h), dtype=np.complex128)
    for i in range(n):
        embeddings[i, i] = unit[:, None, None] * np.eye(h)[None, :, :]
    return embeddings.reshape(n, n * size * h, h)


def _raw_module_maps(Phi: ModuleCPMatrix) -> np.ndarray:
    """ Lambda_c: raw (j, b, q) -> K^n, slot i gets Phi_ij(x_c e_b) e_q. """

    n, k, h = Phi.n, Phi.target.dim, Phi.source.dim
    lam = np.einsum('cbe,ijekq->cikjbq', action_table(Phi.module), Phi.values)
    return lam.reshape(Phi.module.dim, n * k, n * Phi.algebra.dim * h)


def build_dilation(phi: NPositiveMatrixMap, Phi: ModuleCPMatrix, tol: Tolerances = None) -> DilationData:
    """ Builds the minimal KSGNS dilation of the pair. Raises VerdictError
    with NOT_CP if phi fails the Choi test, COMPAT_FAIL if
    sum_r Phi_ri(x)* Phi_rj(y) != phi_ij(<x, y>), and GRAM_NOT_PSD if the
    Gram form cannot be quotiented. """

    tol = _tol(tol)
    if Phi.source != phi.space or Phi.algebra != phi.algebra or Phi.n != phi.n:
        raise InvalidInputError(ErrorCode.SHAPE_MISMATCH, f"{Phi!r} is not a module map over {phi!r}.")
    phi.validate(tol)
    if not cp_check(phi, tol):
        minimum = choi_min_eigenvalue(phi, tol)
        raise VerdictError(ErrorCode.NOT_CP, f"phi is not completely positive: min Choi eigenvalue {minimum:.3e}.",
                           {'choi_min_eigenvalue': minimum})
    compat = max_abs(form_table(Phi) - scalar_form_table(phi, Phi.module))
    if compat > tol.residual_tol:
        raise VerdictError(ErrorCode.COMPAT_FAIL,
                           f"sum_r Phi_ri(x)* Phi_rj(y) differs from phi_ij(<x, y>) by {compat:.3e}.",
                           {'compatibility_residual': compat})
    if Phi.flag_residual() > tol.residual_tol:
        raise VerdictError(ErrorCode.NOT_FLAG_COMPATIBLE, "Phi leaves the flag pattern of (H, K).",
                           {'flag_residual': Phi.flag_residual()})

    n, h, k = phi.n, phi.space.dim, Phi.target.dim
    gram = gram_matrix(phi)
    try:
        quotient = gram_quotient(gram, tol)
    except VerdictError as err:
        raise VerdictError(ErrorCode.GRAM_NOT_PSD, f"The Gram form is not positive: {err.message}",
                           err.details) from None
    coords = quotient.coord_map
    r = quotient.rank

    # pi^phi(e_d) C = C L_d on the raw space
    left = _raw_left_multiplication(phi)
    stacked = np.concatenate([coords @ left[d] for d in range(phi.algebra.dim)], axis=0)
    pi_stacked, pi_residual = lsq_define(coords, stacked, tol)
    rep_pi_phi = pi_stacked.reshape(phi.algebra.dim, r, r)
    if pi_residual > tol.residual_tol * max(1.0, max_abs(gram)):
        raise VerdictError(ErrorCode.GRAM_NOT_PSD,
                           f"Left multiplication does not preserve the Gram null space (residual "
                           f"{pi_residual:.3e}).", {'pi_phi_welldef': pi_residual})

    embeddings = _raw_unit_embeddings(phi)
    S = np.einsum('rN,iNq->irq', coords, embeddings)

    lam = _raw_module_maps(Phi)
    generators = np.einsum('cmN,jNq->mcjq', lam, embeddings).reshape(n * k, -1)
    k_basis = orthonormal_range(generators, tol)
    s = k_basis.shape[1]
    stacked = np.concatenate([dagger(k_basis) @ lam[c] for c in range(Phi.module.dim)], axis=0)
    Pi_stacked, Pi_residual = lsq_define(coords, stacked, tol)
    rep_pi_Phi = Pi_stacked.reshape(Phi.module.dim, s, r)
    if Pi_residual > tol.residual_tol * max(1.0, max_abs(gram)):
        raise VerdictError(ErrorCode.COMPAT_FAIL,
                           f"pi^Phi is not well defined on the quotient (residual {Pi_residual:.3e}).",
                           {'pi_Phi_welldef': Pi_residual})

    # W_i = F* iota_i: the i-th block of rows of F, adjointed
    W = np.array([dagger(k_basis[i * k:(i + 1) * k]) for i in range(n)]).reshape(n, s, k)
    components = tuple(orthonormal_range(Phi.values[i].transpose(2, 0, 1, 3).reshape(k, -1), tol)
                       for i in range(n))

    logger.debug('Built a dilation with dim H^Phi = %d of at most %d and dim K^Phi = %d.', r, gram.shape[0], s)
    return DilationData(algebra=phi.algebra, module=Phi.module, source=phi.space, target=Phi.target,
                        rep_pi_phi=rep_pi_phi, S=S, rep_pi_Phi=rep_pi_Phi, W=W, component_bases=components,
                        quotient=quotient, k_basis=k_basis,
                        welldef_residuals={'pi_phi': pi_residual, 'pi_Phi': Pi_residual})


def reconstruction_residual(dil: DilationData, phi: NPositiveMatrixMap, Phi: ModuleCPMatrix) -> Tuple[float, float]:
    """ (res1, res2): the largest basis residuals of
    phi_ij(a) = S_i* pi^phi(a) S_j and Phi_ij(x) = W_i* pi^Phi(x) S_j. """

    if phi.values.shape[:3] != (dil.n, dil.n, dil.algebra.dim) or \
            Phi.values.shape[:3] != (dil.n, dil.n, dil.module.dim):
        raise InvalidInputError(ErrorCode.SHAPE_MISMATCH, f"{dil!r} does not match {phi!r} and {Phi!r}.")
    phi_rebuilt, Phi_rebuilt = dilation_pair(dil)
    return max_abs(phi_rebuilt.values - phi.values), max_abs(Phi_rebuilt.values - Phi.values)


def representation_residuals(dil: DilationData) -> Dict[str, float]:
    """ Residuals of the identities every dilation satisfies: pi^phi is a
    unital *-homomorphism, pi^Phi(x)* pi^Phi(y) = pi^phi(<x, y>),
    pi^Phi(x a) = pi^Phi(x) pi^phi(a) and sum_i W_i W_i* = I. """

    pi, Pi = dil.rep_pi_phi, dil.rep_pi_Phi
    products = np.einsum('bvw,cwu->bcvu', pi, pi)
    expected = np.einsum('bcd,dvu->bcvu', product_table(dil.algebra), pi)
    adjoints = pi[adjoint_permutation(dil.algebra)]
    unit = np.tensordot(dil.algebra.identity().vec(), pi, axes=1)
    forms = np.einsum('bvw,cvu->bcwu', Pi.conj(), Pi)
    expected_forms = np.einsum('bcd,dvu->bcvu', inner_product_table(dil.module), pi)
    actions = np.einsum('bce,evu->bcvu', action_table(dil.module), Pi)
    expected_actions = np.einsum('bvw,cwu->bcvu', Pi, pi)
    w_sum = np.einsum('iva,iwa->vw', dil.W, dil.W.conj())
    return {'pi_phi_multiplicative': max_abs(products - expected),
            'pi_phi_adjoint': max_abs(adjoints - pi.conj().transpose(0, 2, 1)),
            'pi_phi_unit': max_abs(unit - np.eye(dil.dim_h)),
            'pi_Phi_inner_product': max_abs(forms - expected_forms),
            'pi_Phi_module_action': max_abs(actions - expected_actions),
            'W_isometry': max_abs(w_sum - np.eye(dil.dim_k))}


def minimality_check(dil: DilationData, tol: Tolerances = None) -> bool:
    """ True iff the vectors pi^phi(a) S_i xi span H^Phi and the vectors
    pi^Phi(x) S_i xi span K^Phi. """

    tol = _tol(tol)
    h_rank = numerical_rank(dil.h_generators(), tol) if dil.dim_h else 0
    k_rank = numerical_rank(dil.k_generators(), tol) if dil.dim_k else 0
    logger.debug('Minimality ranks: %d of %d and %d of %d.', h_rank, dil.dim_h, k_rank, dil.dim_k)
    return h_rank == dil.dim_h and k_rank == dil.dim_k


def nondegeneracy_check(dil: DilationData, tol: Tolerances = None) -> bool:
    """ True iff pi^Phi(M) H^Phi spans K^Phi. """

    if dil.dim_k == 0:
        return True
    if dil.dim_h == 0:
        return False
    columns = dil.rep_pi_Phi.transpose(1, 0, 2).reshape(dil.dim_k, -1)
    return numerical_rank(columns, tol) == dil.dim_k


def equivalence_residuals(first: DilationData, second: DilationData, U1: CMatrix, U2: CMatrix) -> Dict[str, float]:
    """ Residuals of U1 S_i = S'_i, U1 pi(a) = pi'(a) U1, U2 pi(x) = pi'(x) U1,
    U2 W_i = W'_i and of the unitarity of U1 and U2. """

    return {'U1_unitarity': unitarity_residual(U1),
            'U2_unitarity': unitarity_residual(U2),
            'U1_S': max_abs(np.einsum('vw,iwq->ivq', U1, first.S) - second.S),
            'U1_pi_phi': max_abs(np.einsum('vw,bwu->bvu', U1, first.rep_pi_phi) -
                                 np.einsum('bvw,wu->bvu', second.rep_pi_phi, U1)),
            'U2_pi_Phi': max_abs(np.einsum('vw,bwu->bvu', U2, first.rep_pi_Phi) -
                                 np.einsum('bvw,wu->bvu', second.rep_pi_Phi, U1)),
            'U2_W': max_abs(np.einsum('vw,iwk->ivk', U2, first.W) - second.W)}


def unitary_equivalence(first: DilationData, second: DilationData, tol: Tolerances = None,
                        match_outputs: bool = True) -> EquivalenceWitness:
    """ Finds the unitaries U1, U2 between two minimal dilations by sending
    pi^phi(e_b) S_i xi to pi'^phi(e_b) S'_i xi and pi^Phi(x_b) S_i xi to
    pi'^Phi(x_b) S'_i xi.

    With match_outputs the witness must also satisfy U2 W_i = W'_i, which
    holds when both are dilations of the same pair. Without it only the
    Stinespring identities are required, which is the right notion for
    pairs that are merely equivalent. """

    tol = _tol(tol)
    if first.algebra != second.algebra or first.module != second.module or first.source != second.source or \
            first.target != second.target or first.n != second.n:
        raise InvalidInputError(ErrorCode.SHAPE_MISMATCH, f"Cannot compare {first!r} with {second!r}.")
    for label, dil in (('first', first), ('second', second)):
        if not minimality_check(dil, tol):
            raise VerdictError(ErrorCode.NOT_MINIMAL, f"The {label} dilation is not minimal.")
    if first.dim_h != second.dim_h or first.dim_k != second.dim_k:
        raise VerdictError(ErrorCode.NOT_EQUIVALENT,
                           f"The dilation spaces have different dimensions: ({first.dim_h}, {first.dim_k}) and "
                           f"({second.dim_h}, {second.dim_k}).",
                           {'dim_h': [first.dim_h, second.dim_h], 'dim_k': [first.dim_k, second.dim_k]})

    U1, u1_welldef = lsq_define(first.h_generators(), second.h_generators(), tol)
    U2, u2_welldef = lsq_define(first.k_generators(), second.k_generators(), tol)
    residuals = equivalence_residuals(first, second, U1, U2)
    residuals['U1_welldef'] = u1_welldef
    residuals['U2_welldef'] = u2_welldef

    required = ['U1_welldef', 'U2_welldef', 'U1_unitarity', 'U2_unitarity', 'U1_S', 'U1_pi_phi', 'U2_pi_Phi']
    if match_outputs:
        required.append('U2_W')
    failed = [name for name in required if residuals[name] > tol.residual_tol]
    if failed:
        raise VerdictError(ErrorCode.NOT_EQUIVALENT,
                           f"The dilations are not unitarily equivalent; failing identities: {', '.join(failed)}.",
                           residuals)
    return EquivalenceWitness(U1=U1, U2=U2, residuals=residuals)


def rotate_dilation(dil: DilationData, U1: CMatrix, U2: CMatrix) -> DilationData:
    """ The same dilation expressed in new coordinates: pi' = U1 pi U1*,
    S' = U1 S, pi'^Phi = U2 pi^Phi U1*, W' = U2 W. """

    U1 = np.asarray(U1, dtype=np.complex128)
    U2 = np.asarray(U2, dtype=np.complex128)
    if U1.shape != (dil.dim_h, dil.dim_h) or U2.shape != (dil.dim_k, dil.dim_k):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"U1 must be {dil.dim_h}x{dil.dim_h} and U2 must be {dil.dim_k}x{dil.dim_k}.")
    return replace(dil,
                   rep_pi_phi=np.einsum('vw,bwu,xu->bvx', U1, dil.rep_pi_phi, U1.conj()),
                   S=np.einsum('vw,iwq->ivq', U1, dil.S),
                   rep_pi_Phi=np.einsum('vw,bwu,xu->bvx', U2, dil.rep_pi_Phi, U1.conj()),
                   W=np.einsum('vw,iwk->ivk', U2, dil.W),
                   quotient=None,
                   k_basis=None if dil.k_basis is None else dil.k_basis @ dagger(U2))


def pad_dilation(dil: DilationData) -> DilationData:
    """ Adds one dimension to H^Phi that nothing reaches: pi^phi becomes
    pi^phi (+) 0 and every other operator is extended by zero. The result
    still reproduces the pair but is not minimal. """

    r = dil.dim_h
    pi = np.zeros((dil.algebra.dim, r + 1, r + 1), dtype=np.complex128)
    pi[:, :r, :r] = dil.rep_pi_phi
    S = np.zeros((dil.n, r + 1, dil.source.dim), dtype=np.complex128)
    S[:, :r] = dil.S
    Pi = np.zeros((dil.module.dim, dil.dim_k, r + 1), dtype=np.complex128)
    Pi[:, :, :r] = dil.rep_pi_Phi
    return replace(dil, rep_pi_phi=pi, S=S, rep_pi_Phi=Pi, quotient=None)


def random_unitary(dim: int, rng: np.random.Generator) -> CMatrix:
    """ A Haar distributed unitary drawn with scipy.stats.unitary_group. """

    if dim == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def level_projections(dil: DilationData, tol: Tolerances = None) -> Tuple[Tuple[CMatrix, ...], Tuple[CMatrix, ...]]:
    """ Projections of H^Phi and K^Phi onto the parts generated by each flag
    difference of H. These parts are mutually orthogonal for a
    flag-compatible pair; operators that commute with them keep deformed maps
    flag compatible. Empty for a one-level flag. """

    if dil.source.num_levels == 1:
        return (), ()
    h_projections, k_projections = [], []
    for start, stop in dil.source.differences():
        if stop == start:
            continue
        for generate, dim, target in ((dil.h_generators, dil.dim_h, h_projections),
                                      (dil.k_generators, dil.dim_k, k_projections)):
            if dim == 0:
                continue
            columns = generate().reshape(dim, -1, dil.source.dim)[:, :, start:stop].reshape(dim, -1)
            basis = orthonormal_range(columns, tol)
            target.append(basis @ dagger(basis))
    return tuple(h_projections), tuple(k_projections)


def dilation_pair(dil: DilationData) -> Tuple[NPositiveMatrixMap, ModuleCPMatrix]:
    """ The pair a dilation reproduces: phi_ij(a) = S_i* pi^phi(a) S_j and
    Phi_ij(x) = W_i* pi^Phi(x) S_j. """

    phi_values = np.einsum('iva,bvw,jwc->ijbac', dil.S.conj(), dil.rep_pi_phi, dil.S)
    Phi_values = np.einsum('iva,bvw,jwc->ijbac', dil.W.conj(), dil.rep_pi_Phi, dil.S)
    phi = NPositiveMatrixMap(dil.algebra, dil.source, phi_values)
    return phi, ModuleCPMatrix(dil.module, dil.source, dil.target, Phi_values, phi)
