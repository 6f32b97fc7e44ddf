""" The order structure on [phi]-completely positive matrices: equivalence,
domination, the commutant of a dilation, deformed maps and Radon-Nikodym
derivatives.

Domination is written PhiSub <= PhiSup and means
sum_r PhiSub_ri(x)* PhiSub_rj(x) <= sum_r PhiSup_ri(x)* PhiSup_rj(x) as
block matrices, for every module element x. """

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from cpdilate import definitions
from cpdilate.cpmatrix import ModuleCPMatrix, NPositiveMatrixMap, choi_min_eigenvalue, cp_check, form_table
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.ksgns import DilationData, build_dilation, dilation_pair, level_projections, minimality_check, \
    nondegeneracy_check
from cpdilate.linalg import CMatrix, Tolerances, _tol, dagger, herm_eig, lsq_define, max_abs, min_eigenvalue, \
    null_space, psd_sqrt
from cpdilate.utils import complex_to_json, derive_seeds

logger = logging.getLogger('cpdilate')


class Verdict(Enum):
    """ Outcome of a domination test. Sampling can only refute; only the
    Choi test of the scalar difference can certify. """

    CERTIFIED = "CERTIFIED"
    REFUTED = "REFUTED"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True, eq=False)
class CommutantElement(object):
    """ T (+) N with pi^Phi(x) T = N pi^Phi(x) and pi^Phi(x)* N = T pi^Phi(x)*. """

    T: CMatrix
    N: CMatrix

    def adjoint(self) -> 'CommutantElement':
        return CommutantElement(dagger(self.T), dagger(self.N))

    def __matmul__(self, other: 'CommutantElement') -> 'CommutantElement':
        return CommutantElement(self.T @ other.T, self.N @ other.N)

    def vec(self) -> np.ndarray:
        return np.concatenate([self.T.ravel(), self.N.ravel()])

    def get_json(self) -> dict:
        return {'T': complex_to_json(self.T), 'N': complex_to_json(self.N)}


@dataclass(frozen=True, eq=False)
class RNDerivative(object):
    """ The Radon-Nikodym derivative of Psi with respect to the dilation of
    Phi: R and Q are contractions from the Phi dilation onto the Psi
    dilation, Delta1 = R* R and Delta2 = Q* Q. Delta1 alone is the derivative
    of the scalar part psi with respect to phi. """

    R: CMatrix
    Q: CMatrix
    Delta1: CMatrix
    Delta2: CMatrix
    residuals: Dict[str, float] = field(default_factory=dict)
    psi_dilation: Optional[DilationData] = field(default=None, repr=False)

    @property
    def as_commutant(self) -> CommutantElement:
        return CommutantElement(self.Delta1, self.Delta2)

    def get_json(self) -> dict:
        return {'R': complex_to_json(self.R), 'Q': complex_to_json(self.Q),
                'Delta1': complex_to_json(self.Delta1), 'Delta2': complex_to_json(self.Delta2)}


def _check_pair_shapes(first: ModuleCPMatrix, second: ModuleCPMatrix) -> None:
    if not first.same_shape(second):
        raise InvalidInputError(ErrorCode.SHAPE_MISMATCH, f"Cannot compare {first!r} with {second!r}.")


def equivalence_residual(first: ModuleCPMatrix, second: ModuleCPMatrix) -> float:
    """ max over basis pairs (x, y) and i, j of the difference between
    sum_r Phi_ri(x)* Phi_rj(y) for the two matrices. """

    _check_pair_shapes(first, second)
    return max_abs(form_table(first) - form_table(second))


def equivalence_check(first: ModuleCPMatrix, second: ModuleCPMatrix, tol: Tolerances = None) -> bool:
    """ True iff <[Phi](x), [Phi](x)> = <[Psi](x), [Psi](x)> for every x. By
    polarization it is enough to compare the forms on basis pairs. """

    return equivalence_residual(first, second) <= _tol(tol).residual_tol


def _sampled_form(Phi: ModuleCPMatrix, x) -> CMatrix:
    """ The (n h x n h) block matrix with (i, j) block sum_r Phi_ri(x)* Phi_rj(x). """

    outputs = Phi.column_outputs(x)
    n, h = Phi.n, Phi.source.dim
    return np.einsum('rikp,rjkq->ipjq', outputs.conj(), outputs).reshape(n * h, n * h)


def domination_evidence(sub: ModuleCPMatrix, sup: ModuleCPMatrix, samples: int = None, tol: Tolerances = None,
                        seed: int = 0) -> Tuple[Verdict, Dict[str, float]]:
    """ The verdict of :py:func:`domination_check` together with the
    numbers it is based on: the smallest eigenvalue found by sampling and
    the smallest Choi eigenvalue of the scalar difference. """

    tol = _tol(tol)
    samples = definitions.DEFAULT_DOMINATION_SAMPLES if samples is None else samples
    _check_pair_shapes(sub, sup)
    rng = np.random.default_rng(seed)
    sampled_min = np.inf
    for _ in range(samples):
        x = sub.module.random_element(rng)
        sampled_min = min(sampled_min, min_eigenvalue(_sampled_form(sup, x) - _sampled_form(sub, x), tol))
        if sampled_min < -tol.psd_tol:
            logger.debug('Domination refuted by sampling: eigenvalue %.3e.', sampled_min)
            return Verdict.REFUTED, {'sampled_min_eigenvalue': float(sampled_min)}
    difference = sup.scalar_part - sub.scalar_part
    evidence = {'choi_min_eigenvalue': choi_min_eigenvalue(difference, tol)}
    if samples:
        evidence['sampled_min_eigenvalue'] = float(sampled_min)
    if cp_check(difference, tol):
        return Verdict.CERTIFIED, evidence
    return Verdict.UNDECIDED, evidence


def domination_check(sub: ModuleCPMatrix, sup: ModuleCPMatrix, samples: int = None, tol: Tolerances = None,
                     seed: int = 0) -> Verdict:
    """ Tests sub <= sup. REFUTED if a sampled x violates the inequality,
    CERTIFIED if the difference of the scalar parts is completely positive,
    UNDECIDED otherwise. """

    return domination_evidence(sub, sup, samples, tol, seed)[0]


def commutant_residual(dil: DilationData, T: CMatrix, N: CMatrix, tol: Tolerances = None) -> float:
    """ Largest residual of the commutant equations for T (+) N on the module
    basis, of T commuting with pi^phi(A), and of T, N commuting with the
    flag level projections of the dilation. """

    T = np.asarray(T, dtype=np.complex128)
    N = np.asarray(N, dtype=np.complex128)
    if T.shape != (dil.dim_h, dil.dim_h) or N.shape != (dil.dim_k, dil.dim_k):
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"T must be {dil.dim_h}x{dil.dim_h} and N must be {dil.dim_k}x{dil.dim_k}.")
    Pi, pi = dil.rep_pi_Phi, dil.rep_pi_phi
    Pi_adjoint = Pi.conj().transpose(0, 2, 1)
    residuals = [max_abs(Pi @ T - N @ Pi), max_abs(Pi_adjoint @ N - T @ Pi_adjoint), max_abs(T @ pi - pi @ T)]
    h_projections, k_projections = level_projections(dil, tol)
    residuals += [max_abs(T @ P - P @ T) for P in h_projections]
    residuals += [max_abs(N @ P - P @ N) for P in k_projections]
    return max(residuals)


def commutant_basis(dil: DilationData, tol: Tolerances = None) -> List[CommutantElement]:
    """ A Frobenius-orthonormal basis of the commutant, computed as the null
    space of the linear system satisfied by (vec T, vec N). """

    tol = _tol(tol)
    r, s = dil.dim_h, dil.dim_k
    if r + s == 0:
        return []
    eye_r, eye_s = np.eye(r), np.eye(s)
    rows = []
    # row-major vectorization: vec(A X B) = kron(A, B^T) vec(X)
    for Pi in dil.rep_pi_Phi:
        rows.append(np.hstack([np.kron(Pi, eye_r), -np.kron(eye_s, Pi.T)]))
        rows.append(np.hstack([-np.kron(eye_r, Pi.conj()), np.kron(dagger(Pi), eye_s)]))
    for pi in dil.rep_pi_phi:
        rows.append(np.hstack([np.kron(eye_r, pi.T) - np.kron(pi, eye_r), np.zeros((r * r, s * s))]))
    h_projections, k_projections = level_projections(dil, tol)
    for P in h_projections:
        rows.append(np.hstack([np.kron(eye_r, P.T) - np.kron(P, eye_r), np.zeros((r * r, s * s))]))
    for P in k_projections:
        rows.append(np.hstack([np.zeros((s * s, r * r)), np.kron(eye_s, P.T) - np.kron(P, eye_s)]))
    system = np.vstack(rows)
    solutions = null_space(system, tol)
    basis = [CommutantElement(column[:r * r].reshape(r, r), column[r * r:].reshape(s, s)) for column in solutions.T]

    closure = commutant_closure_residual(basis)
    if closure > tol.residual_tol:
        logger.warning('The commutant basis is not closed under products and adjoints (residual %.3e).', closure)
    logger.debug('Commutant of dimension %d found.', len(basis))
    return basis


def _expansion_residual(basis_matrix: CMatrix, element: CommutantElement) -> float:
    vector = element.vec()
    coefficients = dagger(basis_matrix) @ vector
    return max_abs(basis_matrix @ coefficients - vector)


def commutant_closure_residual(basis: List[CommutantElement]) -> float:
    """ How far products and adjoints of basis elements are from the span of
    the basis. """

    if not basis:
        return 0.0
    basis_matrix = np.array([element.vec() for element in basis]).T
    residual = max(_expansion_residual(basis_matrix, element.adjoint()) for element in basis)
    for first in basis:
        for second in basis:
            residual = max(residual, _expansion_residual(basis_matrix, first @ second))
    return residual


def t_determines_n_residual(basis: List[CommutantElement], tol: Tolerances = None) -> float:
    """ Largest N among commutant elements with T = 0, normalized by the
    coefficient vector. Zero when T determines N. """

    if not basis:
        return 0.0
    t_matrix = np.array([element.T.ravel() for element in basis]).T
    n_matrix = np.array([element.N.ravel() for element in basis]).T
    if t_matrix.shape[0] == 0:
        kernel = np.eye(len(basis), dtype=np.complex128)
    else:
        kernel = null_space(t_matrix, tol)
    if kernel.shape[1] == 0 or n_matrix.shape[0] == 0:
        return 0.0
    return max_abs(n_matrix @ kernel)


def random_commutant_element(basis: List[CommutantElement], rng: np.random.Generator,
                             tol: Tolerances = None) -> CommutantElement:
    """ A random commutant element with 0 <= T (+) N <= I: real coefficients
    in the basis, the Hermitian part, then the joint spectrum rescaled
    affinely onto [0, 1]. A degenerate spectrum gives a random scalar. """

    tol = _tol(tol)
    if not basis:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH, "The commutant basis is empty.")
    coefficients = rng.standard_normal(len(basis))
    T = sum(c * element.T for c, element in zip(coefficients, basis))
    N = sum(c * element.N for c, element in zip(coefficients, basis))
    T = (T + dagger(T)) / 2
    N = (N + dagger(N)) / 2
    spectrum = np.concatenate([herm_eig(T, tol)[0], herm_eig(N, tol)[0]])
    identity_t, identity_n = np.eye(T.shape[0]), np.eye(N.shape[0])
    low, high = (float(spectrum.min()), float(spectrum.max())) if spectrum.size else (0.0, 0.0)
    if high - low <= tol.rank_tol * max(1.0, abs(high)):
        scalar = rng.random()
        return CommutantElement(scalar * identity_t, scalar * identity_n)
    return CommutantElement((T - low * identity_t) / (high - low), (N - low * identity_n) / (high - low))


def _check_commutant(dil: DilationData, T: CMatrix, N: CMatrix, tol: Tolerances) -> None:
    residual = commutant_residual(dil, T, N, tol)
    if residual > tol.residual_tol:
        raise VerdictError(ErrorCode.NOT_IN_COMMUTANT,
                           f"T (+) N does not commute with the dilation (residual {residual:.3e}).",
                           {'commutant_residual': residual})


def _deformed(dil: DilationData, root_t: CMatrix, root_n: CMatrix, scalar_t: CMatrix) -> ModuleCPMatrix:
    """ Phi'_ij(x) = W_i* root_n pi^Phi(x) root_t S_j with scalar part
    phi'_ij(a) = S_i* scalar_t pi^phi(a) scalar_t S_j. """

    Phi_values = np.einsum('iva,vw,bwu,ux,jxc->ijbac', dil.W.conj(), root_n, dil.rep_pi_Phi, root_t, dil.S)
    phi_values = np.einsum('iva,vw,bwu,ux,jxc->ijbac', dil.S.conj(), scalar_t, dil.rep_pi_phi, scalar_t, dil.S)
    phi = NPositiveMatrixMap(dil.algebra, dil.source, phi_values)
    return ModuleCPMatrix(dil.module, dil.source, dil.target, Phi_values, phi)


def deform(dil: DilationData, T: CMatrix, N: CMatrix, tol: Tolerances = None) -> ModuleCPMatrix:
    """ [Phi^{T (+) N}]: Phi_ij(x) = W_i* sqrt(N) pi^Phi(x) sqrt(T) S_j, whose
    scalar part is S_i* T pi^phi(a) T S_j = S_i* T^2 pi^phi(a) S_j. T (+) N
    must be a positive element of the commutant. """

    tol = _tol(tol)
    _check_commutant(dil, T, N, tol)
    T = np.asarray(T, dtype=np.complex128)
    return _deformed(dil, psd_sqrt(T, tol), psd_sqrt(N, tol), T)


def order_inverse(dil: DilationData, T: CMatrix, N: CMatrix, tol: Tolerances = None) -> ModuleCPMatrix:
    """ The inverse of the Radon-Nikodym map: deform(sqrt(T), sqrt(N)). Its
    scalar part is S_i* T pi^phi(a) S_j and its derivative is T (+) N. """

    tol = _tol(tol)
    _check_commutant(dil, T, N, tol)
    root_t, root_n = psd_sqrt(T, tol), psd_sqrt(N, tol)
    return _deformed(dil, psd_sqrt(root_t, tol), psd_sqrt(root_n, tol), root_t)


def rn_derivative(dil: DilationData, Psi: ModuleCPMatrix, tol: Tolerances = None, samples: int = None,
                  seed: int = 0) -> RNDerivative:
    """ The Radon-Nikodym derivative of Psi with respect to the pair
    dilated by `dil`. Psi must be certified as dominated by that pair. """

    tol = _tol(tol)
    phi, Phi = dilation_pair(dil)
    verdict, evidence = domination_evidence(Psi, Phi, samples, tol, seed)
    if verdict is not Verdict.CERTIFIED:
        raise VerdictError(ErrorCode.NOT_DOMINATED,
                           f"Psi is not certified as dominated (verdict {verdict.value}).",
                           dict(evidence, verdict=verdict.value))

    psi_dil = build_dilation(Psi.scalar_part, Psi, tol)
    R, r_welldef = lsq_define(dil.h_generators(), psi_dil.h_generators(), tol) if dil.dim_h else \
        (np.zeros((psi_dil.dim_h, 0), dtype=np.complex128), 0.0)
    Q, q_welldef = lsq_define(dil.k_generators(), psi_dil.k_generators(), tol) if dil.dim_k else \
        (np.zeros((psi_dil.dim_k, 0), dtype=np.complex128), 0.0)
    scale = max(1.0, max_abs(phi.values))
    if max(r_welldef, q_welldef) > tol.residual_tol * scale:
        raise VerdictError(ErrorCode.NOT_WELL_DEFINED,
                           f"R or Q is not well defined (residuals {r_welldef:.3e}, {q_welldef:.3e}).",
                           {'R_welldef': r_welldef, 'Q_welldef': q_welldef})
    delta1, delta2 = dagger(R) @ R, dagger(Q) @ Q
    residuals = rn_residuals(dil, Psi, delta1, delta2, tol)
    residuals.update({'R_welldef': r_welldef, 'Q_welldef': q_welldef})

    spectrum = np.concatenate([herm_eig(delta1, tol)[0], herm_eig(delta2, tol)[0]])
    if spectrum.size and (spectrum.min() < -tol.psd_tol or spectrum.max() > 1 + tol.psd_tol):
        raise VerdictError(ErrorCode.NOT_DOMINATED,
                           f"The derivative has spectrum [{spectrum.min():.3e}, {spectrum.max():.3e}], outside "
                           f"[0, 1].", residuals)
    return RNDerivative(R=R, Q=Q, Delta1=delta1, Delta2=delta2, residuals=residuals, psi_dilation=psi_dil)


def rn_residuals(dil: DilationData, Psi: ModuleCPMatrix, delta1: CMatrix, delta2: CMatrix,
                 tol: Tolerances = None) -> Dict[str, float]:
    """ The checks a derivative must pass, computed from the operators only:
    commutant membership, the spectrum bounds, the scalar identity
    psi_ij(a) = S_i* Delta1 pi^phi(a) S_j and equivalence of Psi with
    order_inverse(Delta1, Delta2). """

    tol = _tol(tol)
    spectrum = np.concatenate([herm_eig(delta1, tol)[0], herm_eig(delta2, tol)[0]])
    scalar = np.einsum('iva,vw,bwu,juc->ijbac', dil.S.conj(), delta1, dil.rep_pi_phi, dil.S)
    residuals = {'commutant': commutant_residual(dil, delta1, delta2, tol),
                 'spectrum_min': float(spectrum.min()) if spectrum.size else 0.0,
                 'spectrum_max': float(spectrum.max()) if spectrum.size else 0.0,
                 'scalar_derivative': max_abs(scalar - Psi.scalar_part.values)}
    roundtrip = _deformed(dil, psd_sqrt(psd_sqrt(delta1, tol), tol), psd_sqrt(psd_sqrt(delta2, tol), tol),
                          psd_sqrt(delta1, tol))
    residuals['roundtrip_equivalence'] = equivalence_residual(roundtrip, Psi)
    return residuals


@dataclass(frozen=True)
class RoundtripReport(object):
    """ Largest residuals over all trials of :py:func:`order_iso_roundtrip`. """

    trials: int
    commutant_dim: int
    max_delta1_residual: float
    max_delta2_residual: float
    max_commutant_residual: float
    max_roundtrip_residual: float
    spectrum_min: float
    spectrum_max: float
    monotone_certified: int
    monotone_undecided: int
    monotone_refuted: int

    def get_json(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def _roundtrip_trial(dil: DilationData, basis: List[CommutantElement], seed: int, tol: Tolerances,
                     samples: int) -> Dict[str, float]:
    rng = np.random.default_rng(seed)
    element = random_commutant_element(basis, rng, tol)
    Psi = order_inverse(dil, element.T, element.N, tol)
    derivative = rn_derivative(dil, Psi, tol, samples=samples, seed=seed)

    # a sampled pair lower <= upper inside [0, I]
    first = random_commutant_element(basis, rng, tol)
    second = random_commutant_element(basis, rng, tol)
    lower = CommutantElement(first.T / 2, first.N / 2)
    upper = CommutantElement((first.T + second.T) / 2, (first.N + second.N) / 2)
    verdict = domination_check(order_inverse(dil, lower.T, lower.N, tol), order_inverse(dil, upper.T, upper.N, tol),
                               samples, tol, seed)
    return {'delta1': max_abs(derivative.Delta1 - element.T),
            'delta2': max_abs(derivative.Delta2 - element.N),
            'commutant': derivative.residuals['commutant'],
            'roundtrip': derivative.residuals['roundtrip_equivalence'],
            'spectrum_min': derivative.residuals['spectrum_min'],
            'spectrum_max': derivative.residuals['spectrum_max'],
            'verdict': verdict}


def order_iso_roundtrip(dil: DilationData, trials: int = None, seed: int = 0, tol: Tolerances = None,
                        workers: int = None, samples: int = None) -> RoundtripReport:
    """ Checks on random commutant elements 0 <= T (+) N <= I that the
    Radon-Nikodym derivative of order_inverse(T, N) is T (+) N again, and
    that order_inverse preserves order on sampled pairs. Trials use seeds
    derived from `seed`, so the report does not depend on `workers`. """

    tol = _tol(tol)
    trials = definitions.DEFAULT_ROUNDTRIP_TRIALS if trials is None else trials
    if not minimality_check(dil, tol):
        raise VerdictError(ErrorCode.NOT_MINIMAL, "The dilation is not minimal.")
    if not nondegeneracy_check(dil, tol):
        raise VerdictError(ErrorCode.NOT_NONDEGENERATE, "pi^Phi(M) H^Phi does not span K^Phi.")
    basis = commutant_basis(dil, tol)
    seeds = derive_seeds(seed, trials)

    def run(trial_seed: int) -> Dict[str, float]:
        return _roundtrip_trial(dil, basis, trial_seed, tol, samples)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, seeds))
    else:
        results = [run(trial_seed) for trial_seed in seeds]

    def largest(name: str) -> float:
        return max((result[name] for result in results), default=0.0)

    verdicts = [result['verdict'] for result in results]
    report = RoundtripReport(trials=trials, commutant_dim=len(basis),
                             max_delta1_residual=largest('delta1'), max_delta2_residual=largest('delta2'),
                             max_commutant_residual=largest('commutant'), max_roundtrip_residual=largest('roundtrip'),
                             spectrum_min=min((result['spectrum_min'] for result in results), default=0.0),
                             spectrum_max=largest('spectrum_max'),
                             monotone_certified=verdicts.count(Verdict.CERTIFIED),
                             monotone_undecided=verdicts.count(Verdict.UNDECIDED),
                             monotone_refuted=verdicts.count(Verdict.REFUTED))
    if report.monotone_refuted:
        logger.warning('%d of %d sampled ordered pairs were refuted.', report.monotone_refuted, trials)
    return report
