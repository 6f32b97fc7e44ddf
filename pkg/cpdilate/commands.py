""" The batch commands. Every command is split in two: a runner that does
the constructions and serializes the operators it built, and a table that
computes residuals and verdicts from the instance and those serialized
operators only. Runs and :py:func:`verify` share the tables, so a
certificate re-checks to the same numbers. """

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from cpdilate import definitions
from cpdilate.algebra import CStarAlgebra
from cpdilate.certificate import Certificate, _clean_residual
from cpdilate.cpmatrix import choi_min_eigenvalue, cp_check, random_cp_pair, rotated, scaled
from cpdilate.exceptions import ErrorCode, InvalidInputError, SchemaError, VerdictError
from cpdilate.hilbert import FlagSpace, HilbertModule
from cpdilate.instance import Instance
from cpdilate.ksgns import DilationData, build_dilation, equivalence_residuals, minimality_check, \
    nondegeneracy_check, random_unitary, reconstruction_residual, representation_residuals, unitary_equivalence
from cpdilate.linalg import CMatrix, Tolerances, dagger, max_abs
from cpdilate.radon_nikodym import CommutantElement, commutant_basis, commutant_closure_residual, \
    commutant_residual, domination_evidence, equivalence_residual, order_iso_roundtrip, rn_derivative, \
    rn_residuals, t_determines_n_residual
from cpdilate.utils import complex_from_json, complex_to_json, derive_seeds

logger = logging.getLogger('cpdilate')

Table = Tuple[Dict[str, float], Dict[str, object]]


@dataclass(frozen=True)
class RunOptions(object):
    """ Command parameters that do not live in the instance. None means
    "use the instance value, then the default". """

    seed: Optional[int] = None
    samples: Optional[int] = None
    trials: Optional[int] = None
    workers: Optional[int] = None


def resolve_tolerances(instance: Optional[Instance], rank_tol: float = None, psd_tol: float = None,
                       residual_tol: float = None, environ: Mapping[str, str] = None) -> Tolerances:
    """ Command-line values win over the CPDILATE_TOL_RES environment
    variable (residual tolerance only), which wins over the instance's
    tolerances block, which wins over the defaults. """

    environ = os.environ if environ is None else environ
    tol = instance.tolerances if instance is not None and instance.tolerances is not None else Tolerances()
    from_env = environ.get(definitions.TOLERANCE_ENV_VAR)
    if from_env:
        try:
            tol = tol.replace(residual_tol=float(from_env))
        except ValueError:
            raise InvalidInputError(ErrorCode.INVALID_TOLERANCE,
                                    f"{definitions.TOLERANCE_ENV_VAR}={from_env!r} is not a number.") from None
    return tol.replace(rank_tol=rank_tol, psd_tol=psd_tol, residual_tol=residual_tol)


def parse_algebra(description: str, chain: str = None) -> CStarAlgebra:
    """ Parses 'M2' or 'M1+M2' into an algebra. `chain` lists the levels
    of the seminorm chain separated by '/', each a comma separated list of
    0-based block indices, e.g. '0/0,1'. """

    try:
        block_dims = tuple(int(part.strip().upper().lstrip('M')) for part in description.split('+'))
        levels = None
        if chain:
            levels = tuple(tuple(int(b) for b in level.split(',') if b.strip()) for level in chain.split('/'))
    except ValueError:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"Cannot read the algebra '{description}' with chain '{chain}'. Use e.g. "
                                f"'M1+M2' and '0/0,1'.") from None
    return CStarAlgebra(block_dims, levels)


def default_flags(algebra: CStarAlgebra, module: HilbertModule, n: int,
                  multiplicity: int) -> Tuple[FlagSpace, FlagSpace]:
    """ Flags that random_cp_pair accepts: H grows by the dimensions of the
    blocks each level adds, and K is just large enough on every level to
    carry `multiplicity` copies of the module representation. """

    h_dims, k_dims = [], []
    h_total = k_total = 0
    seen: set = set()
    for level in algebra.chain:
        new_blocks = [b for b in level if b not in seen]
        seen.update(level)
        delta_h = sum(algebra.block_dims[b] for b in new_blocks)
        if delta_h:
            k_total += math.ceil(multiplicity * sum(module.rows[b] for b in level) / n)
        h_total += delta_h
        h_dims.append(h_total)
        k_dims.append(k_total)
    return FlagSpace(tuple(h_dims)), FlagSpace(tuple(k_dims))


def _flag_unitary(space: FlagSpace, rng: np.random.Generator) -> CMatrix:
    """ A random unitary on the space that is block diagonal with respect
    to the flag differences, and so flag compatible. """

    unitary = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for start, stop in space.differences():
        unitary[start:stop, start:stop] = random_unitary(stop - start, rng)
    return unitary


def generate_instance(algebra: CStarAlgebra, module: HilbertModule, n: int, multiplicity: int, seed: int,
                      source: FlagSpace = None, target: FlagSpace = None, second: str = None) -> Instance:
    """ A seeded random instance in dilation form. `second` optionally adds
    a comparison pair: 'rotated' (a flag-compatible unitary applied on K,
    an equivalent pair), 'scaled' (2 [Phi], not equivalent) or 'half'
    ([Phi] / sqrt 2, which is order_inverse(I/2, I/2) and is dominated). """

    if source is None or target is None:
        default_source, default_target = default_flags(algebra, module, n, multiplicity)
        source = source or default_source
        target = target or default_target
    pair_seed, second_seed = derive_seeds(seed, 2)
    phi, Phi, _ = random_cp_pair(algebra, module, source, target, n, multiplicity * algebra.rep_dim, pair_seed)
    second_Phi = None
    if second == 'rotated':
        second_Phi = rotated(Phi, _flag_unitary(target, np.random.default_rng(second_seed)))
    elif second == 'scaled':
        second_Phi = scaled(Phi, 2)
    elif second == 'half':
        second_Phi = scaled(Phi, 1 / np.sqrt(2))
    elif second is not None:
        raise InvalidInputError(ErrorCode.DIMENSION_MISMATCH,
                                f"Unknown second pair '{second}'. Choose rotated, scaled or half.")
    return Instance(algebra, module, source, target, phi, Phi,
                    None if second_Phi is None else second_Phi.scalar_part, second_Phi, seed=seed)


def _dilation(instance: Instance, operators: dict, key: str) -> DilationData:
    if key not in operators:
        raise SchemaError(f"The certificate has no operator '{key}'.", f"$.operators.{key}")
    return DilationData.from_json(operators[key], instance.algebra, instance.module, instance.source,
                                  instance.target, instance.n, path=f"$.operators.{key}")


def _operator(operators: dict, key: str, shape: Sequence[int]) -> CMatrix:
    if key not in operators:
        raise SchemaError(f"The certificate has no operator '{key}'.", f"$.operators.{key}")
    return complex_from_json(operators[key], f"$.operators.{key}", tuple(shape))


def _intertwining(operator: CMatrix, source_generators: Callable, target_generators: Callable,
                  source_dim: int, target_dim: int) -> float:
    if source_dim == 0 or target_dim == 0:
        return 0.0
    return max_abs(operator @ source_generators() - target_generators())


def _check_cp_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    phi = instance.phi
    residuals = {'hermiticity': phi.hermiticity_residual(), 'flag': phi.flag_residual()}
    positive = cp_check(phi, tol)
    try:
        residuals['choi_min_eigenvalue'] = choi_min_eigenvalue(phi, tol)
    except VerdictError:
        residuals['choi_min_eigenvalue'] = None
    return residuals, {'cp': 'CP' if positive else 'NOT_CP'}


def _dilate_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    dil = _dilation(instance, operators, 'dilation')
    res1, res2 = reconstruction_residual(dil, instance.phi, instance.require_pair())
    residuals = {'res1': res1, 'res2': res2}
    residuals.update(representation_residuals(dil))
    verdicts = {'minimal': minimality_check(dil, tol),
                'nondegenerate': nondegeneracy_check(dil, tol),
                'reconstructs': max(res1, res2) <= tol.residual_tol}
    return residuals, verdicts


def _equiv_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    first = _dilation(instance, operators, 'first')
    second = _dilation(instance, operators, 'second')
    form_difference = equivalence_residual(instance.require_pair(), instance.require_pair(second=True))
    residuals = {'form_difference': form_difference}
    witnessed = 'U1' in operators
    if witnessed:
        U1 = _operator(operators, 'U1', (second.dim_h, first.dim_h))
        U2 = _operator(operators, 'U2', (second.dim_k, first.dim_k))
        residuals.update(equivalence_residuals(first, second, U1, U2))
    return residuals, {'equivalence_check': form_difference <= tol.residual_tol, 'unitary_equivalence': witnessed}


def _dominate_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    verdict, evidence = domination_evidence(instance.require_pair(second=True), instance.require_pair(),
                                            details['samples'], tol, details['seed'])
    return evidence, {'domination': verdict.value}


def _commutant_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    dil = _dilation(instance, operators, 'dilation')
    basis = []
    for position, element in enumerate(operators.get('commutant', [])):
        path = f"$.operators.commutant[{position}]"
        basis.append(CommutantElement(complex_from_json(element['T'], f"{path}.T", (dil.dim_h, dil.dim_h)),
                                      complex_from_json(element['N'], f"{path}.N", (dil.dim_k, dil.dim_k))))
    gram = np.array([[np.vdot(a.vec(), b.vec()) for b in basis] for a in basis], dtype=np.complex128)
    closure = commutant_closure_residual(basis)
    residuals = {'commutant': max((commutant_residual(dil, e.T, e.N, tol) for e in basis), default=0.0),
                 'closure': closure,
                 't_determines_n': t_determines_n_residual(basis, tol),
                 'orthonormality': max_abs(gram - np.eye(len(basis)))}
    verdicts = {'dimension': len(basis),
                'nondegenerate': nondegeneracy_check(dil, tol),
                'closed': closure <= tol.residual_tol}
    return residuals, verdicts


_RN_SPECTRUM = ('spectrum_min', 'spectrum_max')


def _rn_table(instance: Instance, operators: dict, details: dict, tol: Tolerances, **_) -> Table:
    dil = _dilation(instance, operators, 'dilation')
    psi_dil = _dilation(instance, operators, 'psi_dilation')
    R = _operator(operators, 'R', (psi_dil.dim_h, dil.dim_h))
    Q = _operator(operators, 'Q', (psi_dil.dim_k, dil.dim_k))
    delta1 = _operator(operators, 'Delta1', (dil.dim_h, dil.dim_h))
    delta2 = _operator(operators, 'Delta2', (dil.dim_k, dil.dim_k))
    residuals = rn_residuals(dil, instance.require_pair(second=True), delta1, delta2, tol)
    residuals.update({'R_intertwining': _intertwining(R, dil.h_generators, psi_dil.h_generators,
                                                      dil.dim_h, psi_dil.dim_h),
                      'Q_intertwining': _intertwining(Q, dil.k_generators, psi_dil.k_generators,
                                                      dil.dim_k, psi_dil.dim_k),
                      'Delta1_factor': max_abs(dagger(R) @ R - delta1),
                      'Delta2_factor': max_abs(dagger(Q) @ Q - delta2)})
    contraction = residuals['spectrum_min'] >= -tol.psd_tol and residuals['spectrum_max'] <= 1 + tol.psd_tol
    derivative = max(value for key, value in residuals.items() if key not in _RN_SPECTRUM) <= tol.residual_tol
    return residuals, {'derivative': derivative, 'contraction': contraction}


def _roundtrip_table(instance: Instance, operators: dict, details: dict, tol: Tolerances,
                     workers: int = None) -> Table:
    dil = _dilation(instance, operators, 'dilation')
    report = order_iso_roundtrip(dil, details['trials'], details['seed'], tol, workers, details['samples'])
    residuals = {key: value for key, value in report.get_json().items() if isinstance(value, float)}
    passed = max(report.max_delta1_residual, report.max_delta2_residual) <= tol.residual_tol
    verdicts = {'commutant_dim': report.commutant_dim,
                'monotone_certified': report.monotone_certified,
                'monotone_undecided': report.monotone_undecided,
                'monotone_refuted': report.monotone_refuted,
                'roundtrip': passed}
    return residuals, verdicts


def _dilation_operators(dil: DilationData) -> dict:
    return dil.get_json()


def _run_check_cp(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    instance.phi.validate(tol)
    return {}


def _run_dilate(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    dil = build_dilation(instance.phi, instance.require_pair(), tol)
    details.update({'dim_h': dil.dim_h, 'dim_k': dil.dim_k})
    return {'dilation': _dilation_operators(dil),
            'component_bases': [complex_to_json(basis) for basis in dil.component_bases]}


def _run_equiv(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    first = build_dilation(instance.phi, instance.require_pair(), tol)
    second = build_dilation(instance.second_phi, instance.require_pair(second=True), tol)
    operators = {'first': _dilation_operators(first), 'second': _dilation_operators(second)}
    try:
        witness = unitary_equivalence(first, second, tol, match_outputs=False)
        operators.update({'U1': complex_to_json(witness.U1), 'U2': complex_to_json(witness.U2)})
    except VerdictError as err:
        if err.code not in (ErrorCode.NOT_EQUIVALENT, ErrorCode.NOT_MINIMAL):
            raise
        details['unitary_equivalence_failure'] = err.code
    return operators


def _run_dominate(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    instance.require_pair(second=True)
    return {}


def _run_commutant(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    dil = build_dilation(instance.phi, instance.require_pair(), tol)
    basis = commutant_basis(dil, tol)
    return {'dilation': _dilation_operators(dil), 'commutant': [element.get_json() for element in basis]}


def _run_rn(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    dil = build_dilation(instance.phi, instance.require_pair(), tol)
    derivative = rn_derivative(dil, instance.require_pair(second=True), tol, details['samples'], details['seed'])
    operators = {'dilation': _dilation_operators(dil), 'psi_dilation': _dilation_operators(derivative.psi_dilation)}
    operators.update(derivative.get_json())
    return operators


def _run_roundtrip(instance: Instance, tol: Tolerances, options: RunOptions, details: dict) -> dict:
    dil = build_dilation(instance.phi, instance.require_pair(), tol)
    return {'dilation': _dilation_operators(dil)}


# command -> (runner, table, status check on the verdicts)
_COMMANDS: Dict[str, Tuple[Callable, Callable, Callable[[dict], bool]]] = {
    'check-cp': (_run_check_cp, _check_cp_table, lambda v: v['cp'] == 'CP'),
    'dilate': (_run_dilate, _dilate_table, lambda v: v['minimal'] and v['reconstructs']),
    'equiv': (_run_equiv, _equiv_table, lambda v: v['equivalence_check'] and v['unitary_equivalence']),
    'dominate': (_run_dominate, _dominate_table, lambda v: v['domination'] == 'CERTIFIED'),
    'commutant': (_run_commutant, _commutant_table, lambda v: v['closed']),
    'rn': (_run_rn, _rn_table, lambda v: v['derivative'] and v['contraction']),
    'iso-roundtrip': (_run_roundtrip, _roundtrip_table, lambda v: v['roundtrip'] and not v['monotone_refuted']),
}


def _run_details(command: str, instance: Instance, tol: Tolerances, options: RunOptions) -> dict:
    details = {'tolerances': tol.get_json(), 'n': instance.n}
    seed = options.seed if options.seed is not None else (instance.seed if instance.seed is not None else 0)
    if command in ('dominate', 'rn', 'iso-roundtrip'):
        details['seed'] = seed
        details['samples'] = definitions.DEFAULT_DOMINATION_SAMPLES if options.samples is None else options.samples
    if command == 'iso-roundtrip':
        details['trials'] = definitions.DEFAULT_ROUNDTRIP_TRIALS if options.trials is None else options.trials
    return details


def run_command(command: str, instance: Instance, tol: Tolerances = None,
                options: RunOptions = None) -> Certificate:
    """ Runs one command on an instance and returns its certificate.

    Mathematical failures (a map that is not CP, pairs that are not
    equivalent, Psi not dominated, ...) give a certificate with status 1.
    Malformed input raises InvalidInputError. """

    if command not in _COMMANDS:
        raise InvalidInputError(ErrorCode.SCHEMA_ERROR,
                                f"Unknown command '{command}'. Choose from {sorted(_COMMANDS)}.")
    tol = resolve_tolerances(instance) if tol is None else tol
    options = options or RunOptions()
    runner, table, succeeded = _COMMANDS[command]
    details = _run_details(command, instance, tol, options)
    started = time.perf_counter()

    try:
        operators = runner(instance, tol, options, details)
        residuals, verdicts = table(instance, operators, details, tol, workers=options.workers)
        status = 0 if succeeded(verdicts) else 1
    except VerdictError as err:
        logger.info('%s failed with %s: %s', command, err.code, err.message)
        operators = {}
        residuals = {key: value for key, value in err.details.items()
                     if isinstance(value, (float, int)) and not isinstance(value, bool)}
        verdicts = {'error': err.code}
        status = 1

    duration = time.perf_counter() - started
    logger.debug('%s finished with status %d in %.3f s.', command, status, duration)
    return Certificate(command, instance.get_json(serialize=False), instance.hash(), operators, residuals, verdicts,
                       details, status, duration)


def _differs(recorded, recomputed) -> bool:
    if recorded is None or recomputed is None:
        return recorded is not recomputed
    return abs(recorded - recomputed) > definitions.VERIFY_TOL * max(1.0, abs(recorded))


def verify(cert: Certificate) -> Dict[str, Tuple[object, object]]:
    """ Recomputes the residuals and verdicts of a certificate from the
    embedded instance and operators and returns every entry that does not
    match as name -> (recorded, recomputed). An empty result means the
    certificate checks out.

    Failure certificates carry no operators; for those the command is run
    again from the embedded instance. """

    instance = Instance.from_json(cert.instance)
    mismatches: Dict[str, Tuple[object, object]] = {}
    if instance.hash() != cert.instance_hash:
        mismatches['instance_hash'] = (cert.instance_hash, instance.hash())
    if 'tolerances' not in cert.details:
        raise SchemaError("The certificate does not record its tolerances.", "$.details.tolerances")
    tol = Tolerances(**cert.details['tolerances'])

    if 'error' in cert.verdicts:
        options = RunOptions(seed=cert.details.get('seed'), samples=cert.details.get('samples'),
                             trials=cert.details.get('trials'))
        fresh = run_command(cert.command, instance, tol, options)
        residuals, verdicts = fresh.residuals, fresh.verdicts
    else:
        residuals, verdicts = _COMMANDS[cert.command][1](instance, cert.operators, cert.details, tol)
        residuals = {key: _clean_residual(value) for key, value in residuals.items()}

    for key in sorted(set(cert.residuals) | set(residuals)):
        recorded, recomputed = cert.residuals.get(key), residuals.get(key)
        if key not in residuals or key not in cert.residuals or _differs(recorded, recomputed):
            mismatches[f"residuals.{key}"] = (recorded, recomputed)
    for key in sorted(set(cert.verdicts) | set(verdicts)):
        if cert.verdicts.get(key) != verdicts.get(key):
            mismatches[f"verdicts.{key}"] = (cert.verdicts.get(key), verdicts.get(key))
    if mismatches:
        logger.warning('The %s certificate does not verify: %s', cert.command, ', '.join(sorted(mismatches)))
    return mismatches


def run_batch(command: str, paths: List[str], tol_overrides: dict, options: RunOptions,
              workers: int = None) -> List[Tuple[str, Certificate]]:
    """ Runs a command on every instance file. The result is in the order of
    `paths` whatever the number of workers. Instances that fail to parse or
    do not fit the command raise. """

    def one(path: str) -> Tuple[str, Certificate]:
        instance = Instance.from_file(path)
        return path, run_command(command, instance, resolve_tolerances(instance, **tol_overrides), options)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(one, paths))
    return [one(path) for path in paths]
