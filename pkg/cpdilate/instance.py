import hashlib
import json
import logging
from typing import Any, Callable, IO, List, Optional, Union

from cpdilate import definitions
from cpdilate._internal import _interpret_file, canonical_json, write_to_file
from cpdilate.algebra import CStarAlgebra
from cpdilate.cpmatrix import ModuleCPMatrix, NPositiveMatrixMap
from cpdilate.exceptions import DilationError, ErrorCode, SchemaError
from cpdilate.hilbert import FlagSpace, HilbertModule
from cpdilate.linalg import Tolerances
from cpdilate.utils import complex_from_json

logger = logging.getLogger('cpdilate')


class _Collector(object):
    """ Gathers schema problems so that one parse reports all of them. """

    def __init__(self):
        self.errors: List[SchemaError] = []

    def add(self, message: str, path: str, code: str = ErrorCode.SCHEMA_ERROR) -> None:
        self.errors.append(SchemaError(message, path, code=code))

    def attempt(self, function: Callable, path: str) -> Any:
        """ Calls function() and records any cpdilate error at `path`. """

        try:
            return function()
        except SchemaError as err:
            self.errors.extend(err.errors or [err])
        except DilationError as err:
            self.add(err.message, path)
        except (TypeError, ValueError) as err:
            self.add(f"Malformed value: {err}.", path)
        return None

    def raise_if_any(self) -> None:
        if len(self.errors) == 1:
            raise self.errors[0]
        if self.errors:
            raise SchemaError(f"The instance has {len(self.errors)} problems.", "$", self.errors)


def _require(data: dict, key: str, expected: type, path: str, collector: _Collector, optional: bool = False):
    if key not in data:
        if not optional:
            collector.add(f"Missing required field '{key}'.", f"{path}.{key}")
        return None
    value = data[key]
    if expected is int and isinstance(value, bool) or not isinstance(value, expected):
        collector.add(f"Field '{key}' must be of type {getattr(expected, '__name__', expected)}.", f"{path}.{key}")
        return None
    return value


class Instance(object):
    """ A problem instance: an algebra with its seminorm chain, a Hilbert
    module, the flags of H and K, a completely n-positive matrix [phi] and
    optionally a [phi]-completely positive matrix [Phi]. A second pair can be
    supplied for the comparison commands (equiv, dominate, rn). """

    def __init__(self, algebra: CStarAlgebra, module: HilbertModule, source: FlagSpace, target: FlagSpace,
                 phi: NPositiveMatrixMap, Phi: Optional[ModuleCPMatrix] = None,
                 second_phi: Optional[NPositiveMatrixMap] = None, second_Phi: Optional[ModuleCPMatrix] = None,
                 tolerances: Optional[Tolerances] = None, seed: Optional[int] = None):
        self.algebra = algebra
        self.module = module
        self.source = source
        self.target = target
        self.phi = phi
        self.Phi = Phi
        self.second_phi = second_phi
        self.second_Phi = second_Phi
        self.tolerances = tolerances
        self.seed = seed
        self.source_name: str = "unknown"

    def __repr__(self) -> str:
        return f"<cpdilate.Instance n={self.n} over {self.algebra!r} from {self.source_name}>"

    def __str__(self) -> str:
        return self.format()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return False
        return self.format() == other.format()

    @property
    def n(self) -> int:
        return self.phi.n

    @classmethod
    def from_file(cls, the_file: Union[str, IO]) -> 'Instance':
        """ Loads an instance from a path, URL, open file, or a gzipped
        version of any of those. """

        instance = cls.from_string(_interpret_file(the_file).read())
        instance.source_name = the_file if isinstance(the_file, str) else f"from_file({the_file!r})"
        return instance

    @classmethod
    def from_string(cls, the_string: str) -> 'Instance':
        """ Parses an instance from a JSON string. """

        try:
            data = json.loads(the_string)
        except ValueError as err:
            raise SchemaError(f"The instance is not valid JSON: {err}.", "$") from None
        instance = cls.from_json(data)
        instance.source_name = "from_string()"
        return instance

    @classmethod
    def from_json(cls, json_dict: Union[dict, str]) -> 'Instance':
        """ Creates an instance from JSON (serialized or unserialized). Every
        schema problem found is reported with its field path; if there are
        several they are listed in the `errors` attribute of the raised
        SchemaError. """

        if isinstance(json_dict, str):
            return cls.from_string(json_dict)
        if not isinstance(json_dict, dict):
            raise SchemaError("The instance must be a JSON object.", "$")

        version = json_dict.get('version')
        if version not in definitions.SUPPORTED_VERSIONS:
            raise SchemaError(f"Unsupported instance version {version!r}. Supported: "
                              f"{definitions.SUPPORTED_VERSIONS}.", "$.version", code=ErrorCode.VERSION_UNSUPPORTED)

        collector = _Collector()
        algebra = module = source = target = tolerances = None

        algebra_data = _require(json_dict, 'algebra', dict, "$", collector)
        if algebra_data is not None:
            block_dims = _require(algebra_data, 'block_dims', list, "$.algebra", collector)
            chain = _require(algebra_data, 'chain', list, "$.algebra", collector, optional=True)
            if block_dims is not None:
                algebra = collector.attempt(
                    lambda: CStarAlgebra(tuple(block_dims), None if chain is None else
                                         tuple(tuple(level) for level in chain)), "$.algebra")

        module_data = _require(json_dict, 'module', dict, "$", collector)
        if module_data is not None and algebra is not None:
            kind = _require(module_data, 'kind', str, "$.module", collector)
            multiplicity = _require(module_data, 'multiplicity', int, "$.module", collector, optional=True)
            rows = _require(module_data, 'rows', list, "$.module", collector, optional=True)
            if kind is not None:
                module = collector.attempt(
                    lambda: HilbertModule(algebra, kind, 1 if multiplicity is None else multiplicity,
                                          None if rows is None else tuple(rows)), "$.module")

        for key in ('H', 'K'):
            dims = _require(json_dict, key, list, "$", collector)
            if dims is not None:
                space = collector.attempt(lambda: FlagSpace(tuple(dims)), f"$.{key}")
                if key == 'H':
                    source = space
                else:
                    target = space

        n = _require(json_dict, 'n', int, "$", collector)
        if n is not None and n < 1:
            collector.add(f"n must be positive, got {n}.", "$.n")
            n = None

        tolerance_data = _require(json_dict, 'tolerances', dict, "$", collector, optional=True)
        if tolerance_data is not None:
            unknown = set(tolerance_data) - {'rank_tol', 'psd_tol', 'residual_tol'}
            for key in sorted(unknown):
                collector.add(f"Unknown tolerance '{key}'.", f"$.tolerances.{key}")
            if not unknown:
                tolerances = collector.attempt(lambda: Tolerances().replace(**tolerance_data), "$.tolerances")
        seed = _require(json_dict, 'seed', int, "$", collector, optional=True)

        # The maps can only be checked once the shapes they live on are known
        collector.raise_if_any()
        if None in (algebra, module, source, target, n):
            raise SchemaError("The instance could not be interpreted.", "$")

        def read_pair(data: dict, path: str, phi_required: bool):
            phi = Phi = None
            phi_values = _require(data, 'phi', list, path, collector, optional=not phi_required)
            if phi_values is not None:
                phi = collector.attempt(lambda: NPositiveMatrixMap(
                    algebra, source, complex_from_json(phi_values, f"{path}.phi",
                                                       (n, n, algebra.dim, source.dim, source.dim))), f"{path}.phi")
            Phi_values = _require(data, 'Phi', list, path, collector, optional=True)
            if Phi_values is not None and phi is not None:
                Phi = collector.attempt(lambda: ModuleCPMatrix(
                    module, source, target, complex_from_json(Phi_values, f"{path}.Phi",
                                                              (n, n, module.dim, target.dim, source.dim)),
                    phi), f"{path}.Phi")
            return phi, Phi

        phi, Phi = read_pair(json_dict, "$", True)
        second_phi = second_Phi = None
        second_data = _require(json_dict, 'second', dict, "$", collector, optional=True)
        if second_data is not None:
            second_phi, second_Phi = read_pair(second_data, "$.second", True)
        collector.raise_if_any()

        instance = cls(algebra, module, source, target, phi, Phi, second_phi, second_Phi, tolerances, seed)
        instance.source_name = "from_json()"
        logger.debug('Parsed %r.', instance)
        return instance

    def get_json(self, serialize: bool = True) -> Union[dict, str]:
        """ Returns the instance in JSON format. If serialize is set to
        False a dictionary representation is returned instead. Serializing
        a parsed instance reproduces the canonical input byte for byte. """

        result = {'version': definitions.INSTANCE_VERSION,
                  'algebra': self.algebra.get_json(),
                  'module': self.module.get_json(),
                  'H': self.source.get_json(),
                  'K': self.target.get_json(),
                  'n': self.n,
                  'phi': self.phi.get_json()}
        if self.Phi is not None:
            result['Phi'] = self.Phi.get_json()
        if self.second_phi is not None:
            result['second'] = {'phi': self.second_phi.get_json()}
            if self.second_Phi is not None:
                result['second']['Phi'] = self.second_Phi.get_json()
        if self.tolerances is not None:
            result['tolerances'] = self.tolerances.get_json()
        if self.seed is not None:
            result['seed'] = self.seed

        if serialize:
            return canonical_json(result)
        return result

    def format(self) -> str:
        """ The canonical JSON form of the instance. """

        return self.get_json(serialize=True)

    def hash(self) -> str:
        """ SHA-256 of the canonical JSON form. Certificates echo it. """

        return hashlib.sha256(self.format().encode()).hexdigest()

    def write_to_file(self, file_name: str) -> None:
        """ Writes the canonical JSON form of the instance to a file. """

        write_to_file(self.format() + "\n", file_name)

    def require_pair(self, second: bool = False) -> ModuleCPMatrix:
        """ Returns [Phi] (or the second [Phi]), raising SchemaError if the
        instance does not contain it. """

        Phi = self.second_Phi if second else self.Phi
        if Phi is None:
            path = "$.second.Phi" if second else "$.Phi"
            raise SchemaError("This command needs a module map matrix.", path)
        return Phi
