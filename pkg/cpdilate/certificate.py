""" Certificates record what a command produced: the operators it built,
the residual of every identity those operators satisfy and the verdicts it
reached. They can be re-checked later without the original run. """

import json
import logging
import math
from typing import Dict, IO, Optional, Union

from cpdilate import definitions
from cpdilate._internal import __version__, _interpret_file, canonical_json, write_to_file
from cpdilate.exceptions import SchemaError
from cpdilate.utils import format_residual

logger = logging.getLogger('cpdilate')


def _clean_residual(value) -> Optional[float]:
    """ Residual tables only hold finite floats; anything else (infinite
    unitarity residuals of non-square operators) is stored as null. """

    if value is None or isinstance(value, bool):
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class Certificate(object):
    """ The output of one command run on one instance.

    `instance` is the JSON form of the instance the command ran on and
    `instance_hash` its SHA-256. `operators` holds every matrix produced, as
    [re, im] nested lists. `residuals` maps names to floats, `verdicts` maps
    names to strings or booleans and `details` records the parameters of the
    run (tolerances, seed, sample counts, dimensions). `status` is the
    process exit code the run maps to: 0 for success, 1 for a mathematical
    verdict failure. """

    def __init__(self, command: str, instance: dict, instance_hash: str, operators: Dict[str, object] = None,
                 residuals: Dict[str, float] = None, verdicts: Dict[str, object] = None,
                 details: Dict[str, object] = None, status: int = 0, duration: Optional[float] = None):
        if command not in definitions.COMMANDS:
            raise SchemaError(f"Unknown command '{command}'.", "$.command")
        self.command = command
        self.instance = instance
        self.instance_hash = instance_hash
        self.operators = operators or {}
        self.residuals = {key: _clean_residual(value) for key, value in (residuals or {}).items()}
        self.verdicts = verdicts or {}
        self.details = details or {}
        self.status = status
        self.duration = duration

    def __repr__(self) -> str:
        return f"<cpdilate.Certificate {self.command} status={self.status} on {self.instance_hash[:12]}>"

    def __str__(self) -> str:
        return self.format("text")

    @classmethod
    def from_file(cls, the_file: Union[str, IO]) -> 'Certificate':
        """ Loads a certificate from a path, URL, open file, or a gzipped
        version of any of those. """

        return cls.from_string(_interpret_file(the_file).read())

    @classmethod
    def from_string(cls, the_string: str) -> 'Certificate':
        try:
            data = json.loads(the_string)
        except ValueError as err:
            raise SchemaError(f"The certificate is not valid JSON: {err}.", "$") from None
        return cls.from_json(data)

    @classmethod
    def from_json(cls, json_dict: dict) -> 'Certificate':
        """ Creates a certificate from its unserialized JSON form. """

        if not isinstance(json_dict, dict):
            raise SchemaError("The certificate must be a JSON object.", "$")
        for key, expected in (('command', str), ('instance', dict), ('instance_hash', str), ('operators', dict),
                              ('residuals', dict), ('verdicts', dict), ('details', dict), ('status', int)):
            if key not in json_dict:
                raise SchemaError(f"Missing required field '{key}'.", f"$.{key}")
            if not isinstance(json_dict[key], expected):
                raise SchemaError(f"Field '{key}' must be of type {expected.__name__}.", f"$.{key}")
        return cls(json_dict['command'], json_dict['instance'], json_dict['instance_hash'],
                   json_dict['operators'], json_dict['residuals'], json_dict['verdicts'], json_dict['details'],
                   json_dict['status'], json_dict.get('duration'))

    def get_json(self, serialize: bool = True, timing: bool = False) -> Union[dict, str]:
        """ Returns the certificate in JSON format. The wall-clock duration
        is only included when `timing` is set, so that repeated runs give
        identical bytes. """

        result = {'cpdilate_version': __version__,
                  'command': self.command,
                  'instance': self.instance,
                  'instance_hash': self.instance_hash,
                  'operators': self.operators,
                  'residuals': self.residuals,
                  'verdicts': self.verdicts,
                  'details': self.details,
                  'status': self.status}
        if timing and self.duration is not None:
            result['duration'] = self.duration
        if serialize:
            return canonical_json(result)
        return result

    def format(self, format_: str = "json", timing: bool = False) -> str:
        """ Canonical JSON, or with format_='text' a human-readable table of
        verdicts and residuals. """

        if format_ == "json":
            return self.get_json(serialize=True, timing=timing)
        if format_ != "text":
            raise ValueError(f"Unknown report format '{format_}'. Use 'json' or 'text'.")

        lines = [f"cpdilate {__version__}  command: {self.command}  status: {self.status}",
                 f"instance: {self.instance_hash}"]
        if self.duration is not None:
            lines.append(f"duration: {self.duration:.3f} s")
        if self.details:
            lines.append("")
            lines.append("details:")
            width = max(len(key) for key in self.details)
            lines.extend(f"  {key:<{width}}  {json.dumps(self.details[key], sort_keys=True)}"
                         for key in sorted(self.details))
        if self.verdicts:
            lines.append("")
            lines.append("verdicts:")
            width = max(len(key) for key in self.verdicts)
            lines.extend(f"  {key:<{width}}  {self.verdicts[key]}" for key in sorted(self.verdicts))
        lines.append("")
        lines.append("residuals:")
        if self.residuals:
            width = max(len(key) for key in self.residuals)
            for key in sorted(self.residuals):
                value = self.residuals[key]
                lines.append(f"  {key:<{width}}  {'n/a' if value is None else format_residual(value)}")
        else:
            lines.append("  (none)")
        lines.append("")
        lines.append("operators: " + (", ".join(sorted(self.operators)) if self.operators else "(none)"))
        return "\n".join(lines) + "\n"

    def write_to_file(self, file_name: str, format_: str = "json", timing: bool = False) -> None:
        """ Writes the certificate to a file. """

        write_to_file(emit_report(self, format_, timing), file_name)


def emit_report(cert: Certificate, format_: str = "json", timing: bool = False) -> bytes:
    """ The bytes written for a certificate: canonical JSON with sorted keys
    and fixed float formatting, or a text residual table. """

    text = cert.format(format_, timing)
    if format_ == "json":
        text += "\n"
    return text.encode()
