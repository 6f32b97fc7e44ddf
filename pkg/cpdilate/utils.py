#!/usr/bin/env python3

""" This file contains various helper functions."""
import functools
import os
from typing import Any, Iterable, List

import numpy as np

from cpdilate.exceptions import SchemaError

# Set this to allow import * from cpdilate to work sensibly
__all__ = ['complex_to_json', 'complex_from_json', 'derive_seeds', 'format_residual', 'iter_instance_files']


def complex_to_json(values: np.ndarray) -> list:
    """ Converts a complex array of any shape into nested lists whose leaves
    are [re, im] pairs. """

    values = np.asarray(values, dtype=np.complex128)
    return np.stack([values.real, values.imag], axis=-1).tolist()


def _collect_pairs(value: Any, path: str, errors: List[SchemaError]) -> Any:
    """ Walks nested lists and checks every leaf is an [re, im] pair of
    numbers. Problems are appended to `errors` with their field path. """

    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) and
                                                           not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    if isinstance(value, list) and value and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                 for x in value):
        errors.append(SchemaError(f"Complex numbers must be [re, im] pairs, found {len(value)} numbers.", path))
        return complex(0)
    if isinstance(value, list):
        return [_collect_pairs(item, f"{path}[{position}]", errors) for position, item in enumerate(value)]
    errors.append(SchemaError(f"Expected a list or an [re, im] pair, found {type(value).__name__}.", path))
    return complex(0)


def complex_from_json(value: Any, path: str = "$", shape: tuple = None) -> np.ndarray:
    """ Inverse of :py:func:`complex_to_json`. Raises SchemaError naming the
    offending path if a leaf is not a pair of numbers or if the nesting is
    ragged. If `shape` is given the result must have exactly that shape. """

    errors: List[SchemaError] = []
    nested = _collect_pairs(value, path, errors)
    if errors:
        if len(errors) == 1:
            raise errors[0]
        raise SchemaError(f"{len(errors)} malformed complex entries.", path, errors)
    try:
        array = np.array(nested, dtype=np.complex128)
    except ValueError:
        raise SchemaError("The nested lists are ragged.", path) from None
    if array.dtype == object:
        raise SchemaError("The nested lists are ragged.", path)
    if shape is not None:
        if array.size == 0 and int(np.prod(shape)) == 0:
            return np.zeros(shape, dtype=np.complex128)
        if array.shape != tuple(shape):
            raise SchemaError(f"Expected shape {tuple(shape)}, found {array.shape}.", path)
    return array


def derive_seeds(seed: int, count: int) -> List[int]:
    """ Independent per-trial seeds derived from one seed. The result does
    not depend on how the trials are later scheduled. """

    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


@functools.lru_cache(maxsize=1024)
def format_residual(value: float) -> str:
    """ Fixed width representation used in text reports. """

    return f"{value:.3e}"


def iter_instance_files(directory: str) -> Iterable[str]:
    """ Returns the instance files (*.json and *.json.gz) in a directory in
    sorted order. """

    for name in sorted(os.listdir(directory)):
        if name.endswith(".json") or name.endswith(".json.gz"):
            yield os.path.join(directory, name)
