import json
import logging
import time
from gzip import GzipFile
from io import BytesIO, StringIO
from typing import Any, IO, Tuple, Union
from urllib.error import HTTPError
from urllib.request import urlopen, Request

import numpy as np

from cpdilate import definitions

__version__: str = "1.0.0"

# If we have requests, open a session to reuse for the duration of the program run
try:
    from requests import session as _requests_session
    from requests.exceptions import ConnectionError
    _session = _requests_session()
except ModuleNotFoundError:
    _session = None

logger = logging.getLogger('cpdilate')


def _json_serialize(obj: object) -> Any:
    """JSON serializer for objects not serializable by default json code"""

    # numpy scalars and arrays show up in residual tables and operator sections
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("Type not serializable: %s" % type(obj))


def _format_float(value: float) -> str:
    """ Formats a float with a fixed number of significant digits, always
    keeping a decimal point or exponent so it reads back as a float. """

    if not np.isfinite(value):
        raise ValueError(f"Cannot write the non-finite value {value} to JSON.")
    text = format(value, f".{definitions.FLOAT_DIGITS}g")
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def canonical_json(obj: Any) -> str:
    """ Serializes to JSON with sorted keys, no whitespace and every float
    written with definitions.FLOAT_DIGITS significant digits. The same input
    always produces the same bytes. """

    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda item: str(item[0]))
        return "{" + ",".join(json.dumps(str(key)) + ":" + canonical_json(value) for key, value in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(value) for value in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(_json_serialize(obj) if isinstance(obj, np.bool_) else obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    raise TypeError("Type not serializable: %s" % type(obj))


def _fetch(url: str, timeout: int) -> Tuple[int, bytes]:
    """ One GET request. Returns the status code and the body. """

    global _session

    headers = {'Application': f'cpdilate {__version__}'}
    if _session:
        try:
            response = _session.get(url, timeout=timeout, headers=headers)
        except ConnectionError:
            # Stale pooled connection, retry once on a fresh session
            _session = _requests_session()
            try:
                response = _session.get(url, timeout=timeout, headers=headers)
            except ConnectionError:
                raise IOError(f"Could not connect to {url}.") from None
        return response.status_code, response.content

    try:
        with urlopen(Request(url, headers=headers), timeout=timeout) as url_request:
            return url_request.status, url_request.read()
    except HTTPError as err:
        return err.code, b""


def _get_url_reliably(url: str, wait_time: float = 10, timeout: int = 10, retries: int = 2) -> bytes:
    """ Downloads an instance or certificate. A 403 is treated as rate
    limiting and retried up to `retries` times with a doubling wait; any
    other error status fails at once. """

    for attempt in range(retries + 1):
        status, body = _fetch(url, timeout)
        if status == 403 and attempt < retries:
            logger.warning('Rate limited by %s. Sleeping for %s seconds.', url, wait_time)
            time.sleep(wait_time)
            wait_time *= 2
            continue
        if status >= 400:
            raise IOError(f"Server returned {status} for {url}.")
        return body
    raise IOError(f"Continued to receive 403 from {url} after {retries} retries.")


def _interpret_file(the_file: Union[str, IO]) -> StringIO:
    """ Returns the text of an instance or certificate as a StringIO.
    the_file can be a path, an http(s) URL, an open file (text or binary),
    or a gzipped version of any of those. """

    if hasattr(the_file, 'read'):
        data = the_file.read()
        if isinstance(data, str):
            data = data.encode()
        if not isinstance(data, bytes):
            raise IOError(f"Reading {the_file!r} returned {type(data).__name__}, not text.")
    elif isinstance(the_file, str):
        if the_file.startswith(("http://", "https://")):
            data = _get_url_reliably(the_file, retries=0)
        else:
            with open(the_file, 'rb') as read_file:
                data = read_file.read()
    else:
        raise ValueError(f"Cannot read an instance from {the_file!r}. Pass a path, URL or open file.")

    if data[:2] == b"\x1f\x8b":
        data = GzipFile(fileobj=BytesIO(data)).read()
    try:
        return StringIO(data.decode("utf-8"))
    except UnicodeDecodeError:
        raise IOError("The input is not UTF-8 encoded text.") from None


def write_to_file(data_to_write: Union[str, bytes], file_name: str) -> None:
    """ Writes already formatted output (canonical JSON or a text report)
    to the specified file. """

    mode = "wb" if isinstance(data_to_write, bytes) else "w"
    with open(file_name, mode) as out_file:
        out_file.write(data_to_write)
