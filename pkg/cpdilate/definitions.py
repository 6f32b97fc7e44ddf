#!/usr/bin/python3

""" cpdilate definitions and other module parameters live here. Technically
you can edit them, but you should really know what you're doing.

The tolerances below are the defaults used whenever a :py:class:`Tolerances`
object is built without arguments. Instance files and command-line flags
override them per run.

WARNINGS:
 * Every tolerance must stay strictly positive and no larger than
   MAX_TOLERANCE. Tolerances() raises InvalidInputError otherwise.

 * Raising DEFAULT_RANK_TOL changes the computed dilation dimensions, since
   Gram eigenvalues below rank_tol times the largest one are treated as part
   of the null space.
"""

DEFAULT_RANK_TOL: float = 1e-9
DEFAULT_PSD_TOL: float = 1e-9
DEFAULT_RESIDUAL_TOL: float = 1e-7
MAX_TOLERANCE: float = 1e-2

INSTANCE_VERSION: str = "cpdilate/1"
SUPPORTED_VERSIONS = [INSTANCE_VERSION]
TOLERANCE_ENV_VAR: str = "CPDILATE_TOL_RES"

DEFAULT_DOMINATION_SAMPLES: int = 64
DEFAULT_ROUNDTRIP_TRIALS: int = 10

COMMANDS = ["gen", "check-cp", "dilate", "equiv", "dominate", "commutant", "rn", "iso-roundtrip", "verify"]
MODULE_KINDS = ["self", "free", "rect"]

# Significant digits used when writing floats into canonical JSON
FLOAT_DIGITS: int = 17

# Recorded and recomputed residuals of a certificate must agree this closely
VERIFY_TOL: float = 1e-12
