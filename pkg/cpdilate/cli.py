#!/usr/bin/env python3

""" The cpdilate command line tool.

    cpdilate <cmd> [--in FILE|DIR] [--out FILE|DIR] [--seed N] [--tol-rank X --tol-psd X --tol-res X]
                   [--samples N] [--format json|text]

Exit status is 0 when the verdict succeeds, 1 when the input is well
formed but fails a mathematical verdict, and 2 when the input could not be
read or does not fit the command. """

import argparse
import logging
import os
import sys
from typing import List, Optional

from cpdilate import definitions
from cpdilate._internal import __version__, write_to_file
from cpdilate.certificate import Certificate, emit_report
from cpdilate.commands import RunOptions, generate_instance, parse_algebra, resolve_tolerances, run_batch, \
    run_command, verify
from cpdilate.exceptions import DilationError, SchemaError, VerdictError
from cpdilate.hilbert import FlagSpace, HilbertModule
from cpdilate.instance import Instance
from cpdilate.utils import iter_instance_files

logger = logging.getLogger('cpdilate')


def _int_list(value: str) -> tuple:
    try:
        return tuple(int(part) for part in value.split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a comma separated list of integers, got '{value}'.") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdilate",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Dilations and Radon-Nikodym derivatives of completely positive matrices of module maps.",
        epilog="Exit status: 0 verdict succeeded, 1 verdict failed, 2 input error.\n"
               f"The environment variable {definitions.TOLERANCE_ENV_VAR} sets the residual tolerance unless "
               "--tol-res is given.")
    parser.add_argument("command", choices=definitions.COMMANDS, help="The command to run.")
    parser.add_argument("certificate", nargs="?", default=None,
                        help="For verify: the certificate file or directory to check.")
    parser.add_argument("--in", dest="in_", default=None,
                        help="Instance file, URL or directory of instances (default: standard input).")
    parser.add_argument("--out", default=None, help="Output file, or directory when --in is a directory "
                                                    "(default: standard output).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for generation and sampling.")
    parser.add_argument("--tol-rank", type=float, default=None, help="Relative rank cutoff.")
    parser.add_argument("--tol-psd", type=float, default=None, help="Allowed negative eigenvalue magnitude.")
    parser.add_argument("--tol-res", type=float, default=None, help="Residual acceptance threshold.")
    parser.add_argument("--samples", type=int, default=None, help="Module elements sampled by domination tests.")
    parser.add_argument("--trials", type=int, default=None, help="Trials of iso-roundtrip.")
    parser.add_argument("--workers", type=int, default=None, help="Threads for trials and batch directories.")
    parser.add_argument("--format", choices=["json", "text"], default="json", help="Report format.")
    parser.add_argument("--timing", action="store_true", help="Record the wall-clock duration in JSON output.")
    parser.add_argument("--verbose", dest="log_level", action="store_const", const=logging.DEBUG,
                        help="Log construction steps.")
    parser.add_argument("--quiet", dest="log_level", action="store_const", const=logging.ERROR,
                        help="Only log errors.")
    parser.add_argument("--version", action="version", version=f"cpdilate {__version__}")

    generation = parser.add_argument_group("gen", "Options of the gen command.")
    generation.add_argument("--algebra", default="M2", help="Blocks of the algebra, e.g. M2 or M1+M2.")
    generation.add_argument("--chain", default=None, help="Seminorm chain as 0-based block lists, e.g. 0/0,1.")
    generation.add_argument("--module", default="self", choices=definitions.MODULE_KINDS, help="Module kind.")
    generation.add_argument("--module-mult", type=int, default=1, help="Copies of A in a free module.")
    generation.add_argument("--rows", type=_int_list, default=None, help="Rows per block of a rect module.")
    generation.add_argument("--n", type=int, default=1, help="Size of the map matrices.")
    generation.add_argument("--mult", type=int, default=1, help="Multiplicity of the witness representation.")
    generation.add_argument("--H", dest="flags_h", type=_int_list, default=None, help="Flag dimensions of H.")
    generation.add_argument("--K", dest="flags_k", type=_int_list, default=None, help="Flag dimensions of K.")
    generation.add_argument("--second", choices=["rotated", "scaled", "half"], default=None,
                            help="Add a comparison pair to the generated instance.")
    return parser


def _emit(data: bytes, out: Optional[str]) -> None:
    if out:
        write_to_file(data, out)
    else:
        sys.stdout.write(data.decode())


def _report_name(path: str, command: str, format_: str) -> str:
    name = os.path.basename(path)
    for suffix in (".json.gz", ".json"):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
            break
    return f"{name}.{command}.{'json' if format_ == 'json' else 'txt'}"


def _gen(args: argparse.Namespace) -> int:
    algebra = parse_algebra(args.algebra, args.chain)
    module = HilbertModule(algebra, args.module, args.module_mult, args.rows)
    source = FlagSpace(args.flags_h) if args.flags_h else None
    target = FlagSpace(args.flags_k) if args.flags_k else None
    instance = generate_instance(algebra, module, args.n, args.mult, 0 if args.seed is None else args.seed,
                                 source, target, args.second)
    tolerance_flags = (args.tol_rank, args.tol_psd, args.tol_res)
    if any(value is not None for value in tolerance_flags):
        instance.tolerances = resolve_tolerances(None, *tolerance_flags, environ={})
    _emit((instance.format() + "\n").encode(), args.out)
    return 0


def _verify(args: argparse.Namespace) -> int:
    target = args.certificate or args.in_
    if target is None:
        raise SchemaError("verify needs a certificate file or directory.", "certificate")
    paths = list(iter_instance_files(target)) if os.path.isdir(target) else [target]
    status, lines = 0, []
    for path in paths:
        mismatches = verify(Certificate.from_file(path))
        if mismatches:
            status = 1
            lines.append(f"{path}: FAILED")
            lines.extend(f"  {key}: recorded {recorded!r}, recomputed {recomputed!r}"
                         for key, (recorded, recomputed) in mismatches.items())
        else:
            lines.append(f"{path}: OK")
    _emit(("\n".join(lines) + "\n").encode(), args.out)
    return status


def _run(args: argparse.Namespace) -> int:
    options = RunOptions(seed=args.seed, samples=args.samples, trials=args.trials, workers=args.workers)
    overrides = {'rank_tol': args.tol_rank, 'psd_tol': args.tol_psd, 'residual_tol': args.tol_res}

    if args.in_ is not None and os.path.isdir(args.in_):
        paths = list(iter_instance_files(args.in_))
        if args.out:
            os.makedirs(args.out, exist_ok=True)
        results = run_batch(args.command, paths, overrides, RunOptions(seed=args.seed, samples=args.samples,
                                                                       trials=args.trials), args.workers)
        for path, cert in results:
            report = emit_report(cert, args.format, args.timing)
            if args.out:
                write_to_file(report, os.path.join(args.out, _report_name(path, args.command, args.format)))
            else:
                sys.stdout.write(report.decode())
        return max((cert.status for _, cert in results), default=0)

    instance = Instance.from_file(args.in_ if args.in_ is not None else sys.stdin)
    cert = run_command(args.command, instance, resolve_tolerances(instance, **overrides), options)
    _emit(emit_report(cert, args.format, args.timing), args.out)
    return cert.status


def main(argv: List[str] = None) -> int:
    """ Runs the command line tool and returns the exit status. """

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level or logging.WARNING, format="%(levelname)s: %(message)s")

    try:
        if args.command == "gen":
            return _gen(args)
        if args.command == "verify":
            return _verify(args)
        return _run(args)
    except VerdictError as err:
        sys.stderr.write(f"{err}\n")
        return 1
    except (DilationError, IOError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
