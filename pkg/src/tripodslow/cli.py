"""Command-line front end.

Exit codes: 0 success, 1 a check failed (or the run broke down numerically),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import loss_curve
from .config import KINDS, default_spec, parse_config, print_config
from .errors import ConfigError, TripodError
from .grid import set_fft_workers
from .scenarios import canonical_config_text, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _b_range(text):
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:COUNT, got {text!r}")
    if count < 1 or start < 0 or stop < start:
        raise argparse.ArgumentTypeError(f"need 0 <= START <= STOP and COUNT >= 1, got {text!r}")
    return np.linspace(start, stop, count)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $TSL_OUT)")
    common.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    common.add_argument("--quiet", action="store_true", help="only report failures")

    parser = _Parser(prog="tripodslow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="run one scenario file")
    run.add_argument("config", type=Path)

    lc = sub.add_parser("loss-curve", parents=[common], help="energy ratio versus b as CSV")
    lc.add_argument("b_range", type=_b_range, metavar="START:STOP:COUNT")
    lc.add_argument("sigma_p", type=float)
    lc.add_argument("--sigma-r", type=float, default=20.0)
    lc.add_argument("--sigma-r3", type=float, default=None)

    sub.add_parser("check", parents=[common], help="run every canonical scenario")

    dd = sub.add_parser("dump-defaults", parents=[common], help="print a fully resolved config")
    dd.add_argument("kind", choices=KINDS)
    return parser


def _out_dir(args):
    out = args.out or os.environ.get("TSL_OUT")
    return Path(out) if out else None


def _log(args, msg):
    if not args.quiet:
        print(msg)


def _print_assertions(args, report):
    for a in report.assertions:
        if a.passed and args.quiet:
            continue
        status = "PASS" if a.passed else "FAIL"
        print(f"{status} {report.kind}.{a.name}: actual={a.actual:.10g} "
              f"expected={a.expected:.10g} tol={a.tolerance:g}")


def _cmd_run(args):
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}")
    try:
        spec = parse_config(text, args.overrides)
    except ConfigError as exc:
        raise ConfigError(f"{args.config}: {exc}")
    report = run_scenario(spec)
    out = _out_dir(args) or Path("tsl_out") / args.config.stem
    report.write(out)
    _print_assertions(args, report)
    _log(args, f"report written to {out}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_loss_curve(args):
    if args.sigma_p <= 0 or args.sigma_r <= 0 or (args.sigma_r3 is not None and args.sigma_r3 <= 0):
        raise ConfigError("widths must be positive")
    rows = loss_curve(args.b_range, args.sigma_p, args.sigma_r, args.sigma_r3)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["b", "ratio_analytic", "ratio_numeric", "ratio_fields_optional"])
    for b, analytic, numeric in rows:
        w.writerow([repr(b), "" if analytic != analytic else repr(analytic), repr(numeric), ""])
    return EXIT_OK


def _cmd_check(args):
    out = _out_dir(args)
    ok = True
    for kind in KINDS:
        spec = parse_config(canonical_config_text(kind))
        report = run_scenario(spec)
        if out is not None:
            report.write(out / kind)
        _print_assertions(args, report)
        ok &= report.passed
    _log(args, "all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_dump_defaults(args):
    spec = default_spec(args.kind)
    if args.overrides:
        spec = parse_config(print_config(spec), args.overrides)
    sys.stdout.write(print_config(spec, docs=True))
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "loss-curve": _cmd_loss_curve,
    "check": _cmd_check,
    "dump-defaults": _cmd_dump_defaults,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        set_fft_workers(args.threads)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TripodError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
