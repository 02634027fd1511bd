"""``cvqnet`` command-line entry point.

Exit codes: 0 success, 1 configuration or parse error, 2 I/O error,
3 validation failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from typing import Optional

import numpy as np

from . import __version__, qfi
from .ensemble import DEFAULT_K_FRACTIONS, loss_sweep, mc_haar_qfi
from .errors import QnetError
from .io import MatrixParseError, read_matrix, render_csv, render_json, write_atomic
from .local_circuit import depth_grid, depth_sweep
from .parallel import resolve_threads
from .random_unitary import RngStream, UNITARITY_TOL, check_unitary, sample_haar_unitary
from .validate import DEFAULT_SEED, run_checks

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3

# options that change how a run is executed or stored, not what it computes
_NOT_ECHOED = {"command", "out", "format", "threads", "no_timestamp", "config", "json", "func"}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _common(p: argparse.ArgumentParser, seed_required: bool = True) -> None:
    p.add_argument("--config", help="JSON config file (plain options or a previous output's 'config' block)")
    p.add_argument("--seed", type=int, required=seed_required, help="master seed (required)")
    p.add_argument("--out", help="output file; stdout when omitted")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, help="worker processes (fallback: $QNET_THREADS, then 1)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation timestamp")


def _modes(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--M", type=int, dest="M")
    g.add_argument("--M-list", type=_int_list, dest="M_list")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cvqnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cvqnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("haar-average", help="Haar-ensemble averages of h_lo, h_mo, h_mlo")
    _modes(p)
    _common(p)
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--k-fractions", type=_float_list, dest="k_fractions", default=list(DEFAULT_K_FRACTIONS))
    p.set_defaults(func=cmd_haar_average)

    p = sub.add_parser("local-depth", help="brickwork depth sweep of h_lo/M^2 and h_mlo/M^2")
    _modes(p)
    _common(p)
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--configs", type=int, default=100)
    p.add_argument("--depths", type=_int_list, help="depth list; default: geometric grid in D/M^2 from 0.01 to 2")
    p.set_defaults(func=cmd_local_depth)

    p = sub.add_parser("loss-sweep", help="lossy h_lo, closed form against covariance path")
    _modes(p)
    _common(p)
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--eta-list", type=_float_list, dest="eta_list", default=[1.0, 0.9, 0.75, 0.5, 0.25])
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(func=cmd_loss_sweep)

    p = sub.add_parser("single", help="full QFI breakdown for one network")
    p.add_argument("--matrix", help="matrix file; a Haar sample from --seed is used when omitted")
    p.add_argument("--M", type=int, dest="M")
    p.add_argument("--nbar", type=float, required=True)
    _common(p, seed_required=False)
    p.set_defaults(func=cmd_single, format="json")

    p = sub.add_parser("validate", help="run the invariant suite at M <= 8")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--break-symplectic", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    lineno = 1
    if text.startswith("#"):
        # a CSV written by this tool: reuse its echoed config line
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.startswith("# config: "):
                text = line[len("# config: "):]
                break
        else:
            raise ConfigError(f"config {path}: no '# config:' line found")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {lineno + exc.lineno - 1}: {exc.msg}")
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _subparser(parser, name):
    return parser._subparsers._group_actions[0].choices[name]


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return parser.parse_args(argv)
    # first pass only locates the config file, so required flags are relaxed
    relaxed = []
    for sub in parser._subparsers._group_actions[0].choices.values():
        for action in sub._actions:
            if action.required:
                action.required = False
                relaxed.append(action)
    first = parser.parse_args(argv)
    for action in relaxed:
        action.required = True
    cfg = _load_config(first.config)
    cfg.pop("command", None)
    sub = _subparser(parser, first.command)
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    # config supplies defaults; explicit flags still win
    if getattr(first, "M", None) is not None:
        cfg.pop("M_list", None)
    if getattr(first, "M_list", None):
        cfg.pop("M", None)
    for key in ("M_list", "depths"):
        if cfg.get(key) is not None:
            cfg[key] = _int_list(cfg[key])
    for key in ("k_fractions", "eta_list"):
        if cfg.get(key) is not None:
            cfg[key] = _float_list(cfg[key])
    for action in sub._actions:
        if action.dest in cfg:
            action.required = False
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def _config_echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _NOT_ECHOED}


def _mode_list(args) -> list:
    if getattr(args, "M_list", None):
        return list(args.M_list)
    if getattr(args, "M", None) is not None:
        return [args.M]
    raise ConfigError("one of --M or --M-list is required")


def _emit(args, rows: list, columns: list) -> None:
    comments = [f"cvqnet {__version__} {args.command}"]
    payload = {"tool": "cvqnet", "version": __version__, "command": args.command}
    if not args.no_timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        comments.append(f"generated: {stamp}")
        payload["generated"] = stamp
    config = _config_echo(args)
    comments.append("config: " + json.dumps(config, sort_keys=True))
    if args.format == "csv":
        text = render_csv(rows, columns, comments)
    else:
        payload["config"] = config
        payload["rows"] = [{c: row[c] for c in columns} for row in rows]
        text = render_json(payload)
    _write(args.out, text)


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _stamp(row: dict, args) -> dict:
    row["seed"] = args.seed
    row["version"] = __version__
    return row


HAAR_COLUMNS = [
    "M", "nbar", "eta", "samples",
    "mean_h_lo", "std_h_lo", "se_h_lo",
    "mean_h_mo", "std_h_mo", "se_h_mo",
    "lemma1_closed_form", "ratio_mean_to_closed_form",
    "mean_h_mlo", "std_h_mlo", "se_h_mlo",
]


def cmd_haar_average(args) -> int:
    rows = []
    tail_cols: list = []
    threads = resolve_threads(args.threads)
    for M in _mode_list(args):
        r = mc_haar_qfi(M, args.nbar, args.eta, args.samples, args.seed, args.k_fractions, threads)
        row = {
            "M": M, "nbar": r.nbar, "eta": r.eta, "samples": r.samples,
            "mean_h_lo": r.mean_h_lo, "std_h_lo": r.std_h_lo, "se_h_lo": r.se("h_lo"),
            "mean_h_mo": r.mean_h_mo, "std_h_mo": r.std_h_mo, "se_h_mo": r.se("h_mo"),
            "lemma1_closed_form": r.closed_form_mean,
            "ratio_mean_to_closed_form": r.mean_h_lo / r.closed_form_mean,
            "mean_h_mlo": r.mean_h_mlo, "std_h_mlo": r.std_h_mlo, "se_h_mlo": r.se("h_mlo"),
        }
        tail_cols = []
        for c in args.k_fractions:
            name = f"tail_fraction_k{c:g}"
            tail_cols.append(name)
            match = [f for k, f in r.tail_fractions if np.isclose(k, c * 2 * np.pi * r.nbar)]
            row[name] = match[0] if match else float("nan")
        rows.append(_stamp(row, args))
    _emit(args, rows, HAAR_COLUMNS + tail_cols + ["seed", "version"])
    return EXIT_OK


DEPTH_COLUMNS = [
    "M", "nbar", "depth", "depth_over_M2", "configs",
    "mean_h_lo_over_M2", "mean_h_mlo_over_M2",
    "std_h_lo_over_M2", "std_h_mlo_over_M2",
    "se_h_lo_over_M2", "se_h_mlo_over_M2",
    "seed", "version",
]


def cmd_local_depth(args) -> int:
    rows = []
    threads = resolve_threads(args.threads)
    for M in _mode_list(args):
        depths = args.depths if args.depths else depth_grid(M)
        for pt in depth_sweep(M, args.nbar, depths, args.configs, args.seed, threads):
            rows.append(_stamp({
                "M": pt.M, "nbar": pt.nbar, "depth": pt.depth, "depth_over_M2": pt.depth_over_M2,
                "configs": pt.configs,
                "mean_h_lo_over_M2": pt.mean_h_lo_over_M2, "mean_h_mlo_over_M2": pt.mean_h_mlo_over_M2,
                "std_h_lo_over_M2": pt.std_h_lo_over_M2, "std_h_mlo_over_M2": pt.std_h_mlo_over_M2,
                "se_h_lo_over_M2": pt.se_h_lo_over_M2, "se_h_mlo_over_M2": pt.se_h_mlo_over_M2,
            }, args))
    _emit(args, rows, DEPTH_COLUMNS)
    return EXIT_OK


LOSS_COLUMNS = [
    "M", "nbar", "eta", "samples",
    "mean_h_lo_lossy", "std_h_lo_lossy", "se_h_lo_lossy", "lemma1_lossy_closed_form",
    "closed_vs_covariance_max_rel_err", "beta_threshold_alpha_0.5",
    "seed", "version",
]


def cmd_loss_sweep(args) -> int:
    rows = []
    threads = resolve_threads(args.threads)
    for M in _mode_list(args):
        for pt in loss_sweep(M, args.nbar, args.eta_list, args.samples, args.seed, threads):
            rows.append(_stamp({
                "M": pt.M, "nbar": pt.nbar, "eta": pt.eta, "samples": pt.samples,
                "mean_h_lo_lossy": pt.mean_h_lo_lossy, "std_h_lo_lossy": pt.std_h_lo_lossy,
                "se_h_lo_lossy": pt.std_h_lo_lossy / np.sqrt(pt.samples),
                "lemma1_lossy_closed_form": pt.closed_form_mean,
                "closed_vs_covariance_max_rel_err": pt.closed_vs_covariance_max_rel_err,
                "beta_threshold_alpha_0.5": pt.beta_threshold_alpha_half,
            }, args))
    _emit(args, rows, LOSS_COLUMNS)
    return EXIT_OK


def cmd_single(args) -> int:
    if args.matrix:
        try:
            U = read_matrix(args.matrix)
        except OSError as exc:
            raise ConfigError(f"cannot read matrix file {args.matrix}: {exc}")
        except MatrixParseError as exc:
            raise ConfigError(f"{args.matrix}: parse error at {exc}")
        if args.M is not None and args.M != U.shape[0]:
            raise ConfigError(f"--M {args.M} does not match the {U.shape[0]}x{U.shape[0]} matrix in {args.matrix}")
        source = {"matrix": args.matrix}
    else:
        if args.M is None or args.seed is None:
            raise ConfigError("without --matrix, both --M and --seed are required")
        U = sample_haar_unitary(args.M, RngStream(args.seed, 0))
        source = {"haar_sample": {"M": args.M, "seed": args.seed, "stream_index": 0}}
    U = check_unitary(U, UNITARITY_TOL)
    payload = {"tool": "cvqnet", "version": __version__, "command": "single"}
    if not args.no_timestamp:
        payload["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    payload["config"] = _config_echo(args)
    payload["source"] = source
    payload["breakdown"] = qfi.qfi_breakdown(U, args.nbar).to_dict()
    _write(args.out, render_json(payload))
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_checks(seed=args.seed, break_symplectic=args.break_symplectic)
    failed = [r.name for r in results if not r.passed]
    if args.json:
        text = render_json({
            "tool": "cvqnet", "version": __version__, "seed": args.seed,
            "passed": not failed,
            "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
        })
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
        text = "\n".join(lines) + "\n"
    _write(args.out, text)
    if failed:
        print("validation failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"cvqnet: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QnetError, ValueError, IndexError) as exc:
        print(f"cvqnet: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cvqnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
