"""Command-line benchmark front end.

Three subcommands: `run` sweeps the continuous-spectrum methods over grid
sizes (or amplitudes) and records errors, timings and model FLOPs; `eigen`
runs the discrete-spectrum pipeline; `flops` prints the cost model alone.
Options can also come from a TOML file via --config (command-line flags win).
Exit codes: 0 success, 2 bad configuration, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .bench import (SweepConfig, flop_count, normalize_method, run_eigen,
                    run_sweep)
from .discrete import write_eigen_csv


def _int_list(text):
    try:
        values = [int(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def _amplitude_range(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            "amplitude sweep must be start:step:stop")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad amplitude sweep '{text}'")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    values = [start + k * step for k in range(count)]
    return [v for v in values if v <= stop + 1e-9 * max(1.0, abs(stop))]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nft",
        description="Benchmark CLI for the nonlinear Fourier transform "
                    "library")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML file with defaults for the "
                                        "options of this subcommand")
        p.add_argument("--example", default=None,
                       choices=["1", "2", "3", "csv"])
        p.add_argument("--signal", default=None, dest="signal_path",
                       help="signal CSV for --example csv")
        p.add_argument("--method", action="append", default=None,
                       help="method id (repeatable or comma-separated): "
                            "cf1 cf2 fcf1 fcf2 fcf_re1 fcf_re2 user")
        p.add_argument("--D", type=_int_list, default=None, dest="d_values",
                       help="comma-separated grid sizes")

    run_p = sub.add_parser("run", help="continuous-spectrum sweep")
    common(run_p)
    run_p.add_argument("--M", type=int, default=None, dest="m_points",
                       help="lambda grid points (default: M = D)")
    run_p.add_argument("--lambda-max", type=float, default=None)
    run_p.add_argument("--amplitude-sweep", type=_amplitude_range,
                       default=None, dest="amplitudes",
                       help="start:step:stop amplitude values (example 1)")
    run_p.add_argument("--repetitions", type=int, default=None,
                       help="timing repetitions, best one reported")
    run_p.add_argument("--threads", type=int, default=None, dest="workers")
    run_p.add_argument("--scheme-a", default=None,
                       help="CSV of coefficients j,k,a_jk for method 'user'")
    run_p.add_argument("--scheme-c", default=None,
                       help="CSV of nodes k,c_k for method 'user'")
    run_p.add_argument("--scheme-order", type=int, default=None)
    run_p.add_argument("--out", default=None, help="results CSV path")
    run_p.add_argument("--plot", default=None, help="SVG plot path")

    eig_p = sub.add_parser("eigen", help="discrete-spectrum sweep")
    common(eig_p)
    eig_p.add_argument("--threads", type=int, default=None, dest="workers")
    eig_p.add_argument("--out", default=None, help="eigenvalue report CSV")

    flop_p = sub.add_parser("flops", help="print the FLOP cost model")
    flop_p.add_argument("--method", action="append", required=True)
    flop_p.add_argument("--D", type=_int_list, required=True,
                        dest="d_values")
    flop_p.add_argument("--M", type=int, default=None, dest="m_points")
    return parser


def _merge_config(args, fields):
    """Option values with TOML defaults filled under command-line flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config, "rb") as f:
            loaded = tomllib.load(f)
        unknown = set(loaded) - set(fields)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in fields:
        arg = getattr(args, name, None)
        if arg is not None:
            values[name] = arg
    return values


def _split_methods(methods):
    out = []
    for entry in methods:
        out.extend(m for m in str(entry).replace(",", " ").split() if m)
    return out


_SWEEP_FIELDS = ("example", "methods", "d_values", "m_points", "lambda_max",
                 "amplitudes", "repetitions", "workers", "signal_path",
                 "scheme_a", "scheme_c", "scheme_order", "out", "plot")


def _build_sweep_config(args):
    fields = dict.fromkeys(_SWEEP_FIELDS)
    if getattr(args, "method", None) is not None:
        args.methods = _split_methods(args.method)
    values = _merge_config(args, list(fields))
    values.setdefault("example", "1")
    values.setdefault("methods", ["cf2"])
    values.setdefault("d_values", [1024])
    values.setdefault("repetitions", 3)
    values.setdefault("workers", 1)
    values.setdefault("scheme_order", 2)
    return SweepConfig(**values)


def _print_table(rows, columns):
    widths = [max(len(c), max((len(r[i]) for r in rows), default=0))
              for i, c in enumerate(columns)]
    line = "  ".join(c.ljust(w) for c, w in zip(columns, widths))
    print(line)
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)))


def _fmt(value, spec="{:.3e}"):
    return "-" if value is None else spec.format(value)


def _cmd_run(args):
    config = _build_sweep_config(args)
    rows, slopes = run_sweep(config)
    table = [[r["method"], _fmt(r["amplitude"], "{:g}"), str(r["d"]),
              _fmt(r["h"], "{:.4g}"), _fmt(r["e_rho"]), _fmt(r["e_b"]),
              _fmt(r["time_s"], "{:.3f}"), _fmt(r["flops"], "{:.3e}")]
             for r in rows]
    _print_table(table, ["method", "q", "D", "h", "E_rho", "E_b", "time_s",
                         "flops"])
    for (method, amplitude), slope in sorted(slopes.items(),
                                             key=lambda kv: str(kv[0])):
        tag = method if amplitude is None else f"{method} (q={amplitude:g})"
        print(f"slope[{tag}] = " + ("-" if slope is None
                                    else f"{slope:.3f}"))
    if config.out:
        print(f"wrote {config.out}")
    if config.plot:
        print(f"wrote {config.plot}")
    return 0


def _cmd_eigen(args):
    config = _build_sweep_config(args)
    if len(config.methods) != 1:
        raise ValueError("eigen takes exactly one --method")
    rows, sets = run_eigen(config)
    table = [[r["method"], str(r["d"]), _fmt(r["h"], "{:.4g}"),
              str(r["n_found"]), _fmt(r["elambda"]),
              _fmt(r["elambda_refined"]), _fmt(r["time_s"], "{:.3f}")]
             for r in rows]
    _print_table(table, ["method", "D", "h", "found", "E_lambda",
                         "E_lambda_raw", "time_s"])
    if config.out:
        write_eigen_csv(config.out,
                        sets[0][1] if len(sets) == 1 else sets)
        print(f"wrote {config.out}")
    return 0


def _cmd_flops(args):
    methods = _split_methods(args.method)
    table = []
    for method in methods:
        method = normalize_method(method)
        for d in args.d_values:
            m = args.m_points if args.m_points else d
            total, _ = flop_count(method, d, m)
            table.append([method, str(d), str(m), f"{total:.6e}"])
    _print_table(table, ["method", "D", "M", "flops"])
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "eigen": _cmd_eigen,
               "flops": _cmd_flops}[args.command]
    try:
        return handler(args)
    except (ValueError, TypeError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
