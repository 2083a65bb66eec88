"""Batch command-line interface.

Subcommands:

    run             execute one experiment from a config file
    sweep           execute a single-axis parameter sweep (CRN across scenarios)
    diff            compare two machine-readable result CSVs at a tolerance
    example-config  print or write a shipped example configuration
    serve           start the HTTP service
    selftest        run the embedded verification suite

Exit codes: 0 success / within tolerance, 1 tolerance failure, 2 usage or
configuration error. No interactive prompts; suitable for scripting. The
environment variable WARDSIM_SEED is the lowest-priority seed source
(flag beats config file beats environment).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .config import (
    apply_overrides,
    example_document,
    experiment_to_document,
    load_experiment_file,
)
from .errors import ConfigError
from .experiment import ResultSet, run_scenarios, run_single
from .figures import render_all
from .reporting import (
    ResultsTable,
    compare_results,
    parse_machine_csv,
    render_machine_csv,
    render_table,
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wardsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wardsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_arguments(p):
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--replications", type=int, default=None)
        p.add_argument("--run-length", type=float, default=None, help="model time units")
        p.add_argument("--warm-up", type=float, default=None, help="model time units")
        p.add_argument("--trace", action="store_true", default=None, help="write event trace files")
        p.add_argument("--out", default="wardsim_out", help="output directory")
        p.add_argument("--format", choices=("csv", "md"), default=None,
                       help="write only this human table format (default: both)")
        p.add_argument("--no-figures", action="store_true", help="skip chart rendering")

    run_parser = sub.add_parser("run", help="run one experiment")
    add_run_arguments(run_parser)

    sweep_parser = sub.add_parser("sweep", help="run a single-axis parameter sweep")
    add_run_arguments(sweep_parser)
    sweep_parser.add_argument("--param", required=True, help="experiment field to sweep (e.g. n_beds)")
    sweep_parser.add_argument("--values", required=True,
                              help="sweep values: 'lo:hi' inclusive integer range or comma list")

    diff_parser = sub.add_parser("diff", help="compare two machine result CSVs")
    diff_parser.add_argument("results_a")
    diff_parser.add_argument("results_b")
    diff_parser.add_argument("--tol", type=float, default=0.05, help="relative tolerance (default 0.05)")

    example_parser = sub.add_parser("example-config", help="emit a shipped example configuration")
    example_parser.add_argument("model", choices=("ccu", "stroke"))
    example_parser.add_argument("--out", default=None, help="write to file instead of stdout")

    serve_parser = sub.add_parser("serve", help="start the HTTP API service")
    serve_parser.add_argument("--bind", default="127.0.0.1:8000", help="host:port (default 127.0.0.1:8000)")
    serve_parser.add_argument("--cors-origin", action="append", default=None,
                              help="allowed CORS origin for the web UI (repeatable, or '*')")

    selftest_parser = sub.add_parser("selftest", help="run the embedded verification suite")
    selftest_parser.add_argument("--model", choices=("ccu", "stroke", "all"), default="all")

    return parser


def _seed_from_env():
    raw = os.environ.get("WARDSIM_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("WARDSIM_SEED", f"must be an integer, got {raw!r}")


def _load_with_overrides(args):
    exp = load_experiment_file(args.config)
    env_seed = _seed_from_env()
    if args.seed is None and "seed" not in _raw_keys(args.config) and env_seed is not None:
        exp = apply_overrides(exp, seed=env_seed)
    return apply_overrides(
        exp,
        seed=args.seed,
        replications=args.replications,
        run_length=args.run_length,
        warm_up=args.warm_up,
        trace=args.trace,
    )


def _raw_keys(config_path) -> set:
    try:
        with open(config_path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
        return set(doc) if isinstance(doc, dict) else set()
    except (OSError, json.JSONDecodeError):
        return set()


def _parse_values(spec: str):
    if ":" in spec:
        lo, _, hi = spec.partition(":")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise ConfigError("values", f"range bounds must be integers, got {spec!r}")
        if hi_i < lo_i:
            raise ConfigError("values", f"empty range {spec!r}")
        return list(range(lo_i, hi_i + 1))
    values = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(int(part))
        except ValueError:
            try:
                values.append(float(part))
            except ValueError:
                raise ConfigError("values", f"not a number: {part!r}")
    if not values:
        raise ConfigError("values", "no sweep values given")
    return values


def _write_outputs(results: ResultSet, args) -> None:
    """Write every output file for a run/sweep. Nothing is written until the
    simulation has completed, so a failed run leaves no partial files."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = ResultsTable.from_result_set(results)
    if args.format in (None, "csv"):
        (out_dir / "results.csv").write_text(render_table(table, "csv"), encoding="utf-8")
    if args.format in (None, "md"):
        (out_dir / "results.md").write_text(render_table(table, "markdown"), encoding="utf-8")
    (out_dir / "results_full.csv").write_text(render_machine_csv(table), encoding="utf-8")

    if results.param is None:
        scenario = results.scenarios[0]
        for unit, dist in scenario.occupancy.items():
            lines = ["occupancy,probability"]
            pmf = dist.pmf()
            for level in sorted(pmf):
                lines.append(f"{level},{pmf[level]!r}")
            (out_dir / f"occupancy_{unit}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        for unit, curve in scenario.delay.items():
            lines = ["capacity,p_delay"]
            for capacity, p in zip(curve.capacities, curve.probabilities):
                lines.append(f"{capacity},{p!r}")
            (out_dir / f"delay_{unit}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    if any(s.replications[0].trace_lines is not None for s in results.scenarios):
        for scenario in results.scenarios:
            suffix = "" if results.param is None else f"_{scenario.label.replace('=', '-')}"
            for rep in scenario.replications:
                if rep.trace_lines is None:
                    continue
                path = out_dir / f"trace{suffix}_rep{rep.replication_index}.txt"
                text = "\n".join(rep.trace_lines)
                path.write_text(text + "\n" if text else "", encoding="utf-8")

    if not args.no_figures:
        render_all(results, out_dir / "figures")


def _cmd_run(args) -> int:
    exp = _load_with_overrides(args)
    results = run_single(exp)
    _write_outputs(results, args)
    print(f"wrote results for model {results.model_id!r} (seed {results.master_seed}) to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    exp = _load_with_overrides(args)
    values = _parse_values(args.values)
    results = run_scenarios(exp, args.param, values)
    _write_outputs(results, args)
    print(f"wrote {len(values)}-scenario sweep of {args.param!r} (seed {results.master_seed}) to {args.out}")
    return EXIT_OK


def _cmd_diff(args) -> int:
    try:
        table_a = parse_machine_csv(Path(args.results_a).read_text(encoding="utf-8"))
        table_b = parse_machine_csv(Path(args.results_b).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = compare_results(table_a, table_b, args.tol)
    except ValueError as exc:
        print(f"shape mismatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for cell in report.cells:
        marker = "ok  " if cell.within else "FAIL"
        print(f"{marker} {cell.kpi} @ {cell.scenario}: {cell.mean_a!r} vs {cell.mean_b!r} "
              f"(rel diff {cell.rel_diff:.4f})")
    failures = report.failures()
    print(f"max relative difference {report.max_rel_diff:.4f} at tolerance {report.tolerance}")
    if failures:
        print(f"{len(failures)} cell(s) outside tolerance")
        return EXIT_TOLERANCE
    print("all cells within tolerance")
    return EXIT_OK


def _cmd_example_config(args) -> int:
    doc = example_document(args.model)
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.model} example config to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: --bind must be host:port, got {args.bind!r}", file=sys.stderr)
        return EXIT_USAGE
    app = create_app(cors_origins=args.cors_origin)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(args.model, verbose=True) else EXIT_TOLERANCE


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "diff": _cmd_diff,
    "example-config": _cmd_example_config,
    "serve": _cmd_serve,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalise other codes
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
