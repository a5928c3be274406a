"""``vortexgate`` command-line entry point.

Exit codes: 0 on success, 2 for scenario errors, 3 for numerical or
physical failures, 4 when ``--seed-check`` finds differing artifacts.
"""
from __future__ import annotations

import argparse
import filecmp
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..errors import VortexGateError
from .run import run_scenario
from .scenario import ConfigError, load_scenario, shipped_scenarios

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NONDETERMINISTIC = 0, 2, 3, 4
VOLATILE = ("timings.json",)


def _parser():
    ap = argparse.ArgumentParser(prog="vortexgate", description="Run OAM qubit gate scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file or a shipped scenario")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario TOML file or shipped scenario name")
    src.add_argument("--batch", help="directory of scenario TOML files, run in parallel")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=None, help="processes for --batch")
    run.add_argument("--seed-check", action="store_true",
                     help="run twice and require byte-identical artifacts")
    sub.add_parser("list", help="list shipped scenarios")
    return ap


def _report(summary) -> str:
    return (f"{summary.scenario}: fidelity {summary.fidelity:.6f}, residual {summary.residual:.3e}, "
            f"I(-1) share {summary.oam_minus_one_share:.4f}, {summary.timings['total_s']:.2f} s")


def _differences(a: Path, b: Path):
    names = sorted({p.name for p in a.iterdir()} | {p.name for p in b.iterdir()})
    names = [n for n in names if n not in VOLATILE]
    return [n for n in names
            if not ((a / n).exists() and (b / n).exists() and filecmp.cmp(a / n, b / n, shallow=False))]


def run_one(config, out: Path, seed_check: bool = False) -> int:
    """Run a single scenario; returns an exit code and prints errors to stderr."""
    try:
        scenario = load_scenario(config)
        summary = run_scenario(scenario, out)
        if seed_check:
            with tempfile.TemporaryDirectory() as tmp:
                run_scenario(scenario, tmp)
                diff = _differences(out, Path(tmp))
            if diff:
                print(f"error: {scenario.name}: artifacts differ between runs: {diff}", file=sys.stderr)
                return EXIT_NONDETERMINISTIC
    except ConfigError as exc:
        print(f"error: {config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VortexGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(_report(summary))
    return EXIT_OK


def _batch(directory: Path, out: Path, workers, seed_check) -> int:
    files = sorted(directory.glob("*.toml"))
    if not files:
        print(f"error: no scenario files in {directory}", file=sys.stderr)
        return EXIT_CONFIG
    with ProcessPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(run_one, files, [out / f.stem for f in files], [seed_check] * len(files)))
    return max(codes)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name in shipped_scenarios():
            print(name)
        return EXIT_OK
    out = Path(args.out)
    if args.batch:
        return _batch(Path(args.batch), out, args.workers, args.seed_check)
    return run_one(args.config, out, args.seed_check)


if __name__ == "__main__":
    sys.exit(main())
