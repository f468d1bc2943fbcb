"""Command-line front end.

    ocucb run CONFIG --out DIR [--threads N] [--seed S]
    ocucb plot SUMMARY.csv... --out FILE.svg [--envelopes MEANS] [--eta E] [--rho R] [--C C]

``run`` exits 0 when every concentration check passes, 1 when one fails and
2 on configuration or I/O errors. The worker count may also come from the
``OCUCB_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .checks import run_check
from .config import ConfigFileError, RunConfig, load
from .plot import parse_means_spec, plot
from .policies import IndexParams
from .sim import SummaryStats, run_experiment, worker_count

CSV_HEADER = ["policy", "replication_or_AGG", "checkpoint_t", "regret_mean", "regret_stderr"]


def fmt(value: float) -> str:
    return f"{value:.17g}"


@dataclass
class RunManifest:
    config_hash: str
    library_version: str
    numpy_version: str
    duration_seconds: float
    workers: int
    policy_files: Dict[str, str] = field(default_factory=dict)
    summary_file: Optional[str] = None
    conc_file: Optional[str] = None
    conc_passed: Optional[bool] = None

    def to_text(self) -> str:
        lines = [
            f"config_hash = sha256:{self.config_hash}",
            f"library_version = {self.library_version}",
            f"numpy_version = {self.numpy_version}",
            f"duration_seconds = {self.duration_seconds:.3f}",
            f"workers = {self.workers}",
        ]
        for name, path in self.policy_files.items():
            lines.append(f"policy.{name} = {path}")
        if self.summary_file:
            lines.append(f"summary = {self.summary_file}")
        if self.conc_file:
            lines.append(f"conc = {self.conc_file}")
            lines.append(f"conc_passed = {'true' if self.conc_passed else 'false'}")
        return "\n".join(lines) + "\n"


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", name)


def write_policy_csv(path: Path, name: str, stats: SummaryStats) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r, row in enumerate(stats.samples):
            for t, value in zip(stats.checkpoints, row):
                writer.writerow([name, r, int(t), fmt(value), fmt(0.0)])


def write_summary_csv(path: Path, results: Dict[str, SummaryStats]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for name, stats in results.items():
            for t, m, se in zip(stats.checkpoints, stats.mean, stats.stderr):
                writer.writerow([name, "AGG", int(t), fmt(m), fmt(se)])


def write_conc_csv(path: Path, results: List[tuple]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["check", "name", "estimate", "bound", "stderr", "sense", "verdict"])
        for section, check in results:
            writer.writerow([
                section, check.name, fmt(check.estimate), fmt(check.bound), fmt(check.stderr),
                check.sense, "pass" if check.verdict else "FAIL",
            ])


def execute(config: RunConfig, out_dir, workers: Optional[int] = None) -> RunManifest:
    """Run everything in ``config`` and write CSVs plus ``manifest.txt`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    n_workers = worker_count(workers)
    manifest = RunManifest(config.digest(), __version__, np.__version__, 0.0, n_workers)
    if config.experiment is not None:
        results = run_experiment(config.experiment, workers=n_workers)
        for name, stats in results.items():
            filename = f"{safe_name(name)}.csv"
            write_policy_csv(out / filename, name, stats)
            manifest.policy_files[name] = filename
        write_summary_csv(out / "summary.csv", results)
        manifest.summary_file = "summary.csv"
    if config.checks:
        collected = []
        for spec in config.checks:
            collected.extend((spec.name, check) for check in run_check(spec))
        write_conc_csv(out / "conc.csv", collected)
        manifest.conc_file = "conc.csv"
        manifest.conc_passed = all(check.verdict for _, check in collected)
    manifest.duration_seconds = time.perf_counter() - started
    (out / "manifest.txt").write_text(manifest.to_text(), encoding="utf-8")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocucb", description="Anytime UCB bandit experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment / concentration-check config")
    run_p.add_argument("config")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--threads", type=int, default=None, help="worker processes (default: $OCUCB_THREADS or 1)")
    run_p.add_argument("--seed", type=int, default=None, help="override every master seed in the config")

    plot_p = sub.add_parser("plot", help="plot summary CSVs as SVG")
    plot_p.add_argument("summaries", nargs="+")
    plot_p.add_argument("--out", required=True, help="output SVG path")
    plot_p.add_argument("--envelopes", default=None, help="arm means, e.g. '0,-0.3*9'")
    plot_p.add_argument("--eta", type=float, default=2.0)
    plot_p.add_argument("--rho", type=float, default=0.5)
    plot_p.add_argument("--C", dest="constant", type=float, default=1.0, help="upper-envelope constant")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            config = load(args.config)
            if args.seed is not None:
                config = config.with_seed(args.seed)
        except (OSError, ConfigFileError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        try:
            manifest = execute(config, args.out, args.threads)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(manifest.to_text(), end="")
        if manifest.conc_passed is False:
            return 1
        return 0
    try:
        params = IndexParams(eta=args.eta, rho=args.rho)
        means = parse_means_spec(args.envelopes) if args.envelopes else None
        path = plot(args.summaries, args.out, means, params, args.constant)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
