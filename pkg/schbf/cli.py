"""
Command-line surface: ``python -m schbf <command>``.

Commands:
    solve      design one EVD-HBF solution for the first trial channel
    ber-sweep  BER versus SNR for every configured scheme
    nrf-sweep  BER versus number of RF chains at a fixed SNR
    selftest   run the property suites
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from schbf import config
from schbf.channel import save_channel
from schbf.database import record_sweep
from schbf.exceptions import SchbfError
from schbf.experiments import ExperimentConfig, ExperimentRunner, summarize, write_table
from schbf.hbf import solve_hbf
from schbf.logging_config import setup_logging
from schbf.presets import get_available_presets
from schbf.serialization import solve_report, write_json

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schbf", description="EVD hybrid beamforming design and SC-FDE link simulation")
    parser.add_argument("--log-level", default=None, help=f"logging level (default {config.LOG_LEVEL})")
    parser.add_argument("--log-json", action="store_true", default=None, help="structured JSON logs on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("solve", "dump one EVD-HBF solution"),
        ("ber-sweep", "BER versus SNR"),
        ("nrf-sweep", "BER versus number of RF chains"),
    ):
        sub = commands.add_parser(name, help=help_text)
        source = sub.add_mutually_exclusive_group()
        source.add_argument("--config", type=Path, help="experiment config file (JSON)")
        source.add_argument("--preset", choices=get_available_presets(), help="named experiment preset")
        sub.add_argument("--out", type=Path, default=Path(config.OUTPUT_DIRECTORY), help="output directory")
        sub.add_argument("--seed", type=int, help="root seed (overrides config)")
        sub.add_argument("--trials", type=int, help="channel realizations per point (overrides config)")
        if name == "solve":
            sub.add_argument("--snr-db", type=float, help="operating SNR (default: first SNR of the config)")
        else:
            sub.add_argument("--db", help="SQLAlchemy URL for the run history (default SCHBF_DATABASE_URL)")

    commands.add_parser("selftest", help="run the property suites")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_file(args.config)
    elif args.preset is not None:
        cfg = ExperimentConfig.from_preset(args.preset)
    else:
        cfg = ExperimentConfig()
    return cfg.with_overrides(seed=args.seed, trials=args.trials)


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    runner = ExperimentRunner(cfg)
    snr_db = args.snr_db
    if snr_db is None:
        snr_db = cfg.snr_db[0] if cfg.sweep == "snr" else cfg.fixed_snr_db
    channel, _, channel_freq = runner.trial_channel(0)
    solution, diagnostics = solve_hbf(channel_freq, cfg.system(cfg.n_rf, snr_db), runner.solver_config(0))

    resolved = dict(cfg.to_dict(), solve_snr_db=snr_db)
    solution_path = write_json(solve_report(solution, diagnostics, resolved), args.out / "solution.json")
    save_channel(channel, args.out / "channel.json")
    print(f"Solution written to {solution_path}")
    print(json.dumps(diagnostics.to_dict(), indent=2))
    return 0


def _run_sweep(args: argparse.Namespace, kind: str) -> int:
    cfg = load_config(args).with_overrides(sweep=kind)
    runner = ExperimentRunner(cfg)
    table = runner.run_snr_sweep() if kind == "snr" else runner.run_nrf_sweep()

    resolved = cfg.to_dict()
    stem = f"{cfg.name}_{kind}_sweep"
    csv_path = write_table(table, args.out / f"{stem}.csv", resolved)
    write_json(runner.diagnostics_report(), args.out / f"{stem}_diagnostics.json")
    if args.db or config.DATABASE_URL:
        run_id = record_sweep(table, kind, resolved, csv_path=str(csv_path), url=args.db)
        print(f"Stored as run {run_id}")

    print(f"Results written to {csv_path}")
    print(json.dumps(summarize(table), indent=2, sort_keys=True))
    return 0


def cmd_ber_sweep(args: argparse.Namespace) -> int:
    return _run_sweep(args, "snr")


def cmd_nrf_sweep(args: argparse.Namespace) -> int:
    return _run_sweep(args, "n_rf")


def cmd_selftest(args: argparse.Namespace) -> int:
    from schbf.selftest import run_selftest

    results = run_selftest()
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} suite(s) failed: {', '.join(failed)}")
        return 1
    print(f"All {len(results)} suites passed")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "ber-sweep": cmd_ber_sweep,
    "nrf-sweep": cmd_nrf_sweep,
    "selftest": cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_json)
    try:
        return COMMANDS[args.command](args)
    except (SchbfError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
