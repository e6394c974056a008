#!/usr/bin/env python3
"""
Drift-Simulator CLI

Unterbefehle:
    run <config>                                   Experiment über alle Seeds
    sweep <config> --axis <key> --values <liste>   Parameter-Sweep (optional --plot)
    oracle <suite>                                 Orakel-Abgleich (window, hinge, geometry, theta, all)
    schedule <config>                              Aufgelöste Parameter des Lerners

Exit-Codes: 0 ok, 1 Orakel-Fehlschlag oder I/O-Fehler, 2 Aufruf-/Konfigurationsfehler.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path for imports FIRST
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv  # noqa: E402

import structlog  # noqa: E402

from shared.models.experiment import ExperimentConfig  # noqa: E402
from shared.utils.drift.config_parser import apply_overrides, load_config  # noqa: E402
from shared.utils.drift.experiment_runner import (  # noqa: E402
    describe_schedule,
    run_experiment,
    sweep,
)
from shared.utils.drift.oracles import SUITES, oracle_check  # noqa: E402
from shared.utils.errors import (  # noqa: E402
    ConfigParseError,
    ConfigValidationError,
    ExperimentIOError,
    InvalidParameterError,
)
from shared.utils.log_handler import LOG_LEVELS, configure_logging  # noqa: E402

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Keine Zahlenliste: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftsim", description="Simulator für Lernen unter Concept Drift"
    )
    parser.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_overrides(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", type=Path, help="Konfigurationsdatei (INI)")
        p.add_argument("--seed", type=int, action="append", dest="seeds", help="ersetzt die Seed-Liste")
        p.add_argument("--output-dir", help="Ausgabeverzeichnis")
        p.add_argument("--workers", type=int, help="parallele Seeds")

    add_overrides(sub.add_parser("run", help="Experiment ausführen"))

    sweep_parser = sub.add_parser("sweep", help="Parameter-Sweep")
    add_overrides(sweep_parser)
    sweep_parser.add_argument("--axis", required=True, help="z.B. delta oder window.K")
    sweep_parser.add_argument("--values", required=True, type=_float_list, help="Kommaliste")
    sweep_parser.add_argument("--plot", action="store_true", help="SVG-Plot schreiben")

    oracle_parser = sub.add_parser("oracle", help="Orakel-Abgleich")
    oracle_parser.add_argument("suite", choices=[*SUITES, "all"])
    oracle_parser.add_argument("--seed", type=int, default=0)

    schedule_parser = sub.add_parser("schedule", help="Parameterplan ausgeben")
    schedule_parser.add_argument("config", type=Path)
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    return apply_overrides(
        cfg,
        {
            "experiment.seeds": getattr(args, "seeds", None),
            "experiment.output_dir": getattr(args, "output_dir", None),
            "experiment.workers": getattr(args, "workers", None),
        },
    )


def _cmd_run(args: argparse.Namespace) -> int:
    result = run_experiment(_load(args))
    for row in result.summary:
        print(",".join(row.to_row()))
    if result.summary_path is not None:
        print(f"summary: {result.summary_path}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    result = sweep(_load(args), args.axis, args.values, plot=args.plot)
    print(f"sweep: {result.csv_path}")
    if result.plot_path is not None:
        print(f"plot: {result.plot_path}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    report = oracle_check(args.suite, seed=args.seed)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAILURE


def _cmd_schedule(args: argparse.Namespace) -> int:
    sys.stdout.write(describe_schedule(load_config(args.config)))
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "schedule": _cmd_schedule,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Einstiegspunkt; liefert den Exit-Code."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ConfigParseError, ConfigValidationError, InvalidParameterError) as e:
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExperimentIOError as e:
        print(f"I/O-Fehler: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
