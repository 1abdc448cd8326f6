"""sparselink command-line application.

Parses arguments, configures logging, merges user settings with the
campaign config and command-line overrides, and dispatches subcommands.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from sparselink import __version__
from sparselink.campaign.config import CampaignConfig, load_config
from sparselink.campaign.runner import build_ensemble, run
from sparselink.campaign.stats import network_capacity
from sparselink.channel.io import export_pdp, store_cir
from sparselink.utils.config import LOG_LEVELS, Settings
from sparselink.utils.formatting import format_count, format_se, sanitize_filename

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

ANALYSIS_COMMANDS = ("se-sc", "se-mc", "ber", "stats")


class SparselinkApplication:
    """Command-line front end.

    Owns the user settings and turns each subcommand into calls on the
    campaign package.
    """

    def __init__(self, settings: Settings | None = None) -> None:
        """Initialize the application.

        Args:
            settings: User settings; loaded from the XDG location when None.
        """
        self._settings = settings if settings is not None else Settings.load()

    def build_parser(self) -> argparse.ArgumentParser:
        """Create the argument parser."""
        parser = argparse.ArgumentParser(
            prog="sparselink",
            description="Equalization and link-level evaluation over sparse wideband channels.",
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument("--config", type=Path, help="campaign config (JSON)")
        parser.add_argument("--out", type=Path, help="output directory")
        parser.add_argument("--seed", type=int, help="override ensemble and link seeds")
        parser.add_argument("--threads", type=int, help="worker threads")
        parser.add_argument("--log-level", choices=LOG_LEVELS, help="logging level")
        parser.add_argument("-v", "--verbose", action="store_true", help="shortcut for --log-level DEBUG")

        commands = parser.add_subparsers(dest="command", required=True)

        synth = commands.add_parser("synth", help="generate an ensemble and write CIR and PDP files")
        synth.add_argument("--preset", help="preset family (overrides the config)")
        synth.add_argument("--count", type=int, help="ensemble size (overrides the config)")

        for name in ANALYSIS_COMMANDS:
            commands.add_parser(name, help=f"run the {name} analysis over the ensemble")
        commands.add_parser("run", help="run every analysis listed in the config")

        settings = commands.add_parser("settings", help="show the stored user defaults")
        settings.add_argument(
            "--save",
            action="store_true",
            help="store the given --threads, --log-level and --out as defaults",
        )

        capacity = commands.add_parser("capacity", help="network capacity C = B·M·SE")
        capacity.add_argument("--bandwidth", type=float, required=True, help="bandwidth in Hz")
        capacity.add_argument("--streams", type=float, required=True, help="streams per km²")
        capacity.add_argument("--se", type=float, required=True, help="spectral efficiency in bit/s/Hz")
        return parser

    def run(self, argv: Sequence[str] | None = None) -> int:
        """Run one command.

        Args:
            argv: Arguments without the program name; sys.argv[1:] when None.

        Returns:
            Exit status: 0 on success, 1 on error. Usage errors exit with 2.
        """
        args = self.build_parser().parse_args(argv)
        self._configure_logging(args)

        try:
            if args.command == "capacity":
                return self._cmd_capacity(args)
            if args.command == "settings":
                return self._cmd_settings(args)
            config = self._load_config(args)
            if args.command == "synth":
                return self._cmd_synth(args, config)
            return self._cmd_analysis(args, config)
        except (ValueError, OSError) as e:
            logger.error("%s", e)
            print(f"error: {e}", file=sys.stderr)
            return 1

    def _configure_logging(self, args: argparse.Namespace) -> None:
        level = "DEBUG" if args.verbose else (args.log_level or self._settings.log_level)
        logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)

    def _threads(self, args: argparse.Namespace) -> int:
        threads = args.threads if args.threads is not None else self._settings.threads
        if threads < 1:
            raise ValueError(f"--threads must be at least 1, got {threads}")
        return threads

    def _load_config(self, args: argparse.Namespace) -> CampaignConfig:
        config = load_config(args.config) if args.config else CampaignConfig()
        output = str(args.out) if args.out is not None else None
        return config.with_overrides(output_dir=output, seed=args.seed)

    def _output_dir(self, config: CampaignConfig) -> Path:
        if config.output_dir:
            return Path(config.output_dir).expanduser()
        return self._settings.output_dir()

    def _cmd_analysis(self, args: argparse.Namespace, config: CampaignConfig) -> int:
        if args.command != "run":
            config = replace(config, analyses=(args.command,))
        result = run(config, self._output_dir(config), threads=self._threads(args))
        print(f"{format_count(len(result.files), 'file')} written to {result.output_dir}")
        return 0

    def _cmd_synth(self, args: argparse.Namespace, config: CampaignConfig) -> int:
        ensemble = config.ensemble
        if args.preset is not None or args.count is not None:
            if ensemble.from_files:
                raise ValueError("--preset and --count cannot be used with a file ensemble")
            ensemble = replace(
                ensemble,
                preset=args.preset if args.preset is not None else ensemble.preset,
                count=args.count if args.count is not None else ensemble.count,
            )
            config = replace(config, ensemble=ensemble)

        channels_dir = self._output_dir(config) / "channels"
        channels = build_ensemble(config)
        for cir in channels:
            stem = sanitize_filename(cir.label)
            store_cir(cir, channels_dir / f"{stem}.json")
            export_pdp(cir, channels_dir / f"{stem}_pdp.csv")
        logger.info("Wrote %s to %s", format_count(len(channels), "channel"), channels_dir)
        print(f"{format_count(len(channels), 'channel')} written to {channels_dir}")
        return 0

    def _cmd_settings(self, args: argparse.Namespace) -> int:
        settings = self._settings
        if args.save:
            settings.threads = self._threads(args)
            if args.log_level is not None:
                settings.log_level = args.log_level
            if args.out is not None:
                settings.default_output_dir = str(args.out)
            settings.save()
            logger.info("Stored user defaults")
        print(f"threads: {settings.threads}")
        print(f"log_level: {settings.log_level}")
        print(f"output_dir: {settings.output_dir()}")
        return 0

    def _cmd_capacity(self, args: argparse.Namespace) -> int:
        capacity = network_capacity(args.bandwidth, args.streams, args.se)
        print(f"{capacity:.6g} bit/s/km² ({format_se(args.se)} over {args.bandwidth:g} Hz)")
        return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command-line application."""
    return SparselinkApplication().run(argv)
