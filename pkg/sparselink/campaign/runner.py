"""Campaign orchestration.

run() materializes the channel ensemble, performs the requested analyses
and writes CSV files plus a manifest.json listing every output with its
SHA-256. Per-channel work is fanned out to a thread pool; results are
gathered in channel order, so the output bytes do not depend on the
number of threads.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from sparselink import __version__
from sparselink.campaign import export
from sparselink.campaign.config import CampaignConfig
from sparselink.campaign.stats import EnsembleStats, ecdf, summarize
from sparselink.channel.cir import ChannelImpulseResponse
from sparselink.channel.io import load_cir
from sparselink.channel.presets import preset_ensemble
from sparselink.core import linksim, multicarrier, singlecarrier
from sparselink.core.ldpc import build_code
from sparselink.core.multicarrier import McConfig
from sparselink.core.singlecarrier import SnrPoint
from sparselink.utils.formatting import format_count, format_duration, format_number, sanitize_filename
from sparselink.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

# Target BER for the required-SNR summary
SUMMARY_TARGET_BER = 1e-4


@dataclass
class RunResult:
    """What a campaign run produced."""

    output_dir: Path
    files: list[Path] = field(default_factory=list)
    channel_labels: list[str] = field(default_factory=list)


def build_ensemble(config: CampaignConfig) -> list[ChannelImpulseResponse]:
    """Synthesize or load the configured channels."""
    ens = config.ensemble
    if ens.from_files:
        channels = [load_cir(name) for name in ens.files]
        logger.info("Loaded %s", format_count(len(channels), "channel"))
        return channels
    return preset_ensemble(ens.preset, ens.count, ens.seed, config.preset_ranges)


def run(config: CampaignConfig, output_dir: Path, threads: int = 1) -> RunResult:
    """Execute a campaign.

    Args:
        config: The campaign.
        output_dir: Destination; created if missing.
        threads: Worker threads.

    Returns:
        The produced files, manifest last.

    Raises:
        ConfigError: If files are missing or output_dir is unusable; raised
            before any computation.
    """
    config.validate(output_dir)
    started = time.monotonic()
    result = RunResult(output_dir=output_dir)

    channels = build_ensemble(config)
    result.channel_labels = [c.label for c in channels]
    snrs = [SnrPoint(v) for v in config.snr_db_list]
    wanted = set(config.analyses)

    sc_rows: list[export.ScRow] = []
    mc_rows: list[export.McRow] = []
    if wanted & {"se-sc", "stats"}:
        sc_rows = _single_carrier(channels, snrs, config, threads)
        if "se-sc" in wanted:
            result.files.append(export.write_se_sc(output_dir / "se_sc.csv", sc_rows))
    if wanted & {"se-mc", "stats"}:
        mc_rows = _multi_carrier(channels, snrs, config, threads)
        if "se-mc" in wanted:
            result.files.append(export.write_se_mc(output_dir / "se_mc.csv", mc_rows))
            if config.dump_subcarriers:
                result.files.extend(_dump_subcarriers(channels, snrs, config, output_dir))

    ber_records: list[list[linksim.BerRecord]] = []
    if "ber" in wanted:
        ber_records = _link_simulation(channels, config, threads)
        rows = []
        for cir, records in zip(channels, ber_records):
            limit = linksim.shannon_limit_snr(1.0, cir)
            rows.extend(export.ber_rows(cir.label, records, limit))
        result.files.append(export.write_ber(output_dir / "ber.csv", rows))

    if "stats" in wanted:
        result.files.extend(_statistics(channels, snrs, config, sc_rows, mc_rows, ber_records,
                                        output_dir, threads))

    result.files.append(_write_manifest(config, result))
    logger.info("Campaign finished in %s: %s written to %s",
                format_duration(time.monotonic() - started),
                format_count(len(result.files), "file"), output_dir)
    return result


def _single_carrier(
    channels: list[ChannelImpulseResponse], snrs: list[SnrPoint], config: CampaignConfig, threads: int
) -> list[export.ScRow]:
    def work(cir: ChannelImpulseResponse) -> list[export.ScRow]:
        rows = []
        for snr in snrs:
            for design in singlecarrier.design_sweep(cir, snr, config.n_list):
                rows.append(export.ScRow(cir.label, snr.snr_db, design.n_taps,
                                         design.decision_delay, design.sinr_db, design.se_bits))
        return rows

    rows = [row for chunk in ordered_map(work, channels, threads) for row in chunk]
    logger.info("Single-carrier sweep: %s", format_count(len(rows), "result"))
    return rows


def _multi_carrier(
    channels: list[ChannelImpulseResponse], snrs: list[SnrPoint], config: CampaignConfig, threads: int
) -> list[export.McRow]:
    def work(cir: ChannelImpulseResponse) -> list[export.McRow]:
        rows = []
        for snr in snrs:
            for k in config.k_list:
                q_range = [0] if config.q_policy == "none" else config.mc_q_range
                cfg, se = multicarrier.optimize_cfg(cir, snr, k, q_range, config.mc_s_range,
                                                    config.prefix_kind)
                rows.append(export.McRow(cir.label, snr.snr_db, k, cfg.prefix_len,
                                         cfg.window_offset, se))
        return rows

    rows = [row for chunk in ordered_map(work, channels, threads) for row in chunk]
    logger.info("Multi-carrier sweep: %s", format_count(len(rows), "result"))
    return rows


def _dump_subcarriers(
    channels: list[ChannelImpulseResponse], snrs: list[SnrPoint], config: CampaignConfig, output_dir: Path
) -> list[Path]:
    """Per-subcarrier powers at Q = 0 and the best window offset."""
    paths = []
    for cir in channels:
        for snr in snrs:
            for k in config.k_list:
                cfg, _ = multicarrier.optimize_cfg(cir, snr, k, [0], config.mc_s_range,
                                                   config.prefix_kind)
                analysis = multicarrier.analyze(cir, snr, cfg)
                name = sanitize_filename(f"{cir.label}_snr{format_number(snr.snr_db)}_k{k}.csv")
                paths.append(export.write_subcarriers(output_dir / "subcarriers" / name, analysis))
    return paths


def _link_simulation(
    channels: list[ChannelImpulseResponse], config: CampaignConfig, threads: int
) -> list[list[linksim.BerRecord]]:
    code = build_code()
    results = []
    for index, cir in enumerate(channels):
        logger.info("BER sweep for %s (%d/%d)", cir.label, index + 1, len(channels))
        results.append(linksim.sweep_snr(cir, config.link, code, stream_keys=(index,), threads=threads))
    return results


def _statistics(
    channels: list[ChannelImpulseResponse],
    snrs: list[SnrPoint],
    config: CampaignConfig,
    sc_rows: list[export.ScRow],
    mc_rows: list[export.McRow],
    ber_records: list[list[linksim.BerRecord]],
    output_dir: Path,
    threads: int,
) -> list[Path]:
    entries: list[tuple[float, str, int, EnsembleStats]] = []
    for snr in snrs:
        for n in config.n_list:
            values = [r.se_bits for r in sc_rows if r.snr_db == snr.snr_db and r.n_taps == n]
            entries.append((snr.snr_db, "n_taps", n, ecdf(values)))
        for k in config.k_list:
            values = [r.se_bits for r in mc_rows if r.snr_db == snr.snr_db and r.k == k]
            entries.append((snr.snr_db, "k", k, ecdf(values)))

    files = [
        export.write_stats(output_dir / "stats.csv", entries),
        export.write_ecdf(output_dir / "ecdf.csv", entries),
    ]

    # N-tap single carrier against prefix-less multi-carrier at every K
    n_taps = config.n_list[-1]

    def compare(cir: ChannelImpulseResponse) -> list[export.CompareRow]:
        rows = []
        for snr in snrs:
            for k in config.k_list:
                se_sc, se_mc = multicarrier.compare_sc_mc(cir, snr, n_taps, k)
                rows.append(export.CompareRow(cir.label, snr.snr_db, n_taps, k, se_sc, se_mc))
        return rows

    compare_rows = [row for chunk in ordered_map(compare, channels, threads) for row in chunk]
    files.append(export.write_compare(output_dir / "compare.csv", compare_rows))

    if ber_records:
        summary_rows = []
        for i, snr in enumerate(config.link.snr_points):
            bers = [records[i].coded_ber for records in ber_records]
            median, worst, best = summarize(bers, higher_is_better=False)
            summary_rows.append((snr.snr_db, median, worst, best))
        files.append(export.write_ber_summary(output_dir / "ber_summary.csv", summary_rows))
        for cir, records in zip(channels, ber_records):
            gap = linksim.shannon_gap(records, SUMMARY_TARGET_BER, cir)
            if gap is not None:
                logger.info("%s: %.2f dB from the Shannon limit at BER %g",
                            cir.label, gap, SUMMARY_TARGET_BER)
    return files


def _write_manifest(config: CampaignConfig, result: RunResult) -> Path:
    """Describe the run; no timestamps, so identical runs give identical bytes."""
    output_dir = result.output_dir
    document = {
        "tool": "sparselink",
        "version": __version__,
        "config_sha256": config.digest(),
        "config": {k: v for k, v in config.to_dict().items() if k != "output_dir"},
        "seeds": {
            "ensemble": None if config.ensemble.from_files else config.ensemble.seed,
            "link": config.link.seed,
        },
        "channels": result.channel_labels,
        "files": {
            path.relative_to(output_dir).as_posix(): export.file_digest(path)
            for path in result.files
        },
    }
    path = output_dir / MANIFEST_NAME
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=1, sort_keys=True)
        f.write("\n")
    return path
