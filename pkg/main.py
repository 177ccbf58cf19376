"""
================================================================================
PLUMBER WORKBENCH - Leakage Template derivation on a simulated memory subsystem
================================================================================

Subcommands:
    run            GTS -> testcases -> simulator -> observation archive (.jsonl)
    analyze        archive -> classes, bit tables (.csv), relations, template (.lt.json)
    match          disassembly listing + template -> candidates, trace labels, confusion matrix
    channel        transmit bits over one of the covert-channel primitives
    bp-experiment  spy-branch misprediction rate for X initial branches and Y nops
    report         plain-text summary of an archive (and optionally a template)

Exit codes:
    0 success, 1 unexpected failure, 2 configuration / schema error,
    3 expansion cap exceeded, 4 I/O error, 5 degenerate classes,
    6 listing parse failures above the threshold

================================================================================
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from analyzer.pipeline import AnalysisPipeline
from exporter.archive import ArchiveError, merge_archives, read_archive
from exporter.bit_table_csv import write_bit_tables
from exporter.lt_json import load_lt, save_lt
from exporter.report import analysis_report, archive_report, lt_report, match_report, write_report
from generator.address_store import InstantiationError
from generator.preprocessor import ExpansionError, ExpansionTooLarge
from matcher.asm_listing import ListingTooBroken, MatcherError, check_error_rate, load_listing
from matcher.asm_pattern import compile_pattern, match_pattern
from matcher.confusion import confusion_report
from matcher.trace_classifier import (
    access_trace, actual_label, classify_trace, random_trace_program, read_trace,
)
from parser.gts_ast import GtsError
from scenarios.branch_experiment import run_bp_experiment
from scenarios.channels import ScenarioError, bit_errors, encode_decode, get_scenario
from simulator.machine import SimConfig
from template.leakage_template import lt_from_analysis
from template.predicate import TemplateError
from threads.runner import ExperimentRunner
from utils.config import ExperimentConfig, load_config
from utils.errors import ConfigError
from utils.path_validator import PathValidationError, PathValidator
from utils.text_io import read_text_file


class AppConfig:
    """Application constants"""
    VERSION = "1.0"
    APP_NAME = "Plumber Workbench"
    DEFAULT_CONFIG = "plumber_config.json"
    LOG_FILE = "plumber.log"
    DEFAULT_PATTERN = Path(__file__).resolve().parent / "fixtures" / "prefetch.pattern"


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_EXPANSION = 3
EXIT_IO = 4
EXIT_DEGENERATE = 5
EXIT_LISTING = 6


def setup_logging(level: str = "INFO", log_file: Optional[str] = AppConfig.LOG_FILE):
    """Configure application logging."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _config(args: argparse.Namespace) -> ExperimentConfig:
    path = args.config
    if path is None and Path(AppConfig.DEFAULT_CONFIG).is_file():
        path = AppConfig.DEFAULT_CONFIG
    overrides = {
        'root_seed': getattr(args, 'seed', None),
        'replacement_policy': getattr(args, 'policy', None),
        'classification_key': getattr(args, 'key', None),
        'class_threshold': getattr(args, 'threshold', None),
        'shard': getattr(args, 'shard', None),
        'processes': getattr(args, 'processes', None),
    }
    config = load_config(path, overrides)
    if args.log_level is None:
        logging.getLogger().setLevel(getattr(logging, str(config.settings['log_level']).upper(), logging.INFO))
    if getattr(args, 'gts', None):
        config.gts_path = str(Path(args.gts).resolve())
    if getattr(args, 'output', None):
        config.archive_path = str(Path(args.output).resolve())
    return config


# Subcommands


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(args)
    runner = ExperimentRunner(config)
    result = runner.run()
    logging.info(f"Run {result['status']}: {result['stats']}")
    for error in result['errors'][:10]:
        logging.error(error)
    if args.merge and result['archive']:
        merged = merge_archives([result['archive'], *args.merge], args.merge_output or result['archive'])
        logging.info(f"Merged {len(args.merge) + 1} shard archives: {merged} records")
    return EXIT_OK if result['status'] == 'ok' else EXIT_FAILURE


def cmd_analyze(args: argparse.Namespace) -> int:
    archive_path = PathValidator.require_file(args.archive, "archive", PathValidator.ARCHIVE_EXTENSIONS)
    archive = read_archive(archive_path)
    settings = archive.settings
    config = ExperimentConfig(settings={**ExperimentConfig().settings, **settings})
    key = args.key or settings.get('classification_key', 'previction-occurred')
    threshold = args.threshold or settings.get('class_threshold', 0.95)
    geom = config.geometry

    output_dir = Path(args.output_dir or Path(args.archive).parent)
    analysis = AnalysisPipeline(geom, key, threshold).run(archive.records)
    write_bit_tables(analysis.tables, output_dir)

    provenance = [Path(args.archive).stem]
    lt = lt_from_analysis(analysis, geom, provenance, settings.get('tested_ranges'))
    lt_path = save_lt(lt, args.lt or output_dir / f"{Path(args.archive).stem}.lt.json")
    report = analysis_report(analysis) + "\n" + lt_report(lt)
    write_report(report, output_dir / f"{Path(args.archive).stem}.report.txt")
    print(report)
    logging.info(f"Leakage template written to {lt_path}")

    if analysis.degenerate:
        logging.error(f"Degenerate classes: {', '.join(analysis.degenerate)}")
        return EXIT_DEGENERATE
    return EXIT_OK


def _simulated_labels(lt, count: int, seed: int) -> Dict[str, List[str]]:
    """Expected and actual labels of random in-range and out-of-range programs"""
    rng = np.random.default_rng(seed)
    geom = lt.geometry
    config = SimConfig(geometry=geom, enable_previction=False)
    expected, actual = [], []
    for i in range(count):
        tc = random_trace_program(rng, geom, in_range=i % 4 != 3)
        expected.append(classify_trace(access_trace(tc), lt, geom))
        actual.append(actual_label(tc, config))
    return {'expected': expected, 'actual': actual}


def cmd_match(args: argparse.Namespace) -> int:
    config = _config(args)
    lt = load_lt(PathValidator.require_file(args.lt, "leakage template", PathValidator.TEMPLATE_EXTENSIONS))
    listing = load_listing(PathValidator.require_file(args.listing, "listing", PathValidator.LISTING_EXTENSIONS))
    check_error_rate(listing, float(config.settings.get('listing_error_threshold', 0.1)))

    pattern = compile_pattern(read_text_file(args.pattern or AppConfig.DEFAULT_PATTERN))
    candidates = match_pattern(listing, pattern)
    logging.info(f"{len(candidates)} candidate sections in {len(listing.sections)} sections")

    labels: Dict[str, str] = {}
    for path in args.traces or []:
        labels[Path(path).stem] = classify_trace(read_trace(path), lt)

    matrix = None
    if args.actual:
        actual = json.loads(read_text_file(args.actual))
        names = sorted(labels)
        matrix = confusion_report([labels[n] for n in names], [actual[n] for n in names])
    elif args.simulate:
        pairs = _simulated_labels(lt, args.simulate, int(config.settings.get('root_seed', 0)))
        matrix = confusion_report(pairs['expected'], pairs['actual'])

    report = match_report(candidates, labels, matrix)
    print(report)
    if args.report:
        write_report(report, args.report)
    if args.candidates:
        with open(args.candidates, 'w', encoding='utf-8') as f:
            json.dump([c.to_dict() for c in candidates], f, indent=2)
    return EXIT_FAILURE if matrix is not None and matrix.failed else EXIT_OK


def cmd_channel(args: argparse.Namespace) -> int:
    if args.bitstring:
        bits = [int(c) for c in args.bitstring if c in "01"]
    else:
        bits = [int(b) for b in np.random.default_rng(args.seed).integers(0, 2, size=args.bits)]
    scenario = get_scenario(args.name, seed=args.seed)
    received = encode_decode(scenario, bits)
    errors = bit_errors(bits, received)
    print(f"{scenario.name}: {len(bits)} bits sent, {errors} bit errors")
    if len(bits) <= 128:
        print(f"sent     {''.join(map(str, bits))}")
        print(f"received {''.join(map(str, received))}")
    return EXIT_OK if errors == 0 else EXIT_FAILURE


def cmd_bp_experiment(args: argparse.Namespace) -> int:
    rate = run_bp_experiment(args.x, args.y, args.trials)
    print(f"X={args.x} Y={args.y} trials={args.trials}: spy misprediction rate {rate:.4f}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    text = archive_report(read_archive(args.archive), args.key)
    if args.lt:
        text += "\n" + lt_report(load_lt(args.lt))
    print(text)
    if args.output:
        write_report(text, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plumber", description=f"{AppConfig.APP_NAME} v{AppConfig.VERSION}")
    parser.add_argument('--log-level', default=None, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument('--log-file', default=AppConfig.LOG_FILE)
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help="execute a GTS family and write an observation archive")
    run.add_argument('--config', help="JSON or TOML experiment configuration")
    run.add_argument('--gts', help="GTS file (overrides gts_path)")
    run.add_argument('--output', help="archive path (overrides archive_path)")
    run.add_argument('--seed', type=int)
    run.add_argument('--policy', choices=['lru', 'fifo', 'random'])
    run.add_argument('--key')
    run.add_argument('--shard', help="k/K")
    run.add_argument('--processes', type=int)
    run.add_argument('--merge', nargs='*', help="shard archives to merge with this run's archive")
    run.add_argument('--merge-output')
    run.set_defaults(func=cmd_run)

    analyze = sub.add_parser('analyze', help="derive relations and a leakage template from an archive")
    analyze.add_argument('archive')
    analyze.add_argument('--key')
    analyze.add_argument('--threshold', type=float)
    analyze.add_argument('--output-dir')
    analyze.add_argument('--lt', help="template output path")
    analyze.set_defaults(func=cmd_analyze)

    match = sub.add_parser('match', help="scan a listing and classify traces with a leakage template")
    match.add_argument('listing')
    match.add_argument('lt')
    match.add_argument('--config')
    match.add_argument('--pattern', help="pattern file (default: the prefetch pattern)")
    match.add_argument('--traces', nargs='*', help="JSONL access traces")
    match.add_argument('--actual', help="JSON object: trace name -> observed label")
    match.add_argument('--simulate', type=int, default=0, help="classify N random simulated programs")
    match.add_argument('--report')
    match.add_argument('--candidates', help="write candidates as JSON")
    match.set_defaults(func=cmd_match)

    channel = sub.add_parser('channel', help="transmit bits over a covert-channel primitive")
    channel.add_argument('--name', required=True, help="PR_FR, PR_PP, PRF_CF, PRF_IS or PRF_OS")
    channel.add_argument('--bits', type=int, default=128)
    channel.add_argument('--bitstring')
    channel.add_argument('--seed', type=int, default=0)
    channel.set_defaults(func=cmd_channel)

    bp = sub.add_parser('bp-experiment', help="branch predictor capacity experiment")
    bp.add_argument('--x', type=int, required=True)
    bp.add_argument('--y', type=int, default=0)
    bp.add_argument('--trials', type=int, default=10240)
    bp.set_defaults(func=cmd_bp_experiment)

    report = sub.add_parser('report', help="summarise an archive")
    report.add_argument('archive')
    report.add_argument('--key')
    report.add_argument('--lt')
    report.add_argument('--output')
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or "INFO", args.log_file)
    logging.info(f"Starting {AppConfig.APP_NAME} v{AppConfig.VERSION}: {args.command}")

    try:
        return args.func(args)
    except ExpansionTooLarge as e:
        logging.error(f"{e}; split the run with --shard k/K")
        return EXIT_EXPANSION
    except (ConfigError, GtsError, ExpansionError, InstantiationError, TemplateError, ScenarioError) as e:
        logging.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except ListingTooBroken as e:
        logging.error(f"Listing rejected: {e}")
        return EXIT_LISTING
    except (ArchiveError, PathValidationError, OSError) as e:
        logging.error(f"I/O error: {e}")
        return EXIT_IO
    except MatcherError as e:
        logging.error(f"Matcher error: {e}")
        return EXIT_FAILURE
    except Exception as e:
        logging.critical(f"Fatal error: {e}", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
