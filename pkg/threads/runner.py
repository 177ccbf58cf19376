# -*- coding: utf-8 -*-
"""
Experiment Runner
parse -> expand -> instantiate -> execute (worker pool) -> observation archive

Variants are numbered across all families of one run so testcase ids stay
unique in grids. Sharding keeps every K-th testcase of that global order.
Each trial runs on a fresh simulator state whose generator is seeded from
(root seed, variant, testcase index, trial); deterministic replacement
policies execute once and the outcome counts are scaled to the trial count.
"""

import dataclasses
import logging
import os
import queue
import threading
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from analyzer.classifier import label_observation
from exporter.archive import make_header, write_archive
from generator.instantiator import Testcase, count_testcases, instantiate_family
from generator.preprocessor import ExpansionTooLarge, Preprocessor
from parser.gts_ast import GtsAst
from parser.gts_parser import load_gts_file, parse_gts, render_gts
from simulator.cache import ReplacementPolicy
from simulator.machine import SimConfig, Simulator
from simulator.observation import ObservationRecord
from utils.config import CLASSIFICATION_KEYS, ExperimentConfig
from utils.errors import ConfigError

BATCH_SIZE = 256
DEFAULT_ARCHIVE_NAME = "observations.jsonl"


def _trial_seed(root_seed: int, tc: Testcase, trial: int) -> List[int]:
    index = int(tc.testcase_id.rsplit("-", 1)[-1])
    return [int(root_seed), int(tc.variant_id), index, int(trial)]


def execute_testcase(tc: Testcase, settings: Mapping[str, Any]) -> ObservationRecord:
    """All trials of one testcase on fresh simulator states"""
    config = SimConfig.from_settings(settings)
    deterministic = config.policy is not ReplacementPolicy.RANDOM
    runs = 1 if deterministic else tc.run_count

    outcomes: Dict[str, Dict[str, int]] = {key: {} for key in CLASSIFICATION_KEYS}
    first = None
    loads = tc.load_addresses
    anchor = config.geometry.line_address(loads[0]) if loads else None
    for trial in range(runs):
        rng = np.random.default_rng(_trial_seed(config.seed, tc, trial))
        obs = Simulator(config, rng).execute(tc)
        if first is None:
            first = obs
        weight = tc.run_count if deterministic else 1
        for key in CLASSIFICATION_KEYS:
            label = label_observation(key, obs, anchor)
            outcomes[key][label] = outcomes[key].get(label, 0) + weight

    load_positions = [i for i, instr in enumerate(tc.instructions) if instr.is_load]
    return ObservationRecord(
        testcase_id=tc.testcase_id,
        variant_id=tc.variant_id,
        coordinates=tuple(tc.coordinates),
        mutation_mode=tc.mutation_mode,
        mutated_addresses=tuple(tc.mutated_addresses),
        load_addresses=tuple(loads),
        mutated_loads=tuple(load_positions.index(p) + 1 for p in tc.mutated_positions),
        trials=tc.run_count,
        outcomes=outcomes,
        observation=first,
        provenance=tc.provenance,
        params=dict(tc.params),
        seed=config.seed,
    )


def _execute_worker(job: dict) -> dict:
    """
    Worker executing one batch of testcases.
    Must be top-level to stay picklable for spawned processes.

    Args:
        job: Dict containing:
            - settings: experiment settings
            - testcases: list of Testcase dicts

    Returns:
        Dict with records (dicts) and errors
    """
    logger = logging.getLogger(__name__)
    records, errors = [], []
    for data in job["testcases"]:
        try:
            records.append(execute_testcase(Testcase.from_dict(data), job["settings"]).to_dict())
        except Exception as e:
            logger.error(f"Testcase {data.get('testcase_id')} failed: {e}", exc_info=True)
            errors.append(f"{data.get('testcase_id')}: {e}")
    return {"records": records, "errors": errors}


@dataclasses.dataclass
class FamilySpec:
    """One GTS family of a run, with the parameter values it was built from"""
    gts: Union[str, GtsAst]
    params: Dict[str, int] = dataclasses.field(default_factory=dict)

    def ast(self) -> GtsAst:
        return parse_gts(self.gts) if isinstance(self.gts, str) else self.gts


class ExperimentRunner:
    """Runs testcase families through the simulator and collects observation records"""

    def __init__(self, config: Optional[ExperimentConfig] = None,
                 progress_queue: Optional[queue.Queue] = None,
                 cancel_event: Optional[threading.Event] = None):
        self.config = config or ExperimentConfig()
        self.settings = self.config.settings
        self.progress_queue = progress_queue
        self.cancel_event = cancel_event
        self.logger = logging.getLogger(__name__)
        self.stats = {'families': 0, 'variants': 0, 'testcases': 0, 'executed': 0, 'errors': 0}
        self.errors: List[str] = []
        self.cancelled = False

    def _update_progress(self, percent: int, message: str):
        if self.progress_queue is not None:
            self.progress_queue.put(("progress", (percent, message)))

    def _cancelled(self) -> bool:
        return self.cancel_event is not None and self.cancel_event.is_set()

    # Testcase generation

    def generate(self, families: Sequence[FamilySpec]) -> List[Testcase]:
        """Expanded and instantiated testcases of this run's shard"""
        geom = self.config.geometry
        seed = int(self.settings.get('root_seed', 0))
        cap = int(self.settings.get('expansion_cap', 1 << 22))
        pins = dict(self.settings.get('store_pins', {}))
        shard, shards = self.config.shard

        testcases: List[Testcase] = []
        offset = 0
        total = 0
        for family in families:
            variants = Preprocessor(seed, cap).expand(family.ast())
            renumbered = [(dataclasses.replace(s, variant_id=offset + s.variant_id), p) for s, p in variants]
            offset += len(variants)
            total += sum(count_testcases(p, geom) for _, p in variants)
            if total > cap:
                raise ExpansionTooLarge(cap, total)
            for tc in instantiate_family(renumbered, geom, seed, pins):
                if family.params:
                    tc = dataclasses.replace(tc, params={**tc.params, **family.params})
                testcases.append(tc)

        self.stats['families'] = len(families)
        self.stats['variants'] = offset
        self.stats['testcases'] = total
        selected = [tc for i, tc in enumerate(testcases) if i % shards == shard]
        self.logger.info(f"Generated {total} testcases from {offset} variants; "
                         f"shard {shard}/{shards} keeps {len(selected)}")
        return selected

    # Execution

    def execute(self, testcases: Sequence[Testcase]) -> List[ObservationRecord]:
        processes = max(1, min(int(self.settings.get('processes') or 1), os.cpu_count() or 1))
        settings = dict(self.settings)
        jobs = [{"settings": settings, "testcases": [tc.to_dict() for tc in testcases[i:i + BATCH_SIZE]]}
                for i in range(0, len(testcases), BATCH_SIZE)]

        records: List[ObservationRecord] = []
        errors: List[str] = []
        self.cancelled = False

        def collect(result: dict):
            records.extend(ObservationRecord.from_dict(r) for r in result.get("records", []))
            errors.extend(result.get("errors", []))
            done = len(records) + len(errors)
            self._update_progress(int(100 * done / max(1, len(testcases))),
                                  f"Executed {done}/{len(testcases)} testcases")

        if processes <= 1 or len(jobs) <= 1:
            self.logger.info("Testcase execution in sequential mode")
            for job in jobs:
                if self._cancelled():
                    self.cancelled = True
                    break
                collect(_execute_worker(job))
        else:
            self.logger.info(f"Testcase execution with {processes} processes, {len(jobs)} batches")
            with ProcessPoolExecutor(max_workers=processes) as pool:
                futures = [pool.submit(_execute_worker, job) for job in jobs]
                for fut in as_completed(futures):
                    if self._cancelled():
                        self.cancelled = True
                        for pending in futures:
                            pending.cancel()
                        break
                    try:
                        collect(fut.result())
                    except Exception as e:
                        self.logger.error(f"Execution worker failed: {e}", exc_info=True)
                        errors.append(str(e))

        if self.cancelled:
            self.logger.warning(f"Run cancelled after {len(records)}/{len(testcases)} testcases")
        self.stats['executed'] = len(records)
        self.stats['errors'] = len(errors)
        self.errors = errors
        records.sort(key=lambda r: r.testcase_id)
        return records

    def run_families(self, families: Sequence[FamilySpec]) -> List[ObservationRecord]:
        return self.execute(self.generate(families))

    def run_family(self, gts: Union[str, GtsAst], params: Optional[Dict[str, int]] = None) -> List[ObservationRecord]:
        return self.run_families([FamilySpec(gts, dict(params or {}))])

    def run_grid(self, template: str, grid: Iterable[Mapping[str, int]]) -> List[ObservationRecord]:
        """One family per grid point; the template is formatted with the point's values"""
        families = [FamilySpec(template.format(**point), dict(point)) for point in grid]
        return self.run_families(families)

    # Archive

    def family_header(self, families: Sequence[FamilySpec]) -> Dict[str, Any]:
        family = {
            'gts': [render_gts(f.ast()) for f in families],
            'params': [dict(sorted(f.params.items())) for f in families],
            'variants': self.stats['variants'],
            'testcases': self.stats['testcases'],
        }
        return make_header(self.config.to_dict(), family)

    def archive_path(self) -> Path:
        if self.config.archive_path:
            return self.config.resolve(self.config.archive_path)
        return self.config.resolve(self.config.output_dir) / DEFAULT_ARCHIVE_NAME

    def run(self, families: Optional[Sequence[FamilySpec]] = None) -> Dict[str, Any]:
        """Run the configured GTS file (or the given families) and write the archive"""
        if families is None:
            if not self.config.gts_path:
                raise ConfigError("no gts_path configured")
            gts_path = self.config.resolve(self.config.gts_path)
            if not gts_path.is_file():
                raise ConfigError(f"GTS file not found: {gts_path}")
            families = [FamilySpec(load_gts_file(gts_path))]

        self._update_progress(0, "Expanding testcase families")
        records = self.run_families(families)
        if self.cancelled:
            # no archive for a partial run
            message = f"run cancelled after {len(records)} of {self.stats['testcases']} testcases"
            return {'status': 'cancelled', 'stats': dict(self.stats), 'errors': [*self.errors, message],
                    'archive': None}

        path = self.archive_path()
        write_archive(path, self.family_header(families), records)
        errors = list(self.errors)
        status = 'ok' if not errors else 'error'
        self.logger.info(f"Run finished: {self.stats['executed']} records, {len(errors)} errors -> {path}")
        return {'status': status, 'stats': dict(self.stats), 'errors': errors, 'archive': str(path)}


def run_gts(gts: Union[str, GtsAst], settings: Optional[Dict[str, Any]] = None,
            params: Optional[Dict[str, int]] = None) -> List[ObservationRecord]:
    """Run one family in-process with settings overlaid on the defaults"""
    config = ExperimentConfig()
    config.settings.update({'processes': 1, **(settings or {})})
    return ExperimentRunner(config.validate()).run_family(gts, params)
