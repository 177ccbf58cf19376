# -*- coding: utf-8 -*-
"""
Experiments
Previction, prefetching and parameterised eviction families,
with the leakage templates derived from them

Each experiment returns a result dict in the usual shape
{'status', 'stats', 'errors'} plus the records or analysis it produced.
Families run in-process unless the settings ask for more processes.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from analyzer.bit_table import build_bit_table
from analyzer.classifier import UNSTABLE, AnalysisError, BehaviorClass, Classifier
from analyzer.pipeline import FamilyAnalysis, analyze_records
from analyzer.relations import RelationKind
from analyzer.threshold import ThresholdResult, learn_count_ranges, learn_thresholds
from generator.instantiator import Instruction
from simulator.machine import SimConfig, run_program
from simulator.observation import ObservationRecord
from simulator.oracle import lru_evicts
from template.leakage_template import CodeTemplate, LeakageTemplate, assemble_lt, lt_from_analysis
from threads.runner import ExperimentRunner, FamilySpec
from utils.config import ExperimentConfig
from utils.geometry import DEFAULT_GEOMETRY, CacheGeometry, Field, compose_addr, extract_field
from utils.text_io import read_text_file

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"
WITNESS_PATH = FIXTURES_DIR / "witnesses.json"

PREVICTION_KEY = 'previction-occurred'
PREFETCH_KEY = 'prefetch-count'
EVICTION_KEY = 'eviction-of-preloaded'

TESTED_GAP_RANGE = [0, 10]
REDUCED_GEOMETRY = {'num_sets': 16}

# Conjunction the line-mutation family yields for its prefetching class: three
# same-tag loads with equal nonzero set stride inside one page
STRIDE_PREDICATE = ("set(l3) - set(l2) = set(l2) - set(l1) and set(l2) - set(l1) in [-4..4] "
                    "and set(l2) - set(l1) != 0 and page(l1) = page(l2) and page(l2) = page(l3)")
DEFAULT_COUNT_RANGES = {'P3': [(0, 2), (5, 10)], 'P4': [(3, 3)], 'P7': [(4, 4)]}

E2_GTS = "shuffle{offmut{M[t=T] M[t=T,w=0] M[t=T,w=0] M[t=U,w=0] M[t=V,w=0]}}"
E3_GTS = "rep{M[t=T] M[t=T] M[t=T] M[t=U] M[t=V]; 10000}"
E4_GTS = "offmut{M[t=T] M[t=T] M[t=T] M[t=U,w=0] M[t=V,w=0]}"
E5_GTS = "pre{M[t=P1] M[t=P2]} M[t=T,w=8] M[t=T] M[t=T] M[t=U] M[t=U]"
E6_GTS = "linemut{M[t=t1] M[t=t1] M[t=t1]}"
E6_STREAM5_GTS = "M[t=t1,s=s1] M[t=t1,s=s1+1] M[t=t1,s=s1+2] M[t=t1,s=s1+3] M[t=t1,s=s1+4]"
E9_GTS = ("merge{merge{M[t=ta,s=sa] M[t=ta,s=sa+1] M[t=ta,s=sa+2] | "
          "M[t=tb,s=sb] M[t=tb,s=sb+1] M[t=tb,s=sb+2]} | "
          "M[t=tc,s=sc] M[t=tc,s=sc+1] M[t=tc,s=sc+2]}")
E10_GTS = "pre{M[t=ta,s=sa]} M[t=ta,s=sa] M[t=ta,s=sa+1] M[t=ta,s=sa+2]"

logger = logging.getLogger(__name__)


def _settings(overrides: Optional[Mapping[str, Any]] = None, **defaults) -> Dict[str, Any]:
    """In-process defaults of one experiment, overlaid by the caller's settings"""
    settings = {'processes': 1, **defaults}
    settings.update(dict(overrides or {}))
    return settings


def _runner(settings: Mapping[str, Any]) -> ExperimentRunner:
    config = ExperimentConfig()
    config.settings.update(dict(settings))
    return ExperimentRunner(config.validate())


def _result(stats: Dict[str, Any], errors: Sequence[str] = (), **extra) -> Dict[str, Any]:
    result = {'status': 'ok' if not errors else 'error', 'stats': stats, 'errors': list(errors)}
    result.update(extra)
    return result


def run_family(gts: str, settings: Mapping[str, Any], params: Optional[Dict[str, int]] = None) -> List[ObservationRecord]:
    return _runner(settings).run_family(gts, params)


def oracle_disagreements(analysis: FamilyAnalysis, geom: CacheGeometry,
                         labels: Optional[Sequence[str]] = None) -> int:
    """Rows where the conjunction of a class's valid relations disagrees with class membership

    Only the given labels are checked (default: all); classes without valid
    relations are not counted.
    """
    ids = [tid for c in analysis.classes if c.label != UNSTABLE for tid in c.members]
    if not ids:
        return 0
    family = build_bit_table(BehaviorClass("family", ids), analysis.records, geom)
    wrong = 0
    for cls in analysis.classes:
        result = analysis.analyses.get(cls.label)
        if labels is not None and cls.label not in labels:
            continue
        if result is None or not result.valid_relations:
            continue
        accepted = np.ones(family.rows, dtype=bool)
        for relation in result.valid_relations:
            accepted &= relation.holds(family)
        members = np.isin(np.array(family.testcase_ids), cls.members)
        wrong += int(np.count_nonzero(accepted != members))
    return wrong


# Previction


@dataclass
class Witness:
    """A previcting program given by its load addresses"""
    name: str
    loads: List[int]


def load_witnesses(path: Union[str, Path] = WITNESS_PATH, geom: CacheGeometry = DEFAULT_GEOMETRY) -> List[Witness]:
    data = json.loads(read_text_file(path))
    witnesses = []
    for entry in data.get('witnesses', []):
        loads = [compose_addr(geom, tag, set_index, offset).value for tag, set_index, offset in entry['loads']]
        witnesses.append(Witness(entry['name'], loads))
    logger.info(f"Loaded {len(witnesses)} leakage witnesses from {Path(path).name}")
    return witnesses


def _previcts(loads: Sequence[int], config: SimConfig) -> bool:
    return run_program([Instruction.load(a) for a in loads], config=config).previction_occurred


def run_minimality(witnesses: Sequence[Witness], config: Optional[SimConfig] = None,
                   mutated_up_to: int = 2) -> Dict[str, Any]:
    """Every ordered proper subset of a witness must stay silent

    Subsets of up to `mutated_up_to` loads are additionally run with every
    word offset of each chosen load.
    """
    config = config or SimConfig()
    geom = config.geometry
    stats = {'witnesses': len(witnesses), 'programs': 0, 'previctions': 0, 'witness_failures': 0}
    errors = []
    for witness in witnesses:
        if not _previcts(witness.loads, config):
            stats['witness_failures'] += 1
            errors.append(f"{witness.name} does not previct")
        for size in range(1, len(witness.loads)):
            for chosen in itertools.permutations(witness.loads, size):
                variants = [chosen]
                if size <= mutated_up_to:
                    line_bases = [a - (a % geom.line_size_bytes) for a in chosen]
                    words = itertools.product(range(geom.words_per_line), repeat=size)
                    variants = [[b + 4 * w for b, w in zip(line_bases, ws)] for ws in words]
                for loads in variants:
                    stats['programs'] += 1
                    if _previcts(loads, config):
                        stats['previctions'] += 1
                        errors.append(f"{witness.name}: subset {[hex(a) for a in loads]} previcts")
    logger.info(f"Minimality: {stats['programs']} subset programs, {stats['previctions']} previctions")
    return _result(stats, errors)


@dataclass(frozen=True)
class BusRelation:
    """bus(left) != a * bus(right) + b; positions count from the first load of the same-tag triple"""
    left: int = 0
    right: int = 1
    a: int = 1
    b: int = 1

    def atom(self, start: int, modulus: int) -> str:
        right = f"bus(l{start + self.right})"
        if self.a == 0:
            right = str(self.b)
        else:
            right = right if self.a == 1 else f"{self.a} * {right}"
            if self.b:
                right += f" + {self.b}"
        return f"bus(l{start + self.left}) != {right} mod {modulus}"


SUCCESSOR_BUS_RELATION = BusRelation()


def bus_relation_from(analysis: FamilyAnalysis, geom: CacheGeometry, triple_start: int = 1,
                      label: str = "previction") -> BusRelation:
    """Negated bus relation of the previcting class, relative to the triple at `triple_start`"""
    result = analysis.analyses.get(label)
    bus = geom.field_range(Field.BUS)
    for relation in (result.valid_relations if result else []):
        if relation.kind is not RelationKind.NEGATED_LINEAR:
            continue
        if any((r.lo, r.hi) != bus for r in relation.ranges):
            continue
        x, y = (int(result.table.columns[r.column][1:]) for r in relation.ranges)
        return BusRelation(y - triple_start, x - triple_start, relation.a, relation.b)
    raise AnalysisError(f"class {label} carries no negated bus relation")


def _triple_start(loads: Sequence[int], geom: CacheGeometry) -> Optional[int]:
    """1-based position of the first of three adjacent same-tag loads"""
    tags = [extract_field(geom, a, Field.TAG) for a in loads]
    for i in range(len(tags) - 2):
        if tags[i] == tags[i + 1] == tags[i + 2]:
            return i + 1
    return None


def _triple_consecutive(loads: Sequence[int], geom: CacheGeometry) -> bool:
    tags = [extract_field(geom, a, Field.TAG) for a in loads]
    for tag in set(tags):
        positions = [i for i, t in enumerate(tags) if t == tag]
        if len(positions) >= 3:
            return positions == list(range(positions[0], positions[0] + len(positions)))
    return False


def run_ordering(witnesses: Sequence[Witness], config: Optional[SimConfig] = None) -> Dict[str, Any]:
    """All orderings of each witness; previcting orderings keep the same-tag loads adjacent"""
    config = config or SimConfig()
    stats = {'orderings': 0, 'previcting': 0, 'violations': 0}
    errors = []
    for witness in witnesses:
        for order in itertools.permutations(range(len(witness.loads))):
            loads = [witness.loads[i] for i in order]
            stats['orderings'] += 1
            if _previcts(loads, config):
                stats['previcting'] += 1
                if not _triple_consecutive(loads, config.geometry):
                    stats['violations'] += 1
                    errors.append(f"{witness.name}: order {order} previcts without an adjacent triple")
    return _result(stats, errors)


def run_ordering_family(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Every ordering of T T T U V with the free T load swept over all word offsets

    Each ordering is analyzed on its own; the extracted relations must reproduce
    the simulator's classes exactly.
    """
    settings = _settings(settings, classification_key=PREVICTION_KEY)
    runner = _runner(settings)
    records = runner.run_family(E2_GTS)
    geom = runner.config.geometry

    by_variant: Dict[int, List[ObservationRecord]] = {}
    for record in records:
        by_variant.setdefault(record.variant_id, []).append(record)

    stats = {'variants': len(by_variant), 'testcases': len(records), 'previcting': 0,
             'violations': 0, 'disagreements': 0}
    starts = set()
    errors = []
    for variant, group in sorted(by_variant.items()):
        for record in group:
            if record.observation.previction_occurred:
                stats['previcting'] += 1
                start = _triple_start(record.load_addresses, geom)
                if start is not None:
                    starts.add(start)
                if not _triple_consecutive(record.load_addresses, geom):
                    stats['violations'] += 1
                    errors.append(f"{record.testcase_id} previcts without an adjacent triple")
        analysis = analyze_records(group, geom, PREVICTION_KEY)
        wrong = oracle_disagreements(analysis, geom)
        if wrong:
            errors.append(f"variant {variant}: {wrong} rows disagree with the extracted relations")
        stats['disagreements'] += wrong
    stats['triple_starts'] = sorted(starts)
    return _result(stats, errors, records=records)


def run_repetition(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    settings = _settings(settings, classification_key=PREVICTION_KEY)
    records = run_family(E3_GTS, settings)
    classes = Classifier(PREVICTION_KEY, settings.get('class_threshold', 0.95)).classify(records)
    stats = {'testcases': len(records), 'trials': sum(r.trials for r in records),
             'classes': [c.label for c in classes]}
    return _result(stats, records=records)


def run_bus_relation(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Offset mutation of the triple; the previction class must carry a negated bus relation"""
    settings = _settings(settings, classification_key=PREVICTION_KEY)
    runner = _runner(settings)
    records = runner.run_family(E4_GTS)
    geom = runner.config.geometry
    analysis = analyze_records(records, geom, PREVICTION_KEY)

    previction = analysis.analyses.get("previction")
    kinds = [r.kind for r in previction.valid_relations] if previction else []
    stats = {'testcases': len(records), 'classes': analysis.labels,
             'negated_linear': kinds.count(RelationKind.NEGATED_LINEAR),
             'disagreements': oracle_disagreements(analysis, geom, ["previction"])}
    errors = []
    if stats['disagreements']:
        errors.append(f"{stats['disagreements']} rows disagree with the extracted relations")
    try:
        bus = bus_relation_from(analysis, geom)
    except AnalysisError as e:
        bus = None
        errors.append(str(e))
    lt = build_previction_lt(geom, bus) if bus else None
    return _result(stats, errors, analysis=analysis, bus=bus, lt=lt)


def learn_previction_lt(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Previction template from the ordering family's triple positions and the bus relation"""
    ordering = run_ordering_family(settings)
    bus = run_bus_relation(settings)
    errors = ordering['errors'] + bus['errors']
    stats = {'ordering': ordering['stats'], 'bus': bus['stats']}
    starts = ordering['stats']['triple_starts']
    if bus['bus'] is None or not starts:
        return _result(stats, errors or ["nothing to assemble"])
    geom = bus['analysis'].tables['previction'].geom
    return _result(stats, errors, lt=build_previction_lt(geom, bus['bus'], starts))


def run_priming(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    settings = _settings(settings, classification_key=EVICTION_KEY)
    records = run_family(E5_GTS, settings)
    evicted = [len(r.observation.preloaded_evicted) for r in records]
    return _result({'testcases': len(records), 'preloaded_evicted': evicted}, records=records)


# Prefetching


def _prefetch_settings(settings: Optional[Mapping[str, Any]], **defaults) -> Dict[str, Any]:
    return _settings(settings, classification_key=PREFETCH_KEY, enable_previction=False, **defaults)


def run_line_mutation(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """All set indices of three same-tag loads at a 16-set geometry"""
    geometry = {**DEFAULT_GEOMETRY.to_dict(), **REDUCED_GEOMETRY}
    settings = _prefetch_settings(settings, geometry=geometry, store_pins={'t1': 5})
    runner = _runner(settings)
    records = runner.run_family(E6_GTS)
    geom = runner.config.geometry
    analysis = analyze_records(records, geom, PREFETCH_KEY)
    stats = {'testcases': len(records), 'classes': analysis.labels,
             'disagreements': oracle_disagreements(analysis, geom, ["P3"])}
    errors = [f"{stats['disagreements']} rows disagree with the extracted relations"] if stats['disagreements'] else []
    try:
        stride = stride_predicate_from(analysis)
    except AnalysisError as e:
        stride = None
        errors.append(str(e))
    return _result(stats, errors, analysis=analysis, stride_predicate=stride,
                   lt=lt_from_analysis(analysis, geom, ['pf_linemut']))


def stride_predicate_from(analysis: FamilyAnalysis, label: str = "P3") -> str:
    """Conjunction of the valid relations learned for a prefetching class"""
    atoms = analysis.relations_by_label().get(label)
    if not atoms:
        raise AnalysisError(f"class {label} carries no valid relations")
    return " and ".join(atoms)


def run_long_stream(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    settings = _prefetch_settings(settings, store_pins={'t1': 5, 's1': 0})
    records = run_family(E6_STREAM5_GTS, settings)
    labels = sorted({f"P{r.observation.prefetch_count}" for r in records})
    return _result({'testcases': len(records), 'classes': labels}, records=records)


def intermediate_gts(count: int) -> str:
    """Three-load stride-1 stream with `count` arithmetic instructions before the third load"""
    gap = "A " * count
    return f"M[t=t1,s=s1] M[t=t1,s=s1+1] {gap}M[t=t1,s=s1+2]"


def run_intermediate_sweep(counts: Iterable[int] = range(TESTED_GAP_RANGE[0], TESTED_GAP_RANGE[1] + 1),
                           settings: Optional[Mapping[str, Any]] = None,
                           stride: str = STRIDE_PREDICATE) -> Dict[str, Any]:
    """Prefetch count per number of intermediate instructions, learned as count ranges"""
    settings = _prefetch_settings(settings, store_pins={'t1': 5, 's1': 0})
    runner = _runner(settings)
    families = [FamilySpec(intermediate_gts(g), {'n1': 0, 'n2': g}) for g in counts]
    records = runner.run_families(families)
    by_id = {r.testcase_id: r for r in records}
    classes = Classifier(PREFETCH_KEY, settings.get('class_threshold', 0.95)).classify(records)
    ranges = learn_count_ranges(classes, by_id, 'n2')
    observed = {int(r.params['n2']): f"P{r.observation.prefetch_count}" for r in records}
    return _result({'testcases': len(records), 'observed': observed}, count_ranges=ranges,
                   lt=build_prefetch_lt(ranges, stride=stride))


def learn_prefetch_lt(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Stream template from the line-mutation relations and the gap sweep's count ranges"""
    streams = run_line_mutation(settings)
    stride = streams['stride_predicate']
    if stride is None:
        return _result({'line_mutation': streams['stats']}, streams['errors'])
    sweep = run_intermediate_sweep(settings=settings, stride=stride)
    stats = {'line_mutation': streams['stats'], 'sweep': sweep['stats']}
    return _result(stats, streams['errors'] + sweep['errors'], stride_predicate=stride, lt=sweep['lt'])


def run_page_closure(placements: int = 10000, seed: int = 0, config: Optional[SimConfig] = None) -> Dict[str, Any]:
    """Random stride streams anywhere in a page; no prefetched line may leave it"""
    config = config or SimConfig(enable_previction=False)
    geom = config.geometry
    rng = np.random.default_rng(seed)
    lines = geom.lines_per_page
    stats = {'placements': placements, 'prefetching': 0, 'truncated': 0, 'crossings': 0}
    errors = []
    for _ in range(placements):
        page = int(rng.integers(1, 1 << 10))
        stride = int(rng.choice([-4, -3, -2, -1, 1, 2, 3, 4]))
        loads = int(rng.integers(3, 6))
        span = (loads - 1) * abs(stride)
        start = int(rng.integers(0, lines - span))
        if stride < 0:
            start += span
        addrs = [(page * lines + start + k * stride) * geom.line_size_bytes for k in range(loads)]
        obs = run_program([Instruction.load(a) for a in addrs], config=config)
        if obs.prefetched:
            stats['prefetching'] += 1
            if obs.prefetch_count < (4 if loads == 5 else 3):
                stats['truncated'] += 1
        outside = [line for line in obs.prefetched if line // lines != page]
        if outside:
            stats['crossings'] += 1
            errors.append(f"page {page} stride {stride} start {start}: prefetched {outside}")
    return _result(stats, errors)


def run_stream_limit(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Every interleaving of three streams on three pages; only two may prefetch"""
    settings = _prefetch_settings(settings, store_pins={'sa': 0, 'sb': 10, 'sc': 20})
    runner = _runner(settings)
    records = runner.run_family(E9_GTS)
    geom = runner.config.geometry
    streams = {}
    for record in records:
        pages = {line // geom.lines_per_page for line in record.observation.prefetched}
        key = (record.observation.streams, len(pages))
        streams[key] = streams.get(key, 0) + 1
    errors = [f"{n} testcases with (streams, prefetching pages) = {k}" for k, n in streams.items() if k != (2, 2)]
    return _result({'testcases': len(records), 'shapes': {f"{k[0]}/{k[1]}": n for k, n in streams.items()}},
                   errors, records=records)


def run_preloaded_stream(settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    settings = _prefetch_settings(settings, store_pins={'sa': 0})
    records = run_family(E10_GTS, settings)
    return _result({'testcases': len(records), 'prefetched': [r.observation.prefetch_count for r in records]},
                   records=records)


# Parameterised eviction


EVICTION_PARAMS = ('S', 'C', 'D', 'L')


def eviction_gts(steps: int, repeats: int, distinct: int, stride: int, rep: int = 1) -> str:
    """Target t2 preloaded, then S groups of D consecutive tags repeated C times, groups L tags apart"""
    body = f"(((M[t=t1,s=s1])^{{{distinct},t+=1}})^{{{repeats}}})^{{{steps},t+={stride}}}"
    if rep > 1:
        body = f"rep{{{body}; {rep}}}"
    return f"pre{{M[t=t2,s=s1]}} {body}"


def eviction_grid(steps: Sequence[int] = range(1, 9), repeats: Sequence[int] = range(1, 5),
                  distinct: Sequence[int] = range(1, 5), strides: Sequence[int] = (1, 2)) -> List[Dict[str, int]]:
    return [{'S': s, 'C': c, 'D': d, 'L': l} for s, c, d, l in itertools.product(steps, repeats, distinct, strides)]


def _eviction_families(grid: Sequence[Mapping[str, int]], rep: int) -> List[FamilySpec]:
    return [FamilySpec(eviction_gts(p['S'], p['C'], p['D'], p['L'], rep), dict(p)) for p in grid]


def run_eviction_grid(grid: Optional[Sequence[Mapping[str, int]]] = None,
                      settings: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Evict / no-evict per grid point against the brute-force LRU oracle, plus learned thresholds"""
    grid = list(grid or eviction_grid())
    settings = _settings(settings, classification_key=EVICTION_KEY, enable_previction=False)
    runner = _runner(settings)
    geom = runner.config.geometry
    testcases = runner.generate(_eviction_families(grid, 1))
    records = runner.execute(testcases)
    by_id = {r.testcase_id: r for r in records}

    classes = Classifier(EVICTION_KEY, settings.get('class_threshold', 0.95)).classify(records)
    labels = {tid: c.label for c in classes for tid in c.members}
    mismatches = []
    for tc in testcases:
        target = geom.line_address(tc.precondition[0])
        trace = [geom.line_address(a) for a in tc.load_addresses]
        expected = "evict" if lru_evicts(target, trace, geom.associativity, geom.num_sets) else "no-evict"
        if labels.get(tc.testcase_id) != expected:
            mismatches.append(f"{tc.params}: simulator {labels.get(tc.testcase_id)}, oracle {expected}")

    thresholds = learn_thresholds(classes, by_id, EVICTION_PARAMS)
    stats = {'points': len(grid), 'evict': sum(1 for l in labels.values() if l == "evict"),
             'mismatches': len(mismatches), 'rules': len(thresholds.rules)}
    return _result(stats, mismatches, records=records, thresholds=thresholds,
                   lt=build_eviction_lt(thresholds, geom))


def run_eviction_stability(grid: Sequence[Mapping[str, int]], seeds: Sequence[int] = (0, 1, 2, 3, 4),
                           rep: int = 1000, threshold: float = 0.95) -> Dict[str, Any]:
    """Labels under random replacement across reruns with different root seeds"""
    per_point: Dict[Tuple, set] = {}
    for seed in seeds:
        settings = _settings(None, classification_key=EVICTION_KEY, enable_previction=False,
                             replacement_policy='random', root_seed=seed, class_threshold=threshold)
        records = {r.testcase_id: r for r in _runner(settings).run_families(_eviction_families(grid, rep))}
        for cls in Classifier(EVICTION_KEY, threshold).classify(records.values()):
            for tid in cls.members:
                record = records[tid]
                per_point.setdefault(tuple(sorted(record.params.items())), set()).add(cls.label)
    stable = sum(1 for labels in per_point.values() if len(labels) == 1)
    fraction = stable / len(per_point) if per_point else 1.0
    logger.info(f"Eviction stability: {stable}/{len(per_point)} grid points agree across {len(seeds)} seeds")
    return _result({'points': len(per_point), 'stable': stable, 'fraction': fraction})


# Leakage templates


def _count_atom(symbol: str, low: int, high: int) -> str:
    return f"{symbol} = {low}" if low == high else f"{symbol} in [{low}..{high}]"


def build_prefetch_lt(count_ranges: Optional[Mapping[str, Sequence[Tuple[int, int]]]] = None,
                      geom: CacheGeometry = DEFAULT_GEOMETRY, stride: str = STRIDE_PREDICATE) -> LeakageTemplate:
    """Three-load stream template; the count behaviours split on the second gap"""
    count_ranges = count_ranges or DEFAULT_COUNT_RANGES
    relations = {label: [f"{stride} and {_count_atom('n2', lo, hi)}" for lo, hi in ranges]
                 for label, ranges in count_ranges.items()}
    metadata = {
        'default': 'P0',
        'geometry': geom.to_dict(),
        'provenance': ['pf_stream', 'pf_gap_sweep'],
        'tested_ranges': {'n1': list(TESTED_GAP_RANGE), 'n2': list(TESTED_GAP_RANGE)},
    }
    labels = sorted(set(count_ranges) | {'P0'})
    return assemble_lt(CodeTemplate.with_gaps(3, TESTED_GAP_RANGE[1]), labels, relations, metadata)


def build_previction_lt(geom: CacheGeometry = DEFAULT_GEOMETRY, bus: BusRelation = SUCCESSOR_BUS_RELATION,
                        starts: Sequence[int] = (1, 2, 3)) -> LeakageTemplate:
    """Five loads in one set, three adjacent ones sharing a tag, the bus relation on the triple

    One conjunction per triple position in `starts`.
    """
    loads = range(1, 6)
    same_set = [f"set(l{i}) = set(l1)" for i in loads if i > 1]
    conjunctions = []
    for start in starts:
        triple = (start, start + 1, start + 2)
        atoms = list(same_set)
        atoms += [f"tag(l{i}) = tag(l{start})" for i in triple[1:]]
        atoms += [f"tag(l{i}) != tag(l{start})" for i in loads if i not in triple]
        atoms.append(bus.atom(start, geom.buses_per_line))
        conjunctions.append(" and ".join(atoms))
    metadata = {
        'default': 'no-previction',
        'geometry': geom.to_dict(),
        'provenance': ['prev_witnesses', 'prev_ordering', 'prev_bus'],
        'tested_ranges': {f"n{i}": list(TESTED_GAP_RANGE) for i in range(1, 5)},
    }
    return assemble_lt(CodeTemplate.with_gaps(5, TESTED_GAP_RANGE[1]), ['previction', 'no-previction'],
                       {'previction': conjunctions}, metadata)


def build_eviction_lt(thresholds: ThresholdResult, geom: CacheGeometry = DEFAULT_GEOMETRY) -> LeakageTemplate:
    metadata = {
        'default': thresholds.negative,
        'geometry': geom.to_dict(),
        'provenance': ['eviction'],
        'parameters': list(EVICTION_PARAMS),
    }
    relations = {thresholds.positive: [rule.predicate() for rule in thresholds.rules]}
    return assemble_lt(CodeTemplate.with_gaps(1), [thresholds.positive, thresholds.negative], relations, metadata)

