"""
Scenarios package
Covert-channel primitives, the branch-predictor experiment and the previction,
prefetching and eviction experiment families
"""

from .channels import (
    ChannelScenario, SCENARIOS, ScenarioConfigError, ScenarioError, bit_errors, encode_decode,
    get_scenario, transmit_bit,
)
from .branch_experiment import BranchExperiment, build_bp_program, run_bp_experiment
from .experiments import (
    STRIDE_PREDICATE, SUCCESSOR_BUS_RELATION, BusRelation, Witness, build_eviction_lt, build_prefetch_lt,
    build_previction_lt, bus_relation_from, eviction_grid, eviction_gts, intermediate_gts, learn_prefetch_lt,
    learn_previction_lt, load_witnesses, oracle_disagreements, run_bus_relation, run_eviction_grid,
    run_eviction_stability, run_intermediate_sweep, run_line_mutation, run_long_stream, run_minimality,
    run_ordering, run_ordering_family, run_page_closure, run_preloaded_stream, run_priming, run_repetition,
    run_stream_limit, stride_predicate_from,
)

__all__ = [
    'ChannelScenario',
    'SCENARIOS',
    'ScenarioConfigError',
    'ScenarioError',
    'bit_errors',
    'encode_decode',
    'get_scenario',
    'transmit_bit',
    'BranchExperiment',
    'build_bp_program',
    'run_bp_experiment',
    'STRIDE_PREDICATE',
    'SUCCESSOR_BUS_RELATION',
    'BusRelation',
    'Witness',
    'build_eviction_lt',
    'build_prefetch_lt',
    'build_previction_lt',
    'eviction_grid',
    'eviction_gts',
    'bus_relation_from',
    'intermediate_gts',
    'learn_prefetch_lt',
    'learn_previction_lt',
    'load_witnesses',
    'oracle_disagreements',
    'run_bus_relation',
    'run_eviction_grid',
    'run_eviction_stability',
    'run_intermediate_sweep',
    'run_line_mutation',
    'run_long_stream',
    'run_minimality',
    'run_ordering',
    'run_ordering_family',
    'run_page_closure',
    'run_preloaded_stream',
    'run_priming',
    'run_repetition',
    'run_stream_limit',
    'stride_predicate_from',
]
