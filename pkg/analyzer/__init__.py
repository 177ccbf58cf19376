"""
Analyzer package
Behaviour classification, bit tables and relation inference
"""

from .classifier import (
    AnalysisError, BehaviorClass, Classifier, DEFAULT_THRESHOLD, LABELERS, UNSTABLE, UnknownKey,
    classify, label_observation,
)
from .bit_table import (
    Always, And, BadRange, BitRange, BitsEq, BitTable, DegenerateTable, FieldEq, Not,
    build_bit_table, count, nocc, select,
)
from .relations import (
    NoConsistentRelation, Relation, RelationKind, TableAnalysis, ValidationResult,
    analyze_table, candidate_selection, extract_relations, validate,
)
from .threshold import ThresholdResult, ThresholdRule, learn_count_ranges, learn_thresholds
from .pipeline import AnalysisPipeline, FamilyAnalysis, analyze_records

__all__ = [
    'AnalysisError',
    'BehaviorClass',
    'Classifier',
    'DEFAULT_THRESHOLD',
    'LABELERS',
    'UNSTABLE',
    'UnknownKey',
    'classify',
    'label_observation',
    'Always',
    'And',
    'BadRange',
    'BitRange',
    'BitsEq',
    'BitTable',
    'DegenerateTable',
    'FieldEq',
    'Not',
    'build_bit_table',
    'count',
    'nocc',
    'select',
    'NoConsistentRelation',
    'Relation',
    'RelationKind',
    'TableAnalysis',
    'ValidationResult',
    'analyze_table',
    'candidate_selection',
    'extract_relations',
    'validate',
    'ThresholdResult',
    'ThresholdRule',
    'learn_count_ranges',
    'learn_thresholds',
    'AnalysisPipeline',
    'FamilyAnalysis',
    'analyze_records',
]
