"""
Matcher package
Static code-pattern scanning of disassembly listings and trace-based classification
"""

from .asm_listing import (
    AsmInstruction, AsmListing, InstrClass, ListingParser, ListingTooBroken, MatcherError,
    MnemonicTable, UnparsableLine, check_error_rate, load_listing, parse_listing,
)
from .asm_pattern import (
    AsmPattern, BadBackreference, BadQuantifier, CandidateSection, PatternSyntaxError,
    compile_pattern, match_pattern,
)
from .confusion import ConfusionMatrix, LengthMismatch, confusion_report
from .corpus import Corpus, PlantRecord, generate_corpus
from .trace_classifier import (
    AccessTrace, InsufficientTrace, TraceRecord, access_trace, actual_label, classify_trace,
    random_trace_program, read_trace, write_trace,
)

__all__ = [
    'AsmInstruction',
    'AsmListing',
    'InstrClass',
    'ListingParser',
    'ListingTooBroken',
    'MatcherError',
    'MnemonicTable',
    'UnparsableLine',
    'check_error_rate',
    'load_listing',
    'parse_listing',
    'AsmPattern',
    'BadBackreference',
    'BadQuantifier',
    'CandidateSection',
    'PatternSyntaxError',
    'compile_pattern',
    'match_pattern',
    'ConfusionMatrix',
    'LengthMismatch',
    'confusion_report',
    'Corpus',
    'PlantRecord',
    'generate_corpus',
    'AccessTrace',
    'InsufficientTrace',
    'TraceRecord',
    'access_trace',
    'actual_label',
    'classify_trace',
    'random_trace_program',
    'read_trace',
    'write_trace',
]
