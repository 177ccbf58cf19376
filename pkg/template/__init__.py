"""
Template package
Predicate language and Leakage Templates
"""

from .predicate import (
    MissingBinding, Predicate, PredicateSyntaxError, TemplateError, UnboundSymbol, conjoin,
    eval_predicate, parse_predicate,
)
from .leakage_template import (
    CodeTemplate, INCONCLUSIVE, LeakageTemplate, SlotKind, TemplateSlot, UNDECIDABLE,
    assemble_lt, check_closed, lt_from_analysis,
)

__all__ = [
    'MissingBinding',
    'Predicate',
    'PredicateSyntaxError',
    'TemplateError',
    'UnboundSymbol',
    'conjoin',
    'eval_predicate',
    'parse_predicate',
    'CodeTemplate',
    'INCONCLUSIVE',
    'LeakageTemplate',
    'SlotKind',
    'TemplateSlot',
    'UNDECIDABLE',
    'assemble_lt',
    'check_closed',
    'lt_from_analysis',
]
