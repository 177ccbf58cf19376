"""
Parser package
GTS abstract syntax tree and grammar
"""

from .gts_ast import (
    AttrExpr, Directive, DirectiveKind, GtsAst, GtsError, GtsSyntaxError, GtsValueError, MalformedAttribute,
    NestedMutation, Symbol, UnknownDirective,
)
from .gts_parser import GtsParser, load_gts_file, parse_gts, render_gts

__all__ = [
    'AttrExpr',
    'Directive',
    'DirectiveKind',
    'GtsAst',
    'GtsError',
    'GtsSyntaxError',
    'GtsValueError',
    'MalformedAttribute',
    'NestedMutation',
    'Symbol',
    'UnknownDirective',
    'GtsParser',
    'load_gts_file',
    'parse_gts',
    'render_gts',
]
