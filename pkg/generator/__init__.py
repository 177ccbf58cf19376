"""
Generator package
GTS expansion and testcase instantiation
"""

from .preprocessor import (
    DirectiveSeq, ExpansionError, ExpansionTooLarge, MixedMutationModes, MutationMode,
    MutationPlan, Preprocessor, expand,
)
from .address_store import AddressStore, InstantiationError, StoreExhausted, UnsatisfiableRelation
from .instantiator import (
    Instantiator, Instruction, InstrKind, Testcase, count_testcases, instantiate,
    instantiate_family, make_testcase_id,
)

__all__ = [
    'DirectiveSeq',
    'ExpansionError',
    'ExpansionTooLarge',
    'MixedMutationModes',
    'MutationMode',
    'MutationPlan',
    'Preprocessor',
    'expand',
    'AddressStore',
    'InstantiationError',
    'StoreExhausted',
    'UnsatisfiableRelation',
    'Instantiator',
    'Instruction',
    'InstrKind',
    'Testcase',
    'count_testcases',
    'instantiate',
    'instantiate_family',
    'make_testcase_id',
]
