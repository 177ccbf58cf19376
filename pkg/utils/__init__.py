"""
Utils package
Address algebra, configuration and input helpers
"""

from .errors import ConfigError, PlumberError
from .geometry import (
    CacheGeometry, ComponentOutOfRange, DEFAULT_GEOMETRY, Field, GeometryError, PhysAddr,
    compose_addr, extract_field, same_field,
)
from .path_validator import PathValidationError, PathValidator
from .text_io import detect_encoding, read_text_file, safe_float, safe_int

__all__ = [
    'ConfigError',
    'PlumberError',
    'CacheGeometry',
    'ComponentOutOfRange',
    'DEFAULT_GEOMETRY',
    'Field',
    'GeometryError',
    'PhysAddr',
    'compose_addr',
    'extract_field',
    'same_field',
    'PathValidationError',
    'PathValidator',
    'detect_encoding',
    'read_text_file',
    'safe_float',
    'safe_int',
]
