# -*- coding: utf-8 -*-
"""
Cache Geometry and Address Algebra
Field extraction views (tag / set / word / bus / page / offset) over a configurable geometry

Bit ranges are always derived from the geometry, never hard-coded:
- offset = [0, log2(line)-1]
- set    = [log2(line), log2(line)+log2(sets)-1]
- tag    = [log2(line)+log2(sets), addr_bits-1]
- word   = [2, log2(line)-1]
- bus    = [log2(bus), log2(line)-1]
- page   = [log2(page), addr_bits-1]

Page is a view, not part of the offset/set/tag partition (it overlaps set and tag).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple, Union

from utils.errors import PlumberError


class GeometryError(PlumberError):
    """Invalid geometry or address component"""
    pass


class ComponentOutOfRange(GeometryError):
    """A tag / set / offset component does not fit its bit range"""
    pass


class Field(Enum):
    """Address fields of the notation table"""
    OFFSET = "offset"
    SET = "set"
    TAG = "tag"
    WORD = "word"
    BUS = "bus"
    PAGE = "page"


def _log2(value: int, name: str) -> int:
    if value <= 0 or value & (value - 1):
        raise GeometryError(f"{name} must be a power of two, got {value}")
    return value.bit_length() - 1


@dataclass(frozen=True)
class CacheGeometry:
    """L1 data cache geometry; defaults are the Cortex-A53 values"""
    line_size_bytes: int = 64
    num_sets: int = 128
    associativity: int = 4
    bus_size_bytes: int = 16
    page_size_bytes: int = 4096
    addr_bits: int = 32

    _ranges: Dict[Field, Tuple[int, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        line_bits = _log2(self.line_size_bytes, "line_size_bytes")
        set_bits = _log2(self.num_sets, "num_sets")
        bus_bits = _log2(self.bus_size_bytes, "bus_size_bytes")
        page_bits = _log2(self.page_size_bytes, "page_size_bytes")

        if self.associativity < 1:
            raise GeometryError(f"associativity must be positive, got {self.associativity}")
        if self.bus_size_bytes > self.line_size_bytes:
            raise GeometryError("bus_size_bytes must divide line_size_bytes")
        if line_bits < 3:
            raise GeometryError("line must hold at least two 4-byte words")
        if line_bits + set_bits >= self.addr_bits or page_bits >= self.addr_bits:
            raise GeometryError(f"addr_bits={self.addr_bits} too small for geometry")

        top = self.addr_bits - 1
        ranges = {
            Field.OFFSET: (0, line_bits - 1),
            Field.SET: (line_bits, line_bits + set_bits - 1),
            Field.TAG: (line_bits + set_bits, top),
            Field.WORD: (2, line_bits - 1),
            Field.BUS: (bus_bits, line_bits - 1),
            Field.PAGE: (page_bits, top),
        }
        object.__setattr__(self, "_ranges", ranges)

    # Derived widths

    @property
    def line_bits(self) -> int:
        return self._ranges[Field.SET][0]

    @property
    def set_bits(self) -> int:
        lo, hi = self._ranges[Field.SET]
        return hi - lo + 1

    @property
    def page_bits(self) -> int:
        return self._ranges[Field.PAGE][0]

    @property
    def buses_per_line(self) -> int:
        return self.line_size_bytes // self.bus_size_bytes

    @property
    def words_per_line(self) -> int:
        return self.line_size_bytes // 4

    @property
    def lines_per_page(self) -> int:
        return max(1, self.page_size_bytes // self.line_size_bytes)

    @property
    def max_tag(self) -> int:
        lo, hi = self._ranges[Field.TAG]
        return (1 << (hi - lo + 1)) - 1

    @property
    def addr_mask(self) -> int:
        return (1 << self.addr_bits) - 1

    def field_range(self, f: Union[Field, str]) -> Tuple[int, int]:
        """Inclusive (lo, hi) bit range of a field"""
        return self._ranges[as_field(f)]

    def field_width(self, f: Union[Field, str]) -> int:
        lo, hi = self.field_range(f)
        return hi - lo + 1

    def line_address(self, value: int) -> int:
        return (value & self.addr_mask) >> self.line_bits

    def to_dict(self) -> Dict[str, int]:
        return {
            'line_size_bytes': self.line_size_bytes,
            'num_sets': self.num_sets,
            'associativity': self.associativity,
            'bus_size_bytes': self.bus_size_bytes,
            'page_size_bytes': self.page_size_bytes,
            'addr_bits': self.addr_bits,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'CacheGeometry':
        known = {k: int(v) for k, v in (data or {}).items() if k in cls.__dataclass_fields__ and not k.startswith('_')}
        return cls(**known)


@dataclass(frozen=True)
class PhysAddr:
    """A physical address (values wider than addr_bits are masked on use)"""
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise GeometryError(f"negative address {self.value}")

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return f"0x{self.value:08X}"


AddrLike = Union[PhysAddr, int]


def as_field(f: Union[Field, str]) -> Field:
    if isinstance(f, Field):
        return f
    try:
        return Field(str(f).lower())
    except ValueError:
        raise GeometryError(f"unknown address field '{f}'") from None


def _value(a: AddrLike) -> int:
    return a.value if isinstance(a, PhysAddr) else int(a)


def extract_field(geom: CacheGeometry, a: AddrLike, f: Union[Field, str]) -> int:
    """Return bits [lo..hi] of the address for field f, right-aligned"""
    lo, hi = geom.field_range(f)
    value = _value(a) & geom.addr_mask
    return (value >> lo) & ((1 << (hi - lo + 1)) - 1)


def same_field(geom: CacheGeometry, f: Union[Field, str], *addrs: AddrLike) -> bool:
    """sameTag / sameSet / samePage / ... over two or more addresses"""
    if len(addrs) < 2:
        raise GeometryError("same_field needs at least two addresses")
    first = extract_field(geom, addrs[0], f)
    return all(extract_field(geom, a, f) == first for a in addrs[1:])


def compose_addr(geom: CacheGeometry, tag: int, set_index: int, offset: int) -> PhysAddr:
    """Inverse of extraction: concatenate tag | set | offset"""
    for name, value, f in (("tag", tag, Field.TAG), ("set", set_index, Field.SET),
                           ("offset", offset, Field.OFFSET)):
        if value < 0 or value >= (1 << geom.field_width(f)):
            raise ComponentOutOfRange(f"{name}={value} does not fit bits {geom.field_range(f)}")

    set_lo = geom.field_range(Field.SET)[0]
    tag_lo = geom.field_range(Field.TAG)[0]
    return PhysAddr((tag << tag_lo) | (set_index << set_lo) | offset)


DEFAULT_GEOMETRY = CacheGeometry()
