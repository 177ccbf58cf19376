# -*- coding: utf-8 -*-
"""
Disassembly Listing Parser
"<hex-addr>: <mnemonic> <operands>" per line, "SECTION <name>" headers

Operands are split on commas only, so a memory operand keeps its brackets on
the first and last token: "ldr x0, [x1, x2]" -> ["x0", "[x1", "x2]"].
Mnemonic classes come from a JSON table; a key "<prefix>.cond" covers every
conditional form of that prefix (b.eq, b.ne, ...).
"""

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from utils.errors import PlumberError
from utils.text_io import read_text_file

DEFAULT_MNEMONIC_TABLE = Path(__file__).resolve().parent.parent / "fixtures" / "mnemonics.json"
DEFAULT_SECTION = ".text"

_HEX_ADDRESS: str = r"(?P<addr>(?:0x)?[0-9a-f]+)"
_MNEMONIC: str = r"(?P<mnemonic>[a-z][a-z0-9]*(?:\.[a-z]+)?)"
_OPERANDS: str = r"(?:[ \t]+(?P<operands>[^;/]*?))?"
_COMMENT: str = r"(?:[ \t]*(?://|;).*)?"

LINE_RE = re.compile(rf"(?i)\A[ \t]*{_HEX_ADDRESS}:[ \t]*{_MNEMONIC}{_OPERANDS}{_COMMENT}[ \t]*\Z")
SECTION_RE = re.compile(r"\A[ \t]*SECTION[ \t]+(?P<name>\S+)[ \t]*\Z")
SKIP_RE = re.compile(r"\A[ \t]*(?:#.*|//.*)?\Z")


class MatcherError(PlumberError):
    """Base error of the matcher"""
    pass


class UnparsableLine(MatcherError):
    def __init__(self, lineno: int, text: str, reason: str = "does not follow the listing format"):
        self.lineno = lineno
        self.text = text
        super().__init__(f"line {lineno}: {reason}: '{text.strip()}'")


class ListingTooBroken(MatcherError):
    """Share of unparsable lines above the configured threshold"""
    pass


class InstrClass(Enum):
    LOAD = "LOAD"
    STORE = "STORE"
    ARITH = "ARITH"
    BRANCH = "BRANCH"
    NOP = "NOP"
    OTHER = "OTHER"


@dataclass(frozen=True)
class AsmInstruction:
    address: int
    mnemonic: str
    operands: Tuple[str, ...]
    section: str
    iclass: InstrClass
    lineno: int = 0


@dataclass
class AsmListing:
    instructions: List[AsmInstruction] = field(default_factory=list)
    sections: Dict[str, List[int]] = field(default_factory=dict)
    errors: List[UnparsableLine] = field(default_factory=list)
    lines: int = 0

    def section(self, name: str) -> List[AsmInstruction]:
        return [self.instructions[i] for i in self.sections.get(name, [])]

    @property
    def error_rate(self) -> float:
        return len(self.errors) / self.lines if self.lines else 0.0


class MnemonicTable:
    """Mnemonic -> instruction class, loaded from JSON"""

    def __init__(self, mapping: Dict[str, str]):
        self.exact: Dict[str, InstrClass] = {}
        self.prefixes: Dict[str, InstrClass] = {}
        for mnemonic, name in mapping.items():
            iclass = InstrClass(name.upper())
            if mnemonic.endswith(".cond"):
                self.prefixes[mnemonic[:-len("cond")]] = iclass
            else:
                self.exact[mnemonic.lower()] = iclass

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> 'MnemonicTable':
        path = Path(path) if path else DEFAULT_MNEMONIC_TABLE
        return cls(json.loads(read_text_file(path)))

    def classify(self, mnemonic: str) -> InstrClass:
        mnemonic = mnemonic.lower()
        if mnemonic in self.exact:
            return self.exact[mnemonic]
        for prefix, iclass in self.prefixes.items():
            if mnemonic.startswith(prefix):
                return iclass
        return InstrClass.OTHER


def split_operands(text: Optional[str]) -> Tuple[str, ...]:
    if not text or not text.strip():
        return ()
    return tuple(part.strip() for part in text.split(","))


class ListingParser:
    def __init__(self, table: Optional[MnemonicTable] = None):
        self.table = table or MnemonicTable.load()
        self.logger = logging.getLogger(__name__)

    def parse(self, text: str) -> AsmListing:
        listing = AsmListing()
        section = DEFAULT_SECTION
        last_address: Dict[str, int] = {}

        for lineno, raw in enumerate(text.splitlines(), 1):
            if SKIP_RE.match(raw):
                continue
            listing.lines += 1
            header = SECTION_RE.match(raw)
            if header:
                section = header.group('name')
                listing.sections.setdefault(section, [])
                continue

            match = LINE_RE.match(raw)
            if not match:
                self._skip(listing, UnparsableLine(lineno, raw))
                continue
            address = int(match.group('addr'), 16)
            if section in last_address and address <= last_address[section]:
                self._skip(listing, UnparsableLine(lineno, raw, "address not increasing"))
                continue
            last_address[section] = address

            mnemonic = match.group('mnemonic').lower()
            instr = AsmInstruction(address, mnemonic, split_operands(match.group('operands')),
                                   section, self.table.classify(mnemonic), lineno)
            listing.sections.setdefault(section, []).append(len(listing.instructions))
            listing.instructions.append(instr)

        self.logger.info(f"Parsed listing: {len(listing.instructions)} instructions in "
                         f"{len(listing.sections)} sections, {len(listing.errors)} lines skipped")
        return listing

    def _skip(self, listing: AsmListing, error: UnparsableLine):
        self.logger.warning(f"Skipping {error}")
        listing.errors.append(error)


def parse_listing(text: str, table: Optional[MnemonicTable] = None) -> AsmListing:
    return ListingParser(table).parse(text)


def load_listing(path: Union[str, Path], table: Optional[MnemonicTable] = None) -> AsmListing:
    return parse_listing(read_text_file(path), table)


def check_error_rate(listing: AsmListing, threshold: float):
    if listing.error_rate > threshold:
        raise ListingTooBroken(f"{len(listing.errors)} of {listing.lines} lines unparsable "
                               f"({listing.error_rate:.1%} > {threshold:.1%})")
