# -*- coding: utf-8 -*-
"""
Relation Extraction
Candidate selection, constraint and linear-relation inference, validation

Steps over one bit table of T rows:
1. single-column pass: a column is a candidate when some value of its mutated
   range occurs other than T/N times; it is explained when its present values
   are uniformly represented
2. pairwise pass over unexplained candidates (or all columns when nothing was
   flagged): joint occurrence against T/N^2
3. relations are searched on the narrowest sub-ranges that still explain the
   class: constraints for single columns, y = a*x + b mod N (or its negation)
   for pairs, signed differences for chains of columns no pair relation explains
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from analyzer.bit_table import BitRange, BitTable, DegenerateTable, bits_of, occurrence_counts
from analyzer.classifier import AnalysisError
from utils.geometry import Field

logger = logging.getLogger(__name__)

# Field names preferred when a bit range matches more than one view
_FIELD_PREFERENCE = (Field.BUS, Field.WORD, Field.SET, Field.TAG, Field.PAGE, Field.OFFSET)


class NoConsistentRelation(AnalysisError):
    """Candidates exist but no relation explains them"""
    pass


class RelationKind(Enum):
    CONSTRAINT = "constraint"
    LINEAR = "linear"
    NEGATED_LINEAR = "negated-linear"
    DIFFERENCE_RANGE = "difference-range"
    DIFFERENCE_LINEAR = "difference-linear"
    EQUALITY = "equality"


@dataclass
class Relation:
    kind: RelationKind
    ranges: Tuple[BitRange, ...]
    a: int = 1
    b: int = 0
    modulus: int = 0
    allowed: Tuple[int, ...] = ()
    field: Optional[Field] = None
    status: str = "unvalidated"

    @property
    def columns(self) -> List[int]:
        return sorted({r.column for r in self.ranges})

    def holds(self, table: BitTable) -> np.ndarray:
        """Row mask of rows satisfying the relation"""
        v = [table.range_values(r) for r in self.ranges]
        kind = self.kind
        if kind is RelationKind.CONSTRAINT:
            return np.isin(v[0], self.allowed)
        if kind in (RelationKind.LINEAR, RelationKind.NEGATED_LINEAR):
            expected = (self.a * v[0] + self.b) % self.modulus
            same = v[1] == expected
            return same if kind is RelationKind.LINEAR else ~same
        if kind is RelationKind.DIFFERENCE_RANGE:
            return np.isin(v[1] - v[0], self.allowed)
        if kind is RelationKind.DIFFERENCE_LINEAR:
            return (v[2] - v[1]) == self.a * (v[1] - v[0]) + self.b
        if kind is RelationKind.EQUALITY:
            lo, hi = table.geom.field_range(self.field)
            cols = [self.ranges[0].column, self.ranges[1].column]
            first, second = (bits_of(table.values[:, c], lo, hi) for c in cols)
            return first == second
        raise AnalysisError(f"unknown relation kind {kind}")

    # Predicate rendering

    def predicates(self, table: BitTable) -> List[str]:
        """Conjunction atoms in the predicate language"""
        t = [term_for(table, r) for r in self.ranges]
        kind = self.kind
        if kind is RelationKind.CONSTRAINT:
            return _membership(t[0], self.allowed, 0, self.ranges[0].modulus - 1)
        if kind in (RelationKind.LINEAR, RelationKind.NEGATED_LINEAR):
            op = "=" if kind is RelationKind.LINEAR else "!="
            return [f"{t[1]} {op} {_affine(t[0], self.a, self.b)} mod {self.modulus}"]
        if kind is RelationKind.DIFFERENCE_RANGE:
            n = max(r.modulus for r in self.ranges)
            return _membership(f"{t[1]} - {t[0]}", self.allowed, -(n - 1), n - 1)
        if kind is RelationKind.DIFFERENCE_LINEAR:
            inner = f"{t[1]} - {t[0]}" if self.a == 1 else f"{self.a} * ({t[1]} - {t[0]})"
            if self.b:
                inner += f" + {self.b}" if self.b > 0 else f" - {-self.b}"
            return [f"{t[2]} - {t[1]} = {inner}"]
        name = self.field.value
        c0, c1 = (table.columns[r.column] for r in self.ranges[:2])
        return [f"{name}({c0}) = {name}({c1})"]

    def to_dict(self, table: Optional[BitTable] = None) -> Dict:
        data = {
            'kind': self.kind.value,
            'ranges': [[r.column, r.lo, r.hi] for r in self.ranges],
            'a': self.a,
            'b': self.b,
            'modulus': self.modulus,
            'allowed': list(self.allowed),
            'field': self.field.value if self.field else None,
            'status': self.status,
        }
        if table is not None:
            data['predicates'] = self.predicates(table)
        return data


def term_for(table: BitTable, r: BitRange) -> str:
    name = table.columns[r.column]
    for f in _FIELD_PREFERENCE:
        if table.geom.field_range(f) == (r.lo, r.hi):
            return f"{f.value}({name})"
    return f"bits({name}, {r.lo}, {r.hi})"


def _affine(x: str, a: int, b: int) -> str:
    text = x if a == 1 else f"{a} * {x}"
    if a == 0:
        text = str(b)
    elif b:
        text += f" + {b}"
    return text


def _membership(term: str, allowed: Sequence[int], low: int, high: int) -> List[str]:
    values = sorted(set(int(v) for v in allowed))
    if len(values) == 1:
        return [f"{term} = {values[0]}"]
    atoms = []
    lo, hi = values[0], values[-1]
    if lo > low or hi < high:
        atoms.append(f"{term} in [{lo}..{hi}]")
    present = set(values)
    atoms.extend(f"{term} != {v}" for v in range(lo, hi + 1) if v not in present)
    return atoms


# Candidate selection


@dataclass
class Candidates:
    columns: List[int] = field(default_factory=list)
    explained: List[int] = field(default_factory=list)
    pairs: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.columns and not self.pairs

    @property
    def unexplained(self) -> List[int]:
        return [c for c in self.columns if c not in self.explained]


def _deviates(counts: np.ndarray, total: int) -> bool:
    return bool(np.any(counts * counts.size != total))


def candidate_selection(table: BitTable) -> Candidates:
    ranges = table.mutated_ranges()
    if not ranges:
        raise DegenerateTable(f"table {table.label} has no mutated bits")

    total = table.rows
    result = Candidates()
    for r in ranges:
        counts = occurrence_counts(table, [r])
        if _deviates(counts, total):
            result.columns.append(r.column)
            present = counts[counts > 0]
            if np.all(present == present[0]):
                result.explained.append(r.column)

    pool = [r for r in ranges if r.column in result.unexplained] if result.columns else ranges
    for i, ri in enumerate(pool):
        for rj in pool[i + 1:]:
            if _deviates(occurrence_counts(table, [ri, rj]), total):
                result.pairs.append((ri.column, rj.column))

    logger.debug(f"Table {table.label}: candidates {result.columns}, explained {result.explained}, "
                 f"pairs {result.pairs}")
    return result


# Relation search


def _distinct(table: BitTable, ranges: Sequence[BitRange]) -> int:
    flat = np.zeros(table.rows, dtype=np.int64)
    for r in ranges:
        flat = flat * r.modulus + table.range_values(r)
    return int(np.unique(flat).size)


def _uniform(counts: np.ndarray) -> bool:
    present = counts[counts > 0]
    return present.size > 0 and bool(np.all(present == present[0]))


def _column_constraint(table: BitTable, full: BitRange) -> Optional[Relation]:
    distinct = _distinct(table, [full])
    for sub in full.sub_ranges():
        counts = occurrence_counts(table, [sub])
        present = np.flatnonzero(counts)
        if present.size == sub.modulus:
            continue
        if distinct != present.size << (full.width - sub.width):
            continue
        return Relation(RelationKind.CONSTRAINT, (sub,), allowed=tuple(int(v) for v in present))
    return None


def _graph_fit(grid: np.ndarray) -> Optional[Tuple[int, int]]:
    """(a, b) with grid[x, y] true exactly for y = a*x + b mod Ny"""
    nx, ny = grid.shape
    if nx < 2 or not np.all(grid.sum(axis=1) == 1):
        return None
    ys = grid.argmax(axis=1)
    b = int(ys[0])
    a = int(ys[1] - b) % ny
    xs = np.arange(nx)
    if np.all(ys == (a * xs + b) % ny):
        return a, b
    return None


def _pair_relations(table: BitTable, ri: BitRange, rj: BitRange) -> List[Relation]:
    """Fits of the narrowest explaining sub-ranges; both orientations when they tie on b"""
    if not _uniform(occurrence_counts(table, [ri, rj])):
        return []
    distinct = _distinct(table, [ri, rj])

    subs = [(si, sj) for si in ri.sub_ranges() for sj in rj.sub_ranges()]
    subs.sort(key=lambda p: (p[0].width + p[1].width, p[0].lo, p[1].lo))
    for si, sj in subs:
        present = occurrence_counts(table, [si, sj]) > 0
        if present.all():
            continue
        free = (ri.width - si.width) + (rj.width - sj.width)
        if distinct != int(present.sum()) << free:
            continue

        fits = []
        for x, y, grid in ((si, sj, present), (sj, si, present.T)):
            fit = _graph_fit(grid)
            if fit is not None:
                fits.append((fit[1], RelationKind.LINEAR, x, y, fit))
            fit = _graph_fit(~grid)
            if fit is not None:
                fits.append((fit[1], RelationKind.NEGATED_LINEAR, x, y, fit))
        if not fits:
            continue

        best = min(f[0] for f in fits)
        return [Relation(kind, (x, y), a=a, b=b, modulus=y.modulus)
                for b_fit, kind, x, y, (a, b) in fits if b_fit == best]
    return []


def _difference_relations(table: BitTable, chain: List[BitRange]) -> List[Relation]:
    relations = []
    diffs = [table.range_values(b) - table.range_values(a) for a, b in zip(chain, chain[1:])]

    first = np.unique(diffs[0])
    n = max(r.modulus for r in chain[:2])
    if first.size < 2 * n - 1:
        relations.append(Relation(RelationKind.DIFFERENCE_RANGE, (chain[0], chain[1]),
                                  allowed=tuple(int(v) for v in first)))

    for k in range(1, len(diffs)):
        d1, d2 = diffs[k - 1], diffs[k]
        fit = None
        distinct = np.unique(d1)
        if distinct.size >= 2:
            i = int(np.flatnonzero(d1 == distinct[0])[0])
            j = int(np.flatnonzero(d1 == distinct[1])[0])
            a_num, a_den = int(d2[j] - d2[i]), int(d1[j] - d1[i])
            if a_num % a_den == 0:
                a = a_num // a_den
                b = int(d2[i] - a * d1[i])
                if np.all(d2 == a * d1 + b):
                    fit = (a, b)
        if fit is not None:
            relations.append(Relation(RelationKind.DIFFERENCE_LINEAR, (chain[k - 1], chain[k], chain[k + 1]),
                                      a=fit[0], b=fit[1]))
            continue

        values = np.unique(d2)
        n = max(r.modulus for r in chain[k:k + 2])
        if values.size < 2 * n - 1:
            relations.append(Relation(RelationKind.DIFFERENCE_RANGE, (chain[k], chain[k + 1]),
                                      allowed=tuple(int(v) for v in values)))
    return relations


def _equality_probes(table: BitTable, chain: List[BitRange]) -> List[Relation]:
    relations = []
    lo, hi = table.geom.field_range(Field.PAGE)
    for a, b in zip(chain, chain[1:]):
        first = bits_of(table.values[:, a.column], lo, hi)
        second = bits_of(table.values[:, b.column], lo, hi)
        if np.all(first == second):
            relations.append(Relation(RelationKind.EQUALITY, (a, b), field=Field.PAGE))
    return relations


def extract_relations(table: BitTable, candidates: Candidates) -> List[Relation]:
    """Relations explaining the candidates; raises NoConsistentRelation when none do"""
    if candidates.empty:
        return []

    relations: List[Relation] = []
    covered = set()

    for column in candidates.explained:
        rel = _column_constraint(table, table.mutated_range(column))
        if rel is not None:
            relations.append(rel)
            covered.add(column)

    for i, j in candidates.pairs:
        if i in covered and j in covered:
            continue
        pair = _pair_relations(table, table.mutated_range(i), table.mutated_range(j))
        if pair:
            relations.extend(pair)
            covered.update((i, j))

    remaining = sorted(set(candidates.unexplained) | {c for p in candidates.pairs for c in p})
    chain = [table.mutated_range(c) for c in remaining if c not in covered]
    if len(chain) >= 2:
        derived = _difference_relations(table, chain)
        if derived:
            relations.extend(derived)
            relations.extend(_equality_probes(table, chain))

    if not relations:
        raise NoConsistentRelation(f"no relation explains the candidates of class {table.label}")
    return relations


# Validation


@dataclass
class ValidationResult:
    valid: bool
    witness: Optional[str] = None
    reason: str = ""


def _satisfying_count(r: Relation) -> int:
    if r.kind is RelationKind.CONSTRAINT:
        return len(r.allowed)
    nx = r.ranges[0].modulus
    if r.kind is RelationKind.LINEAR:
        return nx
    return nx * (r.ranges[1].modulus - 1)


def validate(table: BitTable, r: Relation) -> ValidationResult:
    """Every row satisfies r and every combination r leaves free occurs"""
    mask = r.holds(table)
    if not mask.all():
        witness = table.testcase_ids[int(np.flatnonzero(~mask)[0])]
        r.status = "invalid"
        return ValidationResult(False, witness, "row violates relation")

    if r.kind in (RelationKind.CONSTRAINT, RelationKind.LINEAR, RelationKind.NEGATED_LINEAR):
        involved = [table.mutated_range(c) or r.ranges[0] for c in r.columns]
        free = sum(full.width for full in involved) - sum(s.width for s in r.ranges)
        expected = _satisfying_count(r) << free
        actual = _distinct(table, involved)
        if actual != expected:
            r.status = "invalid"
            return ValidationResult(False, None, f"coverage {actual} of {expected} combinations")

    r.status = "valid"
    return ValidationResult(True)


@dataclass
class TableAnalysis:
    table: BitTable
    candidates: Candidates
    relations: List[Relation] = field(default_factory=list)
    validations: List[ValidationResult] = field(default_factory=list)
    inconclusive: bool = False
    note: str = ""

    @property
    def valid_relations(self) -> List[Relation]:
        return [r for r, v in zip(self.relations, self.validations) if v.valid]


def analyze_table(table: BitTable) -> TableAnalysis:
    candidates = candidate_selection(table)
    result = TableAnalysis(table, candidates)
    if candidates.empty:
        result.note = "no candidates"
        return result
    try:
        result.relations = extract_relations(table, candidates)
    except NoConsistentRelation as e:
        result.inconclusive = True
        result.note = str(e)
        logger.info(f"Class {table.label}: inconclusive ({e})")
        return result
    result.validations = [validate(table, r) for r in result.relations]
    return result
