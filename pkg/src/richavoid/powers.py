"""Definition-level detection of ordinary, abelian, and additive k-powers."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .words import DomainError, Morphism, Word, format_word

# Below this length the plain-Python scan wins over the vectorized one.
_VECTOR_THRESHOLD = 64


class PowerKind(enum.Enum):
    ORDINARY = "ordinary"
    ABELIAN = "abelian"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class PowerOccurrence:
    start: int
    period: int
    exponent: int
    kind: PowerKind

    def to_json(self):
        return {
            "start": self.start,
            "period": self.period,
            "exponent": self.exponent,
            "kind": self.kind.value,
        }


@dataclass
class ScanReport:
    scanned_length: int
    max_period: int
    kind: PowerKind
    k: int
    occurrences: list = field(default_factory=list)
    exhaustive: bool = True

    @property
    def clean(self) -> bool:
        return not self.occurrences

    def to_json(self):
        return {
            "scanned_length": self.scanned_length,
            "max_period": self.max_period,
            "kind": self.kind.value,
            "k": self.k,
            "occurrences": [{"start": o.start, "period": o.period} for o in self.occurrences],
            "exhaustive": self.exhaustive,
        }


def _check_k(k: int):
    if k < 2:
        raise ValueError(f"power exponent must be at least 2, got {k}")


def is_kpower(w: Word, k: int, kind: PowerKind) -> bool:
    """Definitional check that w itself is a k-power of the given kind."""
    _check_k(k)
    n = len(w)
    if n == 0 or n % k:
        return False
    m = n // k
    first = w[:m]
    if kind is PowerKind.ORDINARY:
        return all(w[i * m:(i + 1) * m] == first for i in range(1, k))
    if kind is PowerKind.ABELIAN:
        ref = Counter(first)
        return all(Counter(w[i * m:(i + 1) * m]) == ref for i in range(1, k))
    if kind is PowerKind.ADDITIVE:
        ref = sum(first)
        return all(sum(w[i * m:(i + 1) * m]) == ref for i in range(1, k))
    raise ValueError(f"unknown power kind {kind!r}")


class PrefixTables:
    """Cumulative letter counts and letter sums of a growable word.

    sums[i] is the sum of the first i letters; counts[c][i] counts letter c in
    the first i letters. Supports O(1) append/pop for incremental use.
    """

    def __init__(self, w: Word = ()):
        self.word = []
        self.sums = [0]
        self.counts = {}
        for c in w:
            self.append(c)

    def append(self, c):
        self.word.append(c)
        self.sums.append(self.sums[-1] + c)
        n = len(self.word)
        col = self.counts.get(c)
        if col is None:
            # lazily add a column, backfilled with zeros
            col = self.counts[c] = [0] * n
        for other in self.counts.values():
            other.append(other[-1])
        col[n] += 1

    def pop(self):
        c = self.word.pop()
        self.sums.pop()
        for col in self.counts.values():
            col.pop()
        return c

    def block_sum(self, i: int, j: int) -> int:
        return self.sums[j] - self.sums[i]

    def block_counts(self, i: int, j: int) -> tuple:
        return tuple((c, col[j] - col[i]) for c, col in sorted(self.counts.items())
                     if col[j] - col[i])


def _blocks_match(tables: PrefixTables, w, start: int, m: int, k: int, kind: PowerKind) -> bool:
    if kind is PowerKind.ORDINARY:
        first = w[start:start + m]
        return all(w[start + i * m:start + (i + 1) * m] == first for i in range(1, k))
    if kind is PowerKind.ABELIAN:
        ref = tables.block_counts(start, start + m)
        return all(tables.block_counts(start + i * m, start + (i + 1) * m) == ref
                   for i in range(1, k))
    ref = tables.block_sum(start, start + m)
    return all(tables.block_sum(start + i * m, start + (i + 1) * m) == ref
               for i in range(1, k))


def _find_kpower_small(w: Word, k: int, kind: PowerKind, max_period: int) -> Optional[PowerOccurrence]:
    n = len(w)
    tables = PrefixTables(w)
    for start in range(n):
        top = min(max_period, (n - start) // k)
        for m in range(1, top + 1):
            if _blocks_match(tables, w, start, m, k, kind):
                return PowerOccurrence(start, m, k, kind)
    return None


class _VectorTables:
    """numpy cumulative tables for the vectorized period-by-period scan."""

    def __init__(self, w: Word):
        arr = np.asarray(w, dtype=np.int64)
        self.letters = arr
        self.n = len(w)
        self.cumsum = np.concatenate(([0], np.cumsum(arr)))
        self.cumcounts = {}
        for c in sorted(set(w)):
            self.cumcounts[c] = np.concatenate(([0], np.cumsum(arr == c)))

    def hit_starts(self, m: int, k: int, kind: PowerKind):
        """Boolean array over starts s in [0, n - k*m] marking k-power hits."""
        n = self.n
        width = n - k * m + 1
        if width <= 0:
            return None
        if kind is PowerKind.ORDINARY:
            eq = np.concatenate(([0], np.cumsum(self.letters[:-m] == self.letters[m:])))
            span = (k - 1) * m
            return eq[span:span + width] - eq[:width] == span
        if kind is PowerKind.ADDITIVE:
            tables = [self.cumsum]
        else:
            # all but one letter count suffices: equal lengths force the last
            tables = [col for _, col in sorted(self.cumcounts.items())[1:]] or [self.cumsum]
        ok = None
        for tab in tables:
            d0 = tab[m:m + width] - tab[:width]
            for i in range(1, k):
                di = tab[(i + 1) * m:(i + 1) * m + width] - tab[i * m:i * m + width]
                cond = d0 == di
                ok = cond if ok is None else ok & cond
        return ok


def find_kpower(w: Word, k: int, kind: PowerKind,
                max_period: Optional[int] = None) -> Optional[PowerOccurrence]:
    """Least (start, period) occurrence of a k-power of the given kind, or None."""
    _check_k(k)
    n = len(w)
    cap = n // k if max_period is None else min(max_period, n // k)
    if cap < 1:
        return None
    if n < _VECTOR_THRESHOLD:
        return _find_kpower_small(w, k, kind, cap)
    vt = _VectorTables(w)
    best = None  # (start, period)
    for m in range(1, cap + 1):
        hits = vt.hit_starts(m, k, kind)
        if hits is None:
            break
        if best is not None:
            # only an earlier start (or same start, smaller period already kept)
            hits = hits[:best[0] + 1]
        idx = np.flatnonzero(hits)
        if idx.size:
            s = int(idx[0])
            if best is None or s < best[0]:
                best = (s, m)
    if best is None:
        return None
    return PowerOccurrence(best[0], best[1], k, kind)


def find_all_kpowers(w: Word, k: int, kind: PowerKind, max_period: Optional[int] = None,
                     max_occurrences: int = 1000) -> list:
    """First occurrence for every hitting period, sorted by (start, period), capped."""
    _check_k(k)
    n = len(w)
    cap = n // k if max_period is None else min(max_period, n // k)
    found = []
    if cap >= 1:
        vt = _VectorTables(w)
        for m in range(1, cap + 1):
            hits = vt.hit_starts(m, k, kind)
            if hits is None:
                break
            idx = np.flatnonzero(hits)
            if idx.size:
                found.append(PowerOccurrence(int(idx[0]), m, k, kind))
                if len(found) >= max_occurrences:
                    break
    found.sort(key=lambda o: (o.start, o.period))
    return found


def suffix_kpower(w: Word, k: int, kind: PowerKind,
                  tables: Optional[PrefixTables] = None) -> Optional[int]:
    """Smallest period m such that the length k*m suffix of w is a k-power."""
    _check_k(k)
    if tables is None:
        tables = PrefixTables(w)
    n = len(w)
    for m in range(1, n // k + 1):
        if _blocks_match(tables, w, n - k * m, m, k, kind):
            return m
    return None


def scan_fixed_point(f: Morphism, seed, k: int, kind: PowerKind, n: int,
                     max_period: Optional[int] = None,
                     max_occurrences: int = 1000) -> ScanReport:
    """Scan the length-n prefix of f^omega(seed) for k-powers."""
    _check_k(k)
    w = f.fixed_point(seed).prefix(n)
    cap = n // k if max_period is None else min(max_period, n // k)
    occurrences = find_all_kpowers(w, k, kind, cap, max_occurrences)
    exhaustive = (max_period is None or max_period >= n // k) and len(occurrences) < max_occurrences
    return ScanReport(scanned_length=n, max_period=cap, kind=kind, k=k,
                      occurrences=occurrences, exhaustive=exhaustive)


def relabel(w: Word, mapping: dict) -> Word:
    """Letterwise substitution; raises DomainError on an unmapped letter."""
    out = []
    for c in w:
        if c not in mapping:
            raise DomainError(f"letter {c} has no relabeling (word {format_word(w[:8])}...)")
        out.append(mapping[c])
    return tuple(out)
