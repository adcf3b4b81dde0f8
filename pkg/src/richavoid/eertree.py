"""Palindromic tree with O(1) rollback, for richness queries and backtracking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .words import Morphism, Word


class StateError(RuntimeError):
    pass


@dataclass
class RichnessReport:
    length: int
    rich: bool
    first_failure: Optional[int]
    palindrome_count: int

    def to_json(self):
        return {
            "length": self.length,
            "rich": self.rich,
            "first_failure": self.first_failure,
            "palindrome_count": self.palindrome_count,
        }


class EerTree:
    """One node per distinct nonempty palindromic factor of the current word.

    add_letter creates at most one node and writes at most one edge, so a
    four-field journal record suffices for exact rollback.
    """

    __slots__ = ("word", "_len", "_link", "_edges", "_last", "_journal")

    def __init__(self):
        # node 0: length -1 sentinel; node 1: empty-word sentinel
        self.word = []
        self._len = [-1, 0]
        self._link = [0, 0]
        self._edges = [{}, {}]
        self._last = 1
        self._journal = []

    def _extendable(self, v: int, pos: int, c) -> bool:
        l = self._len[v]
        return pos - l - 1 >= 0 and self.word[pos - l - 1] == c

    def add_letter(self, c) -> bool:
        """Append c; True iff a new palindrome node was created.

        The longest palindromic suffix of the new word is unioccurrent exactly
        when its node is created here, which is the richness criterion.
        """
        word = self.word
        word.append(c)
        pos = len(word) - 1
        v = self._last
        while not self._extendable(v, pos, c):
            v = self._link[v]
        existing = self._edges[v].get(c)
        created = existing is None
        if created:
            new_len = self._len[v] + 2
            if new_len == 1:
                slink = 1
            else:
                u = self._link[v]
                while not self._extendable(u, pos, c):
                    u = self._link[u]
                slink = self._edges[u][c]
            node = len(self._len)
            self._len.append(new_len)
            self._link.append(slink)
            self._edges.append({})
            self._edges[v][c] = node
            existing = node
        self._journal.append((created, v if created else -1, c, self._last))
        self._last = existing
        return created

    def undo(self):
        if not self._journal:
            raise StateError("nothing to undo")
        created, parent, c, prev_last = self._journal.pop()
        self.word.pop()
        self._last = prev_last
        if created:
            del self._edges[parent][c]
            self._len.pop()
            self._link.pop()
            self._edges.pop()

    def __len__(self):
        return len(self.word)

    def palindrome_count(self) -> int:
        """Number of distinct nonempty palindromic factors; at most len(word)."""
        return len(self._len) - 2

    def longest_palindromic_suffix(self) -> Word:
        if not self.word:
            raise StateError("empty word has no palindromic suffix")
        return tuple(self.word[-self._len[self._last]:])


def has_unioccurrent_palindromic_suffix(w: Word) -> bool:
    if not w:
        raise ValueError("the empty word has no palindromic suffix")
    tree = EerTree()
    created = False
    for c in w:
        created = tree.add_letter(c)
    return created


def _richness_of(letters) -> RichnessReport:
    tree = EerTree()
    first_failure = None
    n = 0
    for c in letters:
        n += 1
        if not tree.add_letter(c) and first_failure is None:
            first_failure = n
    return RichnessReport(length=n, rich=first_failure is None,
                          first_failure=first_failure,
                          palindrome_count=tree.palindrome_count())


def is_rich(w: Word) -> RichnessReport:
    return _richness_of(w)


def stream_richness(f: Morphism, seed, n: int) -> RichnessReport:
    """Richness of the length-n prefix of f^omega(seed), built incrementally."""
    return _richness_of(f.fixed_point(seed).prefix(n))
