"""Exhaustive DFS for the longest rich k-power-free word, with checkpoints."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eertree import EerTree, is_rich
from .powers import PowerKind, find_kpower
from .words import Alphabet, Word, format_word, parse_word


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    alphabet: tuple
    k: int
    kind: PowerKind
    require_rich: bool = True
    symmetry_reduction: bool = True
    depth_cap: Optional[int] = None

    def __post_init__(self):
        Alphabet(self.alphabet)
        if self.k < 2:
            raise ValueError("power exponent must be at least 2")
        # additive powers are not permutation-invariant over general integer
        # alphabets; over two letters additive coincides with abelian
        if (self.symmetry_reduction and self.kind is PowerKind.ADDITIVE
                and len(self.alphabet) != 2):
            raise ValueError("symmetry reduction is unsound for additive powers "
                             "over alphabets of size != 2")

    def fingerprint(self) -> str:
        return (f"alphabet={','.join(map(str, self.alphabet))} k={self.k} "
                f"kind={self.kind.value} rich={int(self.require_rich)} "
                f"symmetry={int(self.symmetry_reduction)} "
                f"depth_cap={self.depth_cap if self.depth_cap is not None else '-'}")

    def to_json(self):
        return {
            "alphabet": list(self.alphabet),
            "k": self.k,
            "kind": self.kind.value,
            "require_rich": self.require_rich,
            "symmetry_reduction": self.symmetry_reduction,
            "depth_cap": self.depth_cap,
        }


@dataclass
class SearchResult:
    max_length: int
    witness: Word
    nodes_visited: int
    exhausted: bool
    spec: SearchSpec = None

    def to_json(self):
        return {
            "max_length": self.max_length,
            "witness": format_word(self.witness),
            "nodes_visited": self.nodes_visited,
            "exhausted": self.exhausted,
            "spec": self.spec.to_json() if self.spec else None,
        }


class _SuffixPowerTables:
    """Preallocated cumulative tables answering suffix k-power queries fast."""

    def __init__(self, spec: SearchSpec):
        self.kind = spec.kind
        self.k = spec.k
        self.n = 0
        self._cap = 4096
        if spec.kind is PowerKind.ADDITIVE or len(spec.alphabet) == 2:
            # one cumulative letter-sum table decides both kinds on 2 letters
            self._keys = [None]
        else:
            # per-letter counts, dropping one letter (fixed lengths force it)
            self._keys = list(spec.alphabet[1:])
        self._tabs = [np.zeros(self._cap + 1, dtype=np.int64) for _ in self._keys]
        self.word = []

    def push(self, c):
        n = self.n
        if n + 1 > self._cap:
            self._cap *= 2
            self._tabs = [np.concatenate([t, np.zeros(self._cap + 1 - len(t), np.int64)])
                          for t in self._tabs]
        for key, tab in zip(self._keys, self._tabs):
            inc = c if key is None else int(c == key)
            tab[n + 1] = tab[n] + inc
        self.word.append(c)
        self.n = n + 1

    def pop(self):
        self.n -= 1
        self.word.pop()

    def suffix_power_exists(self) -> bool:
        n, k = self.n, self.k
        top = n // k
        if top < 1:
            return False
        if self.kind is PowerKind.ORDINARY:
            w = self.word
            for m in range(1, top + 1):
                first = w[n - k * m:n - (k - 1) * m]
                if all(w[n - (i + 1) * m:n - i * m] == first for i in range(k - 1)):
                    return True
            return False
        # S_j[m-1] = tab[n - j*m] for m = 1..top, as strided views (no copies);
        # a hit is a period where all consecutive block sums S_{j-1} - S_j agree
        ok = None
        for tab in self._tabs:
            prev_diff = None
            prev_s = tab[n]
            for j in range(1, k + 1):
                s = tab[n - j::-j][:top]
                diff = prev_s - s
                if j > 1:
                    cond = diff == prev_diff
                    ok = cond if ok is None else ok & cond
                prev_diff = diff
                prev_s = s
        return bool(ok.any())


class BacktrackingSearch:
    """DFS in canonical letter order; richness and suffix-power pruning."""

    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.tree = EerTree()
        self.tables = _SuffixPowerTables(spec)
        self.word = []
        self.stack = []   # per depth: index of the next candidate letter to try
        self.best_length = 0
        self.best_witness = ()
        self.nodes_visited = 0
        self.exhausted = True
        self._used = [0]  # distinct letters used, per depth, for canonical order

    def _candidates(self, depth):
        alpha = self.spec.alphabet
        if not self.spec.symmetry_reduction:
            return alpha
        return alpha[:min(self._used[depth] + 1, len(alpha))]

    def _try_extend(self, c) -> bool:
        created = self.tree.add_letter(c)
        if self.spec.require_rich and not created:
            self.tree.undo()
            return False
        self.tables.push(c)
        if self.tables.suffix_power_exists():
            self.tables.pop()
            self.tree.undo()
            return False
        self.word.append(c)
        return True

    def _retract(self):
        self.word.pop()
        self.tables.pop()
        self.tree.undo()

    def _push_used(self, c):
        # only meaningful under symmetry reduction, where the letters used so
        # far are exactly the first _used entries of the alphabet
        used = self._used[-1]
        alpha = self.spec.alphabet
        fresh = used < len(alpha) and c == alpha[used]
        self._used.append(used + 1 if fresh else used)

    def run(self, node_budget: Optional[int] = None,
            checkpoint_path: Optional[str] = None,
            checkpoint_interval: Optional[float] = None) -> SearchResult:
        spec = self.spec
        stack = self.stack
        if not stack:
            stack.append(0)
        next_tick = (time.monotonic() + checkpoint_interval
                     if checkpoint_interval and checkpoint_path else None)
        budget_left = node_budget
        while stack:
            depth = len(stack) - 1
            candidates = self._candidates(depth)
            i = stack[-1]
            if i >= len(candidates):
                stack.pop()
                if depth > 0:
                    self._retract()
                    self._used.pop()
                continue
            stack[-1] = i + 1
            c = candidates[i]
            if not self._try_extend(c):
                continue
            self.nodes_visited += 1
            depth += 1
            self._push_used(c)
            if depth > self.best_length:
                self.best_length = depth
                self.best_witness = tuple(self.word)
            if spec.depth_cap is not None and depth >= spec.depth_cap:
                self.exhausted = False
                self._retract()
                self._used.pop()
                continue
            stack.append(0)
            if budget_left is not None:
                budget_left -= 1
                if budget_left <= 0:
                    if checkpoint_path:
                        self.save_checkpoint(checkpoint_path)
                    return self._result(exhausted=False)
            if next_tick is not None and time.monotonic() >= next_tick:
                self.save_checkpoint(checkpoint_path)
                next_tick = time.monotonic() + checkpoint_interval
        if checkpoint_path:
            self.save_checkpoint(checkpoint_path)
        return self._result(exhausted=self.exhausted)

    def _result(self, exhausted: bool) -> SearchResult:
        return SearchResult(max_length=self.best_length, witness=self.best_witness,
                            nodes_visited=self.nodes_visited, exhausted=exhausted,
                            spec=self.spec)

    def save_checkpoint(self, path: str):
        lines = [f"# richavoid search checkpoint",
                 f"spec {self.spec.fingerprint()}",
                 f"nodes {self.nodes_visited}",
                 f"best {self.best_length} {format_word(self.best_witness)}",
                 f"exhausted {int(self.exhausted)}"]
        lines += [str(i) for i in self.stack]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def resume(cls, path: str, spec: SearchSpec) -> "BacktrackingSearch":
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
        header = dict(ln.split(" ", 1) for ln in lines[:4])
        if header.get("spec") != spec.fingerprint():
            raise CheckpointError(
                f"checkpoint spec {header.get('spec')!r} does not match {spec.fingerprint()!r}")
        search = cls(spec)
        search.nodes_visited = int(header["nodes"])
        best_len, _, best_word = header["best"].partition(" ")
        search.best_length = int(best_len)
        search.best_witness = parse_word(best_word) if best_word else ()
        search.exhausted = bool(int(header["exhausted"]))
        frames = [int(ln) for ln in lines[4:]]
        # replay the DFS path: each saved frame but the last names the child
        # taken as frame value - 1
        for depth, nxt in enumerate(frames[:-1]):
            candidates = search._candidates(depth)
            c = candidates[nxt - 1]
            if not search._try_extend(c):
                raise CheckpointError("checkpoint path is not a valid search state")
            search._push_used(c)
            search.stack.append(nxt)
        if frames:
            search.stack.append(frames[-1])
        return search


def longest_rich_power_free(spec: SearchSpec, node_budget: Optional[int] = None,
                            checkpoint_path: Optional[str] = None,
                            checkpoint_interval: Optional[float] = None,
                            resume_from: Optional[str] = None) -> SearchResult:
    if resume_from:
        search = BacktrackingSearch.resume(resume_from, spec)
    else:
        search = BacktrackingSearch(spec)
    return search.run(node_budget=node_budget, checkpoint_path=checkpoint_path,
                      checkpoint_interval=checkpoint_interval)


def verify_witness(spec: SearchSpec, w: Word) -> bool:
    """Re-validate a search witness against the independent oracles."""
    if any(c not in spec.alphabet for c in w):
        return False
    if spec.require_rich and not is_rich(w).rich:
        return False
    return find_kpower(w, spec.k, spec.kind) is None
