"""Shared naive oracles for differential testing.

Everything here recomputes properties from the definitions with the slowest,
most obviously correct method available (explicit slices, substring sets),
deliberately sharing no code with the package under test.
"""

import itertools
import random

import pytest

from richavoid import PowerKind


# ---------------------------------------------------------------------------
# power oracles

def naive_is_kpower(w, k, kind):
    """w itself is a k-power, straight from the definition."""
    n = len(w)
    if n == 0 or n % k:
        return False
    m = n // k
    blocks = [w[i * m:(i + 1) * m] for i in range(k)]
    if kind is PowerKind.ORDINARY:
        return all(b == blocks[0] for b in blocks)
    if kind is PowerKind.ABELIAN:
        return all(sorted(b) == sorted(blocks[0]) for b in blocks)
    return all(sum(b) == sum(blocks[0]) for b in blocks)


def naive_find_kpower(w, k, kind):
    """Least (start, period) factor that is a k-power; O(n^3)."""
    n = len(w)
    for start in range(n):
        for m in range(1, (n - start) // k + 1):
            if naive_is_kpower(w[start:start + k * m], k, kind):
                return (start, m)
    return None


def naive_suffix_kpower(w, k, kind):
    n = len(w)
    for m in range(1, n // k + 1):
        if naive_is_kpower(w[n - k * m:], k, kind):
            return m
    return None


# ---------------------------------------------------------------------------
# palindrome / richness oracles

def naive_palindrome_set(w):
    """All distinct nonempty palindromic factors, by brute force."""
    return {w[i:j]
            for i in range(len(w))
            for j in range(i + 1, len(w) + 1)
            if w[i:j] == w[i:j][::-1]}


def naive_is_rich(w):
    return len(naive_palindrome_set(w)) == len(w)


def naive_longest_pal_suffix(w):
    for i in range(len(w)):
        if w[i:] == w[i:][::-1]:
            return w[i:]
    raise ValueError("empty word")


def naive_occurrence_count(w, factor):
    m = len(factor)
    return sum(1 for i in range(len(w) - m + 1) if w[i:i + m] == factor)


def naive_unioccurrent_pal_suffix(w):
    return naive_occurrence_count(w, naive_longest_pal_suffix(w)) == 1


# ---------------------------------------------------------------------------
# helpers

def all_words(alphabet, length):
    return itertools.product(alphabet, repeat=length)


def random_word(rng, alphabet, n):
    return tuple(rng.choice(alphabet) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(190841)


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion at the end of the run

def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            name = rep.nodeid.rsplit("::", 1)[-1]
            if name.startswith("test_criterion_"):
                label = name[len("test_criterion_"):]
                status = "PASS" if outcome == "passed" else "FAIL"
                lines.append((label, status))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for label, status in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {label}: {status}")
