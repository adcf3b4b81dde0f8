"""Template-ancestor decision procedure for additive k-power-freeness.

A template is a tuple of k+1 boundary words (each empty or a single letter)
together with k-1 integer 2-vectors giving the required (length, sum)
differences between consecutive blocks.  Instances of the root template are
exactly the additive k-powers; the parent relation pulls instances back
through the morphism, and the ancestor closure is finite whenever every
eigenvalue of the morphism's affine matrix lies strictly outside the unit
circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .powers import PowerKind, PowerOccurrence, find_kpower, scan_fixed_point
from .words import Morphism, Psi, Word, eigenvalues_outside_unit_circle, format_word, psi

_VECTOR_THRESHOLD = 64


class PreconditionError(ValueError):
    pass


class AncestorCapError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Template:
    boundaries: tuple  # k+1 words, each () or (letter,)
    deltas: tuple      # k-1 pairs (length difference, sum difference)

    def __post_init__(self):
        if len(self.boundaries) != len(self.deltas) + 2:
            raise ValueError("a k-template needs k+1 boundaries and k-1 deltas")
        if any(len(d) > 1 for d in self.boundaries):
            raise ValueError("boundary words must have length at most 1")

    @property
    def k(self) -> int:
        return len(self.boundaries) - 1

    def length_spread(self) -> int:
        """Range of the cumulative block-length offsets forced by the deltas."""
        off = 0
        lo = hi = 0
        for d in self.deltas:
            off += d[0]
            lo = min(lo, off)
            hi = max(hi, off)
        return hi - lo

    def to_json(self):
        return {
            "boundaries": [format_word(b) for b in self.boundaries],
            "deltas": [list(d) for d in self.deltas],
        }


def root_template(k: int) -> Template:
    """All boundaries empty, all deltas zero; instances are additive k-powers."""
    if k < 2:
        raise ValueError(f"power exponent must be at least 2, got {k}")
    return Template(((),) * (k + 1), ((0, 0),) * (k - 1))


@dataclass(frozen=True)
class Instance:
    start: int
    block_lengths: tuple
    total_length: int

    def to_json(self):
        return {
            "start": self.start,
            "block_lengths": list(self.block_lengths),
            "total_length": self.total_length,
        }


def _layout(t: Template, m: int):
    """Block lengths and in-factor offsets for block-1 length m, or None."""
    lengths = [m]
    for d in t.deltas:
        lengths.append(lengths[-1] + d[0])
    if any(l < 1 for l in lengths):
        return None
    bounds = [len(b) for b in t.boundaries]
    blocks = []  # (start offset, end offset) per block
    pos = bounds[0]
    for i, l in enumerate(lengths):
        blocks.append((pos, pos + l))
        pos += l + bounds[i + 1]
    return tuple(lengths), tuple(blocks), pos  # pos == total length


def _m_range(t: Template, max_total: int):
    fixed = sum(len(b) for b in t.boundaries)
    off = 0
    min_off = 0
    total_off = 0
    for d in t.deltas:
        off += d[0]
        min_off = min(min_off, off)
        total_off += off
    m_lo = max(1, 1 - min_off)
    m_hi = (max_total - fixed - total_off) // t.k if t.k else 0
    return m_lo, m_hi


def find_instance(w: Word, t: Template, max_total: int) -> Optional[Instance]:
    """Least (start, block-1 length) instance of t among factors of w.

    An instance is a factor d_0 w_1 d_1 ... w_k d_k with every block w_i
    nonempty and psi(w_{i+1}) - psi(w_i) equal to the i-th delta.  Fixing the
    start and |w_1| forces every block length and sum, so each candidate costs
    O(k) with prefix tables.
    """
    n = len(w)
    max_total = min(max_total, n)
    m_lo, m_hi = _m_range(t, max_total)
    if m_hi < m_lo:
        return None
    if n < _VECTOR_THRESHOLD:
        return _find_instance_small(w, t, m_lo, m_hi)
    return _find_instance_vector(np.asarray(w, dtype=np.int64), t, m_lo, m_hi)


def _find_instance_small(w, t, m_lo, m_hi):
    n = len(w)
    sums = [0]
    for c in w:
        sums.append(sums[-1] + c)
    layouts = [(m, _layout(t, m)) for m in range(m_lo, m_hi + 1)]
    layouts = [(m, lay) for m, lay in layouts if lay is not None]
    for s in range(n):
        for m, (lengths, blocks, total) in layouts:
            if s + total > n:
                continue
            ok = True
            for i, b in enumerate(t.boundaries):
                off = 0 if i == 0 else blocks[i - 1][1]
                if b and w[s + off] != b[0]:
                    ok = False
                    break
            if not ok:
                continue
            prev = None
            for i, (bs, be) in enumerate(blocks):
                cur = sums[s + be] - sums[s + bs]
                if i and cur - prev != t.deltas[i - 1][1]:
                    ok = False
                    break
                prev = cur
            if ok:
                return Instance(s, lengths, total)
    return None


def _find_instance_vector(arr, t, m_lo, m_hi):
    n = len(arr)
    cs = np.concatenate(([0], np.cumsum(arr)))
    best = None  # (start, m, instance)
    for m in range(m_lo, m_hi + 1):
        lay = _layout(t, m)
        if lay is None:
            continue
        lengths, blocks, total = lay
        width = n - total + 1
        if width <= 0:
            continue
        if best is not None:
            width = min(width, best[0] + 1)
        ok = None
        for i, b in enumerate(t.boundaries):
            if b:
                off = 0 if i == 0 else blocks[i - 1][1]
                cond = arr[off:off + width] == b[0]
                ok = cond if ok is None else ok & cond
        prev = None
        for i, (bs, be) in enumerate(blocks):
            cur = cs[be:be + width] - cs[bs:bs + width]
            if i:
                cond = cur - prev == t.deltas[i - 1][1]
                ok = cond if ok is None else ok & cond
            prev = cur
        if ok is None:
            continue
        idx = np.flatnonzero(ok)
        if idx.size:
            s = int(idx[0])
            if best is None or s < best[0]:
                best = (s, m, Instance(s, lengths, total))
    return best[2] if best else None


def _boundary_options(f: Morphism, child_boundary: tuple):
    """All (parent boundary, p, q) with f(parent) = p . child . q spanned properly."""
    options = []
    if not child_boundary:
        options.append(((), (), ()))
        for c in f.domain:
            img = f.images[c]
            for j in range(1, len(img)):
                options.append(((c,), img[:j], img[j:]))
    else:
        x = child_boundary[0]
        for c in f.domain:
            img = f.images[c]
            for j, letter in enumerate(img):
                if letter == x:
                    options.append(((c,), img[:j], img[j + 1:]))
    return options


def parents(t: Template, f: Morphism):
    """All templates t' whose instances in w force an instance of t in f(w).

    Every choice of parent boundaries and image factorizations determines the
    parent deltas via a' = M^-1 (a - psi(q_i) - psi(p_{i+1}) + psi(q_{i-1})
    + psi(p_i)); only integral solutions are kept, in exact arithmetic.
    """
    profile = f.affine_profile()
    if profile is None or profile.det == 0:
        raise PreconditionError("parent computation needs an affine morphism with invertible matrix")
    k = t.k
    options = [_boundary_options(f, b) for b in t.boundaries]
    found = set()
    choice = [None] * (k + 1)  # per boundary: (parent boundary, p, q, delta settled here)

    def descend(idx):
        if idx == k + 1:
            boundaries = tuple(choice[i][0] for i in range(k + 1))
            deltas = tuple(tuple(choice[i][3]) for i in range(2, k + 1))
            found.add(Template(boundaries, deltas))
            return
        for dprime, p, q in options[idx]:
            delta = None
            if idx >= 2:
                # delta i is determined once boundaries i-1, i, i+1 are chosen
                i = idx - 1
                _, p_i, q_i, _ = choice[i]
                _, _, q_im1, _ = choice[i - 1]
                v = Psi(*t.deltas[i - 1]) - psi(q_i) - psi(p) + psi(q_im1) + psi(p_i)
                delta = profile.inverse_apply(v)
                if delta is None:
                    continue
            choice[idx] = (dprime, p, q, delta)
            descend(idx + 1)
        choice[idx] = None

    descend(0)
    return tuple(sorted(found))


@dataclass
class TemplateSet:
    members: tuple
    closure_iterations: int = 0
    depths: dict = field(default_factory=dict)

    def __contains__(self, t):
        return t in self._member_set

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __post_init__(self):
        self._member_set = set(self.members)


def check_hypotheses(f: Morphism, seed, k: int) -> list:
    """Failed Theorem-hypothesis names for the decision procedure; empty if all hold."""
    failures = []
    if k < 2:
        failures.append(f"power exponent must be at least 2, got {k}")
    if not f.is_strictly_growing():
        failures.append("morphism is not strictly growing (some image has length < 2)")
    if seed is not None:
        try:
            if not f.is_prolongable(seed):
                failures.append(f"morphism is not prolongable on {seed}")
        except Exception as exc:
            failures.append(str(exc))
    profile = f.affine_profile()
    if profile is None:
        failures.append("morphism is not affine")
    else:
        if profile.det == 0:
            failures.append("affine matrix is singular")
        elif not eigenvalues_outside_unit_circle(profile.matrix):
            failures.append("affine matrix has an eigenvalue inside the closed unit disk")
    return failures


def ancestor_closure(f: Morphism, k: int, cap: int = 200_000) -> TemplateSet:
    """Breadth-first closure of the root template under the parent relation.

    Termination is guaranteed by the eigenvalue hypothesis (the parent deltas
    contract); the cap aborts loudly rather than truncating.
    """
    failures = check_hypotheses(f, None, k)
    if failures:
        raise PreconditionError("; ".join(failures))
    root = root_template(k)
    depths = {root: 0}
    frontier = [root]
    iterations = 0
    while frontier:
        iterations += 1
        nxt = []
        for t in frontier:
            for p in parents(t, f):
                if p not in depths:
                    depths[p] = depths[t] + 1
                    nxt.append(p)
                    if len(depths) > cap:
                        raise AncestorCapError(
                            f"ancestor closure exceeded cap {cap}; raise the cap to continue")
        frontier = nxt
    members = tuple(sorted(depths))
    return TemplateSet(members=members, closure_iterations=iterations, depths=depths)


def instance_length_bound(t: Template, f: Morphism, k: int) -> int:
    """Total length below which an irreducible instance of t must fall.

    An instance whose blocks all have length at least 2*M - 1 (M the longest
    image) pulls back through f to a parent instance, so an instance that
    cannot be pulled back has a block of length at most 2*M - 2, and the
    deltas bound every other block within the template's length spread.
    """
    M = max(len(img) for img in f.images.values())
    per_block = 2 * M - 2 + t.length_spread()
    return k * per_block + sum(len(b) for b in t.boundaries)


def factor_stabilization_length(f: Morphism, seed, window: int,
                                max_length: int = 5_000_000) -> int:
    """Prefix length after which the set of length-`window` factors is complete.

    For a strictly growing morphism, the length-`window` factor set of f(v)
    is a function of the factor set of v, so two consecutive equal sets
    certify the fixed point's whole factor set has been seen.
    """
    w = (seed,)
    prev_factors = None
    while True:
        w = f.apply(w)
        if len(w) > max_length:
            raise AncestorCapError(
                f"factor stabilization did not occur within {max_length} letters")
        if len(w) <= window:
            continue
        factors = {w[i:i + window] for i in range(len(w) - window + 1)}
        if factors == prev_factors:
            return len(w)
        prev_factors = factors


@dataclass
class DecisionConfig:
    initial_prefix_length: int
    initial_max_period: int
    final_prefix_length: int
    final_max_instance_length: int
    ancestor_cap: int = 200_000

    def __post_init__(self):
        for name in ("initial_prefix_length", "initial_max_period",
                     "final_prefix_length", "final_max_instance_length", "ancestor_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_json(self):
        return {
            "initial_prefix_length": self.initial_prefix_length,
            "initial_max_period": self.initial_max_period,
            "final_prefix_length": self.final_prefix_length,
            "final_max_instance_length": self.final_max_instance_length,
            "ancestor_cap": self.ancestor_cap,
        }


def derive_config(f: Morphism, seed, k: int, ancestors: TemplateSet,
                  ancestor_cap: int = 200_000) -> DecisionConfig:
    """Bounds under which the two checks certify freeness.

    The final check must see every factor up to the largest irreducible
    instance length; the initial check re-scans plain additive k-powers at
    twice that bound as a cross-check.
    """
    bound = max(instance_length_bound(t, f, k) for t in ancestors)
    prefix = factor_stabilization_length(f, seed, bound)
    prefix2 = factor_stabilization_length(f, seed, min(2 * bound, prefix))
    return DecisionConfig(
        initial_prefix_length=max(prefix, prefix2),
        initial_max_period=max(1, (2 * bound) // k + 1),
        final_prefix_length=prefix,
        final_max_instance_length=bound,
        ancestor_cap=ancestor_cap,
    )


def initial_check(f: Morphism, seed, k: int, config: DecisionConfig) -> Optional[PowerOccurrence]:
    report = scan_fixed_point(f, seed, k, PowerKind.ADDITIVE,
                              config.initial_prefix_length,
                              max_period=config.initial_max_period,
                              max_occurrences=1)
    return report.occurrences[0] if report.occurrences else None


def final_check(f: Morphism, seed, ancestors: TemplateSet, config: DecisionConfig,
                k: Optional[int] = None):
    """First (template, instance) hit over the configured prefix, or None."""
    if k is None:
        k = ancestors.members[0].k
    w = f.fixed_point(seed).prefix(config.final_prefix_length)
    for t in ancestors:
        cap = min(instance_length_bound(t, f, k), config.final_max_instance_length)
        hit = find_instance(w, t, cap)
        if hit is not None:
            return t, hit
    return None


VERDICT_FREE = "FREE"
VERDICT_POWER_FOUND = "POWER_FOUND"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class DecisionCertificate:
    verdict: str
    k: int
    morphism: str
    seed: int
    ancestor_count: int
    bounds: dict
    witness: Optional[dict]
    closure_iterations: int

    def to_json(self):
        return {
            "verdict": self.verdict,
            "k": self.k,
            "morphism": self.morphism,
            "seed": self.seed,
            "ancestor_count": self.ancestor_count,
            "bounds": self.bounds,
            "witness": self.witness,
            "closure_iterations": self.closure_iterations,
        }


def _power_witness(w: Word, occ: PowerOccurrence) -> dict:
    factor = w[occ.start:occ.start + occ.period * occ.exponent]
    return {
        "type": "power",
        "start": occ.start,
        "period": occ.period,
        "exponent": occ.exponent,
        "kind": occ.kind.value,
        "factor": format_word(factor),
    }


def decide_additive_power_free(f: Morphism, seed, k: int,
                               config: Optional[DecisionConfig] = None) -> DecisionCertificate:
    """Run the three-phase decision procedure and return a certificate.

    With config=None the certified bounds are derived from the ancestor set;
    passing a config with smaller bounds yields INCONCLUSIVE unless a power
    turns up anyway.
    """
    failures = check_hypotheses(f, seed, k)
    if failures:
        raise PreconditionError("; ".join(failures))
    cap = config.ancestor_cap if config else 200_000
    ancestors = ancestor_closure(f, k, cap=cap)
    derived = derive_config(f, seed, k, ancestors, ancestor_cap=cap)
    effective = config or derived
    certified = (
        effective.final_prefix_length >= derived.final_prefix_length
        and effective.final_max_instance_length >= derived.final_max_instance_length
        and effective.initial_prefix_length >= derived.initial_prefix_length
        and effective.initial_max_period >= derived.initial_max_period
    )
    bounds = effective.to_json()
    bounds["provenance"] = "derived" if certified else "configured"
    bounds["derived"] = derived.to_json()

    occ = initial_check(f, seed, k, effective)
    if occ is not None:
        w = f.fixed_point(seed).prefix(effective.initial_prefix_length)
        return DecisionCertificate(
            verdict=VERDICT_POWER_FOUND, k=k, morphism=f.format(), seed=seed,
            ancestor_count=len(ancestors), bounds=bounds,
            witness=_power_witness(w, occ),
            closure_iterations=ancestors.closure_iterations)

    hit = final_check(f, seed, ancestors, effective, k=k)
    if hit is not None:
        t, inst = hit
        witness = {"type": "template_instance", "template": t.to_json(),
                   "instance": inst.to_json(), "pullback_depth": ancestors.depths.get(t)}
        # an ancestor instance pushes forward to a genuine additive k-power
        depth = ancestors.depths.get(t, 0)
        w = f.fixed_point(seed).prefix(effective.final_prefix_length)
        factor = w[inst.start:inst.start + inst.total_length]
        pushed = f.power_apply(depth, factor)
        occ = find_kpower(pushed, k, PowerKind.ADDITIVE)
        if occ is not None:
            witness = _power_witness(pushed, occ)
            witness["pushed_forward"] = depth
        return DecisionCertificate(
            verdict=VERDICT_POWER_FOUND, k=k, morphism=f.format(), seed=seed,
            ancestor_count=len(ancestors), bounds=bounds, witness=witness,
            closure_iterations=ancestors.closure_iterations)

    verdict = VERDICT_FREE if certified else VERDICT_INCONCLUSIVE
    return DecisionCertificate(
        verdict=verdict, k=k, morphism=f.format(), seed=seed,
        ancestor_count=len(ancestors), bounds=bounds, witness=None,
        closure_iterations=ancestors.closure_iterations)
