"""Templates, the parent relation, ancestor closures, and the decision runs."""

import pytest

from richavoid import (
    BETA, DELTA, GAMMA, DecisionConfig, Instance, Morphism, PowerKind,
    PreconditionError, Template, ancestor_closure, decide_additive_power_free,
    find_instance, find_kpower, parents, root_template,
)
from richavoid.templates import (
    VERDICT_FREE, VERDICT_INCONCLUSIVE, VERDICT_POWER_FOUND, check_hypotheses,
    derive_config, factor_stabilization_length, instance_length_bound,
)

from conftest import all_words, naive_is_kpower, random_word

THUE_MORSE = Morphism({0: (0, 1), 1: (1, 0)})


def word_with_psi(alphabet, length, total):
    """Any word over the alphabet with the given length and letter sum."""
    lo, hi = min(alphabet), max(alphabet)
    if length < 1 or not lo * length <= total <= hi * length:
        return None
    letters = [lo] * length
    need = total - lo * length
    i = 0
    for i in range(length):
        step = min(hi - lo, need)
        letters[i] += step
        need -= step
    assert need == 0
    return tuple(letters)


def build_instance_word(t, alphabet, rng):
    """A word of the form d_0 w_1 d_1 ... w_k d_k realizing the template, or None."""
    for _ in range(50):
        m = rng.randrange(max(1, 1 - min(0, min(d[0] for d in t.deltas))), 8)
        total = rng.randint(min(alphabet) * m, max(alphabet) * m)
        blocks = [word_with_psi(alphabet, m, total)]
        for d in t.deltas:
            m, total = m + d[0], total + d[1]
            blocks.append(word_with_psi(alphabet, m, total))
        if any(b is None for b in blocks):
            continue
        out = list(t.boundaries[0])
        for b, boundary in zip(blocks, t.boundaries[1:]):
            out.extend(b)
            out.extend(boundary)
        return tuple(out)
    return None


class TestTemplate:
    def test_root(self):
        t = root_template(3)
        assert t.boundaries == ((), (), (), ())
        assert t.deltas == ((0, 0), (0, 0))
        assert t.k == 3
        with pytest.raises(ValueError):
            root_template(1)

    def test_validation(self):
        with pytest.raises(ValueError):
            Template(((), ()), ((0, 0),))  # k+1 boundaries vs k-1 deltas mismatch
        with pytest.raises(ValueError):
            Template(((0, 1), (), ()), ((0, 0),))  # boundary longer than 1

    def test_length_spread(self):
        assert root_template(4).length_spread() == 0
        t = Template(((), (), (), ()), ((2, 0), (-3, 1)))
        assert t.length_spread() == 3  # offsets 0, 2, -1

    def test_to_json(self):
        t = Template(((), (1,), ()), ((1, -2),))
        assert t.to_json() == {"boundaries": ["", "1", ""],
                               "deltas": [[1, -2]]}


class TestFindInstance:
    def test_root_square(self):
        inst = find_instance((0, 1, 0, 1), root_template(2), 4)
        assert inst == Instance(start=0, block_lengths=(2, 2), total_length=4)

    def test_boundary_template(self):
        t = Template(((), (1,), ()), ((0, 0),))
        inst = find_instance((0, 0, 1, 0, 0), t, 5)
        assert inst == Instance(start=0, block_lengths=(2, 2), total_length=5)
        assert find_instance((0, 0, 2, 0, 0), t, 5) is None

    def test_negative_delta(self):
        t = Template(((), (), ()), ((-1, -1),))
        # blocks (m, m-1) with sums (s, s-1): 0 1 | 0 fits at start 0
        inst = find_instance((0, 1, 0), t, 3)
        assert inst == Instance(0, (2, 1), 3)

    def test_max_total_cap(self):
        w = (0, 1, 0, 1)
        assert find_instance(w, root_template(2), 4) is not None
        assert find_instance(w, root_template(2), 3) is None

    def test_root_matches_power_detector_exhaustive(self):
        for k in (2, 3):
            root = root_template(k)
            for n in range(0, 8):
                for w in all_words((0, 1, 2), n):
                    inst = find_instance(w, root, n)
                    occ = find_kpower(w, k, PowerKind.ADDITIVE)
                    assert (inst is None) == (occ is None), (w, k)

    def test_vector_path_agrees_with_small_path(self, rng):
        from richavoid.templates import _find_instance_small, _m_range
        import numpy as np
        from richavoid.templates import _find_instance_vector
        templates = [root_template(2), root_template(3),
                     Template(((), (1,), ()), ((0, 0),)),
                     Template(((0,), (), (2,)), ((1, 1),))]
        for _ in range(60):
            w = random_word(rng, (0, 1, 2), rng.randrange(64, 120))
            for t in templates:
                m_lo, m_hi = _m_range(t, len(w))
                small = _find_instance_small(w, t, m_lo, m_hi)
                vec = _find_instance_vector(np.asarray(w, dtype=np.int64), t, m_lo, m_hi)
                assert small == vec


class TestParents:
    def test_root_is_its_own_parent(self):
        ps = parents(root_template(5), BETA)
        assert root_template(5) in ps
        assert len(ps) > 1

    def test_parent_requires_affine_invertible(self):
        with pytest.raises(PreconditionError):
            parents(root_template(2), THUE_MORSE)  # affine matrix singular

    def test_parents_deterministic(self):
        a = parents(root_template(4), DELTA)
        b = parents(root_template(4), DELTA)
        assert a == b
        assert list(a) == sorted(a)

    def test_parent_soundness_randomized(self, rng):
        # an instance of a parent template pushes forward through f
        cases = 0
        for f, k in ((BETA, 5), (DELTA, 4)):
            alphabet = f.domain.letters
            for t in (root_template(k),):
                ps = parents(t, f)
                while cases < 150:
                    tp = rng.choice(ps)
                    w = build_instance_word(tp, alphabet, rng)
                    if w is None:
                        continue
                    assert find_instance(w, tp, len(w)) is not None
                    fw = f.apply(w)
                    assert find_instance(fw, t, len(fw)) is not None, (tp, w)
                    cases += 1
            cases = 0


class TestAncestorClosure:
    def test_beta_closure_size(self):
        closure = ancestor_closure(BETA, 5)
        assert len(closure) == 129
        assert root_template(5) in closure
        assert closure.depths[root_template(5)] == 0
        assert max(closure.depths.values()) + 1 <= closure.closure_iterations + 1

    def test_beta_closure_is_parent_closed(self):
        closure = ancestor_closure(BETA, 5)
        members = set(closure.members)
        for t in closure:
            assert set(parents(t, BETA)) <= members

    def test_delta_closure_size(self):
        closure = ancestor_closure(DELTA, 4)
        assert len(closure) == 1084

    def test_cap_aborts_loudly(self):
        from richavoid import AncestorCapError
        with pytest.raises(AncestorCapError):
            ancestor_closure(DELTA, 4, cap=10)

    def test_precondition_failure(self):
        with pytest.raises(PreconditionError, match="strictly growing"):
            ancestor_closure(GAMMA, 4)


class TestHypotheses:
    def test_all_pass_for_paper_morphisms(self):
        assert check_hypotheses(BETA, 0, 5) == []
        assert check_hypotheses(DELTA, 1, 4) == []

    def test_individual_failures(self):
        assert any("strictly growing" in m for m in check_hypotheses(GAMMA, 1, 4))
        assert any("singular" in m for m in check_hypotheses(THUE_MORSE, 0, 3))
        assert any("at least 2" in m for m in check_hypotheses(BETA, 0, 1))
        assert any("prolongable" in m for m in check_hypotheses(BETA, 1, 5))
        f = Morphism({0: (0, 1), 1: (1, 1, 0)})  # det 1: eigenvalue inside
        assert any("eigenvalue" in m for m in check_hypotheses(f, 0, 3))


class TestBoundsDerivation:
    def test_instance_length_bound_root(self):
        assert instance_length_bound(root_template(5), BETA, 5) == 40
        assert instance_length_bound(root_template(4), DELTA, 4) == 64

    def test_factor_stabilization_covers_later_factors(self):
        window = 4
        n = factor_stabilization_length(BETA, 0, window)
        w_small = BETA.fixed_point(0).prefix(n)
        w_big = BETA.fixed_point(0).prefix(5 * n)
        factors = {w_small[i:i + window] for i in range(len(w_small) - window + 1)}
        later = {w_big[i:i + window] for i in range(len(w_big) - window + 1)}
        assert later == factors

    def test_derived_configs_regression(self):
        cb = derive_config(BETA, 0, 5, ancestor_closure(BETA, 5))
        assert (cb.initial_prefix_length, cb.initial_max_period,
                cb.final_prefix_length, cb.final_max_instance_length) == \
            (15625, 19, 3125, 46)
        cd = derive_config(DELTA, 1, 4, ancestor_closure(DELTA, 4))
        assert (cd.initial_prefix_length, cd.initial_max_period,
                cd.final_prefix_length, cd.final_max_instance_length) == \
            (13447, 35, 13447, 69)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DecisionConfig(0, 1, 1, 1)
        with pytest.raises(ValueError):
            DecisionConfig(1, 1, 1, -5)


class TestDecide:
    def test_beta_4_power_found(self):
        cert = decide_additive_power_free(BETA, 0, 4)
        assert cert.verdict == VERDICT_POWER_FOUND
        assert cert.witness["type"] == "power"
        factor = tuple(int(c) for c in cert.witness["factor"])
        assert naive_is_kpower(factor, 4, PowerKind.ADDITIVE)

    def test_inconclusive_with_tiny_config(self):
        config = DecisionConfig(initial_prefix_length=10, initial_max_period=2,
                                final_prefix_length=10, final_max_instance_length=5)
        cert = decide_additive_power_free(BETA, 0, 5, config)
        assert cert.verdict == VERDICT_INCONCLUSIVE
        assert cert.bounds["provenance"] == "configured"
        assert cert.witness is None

    def test_precondition_error(self):
        with pytest.raises(PreconditionError):
            decide_additive_power_free(GAMMA, 1, 4)
        with pytest.raises(PreconditionError):
            decide_additive_power_free(BETA, 1, 5)

    def test_certificate_json(self):
        cert = decide_additive_power_free(BETA, 0, 4)
        data = cert.to_json()
        assert data["verdict"] == "POWER_FOUND"
        assert data["morphism"] == BETA.format()
        assert data["bounds"]["provenance"] == "derived"
        assert data["ancestor_count"] > 0
