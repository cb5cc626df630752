"""Back-and-forth games, one-sided forth games, extendability and bridge audits."""

import itertools
import random

import pytest

from fmlocal import (
    BINARY_GRAPH_VOCAB,
    ExtendabilityResult,
    InvalidSeedError,
    LemmaViolation,
    Structure,
    ValidationError,
    VocabularyMismatchError,
    ef_equivalent,
    ef_equivalent_reference,
    find_hom,
    forth_khom,
    generate,
    k_extendable,
    khom_equivalent,
    lemma1_audit,
)

from oracles import ef_brute, has_hom_brute
from conftest import SESSION_SEED


K2 = generate("clique", 2)
P3 = generate("path", 3)


def linear(n):
    return generate("linear_order", n)


# ---------------------------------------------------------------------------
# the two-sided game vs. independent oracles


class TestEfEquivalent:
    def test_exhaustive_differential_size_two(self, classes_le2):
        for a, b in itertools.product(classes_le2, repeat=2):
            for k in range(4):
                assert ef_equivalent(a, (), b, (), k) == ef_brute(a, (), b, (), k)

    def test_sampled_differential_size_three(self, classes_le3):
        rng = random.Random(SESSION_SEED)
        pool = [s for s in classes_le3 if s.universe_size == 3]
        for _ in range(60):
            a, b = rng.choice(pool), rng.choice(pool)
            k = rng.randint(1, 3)
            assert ef_equivalent(a, (), b, (), k) == ef_brute(a, (), b, (), k)

    def test_matches_unmemoized_reference(self, classes_le3):
        rng = random.Random(SESSION_SEED + 1)
        for _ in range(40):
            a, b = rng.choice(classes_le3), rng.choice(classes_le3)
            k = rng.randint(0, 2)
            assert ef_equivalent(a, (), b, (), k) == ef_equivalent_reference(
                a, (), b, (), k
            )

    def test_anchored_differential(self, classes_le3):
        rng = random.Random(SESSION_SEED + 2)
        pool = [s for s in classes_le3 if s.universe_size >= 2]
        for _ in range(40):
            a, b = rng.choice(pool), rng.choice(pool)
            at = (rng.randrange(a.universe_size),)
            bt = (rng.randrange(b.universe_size),)
            k = rng.randint(0, 2)
            got = ef_equivalent(a, at, b, bt, k)
            assert got == ef_brute(a, at, b, bt, k)
            assert got == ef_equivalent_reference(a, at, b, bt, k)

    def test_zero_rounds_with_anchors_checks_the_position(self, path4):
        # identical anchors trivially fine; endpoint vs midpoint still fine at 0
        assert ef_equivalent(path4, (0,), path4, (1,), 0)
        # an edge against a non-edge is already a losing position
        assert not ef_equivalent(path4, (0, 1), path4, (0, 2), 0)

    def test_endpoint_vs_midpoint_of_a_path(self, path4):
        assert ef_equivalent(path4, (0,), path4, (1,), 1)
        assert not ef_equivalent(path4, (0,), path4, (1,), 2)  # degree told in 2 rounds

    def test_isomorphic_structures_equivalent_at_any_k(self, c4):
        shifted = Structure(
            BINARY_GRAPH_VOCAB,
            4,
            {"E": {(1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3), (0, 1), (1, 0)}},
        )
        for k in range(5):
            assert ef_equivalent(c4, (), shifted, (), k)

    def test_linear_order_thresholds(self):
        # k rounds cannot tell orders apart once both are long enough
        assert not ef_equivalent(linear(2), (), linear(3), (), 2)
        assert ef_equivalent(linear(4), (), linear(5), (), 2)
        assert not ef_equivalent(linear(4), (), linear(5), (), 3)
        # cross-check the positive claim against the brute oracle
        assert ef_brute(linear(4), (), linear(5), (), 2)

    def test_cycle_vs_clique(self, c4, k3):
        assert ef_equivalent(c4, (), k3, (), 1)
        assert not ef_equivalent(c4, (), k3, (), 2)

    def test_validation(self, c4, k3):
        with pytest.raises(ValidationError):
            ef_equivalent(c4, (0,), k3, (), 1)  # unequal anchor lengths
        with pytest.raises(ValidationError):
            ef_equivalent(c4, (), k3, (), -1)
        with pytest.raises(ValidationError):
            ef_equivalent(c4, (9,), k3, (0,), 1)
        from fmlocal import Vocabulary

        other = Structure(Vocabulary((("F", 2),), 0), 1, {})
        with pytest.raises(VocabularyMismatchError):
            ef_equivalent(c4, (), other, (), 1)


# ---------------------------------------------------------------------------
# one-sided forth game


class TestForthKhom:
    def test_full_rounds_decide_hom_existence(self, classes_le3):
        """k = |A| forces every element to be placed, so the game IS hom search."""
        for a, b in itertools.product(classes_le3, repeat=2):
            assert forth_khom(a, b, None, a.universe_size) == has_hom_brute(a, b)

    def test_monotone_in_rounds(self, classes_le3):
        rng = random.Random(SESSION_SEED + 3)
        for _ in range(50):
            a, b = rng.choice(classes_le3), rng.choice(classes_le3)
            values = [forth_khom(a, b, None, k) for k in range(4)]
            # once lost, lost for every larger round count
            for earlier, later in zip(values, values[1:]):
                assert earlier or not later

    def test_zero_rounds_always_won_without_seed(self, c4, k3):
        assert forth_khom(k3, K2, None, 0)

    def test_seed_opens_the_position(self, c4):
        assert forth_khom(c4, K2, {0: 0}, 4)
        # seed on its own is a fine partial hom, but the midpoint has no image
        assert not forth_khom(P3, K2, {0: 0, 2: 1}, 1)
        assert forth_khom(P3, K2, {0: 0, 2: 0}, 1)

    def test_seed_as_pair_list(self, c4):
        assert forth_khom(c4, K2, [(0, 0), (2, 0)], 2)

    def test_invalid_seeds_raise(self, c4, k3):
        with pytest.raises(InvalidSeedError):
            forth_khom(c4, K2, [(0,)], 1)  # not a pair
        with pytest.raises(InvalidSeedError):
            forth_khom(c4, K2, {9: 0}, 1)  # out of range
        with pytest.raises(InvalidSeedError):
            forth_khom(c4, K2, [(0, 0), (0, 1)], 1)  # conflicting images
        with pytest.raises(InvalidSeedError):
            forth_khom(c4, K2, {0: 0, 1: 0}, 1)  # edge onto a loop-free point

    def test_seed_must_respect_constants(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        a = Structure(v, 2, {"E": set()}, (0,))
        b = Structure(v, 2, {"E": set()}, (1,))
        with pytest.raises(InvalidSeedError):
            forth_khom(a, b, {0: 0}, 1)
        assert forth_khom(a, b, {0: 1}, 2)

    def test_round_validation(self, c4):
        with pytest.raises(ValidationError):
            forth_khom(c4, K2, None, -1)


class TestKhomEquivalent:
    def test_collapse_then_separation(self, c4, k3):
        # two rounds cannot see the odd cycle; three can (they pin all of K3)
        assert khom_equivalent(c4, k3, 2)
        assert not khom_equivalent(c4, k3, 3)

    def test_symmetric(self, classes_le3):
        rng = random.Random(SESSION_SEED + 4)
        for _ in range(40):
            a, b = rng.choice(classes_le3), rng.choice(classes_le3)
            k = rng.randint(0, 3)
            assert khom_equivalent(a, b, k) == khom_equivalent(b, a, k)

    def test_refines_toward_hom_equivalence(self, c4):
        # C4 and K2 are hom-equivalent, so no round count separates them
        for k in range(5):
            assert khom_equivalent(c4, K2, k)

    def test_cached_calls_stable(self, c4, k3):
        assert khom_equivalent(c4, k3, 2) == khom_equivalent(c4, k3, 2)


# ---------------------------------------------------------------------------
# extendability audit


class TestKExtendable:
    def test_pass_against_own_clique_pool(self, k3):
        assert k_extendable(K2, 3, [K2, k3]).passed
        assert k_extendable(k3, 3, [K2, k3]).passed

    def test_antipodal_witness(self, c4, k3):
        """The triangle cannot cover a distance-2 pair of the 4-cycle."""
        res = k_extendable(k3, 2, [c4, k3])
        assert res == ExtendabilityResult(
            passed=False, x_set=(0,), candidate_index=0, seed=((0, 0),), b=2
        )
        assert k_extendable(c4, 2, [c4, k3]).passed

    def test_edge_fails_against_longer_path(self):
        res = k_extendable(K2, 2, [P3])
        assert not res.passed
        assert res.x_set == (0,)
        assert res.candidate_index == 0
        assert res.seed == ((0, 0),)
        assert res.b == 2

    def test_zero_and_one_round_trivial(self, c4, k3):
        assert k_extendable(k3, 0, [c4]).passed
        # k = 1 quantifies only over the empty position
        assert k_extendable(K2, 1, [P3]).passed

    def test_empty_corpus_passes(self, c4):
        assert k_extendable(c4, 3, []).passed

    def test_validation(self, c4):
        with pytest.raises(ValidationError):
            k_extendable(c4, -1, [])
        with pytest.raises(VocabularyMismatchError):
            k_extendable(
                c4, 1, [Structure(__import__("fmlocal").Vocabulary((("F", 1),), 0), 1, {})]
            )


class TestLemmaAudit:
    def test_sound_on_the_tight_pair(self, c4, k3):
        """khom-2 cannot tell C4 from K3 and the 2-round game can — but
        extendability rules K3 out, so no violation is (or should be) reported."""
        assert lemma1_audit([c4, k3], 2, 2) == []

    def test_flags_a_too_weak_forth_hypothesis(self, k3):
        # at n=0 the forth hypothesis is vacuous; K2 and K3 are both
        # 3-extendable against this pool yet the 3-round game separates them
        assert lemma1_audit([K2, k3], 3, 0) == [LemmaViolation(i=0, j=1, k=3, n=0)]
        assert lemma1_audit([K2, k3], 3, 3) == []

    def test_isomorphic_copies_never_violate(self, c4):
        shifted = Structure(
            BINARY_GRAPH_VOCAB,
            4,
            {"E": {(1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3), (0, 1), (1, 0)}},
        )
        for k in range(3):
            assert lemma1_audit([c4, shifted], k, k) == []

    def test_small_pool_clean_at_matched_depth(self, classes_le2):
        assert lemma1_audit(classes_le2[:8], 2, 2) == []
