"""Homomorphisms, cores, bounded-depth core search, tree-depth, elimination forests."""

import itertools

import pytest

from fmlocal import (
    BINARY_GRAPH_VOCAB,
    BoundExceededError,
    Homomorphism,
    Structure,
    ValidationError,
    anchored_tree_depth,
    compose,
    core,
    core_embedded,
    elimination_forest,
    enumerate_homs,
    find_hom,
    forest_height,
    generate,
    hom_equivalent,
    is_core,
    is_isomorphic,
    k_core_search,
    khom_equivalent,
    tree_depth,
    verify_homomorphism,
)
from fmlocal.structures import gaifman_graph

from oracles import all_homs_brute, has_hom_brute, tree_depth_brute
from conftest import SESSION_SEED


K2 = generate("clique", 2)


# ---------------------------------------------------------------------------
# witnesses and composition


class TestWitnesses:
    def test_verify_on_hand_example(self, c4):
        # fold the 4-cycle onto one edge, alternating
        assert verify_homomorphism(c4, K2, Homomorphism((0, 1, 0, 1)))
        assert not verify_homomorphism(c4, K2, Homomorphism((0, 1, 1, 0)))

    def test_verify_rejects_wrong_length_or_range(self, c4):
        assert not verify_homomorphism(c4, K2, Homomorphism((0, 1)))
        assert not verify_homomorphism(c4, K2, Homomorphism((0, 1, 0, 5)))

    def test_verify_checks_constants(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        a = Structure(v, 2, {"E": {(0, 1), (1, 0)}}, (0,))
        b = Structure(v, 2, {"E": {(0, 1), (1, 0)}}, (1,))
        assert verify_homomorphism(a, b, Homomorphism((1, 0)))
        assert not verify_homomorphism(a, b, Homomorphism((0, 1)))

    def test_compose_order(self):
        f = Homomorphism((1, 0))  # first
        g = Homomorphism((2, 3))  # then
        assert compose(f, g).mapping == (3, 2)

    def test_compose_preserves_homomorphy(self, c4, k3):
        f = find_hom(c4, K2)
        g = find_hom(K2, k3)
        assert f is not None and g is not None
        assert verify_homomorphism(c4, k3, compose(f, g))


# ---------------------------------------------------------------------------
# search vs the brute oracle


class TestFindHom:
    def test_exhaustive_differential_small(self, classes_le3):
        """Existence agrees with the brute |B|^|A| oracle on every ordered pair."""
        for a, b in itertools.product(classes_le3, repeat=2):
            h = find_hom(a, b)
            if h is None:
                assert not has_hom_brute(a, b), (a, b)
            else:
                assert verify_homomorphism(a, b, h)

    def test_graph_coloring_facts(self, c4, k3):
        assert find_hom(c4, K2) is not None  # even cycle is 2-colorable
        assert find_hom(k3, K2) is None  # triangle is not
        assert find_hom(generate("cycle", 5), K2) is None  # odd cycle
        assert find_hom(generate("path", 6), K2) is not None
        assert find_hom(k3, generate("clique", 4)) is not None

    def test_constants_constrain_search(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        edge = {"E": {(0, 1), (1, 0)}}
        a = Structure(v, 2, edge, (0,))
        b = Structure(v, 2, edge, (1,))
        h = find_hom(a, b)
        assert h is not None and h.mapping[0] == 1
        assert all_homs_brute(a, b) == [(1, 0)]

    def test_seed_is_honored(self, c4):
        h = find_hom(c4, K2, seed={0: 1})
        assert h is not None and h.mapping[0] == 1
        # forcing adjacent elements of the cycle onto one loop-free element fails
        assert find_hom(c4, K2, seed={0: 0, 1: 0}) is None

    def test_seed_out_of_range_prunes_to_none(self, c4):
        assert find_hom(c4, K2, seed={0: 7}) is None


class TestEnumerateHoms:
    def _pairs(self, classes_le3):
        rng = __import__("random").Random(SESSION_SEED)
        pool = [s for s in classes_le3 if s.universe_size >= 2]
        return [(rng.choice(pool), rng.choice(pool)) for _ in range(60)]

    def test_matches_brute_enumeration(self, classes_le3, c4, k3):
        pairs = self._pairs(classes_le3) + [(c4, K2), (k3, k3), (c4, k3)]
        for a, b in pairs:
            homs, truncated = enumerate_homs(a, b)
            assert not truncated
            assert [h.mapping for h in homs] == all_homs_brute(a, b)

    def test_lexicographic_order(self, c4):
        homs, _ = enumerate_homs(c4, K2)
        maps = [h.mapping for h in homs]
        assert maps == sorted(maps)
        assert maps == [(0, 1, 0, 1), (1, 0, 1, 0)]

    def test_enumeration_with_constants(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        a = Structure(v, 3, {"E": {(0, 1), (1, 0), (1, 2), (2, 1)}}, (0,))
        b = Structure(v, 3, {"E": {(0, 1), (1, 0), (1, 2), (2, 1)}}, (0,))
        homs, _ = enumerate_homs(a, b)
        assert [h.mapping for h in homs] == all_homs_brute(a, b)

    def test_truncation_flag(self, k3):
        full, truncated = enumerate_homs(k3, k3)
        assert not truncated and len(full) == 6  # the automorphisms
        cut, truncated = enumerate_homs(k3, k3, limit=4)
        assert truncated and len(cut) == 4
        assert [h.mapping for h in cut] == [h.mapping for h in full[:4]]

    def test_limit_validation(self, k3):
        with pytest.raises(ValidationError):
            enumerate_homs(k3, k3, limit=0)

    def test_no_hom_yields_empty(self, k3):
        assert enumerate_homs(k3, K2) == ([], False)


class TestHomEquivalent:
    def test_facts(self, c4, k3):
        assert hom_equivalent(c4, K2)
        assert not hom_equivalent(k3, K2)
        assert hom_equivalent(k3, k3)
        assert hom_equivalent(generate("path", 5), K2)


# ---------------------------------------------------------------------------
# cores


class TestCore:
    def test_core_of_even_cycle_is_single_edge(self, c4):
        c = core(c4)
        assert is_isomorphic(c, K2) is not None

    def test_clique_is_its_own_core(self, k3):
        c = core(k3)
        assert is_isomorphic(c, k3) is not None
        assert is_core(k3)

    def test_is_core_facts(self, c4):
        assert not is_core(c4)
        assert is_core(K2)
        assert is_core(generate("cycle", 5))  # odd cycle has no proper retract
        assert is_core(generate("edgeless", 1))
        assert not is_core(generate("edgeless", 2))

    def test_core_laws_exhaustive(self, classes_le3, classes_le2):
        for s in classes_le3:
            c, kept, retract = core_embedded(s)
            # the core is a core, hom-equivalent to the input
            assert is_core(c)
            assert hom_equivalent(s, c)
            # idempotent up to isomorphism
            assert is_isomorphic(core(c), c) is not None
            # kept elements ascend and the retraction fixes them pointwise
            assert list(kept) == sorted(kept)
            assert verify_homomorphism(s, s, Homomorphism(retract))
            assert set(retract) <= set(kept)
            assert all(retract[v] == v for v in kept)
            # minimality: nothing strictly smaller is hom-equivalent
            for t in classes_le2:
                if t.universe_size < c.universe_size:
                    assert not hom_equivalent(c, t)

    def test_cores_of_isomorphic_structures_agree(self, c4):
        shifted = Structure(
            BINARY_GRAPH_VOCAB,
            4,
            {"E": {(1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3), (0, 1), (1, 0)}},
        )
        assert is_isomorphic(core(c4), core(shifted)) is not None

    def test_constants_survive_in_core(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        # an isolated constant plus a separate edge: the edge may collapse away,
        # the constant cannot
        s = Structure(v, 3, {"E": {(1, 2), (2, 1)}}, (0,))
        c, kept, _ = core_embedded(s)
        assert 0 in kept
        assert c.constants == (kept.index(0),)


class TestKCoreSearch:
    def test_round_bounded_collapse_of_triangle(self, k3):
        # two rounds can only inspect two elements, so the triangle collapses
        c = k_core_search(k3, 2, 2)
        assert c is not None
        assert c.universe_size == 2
        assert khom_equivalent(c, k3, 2)
        assert is_core(c)
        assert tree_depth(c) <= 2

    def test_absence_within_bound_is_none(self, k3):
        assert k_core_search(k3, 3, 2) is None

    def test_three_rounds_recover_triangle(self, k3):
        c = k_core_search(k3, 3, 3)
        assert c is not None
        assert is_isomorphic(c, k3) is not None

    def test_result_laws(self, c4):
        for k in (1, 2, 3):
            c = k_core_search(c4, k, 4)
            if c is None:
                continue
            assert is_core(c)
            assert tree_depth(c) <= k
            assert khom_equivalent(c, c4, k)

    def test_determinism_and_cache(self, k3):
        a = k_core_search(k3, 2, 2)
        b = k_core_search(k3, 2, 2)
        assert a is b  # cached by canonical form

    def test_validation(self, k3):
        with pytest.raises(ValidationError):
            k_core_search(k3, -1, 2)
        with pytest.raises(ValidationError):
            k_core_search(k3, 2, 0)


# ---------------------------------------------------------------------------
# tree-depth


class TestTreeDepth:
    def test_matches_brute_exhaustively(self, classes_le3, sample4):
        for s in classes_le3 + sample4:
            assert tree_depth(s) == tree_depth_brute(s)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_clique_depth_is_its_size(self, n):
        assert tree_depth(generate("clique", n)) == n

    def test_path_and_cycle_facts(self, path4):
        assert tree_depth(path4) == 3
        assert tree_depth(generate("path", 2)) == 2
        assert tree_depth(generate("edgeless", 5)) == 1
        assert tree_depth(generate("cycle", 5)) == tree_depth_brute(generate("cycle", 5))

    def test_disconnected_takes_max(self):
        s = Structure(BINARY_GRAPH_VOCAB, 5, {"E": {(0, 1), (1, 0), (2, 3), (3, 4)}})
        # components: an edge (depth 2) and a directed path on 3 (depth 2)
        assert tree_depth(s) == 2

    def test_bound_enforced(self, c4):
        with pytest.raises(BoundExceededError):
            tree_depth(c4, bound=3)


class TestAnchoredTreeDepth:
    def test_equals_tree_depth_without_constants(self, classes_le3):
        for s in classes_le3[:30]:
            assert anchored_tree_depth(s) == tree_depth(s)

    def test_all_constants_is_zero(self):
        v = BINARY_GRAPH_VOCAB.with_constants(2)
        s = Structure(v, 2, {"E": {(0, 1)}}, (0, 1))
        assert anchored_tree_depth(s) == 0

    def test_constants_are_free(self, k3):
        v1 = BINARY_GRAPH_VOCAB.with_constants(1)
        k3_anchored = Structure(v1, 3, {"E": k3.tuples("E")}, (0,))
        assert anchored_tree_depth(k3_anchored) == 2  # the free pair still touches
        v2 = BINARY_GRAPH_VOCAB.with_constants(2)
        k3_two = Structure(v2, 3, {"E": k3.tuples("E")}, (0, 1))
        assert anchored_tree_depth(k3_two) == 1

    def test_anchor_can_disconnect(self):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        p = generate("path", 3)
        s = Structure(v, 3, {"E": p.tuples("E")}, (1,))  # midpoint pinned
        assert anchored_tree_depth(s) == 1

    def test_bound_enforced(self, c4):
        v = BINARY_GRAPH_VOCAB.with_constants(1)
        s = Structure(v, 4, {"E": c4.tuples("E")}, (0,))
        with pytest.raises(BoundExceededError):
            anchored_tree_depth(s, bound=3)


class TestEliminationForest:
    def _check_valid(self, s):
        parent = elimination_forest(s)
        n = s.universe_size
        assert len(parent) == n
        ancestors = []
        for v in range(n):
            seen = set()
            chain = []
            x = v
            while x != -1:
                assert 0 <= x < n and x not in seen
                seen.add(x)
                chain.append(x)
                x = parent[x]
            ancestors.append(set(chain))
        for u, w in gaifman_graph(s).edges:
            assert u in ancestors[w] or w in ancestors[u]
        assert forest_height(parent) == tree_depth(s)

    def test_valid_and_optimal_exhaustively(self, classes_le3, sample4):
        for s in classes_le3 + sample4:
            self._check_valid(s)

    def test_on_larger_inputs(self):
        for kind, n in [("path", 8), ("cycle", 7), ("clique", 5), ("random", 7)]:
            self._check_valid(generate(kind, n, density=0.3, seed=5))

    def test_deterministic(self, path4):
        assert elimination_forest(path4) == elimination_forest(path4)

    def test_forest_height_edge_cases(self):
        assert forest_height([]) == 0
        assert forest_height([-1, -1]) == 1
        assert forest_height([-1, 0, 1]) == 3

    def test_bound_enforced(self, c4):
        with pytest.raises(BoundExceededError):
            elimination_forest(c4, bound=2)
