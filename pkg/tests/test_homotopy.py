"""Tests for tagged morphisms, the weak-equivalence and retraction classes,
the hom-equivalence quotient, and the under/pointed object layers.

Structural laws (composition, commuting triangles, split retractions) are
checked against hand-built examples and seeded adversarial sweeps that verify
each constructor accepts exactly the inputs satisfying its stated laws.
"""

from __future__ import annotations

import random

import pytest

from fmlocal import (
    BINARY_GRAPH_VOCAB as V,
    Corpus,
    EnumerationTruncatedError,
    HoClass,
    Homomorphism,
    LiftedClassification,
    Morphism,
    PointedMorphism,
    Structure,
    UnderMorphism,
    UnderObject,
    ValidationError,
    VocabularyMismatchError,
    Vocabulary,
    are_homotopic,
    canonical_form,
    compose_morphisms,
    compose_pointed,
    core,
    generate,
    ho_quotient,
    identity_morphism,
    initial_under_object,
    is_acyclic_fibration,
    is_cofibrant,
    is_fibrant,
    is_isomorphic,
    is_weak_equivalence,
    lifted_class,
    make_pointed,
    make_under,
    quotient_hom_set,
    zero_pointed_object,
)

from conftest import SESSION_SEED
from oracles import all_homs_brute, has_hom_brute, iso_brute


@pytest.fixture(scope="module")
def loop():
    return Structure(V, 1, {"E": {(0, 0)}})


@pytest.fixture(scope="module")
def fold(c4, k2):
    return Morphism(c4, k2, Homomorphism((0, 1, 0, 1)))


# ---------------------------------------------------------------------------
# tagged morphisms


class TestMorphism:
    def test_rejects_non_homomorphism(self, c4, k3):
        with pytest.raises(ValidationError):
            Morphism(k3, c4, Homomorphism((0, 1, 2)))

    def test_rejects_vocabulary_mismatch(self, k2):
        other = Structure(Vocabulary((("R", 2),)), 2, {"R": {(0, 1)}})
        with pytest.raises(VocabularyMismatchError):
            Morphism(k2, other, Homomorphism((0, 1)))

    def test_identity(self, k3):
        ident = identity_morphism(k3)
        assert ident.hom.mapping == (0, 1, 2)
        assert ident.source is k3 and ident.target is k3

    def test_composition_applies_left_then_right(self, c4, k2, fold):
        swap = Morphism(k2, k2, Homomorphism((1, 0)))
        composite = compose_morphisms(fold, swap)
        assert composite.source is c4
        assert composite.hom.mapping == (1, 0, 1, 0)

    def test_composition_accepts_equal_middle_objects(self, c4):
        # Structurally equal objects compose even when not the same instance.
        fresh = generate("clique", 2)
        fold = Morphism(c4, generate("clique", 2), Homomorphism((0, 1, 0, 1)))
        swap = Morphism(fresh, fresh, Homomorphism((1, 0)))
        assert compose_morphisms(fold, swap).hom.mapping == (1, 0, 1, 0)

    def test_composition_rejects_mismatched_middle(self, c4, k3, fold):
        ident3 = identity_morphism(k3)
        with pytest.raises(ValidationError):
            compose_morphisms(fold, ident3)

    def test_identity_laws(self, c4, k2, fold):
        left = compose_morphisms(identity_morphism(c4), fold)
        right = compose_morphisms(fold, identity_morphism(k2))
        assert left.hom.mapping == fold.hom.mapping == right.hom.mapping


# ---------------------------------------------------------------------------
# morphism classes


class TestWeakEquivalence:
    def test_fold_onto_core_is_weak_equivalence(self, fold):
        assert is_weak_equivalence(fold)

    def test_identity_is_weak_equivalence(self, k3):
        assert is_weak_equivalence(identity_morphism(k3))

    def test_clique_inclusion_is_not(self, k2, k3):
        assert not is_weak_equivalence(Morphism(k2, k3, Homomorphism((0, 1))))

    def test_matches_core_comparison_on_samples(self, classes_le2):
        # Differential: the class test must agree with brute core isomorphism.
        for a in classes_le2:
            for b in classes_le2:
                for mapping in all_homs_brute(a, b):
                    f = Morphism(a, b, Homomorphism(mapping))
                    expected = iso_brute(core(a), core(b)) is not None
                    assert is_weak_equivalence(f) == expected


class TestAcyclicFibration:
    def test_fold_is_split_surjection(self, fold):
        assert is_acyclic_fibration(fold)

    def test_non_surjective_map_is_not(self, k2, k3):
        assert not is_acyclic_fibration(Morphism(k2, k3, Homomorphism((0, 1))))

    def test_surjection_without_section_is_not(self, k2, loop):
        # Crushing an edge onto a loop is onto, but the loop cannot map back.
        crush = Morphism(k2, loop, Homomorphism((0, 0)))
        assert not is_acyclic_fibration(crush)
        assert not is_weak_equivalence(crush)

    def test_split_surjections_are_weak_equivalences(self, classes_le2):
        seen_retraction = 0
        for a in classes_le2:
            for b in classes_le2:
                for mapping in all_homs_brute(a, b):
                    f = Morphism(a, b, Homomorphism(mapping))
                    if is_acyclic_fibration(f):
                        seen_retraction += 1
                        assert is_weak_equivalence(f)
        assert seen_retraction > 0


class TestHomotopyAndFibrancy:
    def test_parallel_maps_are_homotopic(self, c4, k2, fold):
        other = Morphism(c4, k2, Homomorphism((1, 0, 1, 0)))
        assert are_homotopic(fold, other)
        assert are_homotopic(fold, fold)

    def test_parallel_up_to_structural_equality(self, c4):
        f = Morphism(c4, generate("clique", 2), Homomorphism((0, 1, 0, 1)))
        g = Morphism(generate("cycle", 4), generate("clique", 2), Homomorphism((1, 0, 1, 0)))
        assert are_homotopic(f, g)

    def test_non_parallel_maps_rejected(self, k2, fold):
        swap = Morphism(k2, k2, Homomorphism((1, 0)))
        with pytest.raises(ValidationError):
            are_homotopic(fold, swap)

    def test_every_object_is_fibrant_and_cofibrant(self, classes_le2):
        assert all(is_fibrant(s) for s in classes_le2)
        assert all(is_cofibrant(s) for s in classes_le2)


# ---------------------------------------------------------------------------
# hom-equivalence quotient


@pytest.fixture(scope="module")
def mixed(c4, k2, k3, path4):
    return [c4, k2, k3, generate("cycle", 5), path4, generate("cycle", 6)]


class TestHoQuotient:
    def test_partitions_by_mutual_homs(self, mixed):
        classes = ho_quotient(mixed)
        assert [hc.members for hc in classes] == [(0, 1, 4, 5), (2,), (3,)]
        # Bipartite graphs with an edge collapse together; the 3-clique and
        # the 5-cycle each stand alone.
        assert [hc.representative.universe_size for hc in classes] == [2, 3, 5]

    def test_members_agree_with_brute_homs(self, mixed):
        classes = ho_quotient(mixed)
        index_of = {}
        for ci, hc in enumerate(classes):
            for m in hc.members:
                index_of[m] = ci
        for i, a in enumerate(mixed):
            for j, b in enumerate(mixed):
                together = has_hom_brute(a, b) and has_hom_brute(b, a)
                assert together == (index_of[i] == index_of[j])

    def test_representatives_are_cores_with_exact_keys(self, mixed):
        for hc in ho_quotient(mixed):
            rep = hc.representative
            assert hc.canonical_key == canonical_form(rep)
            assert is_isomorphic(rep, core(rep)) is not None
            first = mixed[hc.members[0]]
            assert has_hom_brute(first, rep) and has_hom_brute(rep, first)

    def test_accepts_anchored_corpus(self, c4, k2, k3):
        corpus = Corpus(((c4, ()), (k2, ()), (k3, ())))
        assert [hc.members for hc in ho_quotient(corpus)] == [(0, 1), (2,)]

    def test_quotient_hom_sets_are_between_representatives(self, mixed):
        classes = ho_quotient(mixed)
        bipartite, clique = classes[0], classes[1]
        # Six maps from an edge into a 3-clique, none in the other direction.
        assert len(quotient_hom_set(bipartite, clique)) == 6
        assert quotient_hom_set(clique, bipartite) == []

    def test_quotient_hom_set_truncation_raises(self, mixed):
        classes = ho_quotient(mixed)
        with pytest.raises(EnumerationTruncatedError):
            quotient_hom_set(classes[0], classes[1], limit=3)


# ---------------------------------------------------------------------------
# under-objects


class TestUnderObjects:
    def test_initial_object_uses_identity_section(self, k2):
        initial = initial_under_object(k2)
        assert initial.base is k2 and initial.total is k2
        assert initial.section.hom.mapping == (0, 1)

    def test_make_under(self, k2, c4):
        under = make_under(k2, c4, Homomorphism((0, 1)))
        assert under.section.source is k2 and under.section.target is c4

    def test_section_endpoints_enforced(self, k2, k3, c4):
        good = Morphism(k2, k3, Homomorphism((0, 1)))
        with pytest.raises(ValidationError):
            UnderObject(k2, c4, good)

    def test_section_must_be_homomorphism(self, k2, c4):
        with pytest.raises(ValidationError):
            make_under(k2, c4, Homomorphism((0, 2)))

    def test_under_morphism_commutes(self, k2, c4, fold):
        source = make_under(k2, c4, Homomorphism((0, 1)))
        target = initial_under_object(k2)
        um = UnderMorphism(source, target, fold)
        assert um.morphism is fold

    def test_under_morphism_rejects_broken_triangle(self, k2, c4, fold):
        source = make_under(k2, c4, Homomorphism((0, 1)))
        swapped = make_under(k2, k2, Homomorphism((1, 0)))
        with pytest.raises(ValidationError):
            UnderMorphism(source, swapped, fold)

    def test_under_morphism_rejects_changed_base(self, k2, k3, c4, fold):
        source = make_under(k2, c4, Homomorphism((0, 1)))
        other_base = make_under(k3, k3, Homomorphism((0, 1, 2)))
        with pytest.raises(ValidationError):
            UnderMorphism(source, other_base, fold)

    def test_under_morphism_rejects_mismatched_endpoints(self, k2, c4, fold):
        source = make_under(k2, c4, Homomorphism((0, 1)))
        target = initial_under_object(k2)
        swap = Morphism(k2, k2, Homomorphism((1, 0)))
        with pytest.raises(ValidationError):
            UnderMorphism(source, target, swap)


# ---------------------------------------------------------------------------
# pointed objects


class TestPointedObjects:
    def test_zero_object(self, k2):
        zero = zero_pointed_object(k2)
        assert zero.base is k2 and zero.total is k2
        assert zero.section.hom.mapping == (0, 1)
        assert zero.retraction.hom.mapping == (0, 1)

    def test_make_pointed_accepts_split_pair(self, k2, c4):
        pointed = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        assert pointed.total is c4

    def test_rejects_non_split_pair(self, k2, c4):
        # The retraction sends the section's image to the wrong base points.
        with pytest.raises(ValidationError):
            make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((1, 0, 1, 0)))

    def test_rejects_non_homomorphism_legs(self, k2, c4):
        with pytest.raises(ValidationError):
            make_pointed(k2, c4, Homomorphism((0, 2)), Homomorphism((0, 1, 0, 1)))
        with pytest.raises(ValidationError):
            make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 1, 0)))

    def test_adversarial_pairs_accepted_iff_laws_hold(self, k2, classes_le3):
        # Sweep random (section, retraction) pairs: the constructor must
        # accept exactly those satisfying hom+hom+splitting, per brute check.
        rng = random.Random(SESSION_SEED + 4)
        accepted = rejected = 0
        pool = [s for s in classes_le3 if s.universe_size >= 2]
        for _ in range(200):
            total = rng.choice(pool)
            n = total.universe_size
            i = tuple(rng.randrange(n) for _ in range(2))
            r = tuple(rng.randrange(2) for _ in range(n))
            homs_ok = (
                _map_ok(k2, total, i)
                and _map_ok(total, k2, r)
                and all(r[i[x]] == x for x in range(2))
            )
            try:
                make_pointed(k2, total, Homomorphism(i), Homomorphism(r))
                constructed = True
            except ValidationError:
                constructed = False
            assert constructed == homs_ok
            accepted += constructed
            rejected += not constructed
        assert accepted > 0 and rejected > 0

    def test_pointed_morphism_commutes_both_ways(self, k2, c4, fold):
        source = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        target = zero_pointed_object(k2)
        pm = PointedMorphism(source, target, fold)
        assert pm.morphism is fold

    def test_pointed_morphism_rejects_section_mismatch(self, k2, c4):
        source = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        target = zero_pointed_object(k2)
        other_fold = Morphism(c4, k2, Homomorphism((1, 0, 1, 0)))
        with pytest.raises(ValidationError, match="sections"):
            PointedMorphism(source, target, other_fold)

    def test_pointed_morphism_rejects_retraction_mismatch(self):
        # Edgeless structures: identical sections, retractions differing off
        # the section image — only the retraction square can fail.
        base = Structure(V, 2, {})
        total = Structure(V, 3, {})
        source = make_pointed(base, total, Homomorphism((0, 1)), Homomorphism((0, 1, 0)))
        target = make_pointed(base, total, Homomorphism((0, 1)), Homomorphism((0, 1, 1)))
        with pytest.raises(ValidationError, match="retractions"):
            PointedMorphism(source, target, Morphism(total, total, Homomorphism((0, 1, 2))))

    def test_compose_pointed(self, k2, c4, fold):
        source = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        zero = zero_pointed_object(k2)
        pm = PointedMorphism(source, zero, fold)
        ident = PointedMorphism(zero, zero, identity_morphism(k2))
        composite = compose_pointed(pm, ident)
        assert composite.source is source and composite.target is zero
        assert composite.morphism.hom.mapping == (0, 1, 0, 1)

    def test_compose_pointed_rejects_mismatched_middle(self, k2, k3, c4, fold):
        source = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        zero = zero_pointed_object(k2)
        pm = PointedMorphism(source, zero, fold)
        zero3 = zero_pointed_object(k3)
        ident3 = PointedMorphism(zero3, zero3, identity_morphism(k3))
        with pytest.raises(ValidationError):
            compose_pointed(pm, ident3)


def _map_ok(a: Structure, b: Structure, mapping) -> bool:
    return all(
        tuple(mapping[x] for x in t) in b.tuples(name)
        for name, _ in a.vocab.relations
        for t in a.tuples(name)
    )


# ---------------------------------------------------------------------------
# classification of structured morphisms


class TestLiftedClass:
    def test_classifies_bare_morphism(self, fold):
        got = lifted_class(fold)
        assert got == LiftedClassification(
            weak_equivalence=True,
            acyclic_fibration=True,
            fibration="unspecified",
            cofibration="unspecified",
        )

    def test_classifies_inclusion(self, k2, k3):
        got = lifted_class(Morphism(k2, k3, Homomorphism((0, 1))))
        assert got.weak_equivalence is False
        assert got.acyclic_fibration is False

    def test_classifies_structured_morphisms(self, k2, c4, fold):
        source = make_pointed(k2, c4, Homomorphism((0, 1)), Homomorphism((0, 1, 0, 1)))
        pm = PointedMorphism(source, zero_pointed_object(k2), fold)
        assert lifted_class(pm).weak_equivalence is True
        under = UnderMorphism(
            make_under(k2, c4, Homomorphism((0, 1))), initial_under_object(k2), fold
        )
        assert lifted_class(under).acyclic_fibration is True

    def test_rejects_non_morphisms(self):
        with pytest.raises(ValidationError):
            lifted_class("not a morphism")
