"""Model-structure consequences on finite structures.

Weak equivalences are the maps inducing isomorphisms on cores; acyclic
fibrations are exactly the retractions; any two parallel maps are
homotopic, so the homotopy quotient of a corpus is its partition into
hom-equivalence classes with core representatives.  Under-, over-, and
pointed objects lift the classification along the forgetful functor.

The general fibration and cofibration classes are reported as
"unspecified"; only weak equivalences and retractions admit a definitive
test here, and every object counts as both fibrant and cofibrant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EnumerationTruncatedError, ValidationError
from .hom import (
    Homomorphism,
    compose,
    core,
    enumerate_homs,
    find_hom,
    verify_homomorphism,
)
from .structures import (
    Structure,
    canonical_form,
    check_same_vocab,
    is_isomorphic,
)

HOMSET_LIMIT = 200000


@dataclass(frozen=True)
class Morphism:
    """A homomorphism tagged with its source and target structures."""

    source: Structure
    target: Structure
    hom: Homomorphism

    def __post_init__(self):
        check_same_vocab(self.source, self.target)
        if not verify_homomorphism(self.source, self.target, self.hom):
            raise ValidationError("mapping is not a homomorphism")


def identity_morphism(s: Structure) -> Morphism:
    return Morphism(s, s, Homomorphism(tuple(range(s.universe_size))))


def compose_morphisms(first: Morphism, then: Morphism) -> Morphism:
    """The composite that applies `first`, then `then`."""
    if first.target is not then.source and not _same_object(first.target, then.source):
        raise ValidationError("composition requires matching middle object")
    return Morphism(first.source, then.target, compose(first.hom, then.hom))


def _same_object(a: Structure, b: Structure) -> bool:
    if a is b:
        return True
    if a.vocab != b.vocab or a.universe_size != b.universe_size:
        return False
    if a.constants != b.constants:
        return False
    return all(a.tuples(name) == b.tuples(name) for name, _ in a.vocab.relations)


def is_weak_equivalence(f: Morphism) -> bool:
    """Does the map induce an isomorphism on cores?"""
    return is_isomorphic(core(f.source), core(f.target)) is not None


def is_acyclic_fibration(f: Morphism) -> bool:
    """Is the map a retraction — some section s with f(s(y)) = y for all y?"""
    n = f.target.universe_size
    image = set(f.hom.mapping)
    if image != set(range(n)):
        return False
    sections, truncated = enumerate_homs(f.target, f.source, limit=HOMSET_LIMIT)
    for s in sections:
        if all(f.hom.mapping[s.mapping[y]] == y for y in range(n)):
            return True
    if truncated:
        raise EnumerationTruncatedError(
            f"section search truncated at {HOMSET_LIMIT} homomorphisms"
        )
    return False


def are_homotopic(f: Morphism, g: Morphism) -> bool:
    """Any two parallel maps are homotopic; the check exists to catch
    non-parallel inputs."""
    if not _same_object(f.source, g.source) or not _same_object(f.target, g.target):
        raise ValidationError("homotopy compares only parallel morphisms")
    return True


def is_fibrant(s: Structure) -> bool:
    """Every object is fibrant."""
    return True


def is_cofibrant(s: Structure) -> bool:
    """Every object is cofibrant."""
    return True


# ---------------------------------------------------------------------------
# homotopy quotient


@dataclass(frozen=True)
class HoClass:
    """One hom-equivalence class of a corpus."""

    members: tuple[int, ...]
    representative: Structure
    canonical_key: bytes


def ho_quotient(corpus) -> list[HoClass]:
    """Partition corpus entries into hom-equivalence classes.

    Accepts anything with an `entries` list of (structure, tuple) pairs, or
    a plain iterable of structures.  Each class's representative is the
    core of its first member; members of one class have pairwise isomorphic
    cores, so the representative is class-canonical up to isomorphism and
    `canonical_key` is exact."""
    entries = getattr(corpus, "entries", corpus)
    structs = [e[0] if isinstance(e, tuple) else e for e in entries]
    classes: list[list[int]] = []
    reps: list[Structure] = []
    for i, s in enumerate(structs):
        for ci, r in enumerate(reps):
            if find_hom(s, r) is not None and find_hom(r, s) is not None:
                classes[ci].append(i)
                break
        else:
            classes.append([i])
            reps.append(core(s))
    return [
        HoClass(tuple(members), rep, canonical_form(rep))
        for members, rep in zip(classes, reps)
    ]


def quotient_hom_set(a: HoClass, b: HoClass, limit: int = HOMSET_LIMIT):
    """The morphisms between two quotient classes, realized between their
    core representatives."""
    homs, truncated = enumerate_homs(a.representative, b.representative, limit=limit)
    if truncated:
        raise EnumerationTruncatedError(
            f"quotient hom-set truncated at {limit} homomorphisms"
        )
    return homs


# ---------------------------------------------------------------------------
# under-objects and pointed objects


@dataclass(frozen=True)
class UnderObject:
    """An object X equipped with a map from the fixed base A."""

    base: Structure
    total: Structure
    section: Morphism

    def __post_init__(self):
        if not _same_object(self.section.source, self.base) or not _same_object(
            self.section.target, self.total
        ):
            raise ValidationError("section must map the base into the total object")


def make_under(base: Structure, total: Structure, i: Homomorphism) -> UnderObject:
    return UnderObject(base, total, Morphism(base, total, i))


@dataclass(frozen=True)
class UnderMorphism:
    """A map of under-objects: commutes with the sections."""

    source: UnderObject
    target: UnderObject
    morphism: Morphism

    def __post_init__(self):
        if not _same_object(self.source.base, self.target.base):
            raise ValidationError("under-morphisms keep the base fixed")
        if not _same_object(
            self.morphism.source, self.source.total
        ) or not _same_object(self.morphism.target, self.target.total):
            raise ValidationError("morphism endpoints must match the under-objects")
        left = compose(self.source.section.hom, self.morphism.hom)
        if left.mapping != self.target.section.hom.mapping:
            raise ValidationError("triangle does not commute with the sections")


def initial_under_object(base: Structure) -> UnderObject:
    """The identity section is the initial under-object."""
    return UnderObject(base, base, identity_morphism(base))


@dataclass(frozen=True)
class PointedObject:
    """An object with a section from and retraction to the base, with
    r after i the identity."""

    base: Structure
    total: Structure
    section: Morphism
    retraction: Morphism

    def __post_init__(self):
        if not _same_object(self.section.source, self.base) or not _same_object(
            self.section.target, self.total
        ):
            raise ValidationError("section must map the base into the total object")
        if not _same_object(self.retraction.source, self.total) or not _same_object(
            self.retraction.target, self.base
        ):
            raise ValidationError("retraction must map the total object onto the base")
        composite = compose(self.section.hom, self.retraction.hom)
        if composite.mapping != tuple(range(self.base.universe_size)):
            raise ValidationError("retraction does not split the section")


def make_pointed(
    base: Structure, total: Structure, i: Homomorphism, r: Homomorphism
) -> PointedObject:
    return PointedObject(
        base, total, Morphism(base, total, i), Morphism(total, base, r)
    )


def zero_pointed_object(base: Structure) -> PointedObject:
    """Identity section and retraction: the zero object of the pointed
    category over the base."""
    ident = Homomorphism(tuple(range(base.universe_size)))
    return make_pointed(base, base, ident, ident)


@dataclass(frozen=True)
class PointedMorphism:
    """A map of pointed objects: commutes with sections and retractions."""

    source: PointedObject
    target: PointedObject
    morphism: Morphism

    def __post_init__(self):
        if not _same_object(self.source.base, self.target.base):
            raise ValidationError("pointed morphisms keep the base fixed")
        if not _same_object(
            self.morphism.source, self.source.total
        ) or not _same_object(self.morphism.target, self.target.total):
            raise ValidationError("morphism endpoints must match the pointed objects")
        left = compose(self.source.section.hom, self.morphism.hom)
        if left.mapping != self.target.section.hom.mapping:
            raise ValidationError("sections do not commute")
        right = compose(self.morphism.hom, self.target.retraction.hom)
        if right.mapping != self.source.retraction.hom.mapping:
            raise ValidationError("retractions do not commute")


def compose_pointed(first: PointedMorphism, then: PointedMorphism) -> PointedMorphism:
    if not _same_object(first.target.total, then.source.total):
        raise ValidationError("composition requires matching middle object")
    return PointedMorphism(
        first.source, then.target, compose_morphisms(first.morphism, then.morphism)
    )


# ---------------------------------------------------------------------------
# lifted classification


@dataclass(frozen=True)
class LiftedClassification:
    weak_equivalence: bool
    acyclic_fibration: bool
    fibration: str = "unspecified"
    cofibration: str = "unspecified"


def lifted_class(f) -> LiftedClassification:
    """Classify a structured morphism (under, pointed, or bare) by its
    underlying homomorphism.  Only weak equivalences and retractions have a
    definitive test; the rest of the classification is unspecified."""
    m = f.morphism if hasattr(f, "morphism") else f
    if not isinstance(m, Morphism):
        raise ValidationError("expected a morphism or structured morphism")
    return LiftedClassification(
        weak_equivalence=is_weak_equivalence(m),
        acyclic_fibration=is_acyclic_fibration(m),
    )
