"""Locality notions over finite relational structures.

Neighborhood equivalence is parameterized by an equivalence kind —
isomorphism, bounded-rank hom-equivalence, bounded-rank elementary
equivalence, or isomorphism of bounded-size k-cores — and everything else
is built on top: element-wise d-equivalence bijections (found by bipartite
matching), Gaifman- and Hanf-style locality ranks of a query relative to a
finite corpus, precomposition-bijectivity of maps, locality with respect to
the weak-equivalence maps, and the neighborhood-level consistency check
tying hom-equivalence of neighborhoods to isomorphism of their k-cores.

Rank computations are corpus-relative and ceiling-bounded by construction;
reports say so, carry every counterexample found below the rank, and flag
radii whose hypothesis was never satisfiable rather than letting them pass
silently.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    EnumerationTruncatedError,
    InconclusiveError,
    ValidationError,
)
from .games import ef_equivalent, khom_equivalent
from .hom import core, enumerate_homs, k_core_search
from .homotopy import HOMSET_LIMIT, Morphism
from .logic import Query, query_answers
from .structures import (
    Structure,
    canonical_form,
    check_same_vocab,
    is_isomorphic,
    neighborhood,
)


# ---------------------------------------------------------------------------
# equivalence kinds


@dataclass(frozen=True)
class Iso:
    """Isomorphism of neighborhoods."""


@dataclass(frozen=True)
class KHom:
    """Indistinguishability by homomorphisms from structures of rank <= k."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("k must be >= 0")


@dataclass(frozen=True)
class FO:
    """Agreement on first-order sentences of quantifier rank <= k."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("k must be >= 0")


@dataclass(frozen=True)
class CoreIso:
    """Isomorphism of k-cores searched up to a size bound."""

    k: int
    size_bound: int

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("k must be >= 0")
        if self.size_bound < 1:
            raise ValidationError("size_bound must be >= 1")


EquivalenceKind = Iso | KHom | FO | CoreIso


# ---------------------------------------------------------------------------
# corpora


@dataclass(frozen=True)
class Corpus:
    """A finite list of structures with designated tuples.

    All entries share one vocabulary; designated tuples are valid element
    tuples of one uniform length.  `provenance`, when given, parallels
    `entries` with one description per entry."""

    entries: tuple[tuple[Structure, tuple[int, ...]], ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        entries = tuple((s, tuple(t)) for s, t in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.provenance and len(self.provenance) != len(entries):
            raise ValidationError("provenance must parallel entries")
        if entries:
            vocab = entries[0][0].vocab
            m = len(entries[0][1])
            for s, t in entries:
                if s.vocab != vocab:
                    raise ValidationError("corpus entries must share one vocabulary")
                if len(t) != m:
                    raise ValidationError("designated tuples must have uniform length")
                if any(not 0 <= x < s.universe_size for x in t):
                    raise ValidationError(f"designated tuple {t} out of range")

    @property
    def anchor_length(self) -> int:
        return len(self.entries[0][1]) if self.entries else 0

    def structures(self) -> list[Structure]:
        return [s for s, _ in self.entries]


# ---------------------------------------------------------------------------
# neighborhood equivalence


_nbhd_eq_cache: dict = {}


def neighborhoods_equivalent(
    a: Structure,
    a_tuple,
    b: Structure,
    b_tuple,
    d: int,
    kind: EquivalenceKind,
) -> bool:
    """Are the d-neighborhoods of the two anchored tuples equivalent in the
    given sense?  Results are cached symmetrically by canonical form."""
    check_same_vocab(a, b)
    a_tuple, b_tuple = tuple(a_tuple), tuple(b_tuple)
    if len(a_tuple) != len(b_tuple):
        raise ValidationError("anchor tuples must have equal length")
    if d < 0:
        raise ValidationError("radius must be >= 0")
    n1 = neighborhood(a, a_tuple, d)
    n2 = neighborhood(b, b_tuple, d)
    c1, c2 = canonical_form(n1), canonical_form(n2)
    if c1 > c2:
        c1, c2 = c2, c1
        n1, n2 = n2, n1
    key = (kind, c1, c2)
    got = _nbhd_eq_cache.get(key)
    if got is None:
        got = _dispatch_equivalence(n1, n2, kind)
        _nbhd_eq_cache[key] = got
    return got


def _dispatch_equivalence(n1: Structure, n2: Structure, kind: EquivalenceKind) -> bool:
    if isinstance(kind, Iso):
        return is_isomorphic(n1, n2) is not None
    if isinstance(kind, KHom):
        return khom_equivalent(n1, n2, kind.k)
    if isinstance(kind, FO):
        return ef_equivalent(n1, n1.constants, n2, n2.constants, kind.k)
    if isinstance(kind, CoreIso):
        c1 = k_core_search(n1, kind.k, kind.size_bound)
        c2 = k_core_search(n2, kind.k, kind.size_bound)
        if c1 is None or c2 is None:
            raise InconclusiveError(
                f"k-core search inconclusive within size {kind.size_bound}"
            )
        return is_isomorphic(c1, c2) is not None
    raise ValidationError(f"unknown equivalence kind: {kind!r}")


# ---------------------------------------------------------------------------
# d-equivalence via bipartite matching


def _perfect_matching(compat: list[list[bool]]) -> tuple[int, ...] | None:
    """Deterministic augmenting-path perfect matching on an n x n
    compatibility matrix; returns the left-to-right assignment."""
    n = len(compat)
    match_right = [-1] * n
    matched = [False] * n

    # greedy pass first, so self-comparisons settle on the identity
    for u in range(n):
        for v in range(n):
            if compat[u][v] and match_right[v] == -1:
                match_right[v] = u
                matched[u] = True
                break

    def augment(u: int, seen: list[bool]) -> bool:
        for v in range(n):
            if compat[u][v] and not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    for u in range(n):
        if not matched[u] and not augment(u, [False] * n):
            return None
    out = [-1] * n
    for v, u in enumerate(match_right):
        out[u] = v
    return tuple(out)


def d_equivalent(
    a: Structure,
    a_tuple,
    b: Structure,
    b_tuple,
    d: int,
    kind: EquivalenceKind,
) -> tuple[int, ...] | None:
    """A bijection f with the d-neighborhood of a_tuple+(c,) equivalent to
    that of b_tuple+(f(c),) for every element c, or None.

    The per-element hypothesis makes the bijection search a perfect-matching
    problem; the returned tuple maps each element of `a` to its image."""
    check_same_vocab(a, b)
    a_tuple, b_tuple = tuple(a_tuple), tuple(b_tuple)
    if len(a_tuple) != len(b_tuple):
        raise ValidationError("anchor tuples must have equal length")
    if a.universe_size != b.universe_size:
        return None
    n = a.universe_size
    compat = [
        [
            neighborhoods_equivalent(a, a_tuple + (c,), b, b_tuple + (cc,), d, kind)
            for cc in range(n)
        ]
        for c in range(n)
    ]
    return _perfect_matching(compat)


# ---------------------------------------------------------------------------
# locality ranks


@dataclass(frozen=True)
class LocalityViolation:
    """One witnessed failure of the locality implication at radius d."""

    d: int
    left_index: int
    left_tuple: tuple[int, ...]
    right_index: int
    right_tuple: tuple[int, ...]
    left_in_query: bool
    right_in_query: bool
    witness: tuple[int, ...] | None = None  # bijection for Hanf-style checks


@dataclass(frozen=True)
class LocalityReport:
    """Outcome of a rank search, relative to a corpus and a ceiling."""

    rank: int | None
    d_max: int
    kind: EquivalenceKind | None
    counterexamples: tuple[LocalityViolation, ...]
    vacuous: tuple[int, ...] = ()
    pool_description: str = ""


def _all_tuples(n: int, m: int):
    if m == 0:
        yield ()
        return
    idx = [0] * m
    while True:
        yield tuple(idx)
        pos = m - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < n:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return


def gaifman_rank(
    q: Query, corpus: Corpus, kind: EquivalenceKind, d_max: int
) -> LocalityReport:
    """Least d <= d_max such that, corpus-wide, tuples with equivalent
    d-neighborhoods agree on query membership; designated corpus tuples are
    not consulted (the check ranges over all tuples of the query's arity)."""
    m = len(q.variables)
    if m == 0:
        raise ValidationError("query arity must be positive")
    if d_max < 0:
        raise ValidationError("d_max must be >= 0")
    violations: list[LocalityViolation] = []
    for d in range(d_max + 1):
        clean = True
        for ai, (s, _) in enumerate(corpus.entries):
            answers = set(query_answers(q, s))
            tuples = list(_all_tuples(s.universe_size, m))
            for i in range(len(tuples)):
                for j in range(i + 1, len(tuples)):
                    t1, t2 = tuples[i], tuples[j]
                    in1, in2 = t1 in answers, t2 in answers
                    if in1 == in2:
                        continue
                    if neighborhoods_equivalent(s, t1, s, t2, d, kind):
                        clean = False
                        violations.append(
                            LocalityViolation(d, ai, t1, ai, t2, in1, in2)
                        )
        if clean:
            return LocalityReport(d, d_max, kind, tuple(violations))
    return LocalityReport(None, d_max, kind, tuple(violations))


def hanf_rank(
    q: Query, corpus: Corpus, kind: EquivalenceKind, d_max: int
) -> LocalityReport:
    """Least d <= d_max such that d-equivalent corpus entries agree on
    membership of their designated tuples."""
    m = corpus.anchor_length
    if len(q.variables) != m:
        raise ValidationError(
            f"query arity {len(q.variables)} != corpus tuple length {m}"
        )
    if d_max < 0:
        raise ValidationError("d_max must be >= 0")
    violations: list[LocalityViolation] = []
    entries = corpus.entries
    answers = [set(query_answers(q, s)) for s, _ in entries]
    for d in range(d_max + 1):
        clean = True
        for i in range(len(entries)):
            s1, t1 = entries[i]
            for j in range(i + 1, len(entries)):
                s2, t2 = entries[j]
                in1, in2 = t1 in answers[i], t2 in answers[j]
                if in1 == in2:
                    continue
                bij = d_equivalent(s1, t1, s2, t2, d, kind)
                if bij is not None:
                    clean = False
                    violations.append(
                        LocalityViolation(d, i, t1, j, t2, in1, in2, bij)
                    )
        if clean:
            return LocalityReport(d, d_max, kind, tuple(violations))
    return LocalityReport(None, d_max, kind, tuple(violations))


# ---------------------------------------------------------------------------
# precomposition bijectivity and locality w.r.t. weak equivalences


def precomposition_bijective(f: Morphism, x: Structure) -> bool:
    """Is g -> g o f a bijection from Hom(target, x) to Hom(source, x)?"""
    check_same_vocab(f.source, x)
    from_target, trunc1 = enumerate_homs(f.target, x, limit=HOMSET_LIMIT)
    if trunc1:
        raise EnumerationTruncatedError("hom-set enumeration truncated")
    from_source, trunc2 = enumerate_homs(f.source, x, limit=HOMSET_LIMIT)
    if trunc2:
        raise EnumerationTruncatedError("hom-set enumeration truncated")
    composites = {
        tuple(g.mapping[v] for v in f.hom.mapping) for g in from_target
    }
    if len(composites) != len(from_target):
        return False  # not injective
    return composites == {g.mapping for g in from_source}


def e_local_objects(corpus: Corpus) -> set[int]:
    """Indices of corpus structures x such that precomposition with every
    weak equivalence between corpus structures is a hom-set bijection.

    Every homomorphism between structures with isomorphic cores is a weak
    equivalence, so the maps tested are all members of the hom-sets between
    core-isomorphic corpus structures (identity endomorphisms included)."""
    structs = corpus.structures()
    weak_maps: list[Morphism] = []
    core_keys = [canonical_form(core(s)) for s in structs]
    for i, s in enumerate(structs):
        for j, t in enumerate(structs):
            if core_keys[i] != core_keys[j]:
                continue
            homs, truncated = enumerate_homs(s, t, limit=HOMSET_LIMIT)
            if truncated:
                raise EnumerationTruncatedError("hom-set enumeration truncated")
            weak_maps.extend(Morphism(s, t, h) for h in homs)
    out = set()
    for xi, x in enumerate(structs):
        if all(precomposition_bijective(f, x) for f in weak_maps):
            out.add(xi)
    return out


# ---------------------------------------------------------------------------
# locality under hom-isomorphisms


def _homiso_hypothesis(n1: Structure, n2: Structure, elocal_pool) -> bool:
    """Is there a weak equivalence between the two neighborhoods whose
    precomposition with some pool object is a hom-set bijection?"""
    if is_isomorphic(core(n1), core(n2)) is None:
        return False
    for src, tgt in ((n1, n2), (n2, n1)):
        homs, truncated = enumerate_homs(src, tgt, limit=HOMSET_LIMIT)
        if truncated:
            raise EnumerationTruncatedError("hom-set enumeration truncated")
        for h in homs:
            f = Morphism(src, tgt, h)
            for x in elocal_pool:
                if precomposition_bijective(f, x):
                    return True
    return False


def _elocal_pool(neighborhoods: list[Structure]) -> list[Structure]:
    """Deduplicate the arising neighborhoods, add their cores, and keep the
    objects local with respect to the pool's own weak equivalences."""
    seen: dict = {}
    for n in neighborhoods:
        seen.setdefault(canonical_form(n), n)
        c = core(n)
        seen.setdefault(canonical_form(c), c)
    pool = [s for _, s in sorted(seen.items())]
    pool_corpus = Corpus(tuple((s, ()) for s in pool))
    locals_ = e_local_objects(pool_corpus)
    return [pool[i] for i in sorted(locals_)]


def homiso_gaifman_rank(q: Query, corpus: Corpus, d_max: int) -> LocalityReport:
    """Gaifman-style rank with the hypothesis: some weak equivalence
    between the two d-neighborhoods precomposes to a hom-set bijection with
    some local object drawn from the corpus's neighborhood pool.

    Radii whose hypothesis never fires are reported in `vacuous`."""
    m = len(q.variables)
    if m == 0:
        raise ValidationError("query arity must be positive")
    if d_max < 0:
        raise ValidationError("d_max must be >= 0")
    violations: list[LocalityViolation] = []
    vacuous: list[int] = []
    rank = None
    for d in range(d_max + 1):
        nbhds = []
        per_struct: list[tuple[int, Structure, list]] = []
        for ai, (s, _) in enumerate(corpus.entries):
            tuples = list(_all_tuples(s.universe_size, m))
            per_struct.append((ai, s, tuples))
            for t in tuples:
                nbhds.append(neighborhood(s, t, d))
        pool = _elocal_pool(nbhds)
        clean = True
        fired = False
        hyp_cache: dict = {}
        for ai, s, tuples in per_struct:
            answers = set(query_answers(q, s))
            for i in range(len(tuples)):
                for j in range(i + 1, len(tuples)):
                    t1, t2 = tuples[i], tuples[j]
                    n1 = neighborhood(s, t1, d)
                    n2 = neighborhood(s, t2, d)
                    key = tuple(sorted((canonical_form(n1), canonical_form(n2))))
                    hyp = hyp_cache.get(key)
                    if hyp is None:
                        hyp = _homiso_hypothesis(n1, n2, pool)
                        hyp_cache[key] = hyp
                    if not hyp:
                        continue
                    fired = True
                    in1, in2 = t1 in answers, t2 in answers
                    if in1 != in2:
                        clean = False
                        violations.append(
                            LocalityViolation(d, ai, t1, ai, t2, in1, in2)
                        )
        if not fired:
            vacuous.append(d)
        if clean and rank is None:
            rank = d
            break
    return LocalityReport(
        rank,
        d_max,
        None,
        tuple(violations),
        tuple(vacuous),
        "pool: corpus d-neighborhoods and their cores, filtered to "
        "precomposition-local objects",
    )


def homiso_hanf_rank(q: Query, corpus: Corpus, d_max: int) -> LocalityReport:
    """Hanf-style rank with the per-element hypothesis strengthened to the
    weak-equivalence/precomposition form used by homiso_gaifman_rank."""
    m = corpus.anchor_length
    if len(q.variables) != m:
        raise ValidationError(
            f"query arity {len(q.variables)} != corpus tuple length {m}"
        )
    if d_max < 0:
        raise ValidationError("d_max must be >= 0")
    entries = corpus.entries
    answers = [set(query_answers(q, s)) for s, _ in entries]
    violations: list[LocalityViolation] = []
    vacuous: list[int] = []
    rank = None
    for d in range(d_max + 1):
        nbhds = []
        for s, t in entries:
            for c in range(s.universe_size):
                nbhds.append(neighborhood(s, t + (c,), d))
        pool = _elocal_pool(nbhds)
        hyp_cache: dict = {}

        def compatible(s1, t1, c1, s2, t2, c2):
            n1 = neighborhood(s1, t1 + (c1,), d)
            n2 = neighborhood(s2, t2 + (c2,), d)
            key = tuple(sorted((canonical_form(n1), canonical_form(n2))))
            hyp = hyp_cache.get(key)
            if hyp is None:
                hyp = _homiso_hypothesis(n1, n2, pool)
                hyp_cache[key] = hyp
            return hyp

        clean = True
        fired = False
        for i in range(len(entries)):
            s1, t1 = entries[i]
            for j in range(i + 1, len(entries)):
                s2, t2 = entries[j]
                if s1.universe_size != s2.universe_size:
                    continue
                n = s1.universe_size
                compat = [
                    [compatible(s1, t1, c, s2, t2, cc) for cc in range(n)]
                    for c in range(n)
                ]
                if any(any(row) for row in compat):
                    fired = True
                bij = _perfect_matching(compat)
                if bij is None:
                    continue
                in1, in2 = t1 in answers[i], t2 in answers[j]
                if in1 != in2:
                    clean = False
                    violations.append(
                        LocalityViolation(d, i, t1, j, t2, in1, in2, bij)
                    )
        if not fired:
            vacuous.append(d)
        if clean and rank is None:
            rank = d
            break
    return LocalityReport(
        rank,
        d_max,
        None,
        tuple(violations),
        tuple(vacuous),
        "pool: corpus d-neighborhoods and their cores, filtered to "
        "precomposition-local objects",
    )


# ---------------------------------------------------------------------------
# neighborhood-level consistency check


@dataclass(frozen=True)
class DiagramReport:
    """Each leg of the neighborhood-level biconditional, reported
    separately; `holds` stays None when a k-core search was inconclusive."""

    d: int
    k: int
    size_bound: int
    lhs: bool
    core_a: Structure | None
    core_b: Structure | None
    cores_isomorphic: bool | None
    leg_a: bool | None
    leg_b: bool | None
    rhs: bool | None
    holds: bool | None
    inconclusive: bool


def diagram_check(
    a: Structure,
    a_tuple,
    b: Structure,
    b_tuple,
    d: int,
    k: int,
    size_bound: int,
) -> DiagramReport:
    """Check, on one pair of anchored d-neighborhoods, that bounded-rank
    hom-equivalence coincides with sharing a common k-core up to
    isomorphism; an inconclusive k-core search is reported, never turned
    into a verdict."""
    check_same_vocab(a, b)
    n1 = neighborhood(a, tuple(a_tuple), d)
    n2 = neighborhood(b, tuple(b_tuple), d)
    lhs = khom_equivalent(n1, n2, k)
    c1 = k_core_search(n1, k, size_bound)
    c2 = k_core_search(n2, k, size_bound)
    if c1 is None or c2 is None:
        return DiagramReport(
            d, k, size_bound, lhs, c1, c2, None, None, None, None, None, True
        )
    cores_iso = is_isomorphic(c1, c2) is not None
    leg_a = khom_equivalent(n1, c1, k)
    leg_b = khom_equivalent(n2, c1, k)
    rhs = cores_iso and leg_a and leg_b
    return DiagramReport(
        d, k, size_bound, lhs, c1, c2, cores_iso, leg_a, leg_b, rhs,
        lhs == rhs, False,
    )
