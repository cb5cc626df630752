"""Round-limited comparison games between structures.

Two deciders live here: the back-and-forth game (`ef_equivalent`) that captures
agreement on bounded-quantifier-rank first-order sentences, and the one-sided
forth game (`forth_khom`) that captures one-way transfer of primitive-positive
sentences.  Both pre-pair constants positionally before play starts.

`ef_equivalent_reference` is a deliberately literal, unmemoized transcription
kept as a differential-testing target; do not "optimize" it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BoundExceededError, InvalidSeedError, ValidationError
from .structures import Structure, canonical_form, check_same_vocab


def _touch_lists(s: Structure):
    """Per element, the tuples (with their relation) mentioning it."""
    touch = [[] for _ in range(s.universe_size)]
    for name, _ in s.vocab.relations:
        for t in s._interps[name]:
            for v in set(t):
                touch[v].append((name, t))
    return touch


def _check_anchor(s: Structure, anchor) -> None:
    for v in anchor:
        if not 0 <= v < s.universe_size:
            raise ValidationError(f"anchor element {v} out of range")


def _start_pairs(a, b, a_tuple, b_tuple):
    return list(zip(a.constants, b.constants)) + list(zip(a_tuple, b_tuple))


# ---------------------------------------------------------------------------
# back-and-forth game


def ef_equivalent(a: Structure, a_tuple, b: Structure, b_tuple, k: int) -> bool:
    """Duplicator wins the k-round back-and-forth game from (a_tuple, b_tuple).

    Memoized on the set of played pairs; the played order never matters.
    """
    check_same_vocab(a, b)
    a_tuple, b_tuple = tuple(a_tuple), tuple(b_tuple)
    if len(a_tuple) != len(b_tuple):
        raise ValidationError("anchor tuples must have equal length")
    if k < 0:
        raise ValidationError("round count must be >= 0")
    _check_anchor(a, a_tuple)
    _check_anchor(b, b_tuple)
    na, nb = a.universe_size, b.universe_size
    touch_a, touch_b = _touch_lists(a), _touch_lists(b)

    def extend_ok(fwd, bwd, x, y):
        # (x, y) is a fresh pair; is the extended map still a partial iso?
        for name, t in touch_a[x]:
            image = []
            for c in t:
                w = y if c == x else fwd.get(c)
                if w is None:
                    image = None
                    break
                image.append(w)
            if image is not None and tuple(image) not in b._interps[name]:
                return False
        for name, t in touch_b[y]:
            pre = []
            for c in t:
                w = x if c == y else bwd.get(c)
                if w is None:
                    pre = None
                    break
                pre.append(w)
            if pre is not None and tuple(pre) not in a._interps[name]:
                return False
        return True

    fwd: dict = {}
    bwd: dict = {}
    for x, y in _start_pairs(a, b, a_tuple, b_tuple):
        if fwd.get(x, y) != y or bwd.get(y, x) != x:
            return False
        if x not in fwd:
            if not extend_ok(fwd, bwd, x, y):
                return False
            fwd[x] = y
            bwd[y] = x

    memo: dict = {}

    def win(fwd, bwd, r):
        if r == 0:
            return True
        key = (frozenset(fwd.items()), r)
        cached = memo.get(key)
        if cached is not None:
            return cached
        ok = True
        for x in range(na):
            if x in fwd:
                if win(fwd, bwd, r - 1):
                    continue
                ok = False
                break
            if not any(
                y not in bwd and extend_ok(fwd, bwd, x, y)
                and win({**fwd, x: y}, {**bwd, y: x}, r - 1)
                for y in range(nb)
            ):
                ok = False
                break
        if ok:
            for y in range(nb):
                if y in bwd:
                    if win(fwd, bwd, r - 1):
                        continue
                    ok = False
                    break
                if not any(
                    x not in fwd and extend_ok(fwd, bwd, x, y)
                    and win({**fwd, x: y}, {**bwd, y: x}, r - 1)
                    for x in range(na)
                ):
                    ok = False
                    break
        memo[key] = ok
        return ok

    return win(fwd, bwd, k)


def ef_equivalent_reference(a: Structure, a_tuple, b: Structure, b_tuple, k: int) -> bool:
    """Unmemoized textbook recursion; the partial-iso check runs at leaves only."""
    check_same_vocab(a, b)
    a_tuple, b_tuple = tuple(a_tuple), tuple(b_tuple)
    if len(a_tuple) != len(b_tuple):
        raise ValidationError("anchor tuples must have equal length")
    if k < 0:
        raise ValidationError("round count must be >= 0")
    _check_anchor(a, a_tuple)
    _check_anchor(b, b_tuple)
    na, nb = a.universe_size, b.universe_size

    def partial_iso(pairs):
        fwd: dict = {}
        bwd: dict = {}
        for x, y in pairs:
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
        for name, _ in a.vocab.relations:
            at, bt = a._interps[name], b._interps[name]
            for t in at:
                if all(c in fwd for c in t) and tuple(fwd[c] for c in t) not in bt:
                    return False
            for t in bt:
                if all(c in bwd for c in t) and tuple(bwd[c] for c in t) not in at:
                    return False
        return True

    def win(pairs, r):
        if r == 0:
            return partial_iso(pairs)
        for x in range(na):
            if not any(win(pairs + [(x, y)], r - 1) for y in range(nb)):
                return False
        for y in range(nb):
            if not any(win(pairs + [(x, y)], r - 1) for x in range(na)):
                return False
        return True

    return win(_start_pairs(a, b, a_tuple, b_tuple), k)


# ---------------------------------------------------------------------------
# one-sided forth game


def _forth_decide(a: Structure, b: Structure, start: dict, k: int) -> bool:
    """Game value with `start` as the opening position; False when the opening
    itself is not a partial homomorphism (the mover has already lost)."""
    na, nb = a.universe_size, b.universe_size
    touch_a = _touch_lists(a)

    def extend_ok(fwd, x, y):
        for name, t in touch_a[x]:
            image = []
            for c in t:
                w = y if c == x else fwd.get(c)
                if w is None:
                    image = None
                    break
                image.append(w)
            if image is not None and tuple(image) not in b._interps[name]:
                return False
        return True

    fwd: dict = {}
    for x, y in start.items():
        if not extend_ok(fwd, x, y):
            return False
        fwd[x] = y

    memo: dict = {}

    def win(fwd, r):
        if r == 0 or len(fwd) == na:
            return True
        key = (frozenset(fwd.items()), r)
        cached = memo.get(key)
        if cached is not None:
            return cached
        ok = True
        for x in range(na):
            if x in fwd:
                continue  # forced repeat response; position unchanged, still winnable
            if not any(
                extend_ok(fwd, x, y) and win({**fwd, x: y}, r - 1) for y in range(nb)
            ):
                ok = False
                break
        memo[key] = ok
        return ok

    return win(fwd, k)


def _normalize_seed(a: Structure, b: Structure, seed) -> dict:
    """Validate a user-supplied seed; raises InvalidSeedError, returns a dict."""
    if seed is None:
        pairs = []
    elif isinstance(seed, dict):
        pairs = sorted(seed.items())
    else:
        pairs = [tuple(p) for p in seed]
    fwd: dict = {}
    for p in pairs:
        if len(p) != 2:
            raise InvalidSeedError(f"seed entry {p!r} is not a pair")
        x, y = p
        if not 0 <= x < a.universe_size or not 0 <= y < b.universe_size:
            raise InvalidSeedError(f"seed pair ({x},{y}) out of range")
        if fwd.setdefault(x, y) != y:
            raise InvalidSeedError(f"seed maps element {x} to both {fwd[x]} and {y}")
    for i, c in enumerate(a.constants):
        if c in fwd and fwd[c] != b.constants[i]:
            raise InvalidSeedError(
                f"seed maps constant {i} (element {c}) away from its image"
            )
    # the seed on its own must preserve every tuple it covers
    for name, _ in a.vocab.relations:
        bt = b._interps[name]
        for t in a._interps[name]:
            if all(c in fwd for c in t) and tuple(fwd[c] for c in t) not in bt:
                raise InvalidSeedError(
                    f"seed does not preserve {name}{t} — not a partial homomorphism"
                )
    return fwd


def forth_khom(a: Structure, b: Structure, seed, k: int) -> bool:
    """Duplicator wins the one-sided k-round game: spoiler picks in A only, and
    the growing map must stay a partial homomorphism A -> B.

    `seed` (a dict or pair list, possibly None) opens the position; it must be
    a partial homomorphism on its own or InvalidSeedError is raised.  The
    seed combined with the forced constant pairing can still lose outright,
    which is a False verdict, not an error.
    """
    check_same_vocab(a, b)
    if k < 0:
        raise ValidationError("round count must be >= 0")
    fwd = _normalize_seed(a, b, seed)
    if not fwd:
        cached = _forth_lookup(a, b, k)
        if cached is not None:
            return cached
    start = dict(zip(a.constants, b.constants))
    start.update(fwd)
    value = _forth_decide(a, b, start, k)
    if not fwd:
        _forth_store(a, b, k, value)
    return value


_forth_cache: dict = {}


def _cache_key(a: Structure, b: Structure, k: int):
    try:
        return (canonical_form(a), canonical_form(b), k)
    except BoundExceededError:
        return None


def _forth_lookup(a, b, k):
    key = _cache_key(a, b, k)
    return None if key is None else _forth_cache.get(key)


def _forth_store(a, b, k, value):
    key = _cache_key(a, b, k)
    if key is not None:
        _forth_cache[key] = value


def khom_equivalent(a: Structure, b: Structure, k: int) -> bool:
    """Both one-sided forth games at k rounds, with empty seeds."""
    return forth_khom(a, b, None, k) and forth_khom(b, a, None, k)


def _khom_over(a: Structure, b: Structure, pairs, depth: int) -> bool:
    """Two-sided seeded forth value; an ill-formed side simply loses.

    The position must extend the forced constant pairing and be a function in
    both directions; any conflict is a loss for that side, not an error.
    """
    fwd = dict(zip(a.constants, b.constants))
    for x, y in pairs:
        if fwd.setdefault(x, y) != y:
            return False
    if not _forth_decide(a, b, fwd, depth):
        return False
    bwd = dict(zip(b.constants, a.constants))
    for x, y in pairs:
        if bwd.setdefault(y, x) != x:
            return False
    return _forth_decide(b, a, bwd, depth)


# ---------------------------------------------------------------------------
# extendability audit


@dataclass(frozen=True)
class ExtendabilityResult:
    """Corpus-relative audit outcome; a failure carries its full witness."""

    passed: bool
    x_set: tuple[int, ...] | None = None
    candidate_index: int | None = None
    seed: tuple[tuple[int, int], ...] | None = None
    b: int | None = None


def k_extendable(a: Structure, k: int, candidates) -> ExtendabilityResult:
    """Audit the extension property of `a` against a finite candidate corpus.

    For every X of size < k, every candidate B, and every seed X -> B realizing
    the two-sided forth relation at depth k-|X|, every element b of B must be
    matched by some a' in A so that the position extended with (a', b) still
    realizes the relation at depth k-|X|-1.  Returns the first failure witness
    in deterministic scan order, or a corpus-relative pass.
    """
    if k < 0:
        raise ValidationError("k must be >= 0")
    candidates = list(candidates)
    for c in candidates:
        check_same_vocab(a, c)
    na = a.universe_size
    for size in range(min(k, na + 1)):
        for x_set in itertools.combinations(range(na), size):
            for ci, cand in enumerate(candidates):
                depth = k - size
                for images in itertools.product(range(cand.universe_size), repeat=size):
                    pairs = list(zip(x_set, images))
                    if not _khom_over(a, cand, pairs, depth):
                        continue
                    for bb in range(cand.universe_size):
                        if not any(
                            _khom_over(a, cand, pairs + [(aa, bb)], depth - 1)
                            for aa in range(na)
                        ):
                            return ExtendabilityResult(
                                passed=False,
                                x_set=x_set,
                                candidate_index=ci,
                                seed=tuple(pairs),
                                b=bb,
                            )
    return ExtendabilityResult(passed=True)


# ---------------------------------------------------------------------------
# the game-to-logic bridge audit


@dataclass(frozen=True)
class LemmaViolation:
    """A corpus pair passing extendability and the n-round two-sided forth
    relation yet distinguished by the k-round back-and-forth game."""

    i: int
    j: int
    k: int
    n: int


def lemma1_audit(structures, k: int, n: int) -> list[LemmaViolation]:
    """Check, over all corpus pairs, that extendability of both sides plus
    n-round two-sided forth equivalence forces k-round game equivalence.
    Expected empty; every violation is surfaced with its indices."""
    structures = list(structures)
    extendable = [k_extendable(s, k, structures).passed for s in structures]
    violations = []
    for i in range(len(structures)):
        for j in range(i + 1, len(structures)):
            if not (extendable[i] and extendable[j]):
                continue
            if not khom_equivalent(structures[i], structures[j], n):
                continue
            if not ef_equivalent(structures[i], (), structures[j], (), k):
                violations.append(LemmaViolation(i=i, j=j, k=k, n=n))
    return violations
