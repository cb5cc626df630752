"""Homomorphism search, cores, and exact tree-depth.

The search engine is a bitmask CSP: constants are pre-seeded, initial domains
are filtered by loop/unary/degree profiles, an arc-consistency pass prunes
binary constraints, and backtracking runs with minimum-remaining-values
variable order and ascending value order so witnesses are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BoundExceededError, ValidationError
from .structures import Structure, canonical_form, check_same_vocab, gaifman_graph


@dataclass(frozen=True)
class Homomorphism:
    """mapping[i] is the image of element i of the domain structure."""

    mapping: tuple[int, ...]

    def apply(self, x: int) -> int:
        return self.mapping[x]


def verify_homomorphism(a: Structure, b: Structure, h: Homomorphism) -> bool:
    """Direct definition check: tuples transfer, constants map positionally."""
    m = h.mapping
    if len(m) != a.universe_size:
        return False
    if any(not 0 <= x < b.universe_size for x in m):
        return False
    for i, c in enumerate(a.constants):
        if m[c] != b.constants[i]:
            return False
    for name, _ in a.vocab.relations:
        bt = b.tuples(name)
        for t in a.tuples(name):
            if tuple(m[x] for x in t) not in bt:
                return False
    return True


def compose(first: Homomorphism, then: Homomorphism) -> Homomorphism:
    """The composite that applies `first`, then `then`."""
    return Homomorphism(tuple(then.mapping[x] for x in first.mapping))


def _tables(s: Structure):
    if s._homtables is None:
        n = s.universe_size
        out, inn, loop, unary, high = {}, {}, {}, {}, []
        for name, arity in s.vocab.relations:
            rel = s._interps[name]
            if arity == 1:
                m = 0
                for (v,) in rel:
                    m |= 1 << v
                unary[name] = m
            elif arity == 2:
                o = [0] * n
                i = [0] * n
                lp = 0
                for x, y in rel:
                    o[x] |= 1 << y
                    i[y] |= 1 << x
                    if x == y:
                        lp |= 1 << x
                out[name] = o
                inn[name] = i
                loop[name] = lp
            else:
                high.append((name, sorted(rel)))
        cons = [[] for _ in range(n)]
        for name, arity in s.vocab.relations:
            if arity != 2:
                continue
            for x, y in s._interps[name]:
                if x != y:
                    cons[x].append((y, name, True))   # on x -> b: dom[y] &= out_b
                    cons[y].append((x, name, False))  # on y -> b: dom[x] &= in_b
        hightouch = [[] for _ in range(n)]
        for idx, (name, rel) in enumerate(high):
            for t in rel:
                for v in set(t):
                    hightouch[v].append((name, t))
        s._homtables = (out, inn, loop, unary, high, cons, hightouch)
    return s._homtables


def _initial_domains(a: Structure, b: Structure, seed=None):
    """Profile-filtered domains as bitmasks; None when some domain is empty."""
    outa, inna, loopa, unarya, higha, _, _ = _tables(a)
    outb, innb, loopb, unaryb, _, _, _ = _tables(b)
    nb = b.universe_size
    full = (1 << nb) - 1
    hasout = {}
    hasin = {}
    for name in outb:
        mo = 0
        mi = 0
        for v in range(nb):
            if outb[name][v]:
                mo |= 1 << v
            if innb[name][v]:
                mi |= 1 << v
        hasout[name] = mo
        hasin[name] = mi
    doms = []
    for v in range(a.universe_size):
        m = full
        for name, mask in unarya.items():
            if mask >> v & 1:
                m &= unaryb[name]
        for name in outa:
            if loopa[name] >> v & 1:
                m &= loopb[name]
            if outa[name][v]:
                m &= hasout[name]
            if inna[name][v]:
                m &= hasin[name]
        doms.append(m)
    for i, c in enumerate(a.constants):
        doms[c] &= 1 << b.constants[i]
    if seed:
        for v, w in seed.items():
            doms[v] &= 1 << w
    if any(d == 0 for d in doms):
        return None
    return doms


def _ac_pass(a: Structure, b: Structure, doms):
    """Arc-consistency fixpoint over binary constraints; None on wipeout."""
    outa, _, _, _, _, _, _ = _tables(a)
    outb, innb, _, _, _, _, _ = _tables(b)
    changed = True
    while changed:
        changed = False
        for name in outa:
            ob = outb[name]
            ib = innb[name]
            for x in range(a.universe_size):
                targets = outa[name][x]
                if not targets:
                    continue
                y = 0
                rest = targets
                while rest:
                    y = (rest & -rest).bit_length() - 1
                    rest &= rest - 1
                    if x == y:
                        continue
                    keep = 0
                    dx = doms[x]
                    while dx:
                        bx = (dx & -dx).bit_length() - 1
                        dx &= dx - 1
                        if ob[bx] & doms[y]:
                            keep |= 1 << bx
                    if keep != doms[x]:
                        doms[x] = keep
                        changed = True
                        if keep == 0:
                            return None
                    keep = 0
                    dy = doms[y]
                    while dy:
                        by = (dy & -dy).bit_length() - 1
                        dy &= dy - 1
                        if ib[by] & doms[x]:
                            keep |= 1 << by
                    if keep != doms[y]:
                        doms[y] = keep
                        changed = True
                        if keep == 0:
                            return None
    return doms


def _search(a, b, doms, *, lex_order, limit):
    """Core backtracking generator yielding complete mappings as tuples."""
    n = a.universe_size
    outb, innb, _, _, _, _, _ = _tables(b)
    _, _, _, _, high, cons, hightouch = _tables(a)
    highsets = {name: set(rel) for name, rel in ((nm, b._interps[nm]) for nm, _ in b.vocab.relations)}
    assigned = [-1] * n
    emitted = 0

    def propagate(doms, v, w):
        for (other, name, fwd) in cons[v]:
            mask = outb[name][w] if fwd else innb[name][w]
            nd = doms[other] & mask
            if nd == 0:
                return False
            doms[other] = nd
        for name, t in hightouch[v]:
            if all(assigned[x] >= 0 for x in t):
                if tuple(assigned[x] for x in t) not in highsets[name]:
                    return False
        return True

    def pick(doms):
        best = -1
        bestc = None
        for v in range(n):
            if assigned[v] < 0:
                c = doms[v].bit_count()
                if bestc is None or c < bestc:
                    best, bestc = v, c
                    if c == 1:
                        break
        return best

    def rec(doms, depth):
        nonlocal emitted
        if depth == n:
            yield tuple(assigned)
            emitted += 1
            return
        v = depth if lex_order else pick(doms)
        d = doms[v]
        while d:
            w = (d & -d).bit_length() - 1
            d &= d - 1
            nd = doms.copy()
            nd[v] = 1 << w
            assigned[v] = w
            if propagate(nd, v, w):
                yield from rec(nd, depth + 1)
                if limit is not None and emitted >= limit:
                    assigned[v] = -1
                    return
            assigned[v] = -1

    yield from rec(doms, 0)


def find_hom(a: Structure, b: Structure, seed=None):
    """First homomorphism A -> B in deterministic search order, or None.

    seed, when given, is a dict of forced element images (must be honored by
    any returned witness).
    """
    check_same_vocab(a, b)
    doms = _initial_domains(a, b, seed)
    if doms is None:
        return None
    if _ac_pass(a, b, doms) is None:
        return None
    for m in _search(a, b, doms, lex_order=False, limit=1):
        return Homomorphism(m)
    return None


def enumerate_homs(a: Structure, b: Structure, limit: int = 10000):
    """All homomorphisms A -> B in lexicographic map order.

    Returns (homs, truncated); truncated is True when the limit cut the
    enumeration short, in which case homs holds exactly `limit` maps.
    """
    check_same_vocab(a, b)
    if limit < 1:
        raise ValidationError("limit must be >= 1")
    doms = _initial_domains(a, b)
    if doms is None:
        return [], False
    if _ac_pass(a, b, doms) is None:
        return [], False
    homs = []
    for m in _search(a, b, doms, lex_order=True, limit=limit + 1):
        homs.append(Homomorphism(m))
    if len(homs) > limit:
        return homs[:limit], True
    return homs, False


def hom_equivalent(a: Structure, b: Structure) -> bool:
    """Homomorphisms in both directions."""
    return find_hom(a, b) is not None and find_hom(b, a) is not None


def _induced(s: Structure, elements):
    """Induced substructure on sorted element list, reindexed from 0."""
    elements = sorted(elements)
    index = {old: new for new, old in enumerate(elements)}
    keep = set(elements)
    interps = {
        name: {tuple(index[x] for x in t) for t in s.tuples(name) if all(x in keep for x in t)}
        for name, _ in s.vocab.relations
    }
    labels = tuple(s.labels[v] for v in elements) if s.labels is not None else None
    consts = tuple(index[c] for c in s.constants)
    return Structure(s.vocab, len(elements), interps, consts, labels), index


def is_core(a: Structure) -> bool:
    """No endomorphism collapses two elements (equivalently: no proper retract)."""
    n = a.universe_size
    for u in range(n):
        for v in range(u + 1, n):
            for w in range(n):
                doms = _initial_domains(a, a, {u: w, v: w})
                if doms is None:
                    continue
                if _ac_pass(a, a, doms) is None:
                    continue
                for _ in _search(a, a, doms, lex_order=False, limit=1):
                    return False
    return True


def _find_proper_retract(s: Structure):
    """(subset, mapping) for a retraction onto a proper induced substructure."""
    n = s.universe_size
    consts = set(s.constants)
    for size in range(n - 1, 0, -1):
        for subset in itertools.combinations(range(n), size):
            if not consts.issubset(subset):
                continue
            doms = _initial_domains(s, s)
            if doms is None:
                continue
            mask = 0
            for v in subset:
                mask |= 1 << v
            for v in range(n):
                doms[v] = doms[v] & (1 << v) if v in subset else doms[v] & mask
            if any(d == 0 for d in doms):
                continue
            if _ac_pass(s, s, doms) is None:
                continue
            for m in _search(s, s, doms, lex_order=False, limit=1):
                return subset, m
    return None


def core_embedded(a: Structure):
    """(core, kept_elements, retraction) with everything in A's own indexing.

    kept_elements are the original indices surviving in the core (ascending;
    the core is their induced substructure reindexed), and retraction maps
    every original element onto kept_elements, fixing them pointwise.
    """
    keep = list(range(a.universe_size))
    retract = list(range(a.universe_size))
    current = a
    while True:
        found = _find_proper_retract(current)
        if found is None:
            break
        subset, m = found
        # compose the step retraction (current indexing) into original terms
        pos = {old: i for i, old in enumerate(keep)}
        retract = [keep[m[pos[r]]] for r in retract]
        keep = [keep[i] for i in subset]
        current, _ = _induced(a, keep)
    return current, tuple(keep), tuple(retract)


def core(a: Structure) -> Structure:
    """The unique-up-to-isomorphism minimal retract, as a fresh structure."""
    return core_embedded(a)[0]


_kcore_cache: dict = {}


def k_core_search(a: Structure, k: int, size_bound: int):
    """Smallest-universe core of tree-depth <= k equivalent to A at level k.

    Candidates are streamed by universe size then canonical form, so the first
    hit is the deterministic minimum.  Returns None when no candidate within
    size_bound qualifies — absence within the bound, not proof of nonexistence.
    """
    if k < 0 or size_bound < 1:
        raise ValidationError("k must be >= 0 and size_bound >= 1")
    key = (canonical_form(a), k, size_bound)
    if key in _kcore_cache:
        return _kcore_cache[key]
    from .enumeration import td_bounded_structures
    from .games import khom_equivalent

    result = None
    for c in td_bounded_structures(a.vocab, k, size_bound):
        if not is_core(c):
            continue
        if khom_equivalent(c, a, k):
            result = c
            break
    _kcore_cache[key] = result
    return result


# ---------------------------------------------------------------------------
# tree-depth

TREE_DEPTH_BOUND = 12


def tree_depth(a: Structure, bound: int = TREE_DEPTH_BOUND) -> int:
    """Exact Gaifman tree-depth via the removal recursion, memoized on subsets."""
    n = a.universe_size
    if n > bound:
        raise BoundExceededError(f"tree-depth bound {bound} exceeded (universe {n})")
    adj = gaifman_graph(a).adjacency
    memo: dict = {}

    def components(sub):
        seen = set()
        out = []
        for v in sorted(sub):
            if v in seen:
                continue
            comp = {v}
            queue = [v]
            while queue:
                x = queue.pop()
                for y in adj[x]:
                    if y in sub and y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def td(sub: frozenset) -> int:
        if len(sub) == 1:
            return 1
        if sub in memo:
            return memo[sub]
        comps = components(sub)
        if len(comps) > 1:
            val = max(td(c) for c in comps)
        else:
            val = 1 + min(td(sub - {v}) for v in sorted(sub))
        memo[sub] = val
        return val

    return td(frozenset(range(n)))


def anchored_tree_depth(a: Structure, bound: int = TREE_DEPTH_BOUND) -> int:
    """Tree-depth of the induced substructure on non-constant elements.

    Constants are freely available to every atom, so only the remaining
    elements cost quantifiers; this is the measure that aligns the candidate
    pools with quantifier rank.  Equals tree_depth for constant-free input;
    0 when every element is a constant.
    """
    n = a.universe_size
    if n > bound:
        raise BoundExceededError(f"tree-depth bound {bound} exceeded (universe {n})")
    consts = set(a.constants)
    free = [v for v in range(n) if v not in consts]
    if not free:
        return 0
    if not consts:
        return tree_depth(a, bound)
    adj = gaifman_graph(a).adjacency
    restricted = {v: set(adj[v]) - consts for v in free}
    memo: dict = {}

    def components(sub):
        seen = set()
        out = []
        for v in sorted(sub):
            if v in seen:
                continue
            comp = {v}
            queue = [v]
            while queue:
                x = queue.pop()
                for y in restricted[x]:
                    if y in sub and y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def td(sub: frozenset) -> int:
        if len(sub) == 1:
            return 1
        if sub in memo:
            return memo[sub]
        comps = components(sub)
        if len(comps) > 1:
            val = max(td(c) for c in comps)
        else:
            val = 1 + min(td(sub - {v}) for v in sorted(sub))
        memo[sub] = val
        return val

    return max(td(c) for c in components(frozenset(free)))


def elimination_forest(a: Structure, bound: int = TREE_DEPTH_BOUND):
    """A minimum-height elimination forest as a parent array (-1 for roots).

    Every Gaifman edge joins an ancestor/descendant pair; the forest height
    (in vertices) equals tree_depth(a).  Deterministic: ties pick the lowest
    vertex.
    """
    n = a.universe_size
    if n > bound:
        raise BoundExceededError(f"tree-depth bound {bound} exceeded (universe {n})")
    adj = gaifman_graph(a).adjacency
    memo: dict = {}

    def components(sub):
        seen = set()
        out = []
        for v in sorted(sub):
            if v in seen:
                continue
            comp = {v}
            queue = [v]
            while queue:
                x = queue.pop()
                for y in adj[x]:
                    if y in sub and y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def td(sub: frozenset) -> int:
        if len(sub) == 1:
            return 1
        if sub in memo:
            return memo[sub]
        comps = components(sub)
        if len(comps) > 1:
            val = max(td(c) for c in comps)
        else:
            val = 1 + min(td(sub - {v}) for v in sorted(sub))
        memo[sub] = val
        return val

    parent = [-1] * n

    def build(sub: frozenset, above: int):
        comps = components(sub)
        for comp in comps:
            if len(comp) == 1:
                (v,) = comp
                parent[v] = above
                continue
            best = min(sorted(comp), key=lambda v: td(comp - {v}))
            parent[best] = above
            build(comp - {best}, best)

    build(frozenset(range(n)), -1)
    return parent


def forest_height(parent) -> int:
    depth = [0] * len(parent)

    def d(v):
        if depth[v]:
            return depth[v]
        depth[v] = 1 if parent[v] < 0 else d(parent[v]) + 1
        return depth[v]

    return max((d(v) for v in range(len(parent))), default=0)
