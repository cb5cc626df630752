"""Structure enumeration.

Two streams with different contracts:

* `td_bounded_structures` — faithful: exactly one representative per
  isomorphism class under the rank bound, obtained by labeled enumeration
  plus canonical-form deduplication.  Exponential in the worst way; guarded
  by an explicit raw-count cap rather than a silent hang.

* `fast_candidates` — the pruned pool behind the agreement oracle,
  restricted to the shapes that carry all separating power (homomorphism
  existence factors through connected components, folds, and cores).  Pool
  members need not be cores: a member hom-equivalent to a smaller one is a
  harmless redundant test.  Exhaustiveness of the pruning is cross-checked
  against the faithful stream in tests.

Both streams filter by the rank that matches quantifier cost: tree-depth of
the non-constant part (`anchored_tree_depth`), which is plain Gaifman
tree-depth for constant-free structures.  A structure whose every edge runs
through a constant is rank 1 no matter how large its ball looks, because its
atoms can name the constant directly.

The pool is assembled per exact size by whichever route is cheapest there:
filtering the cached faithful classes for constant-free vocabularies, a
free-part-times-constant-decoration product for anchored ones, and
decorated elimination trees past the affordability caps.  The routes
produce different (all valid) supersets of the load-bearing shapes; the
pool's contract is only that every member has rank <= k and that the
separating shapes are all present.

The decoration route additionally publishes its grouping (one group per
free part, with the constant wirings listed per group) so the agreement
oracle can test a whole group against a target from one homomorphism
enumeration instead of one search per pool member.
"""

from __future__ import annotations

import itertools

from .errors import BoundExceededError, ValidationError
from .hom import anchored_tree_depth, is_core
from .structures import (
    Structure,
    Vocabulary,
    canonical_form,
    gaifman_graph,
)

RAW_ENUMERATION_CAP = 1 << 22
FAST_SIZE_CAP = 7

_class_cache: dict = {}
_fast_cache: dict = {}
_group_cache: dict = {}
_subtree_cache: dict = {}
_comp_cache: dict = {}


def _labeled_count(vocab: Vocabulary, size: int) -> int:
    total = 1
    for _, arity in vocab.relations:
        total *= 2 ** (size**arity)
        if total > RAW_ENUMERATION_CAP:
            return total
    return total * size**vocab.constant_count


def iso_classes(vocab: Vocabulary, size: int):
    """All isomorphism classes at exactly this universe size, as a tuple of
    (canonical form, representative, rank) sorted by canonical form, where
    rank is the tree-depth of the non-constant part."""
    if size < 1:
        raise ValidationError("size must be >= 1")
    key = (vocab.key(), size)
    cached = _class_cache.get(key)
    if cached is not None:
        return cached
    count = _labeled_count(vocab, size)
    if count > RAW_ENUMERATION_CAP:
        raise BoundExceededError(
            f"faithful enumeration at size {size} over {vocab.key()} spans "
            f"{count} labeled structures (cap {RAW_ENUMERATION_CAP})"
        )
    per_rel = [
        (name, sorted(itertools.product(range(size), repeat=arity)))
        for name, arity in vocab.relations
    ]
    const_choices = list(itertools.product(range(size), repeat=vocab.constant_count))
    reps: dict = {}
    for masks in itertools.product(*[range(1 << len(t)) for _, t in per_rel]):
        interps = {
            name: {tuples[i] for i in range(len(tuples)) if mask >> i & 1}
            for (name, tuples), mask in zip(per_rel, masks)
        }
        for consts in const_choices:
            s = Structure(vocab, size, interps, consts)
            c = canonical_form(s)
            if c not in reps:
                reps[c] = s
    out = tuple(
        sorted(
            ((c, s, anchored_tree_depth(s)) for c, s in reps.items()),
            key=lambda e: e[0],
        )
    )
    _class_cache[key] = out
    return out


def td_bounded_structures(vocab: Vocabulary, k: int, size_bound: int):
    """One representative per isomorphism class of rank <= k (tree-depth of
    the non-constant part) and universe <= size_bound; sizes ascending,
    canonical order within a size."""
    if k < 0:
        raise ValidationError("k must be >= 0")
    if size_bound < 1:
        raise ValidationError("size_bound must be >= 1")
    for size in range(1, size_bound + 1):
        for _, s, rank in iso_classes(vocab, size):
            if rank <= k:
                yield s


# ---------------------------------------------------------------------------
# pruned candidate pool


def fast_candidates_supported(vocab: Vocabulary) -> bool:
    """The pool builders handle arity <= 2 and at most one constant."""
    return vocab.constant_count <= 1 and all(a <= 2 for _, a in vocab.relations)


def fast_candidates(vocab: Vocabulary, k: int, size_bound: int) -> list[Structure]:
    """Candidate pool for the agreement oracle, sizes ascending.

    Every member has rank <= k and universe <= size_bound; the pool contains
    (up to hom-equivalence) every connected core in that range, and with one
    constant also every core whose components each touch the constant and
    every core of the shape "connected part plus isolated constant"."""
    if size_bound < 1:
        raise ValidationError("size_bound must be >= 1")
    out: list[Structure] = []
    for size in range(1, size_bound + 1):
        out.extend(candidate_block(vocab, k, size))
    return out


def _parts_route(vocab: Vocabulary, size: int) -> bool:
    return (
        vocab.constant_count == 1
        and size >= 2
        and _labeled_count(vocab.with_constants(0), size - 1) <= RAW_ENUMERATION_CAP
    )


def candidate_block(vocab: Vocabulary, k: int, size: int) -> tuple[Structure, ...]:
    """Cached pool slice at exactly `size`, in a deterministic order."""
    if not fast_candidates_supported(vocab):
        raise ValidationError(
            f"candidate generation unsupported for {vocab.key()}; "
            "use the faithful stream"
        )
    if size > FAST_SIZE_CAP:
        raise BoundExceededError(f"candidate generation capped at size {FAST_SIZE_CAP}")
    if k < 0:
        raise ValidationError("k must be >= 0")
    key = (vocab.key(), k, size)
    cached = _fast_cache.get(key)
    if cached is not None:
        return cached
    if _parts_route(vocab, size):
        groups = candidate_groups(vocab, k, size)
        block = tuple(s for _, emitted in groups for _, _, s in emitted)
    elif _labeled_count(vocab, size) <= RAW_ENUMERATION_CAP:
        block = _class_filter_block(vocab, k, size)
    else:
        block = _tree_block(vocab, k, size)
    _fast_cache[key] = block
    return block


def candidate_groups(vocab: Vocabulary, k: int, size: int):
    """Decoration grouping of the pool slice at `size`, or None.

    When the slice is built by the free-part-times-decoration route this
    returns a tuple of (free_part, emitted) groups, where emitted is a tuple
    of (cbits, svec, structure) in generation order and the concatenation of
    the groups' structures is exactly `candidate_block(vocab, k, size)` in
    order.  cbits packs the constant's unary memberships and loops; svec
    packs, per free vertex, two direction bits per binary relation toward
    the constant.  Slices built by other routes return None.
    """
    if not fast_candidates_supported(vocab):
        raise ValidationError(
            f"candidate generation unsupported for {vocab.key()}; "
            "use the faithful stream"
        )
    if size > FAST_SIZE_CAP or k < 0 or not _parts_route(vocab, size):
        return None
    key = (vocab.key(), k, size)
    cached = _group_cache.get(key)
    if cached is None:
        cached = _anchored_parts_groups(vocab, k, size)
        _group_cache[key] = cached
    return cached


def _connected(s: Structure) -> bool:
    adj = gaifman_graph(s).adjacency
    seen = {0}
    queue = [0]
    while queue:
        x = queue.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == s.universe_size


def _class_filter_block(vocab: Vocabulary, k: int, size: int):
    # keep connected cores only (a disconnected constant-free separator
    # separates through one of its components; an anchored slice built here
    # is the single-element one, where connectedness is vacuous)
    out = []
    for _, s, rank in iso_classes(vocab, size):
        if rank > k:
            continue
        if vocab.constant_count == 0 and not _connected(s):
            continue
        if is_core(s):
            out.append(s)
    return tuple(out)


def _automorphisms(f: Structure) -> list[tuple[int, ...]]:
    n = f.universe_size
    rels = [f.tuples(name) for name, _ in f.vocab.relations]
    auts = []
    for perm in itertools.permutations(range(n)):
        if all(
            tuple(perm[x] for x in t) in tuples for tuples in rels for t in tuples
        ):
            auts.append(perm)
    return auts


def _anchored_parts_groups(vocab: Vocabulary, k: int, size: int):
    """Anchored pool slice as (free part) x (constant decorations).

    Any core whose components all touch its constant is some constant-free
    structure F on the other elements plus edge states between the constant
    and each F element; enumerating F per isomorphism class loses nothing
    because the decoration pullback along an isomorphism is enumerated too.
    Decorations equivalent under an automorphism of F give isomorphic
    structures, so only the orbit minimum is kept.  One-step folds are
    pruned; deeper collapses are left in as harmless redundant pool members.
    """
    base = vocab.with_constants(0)
    unaries = [n for n, a in vocab.relations if a == 1]
    binaries = [n for n, a in vocab.relations if a == 2]
    nun, nbin = len(unaries), len(binaries)
    width = 2 * nbin
    nf = size - 1
    cvert = nf
    classes = iso_classes(base, nf)
    eligible = [(s, rank) for _, s, rank in classes if rank <= k]
    combos = len(eligible) * (1 << (nun + nbin)) * (1 << (width * nf))
    if combos > RAW_ENUMERATION_CAP:
        raise BoundExceededError(
            f"anchored pool at size {size} spans {combos} decorated parts "
            f"(cap {RAW_ENUMERATION_CAP})"
        )

    groups = []
    for f, rank in eligible:
        ftuples = {name: f.tuples(name) for name, _ in base.relations}
        fadj = gaifman_graph(f).adjacency
        comps = []
        left = set(range(nf))
        while left:
            v = left.pop()
            comp = {v}
            queue = [v]
            while queue:
                x = queue.pop()
                for y in fadj[x]:
                    if y not in comp:
                        comp.add(y)
                        queue.append(y)
            left -= comp
            comps.append(sorted(comp))
        # fmat[u][w]: u's internal tuples survive the collapse u -> w
        fmat = [[False] * nf for _ in range(nf)]
        utuples: list[list[tuple[str, tuple]]] = [[] for _ in range(nf)]
        for name, tuples in ftuples.items():
            for t in tuples:
                for u in set(t):
                    utuples[u].append((name, t))
        for u in range(nf):
            for w in range(nf):
                if w == u:
                    continue
                fmat[u][w] = all(
                    tuple(w if c == u else c for c in t) in ftuples[name]
                    for name, t in utuples[u]
                )
        free_fold = any(fmat[u][w] for u in range(nf) for w in range(nf) if u != w)
        uloops = [0] * nf  # unary+loop bit profile per free vertex
        for ui, uname in enumerate(unaries):
            for (v,) in ftuples[uname]:
                uloops[v] |= 1 << ui
        for bi, bname in enumerate(binaries):
            for x, y in ftuples[bname]:
                if x == y:
                    uloops[x] |= 1 << (nun + bi)
        outs = [[[] for _ in range(nf)] for _ in range(nbin)]
        ins = [[[] for _ in range(nf)] for _ in range(nbin)]
        for bi, bname in enumerate(binaries):
            for x, y in ftuples[bname]:
                if x != y:
                    outs[bi][x].append(y)
                    ins[bi][y].append(x)
        # inverse of each nonidentity automorphism: relabeling a decoration
        # along an automorphism gives an isomorphic structure, so only the
        # orbit-minimal decoration is emitted
        ainvs = []
        for a in _automorphisms(f):
            inv = [0] * nf
            for i, x in enumerate(a):
                inv[x] = i
            inv = tuple(inv)
            if inv != tuple(range(nf)):
                ainvs.append(inv)

        emitted = []

        def emit(cbits, svec):
            interps = {name: set(tuples) for name, tuples in ftuples.items()}
            for ui, uname in enumerate(unaries):
                if cbits >> ui & 1:
                    interps[uname].add((cvert,))
            for bi, bname in enumerate(binaries):
                if cbits >> (nun + bi) & 1:
                    interps[bname].add((cvert, cvert))
                for v in range(nf):
                    st = svec[v] >> (2 * bi) & 3
                    if st & 1:
                        interps[bname].add((cvert, v))
                    if st & 2:
                        interps[bname].add((v, cvert))
            packed = sum(svec[v] << (width * v) for v in range(nf))
            emitted.append((cbits, packed, Structure(vocab, size, interps, (cvert,))))

        # isolated constant beside a connected one-step-irreducible part
        if _connected(f) and not free_fold:
            emit(0, (0,) * nf)

        # constant wired into the free part; svec[v] packs per-binary
        # direction bits toward the constant (bit0: c->v, bit1: v->c),
        # cbits packs the constant's own unary memberships and loops
        for cbits in range(1 << (nun + nbin)):
            for svec in itertools.product(range(1 << width), repeat=nf):
                # every free component must touch the constant
                if any(all(svec[v] == 0 for v in comp) for comp in comps):
                    continue
                if ainvs and any(
                    tuple(svec[inv[v]] for v in range(nf)) < svec for inv in ainvs
                ):
                    continue
                if _parts_fold(nf, nun, nbin, cbits, svec, fmat, uloops, outs, ins):
                    continue
                emit(cbits, svec)

        if emitted:
            groups.append((f, tuple(emitted)))

    return tuple(groups)


def _parts_fold(nf, nun, nbin, cbits, svec, fmat, uloops, outs, ins):
    # does some free vertex collapse onto another free vertex or the constant?
    for u in range(nf):
        for w in range(nf):
            if w == u or not fmat[u][w]:
                continue
            if svec[u] & ~svec[w] == 0 and uloops[u] & ~uloops[w] == 0:
                return True
        # collapse u onto the constant: u's unaries and loops must hold at
        # the constant, u's internal edges must be matched by constant
        # edges, and u's own constant edges force a constant loop
        if uloops[u] & ~cbits != 0:
            continue
        ok = True
        for bi in range(nbin):
            st = svec[u] >> (2 * bi) & 3
            if st and not cbits >> (nun + bi) & 1:
                ok = False
                break
            for y in outs[bi][u]:
                if not svec[y] >> (2 * bi) & 1:
                    ok = False
                    break
            if not ok:
                break
            for x in ins[bi][u]:
                if not svec[x] >> (2 * bi) & 2:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


# ---------------------------------------------------------------------------
# decorated elimination trees (constant-free pools and oversize fallback)


def _tree_block(vocab: Vocabulary, k: int, size: int):
    unaries = [n for n, a in vocab.relations if a == 1]
    binaries = [n for n, a in vocab.relations if a == 2]
    nun, nbin = len(unaries), len(binaries)
    bit_opts = range(1 << (nun + nbin))
    state_opts = range(1 << (2 * nbin))
    anchored = vocab.constant_count == 1
    vkey = vocab.key()

    # node record: (depth, parent index within the tree, bits, ancestor
    # states).  Ancestor states are indexed by absolute depth; entry j is a
    # packed pair of direction bits per binary relation toward the ancestor
    # at depth j.

    def realize(nodes, offset=0):
        interps: dict = {name: set() for name, _ in vocab.relations}
        for li, (d, p, bits, astates) in enumerate(nodes):
            gi = offset + li
            anc = []
            x = p
            while x != -1:
                anc.append(offset + x)
                x = nodes[x][1]
            anc.reverse()
            for ui, uname in enumerate(unaries):
                if bits >> ui & 1:
                    interps[uname].add((gi,))
            for bi, bname in enumerate(binaries):
                if bits >> (nun + bi) & 1:
                    interps[bname].add((gi, gi))
            for ai, packed in enumerate(astates):
                u = ai if ai < offset else anc[ai - offset]
                for bi, bname in enumerate(binaries):
                    st = packed >> (2 * bi) & 3
                    if st & 1:
                        interps[bname].add((u, gi))
                    if st & 2:
                        interps[bname].add((gi, u))
        return interps

    def fold_exists(interps, movable, n):
        # is some movable vertex dominated — collapsible onto another vertex
        # with every incident tuple still present?  Tested on known tuples
        # only, so a positive is final even on a partially built tree.
        for u in movable:
            for w in range(n):
                if w == u:
                    continue
                ok = True
                for name, _ in vocab.relations:
                    rel = interps[name]
                    for t in rel:
                        if u in t:
                            if tuple(w if c == u else c for c in t) not in rel:
                                ok = False
                                break
                    if not ok:
                        break
                if ok:
                    return True
        return False

    def subtrees(budget: int, t: int, m: int):
        mkey = (vkey, budget, t, m)
        got = _subtree_cache.get(mkey)
        if got is not None:
            return got
        out = []
        if t < budget and m >= 1:
            for bits in bit_opts:
                for astates in itertools.product(state_opts, repeat=t):
                    root = (t, -1, bits, astates)
                    if m == 1:
                        # a leaf with no edge to its parent re-hangs under
                        # its deepest edged ancestor, so it is enumerated
                        # there already
                        if t > 0 and astates[-1] == 0:
                            continue
                        out.append(((1, bits, astates, ()), (root,)))
                        continue
                    for combo in compositions(budget, t + 1, m - 1):
                        nodes = [root]
                        ckeys = []
                        for ckey, cnodes in combo:
                            base = len(nodes)
                            for (d, p, b, a) in cnodes:
                                nodes.append(
                                    (d, 0 if p == -1 else p + base, b, a)
                                )
                            ckeys.append(ckey)
                        nodes = tuple(nodes)
                        # subtree vertices have all their incident tuples
                        # known once the subtree closes, so folds among them
                        # are final; outer ancestors are placeholders
                        interps = realize(nodes, offset=t)
                        if fold_exists(interps, range(t, t + m), t + m):
                            continue
                        out.append(((m, bits, astates, tuple(ckeys)), nodes))
        _subtree_cache[mkey] = out
        return out

    def compositions(budget: int, t: int, rem: int):
        # child lists with strictly increasing keys (identical decorated
        # sibling subtrees admit a collapsing endomorphism, so no core needs
        # them; distinct siblings in one fixed order avoid double counting)
        ckey = (vkey, budget, t, rem)
        got = _comp_cache.get(ckey)
        if got is not None:
            return got
        pool = []
        for sz in range(1, rem + 1):
            pool.extend(subtrees(budget, t, sz))
        pool.sort(key=lambda e: e[0])
        results: list = []

        def rec(start, remaining, acc):
            if remaining == 0:
                results.append(tuple(acc))
                return
            for i in range(start, len(pool)):
                sz = pool[i][0][0]
                if sz > remaining:
                    continue
                acc.append(pool[i])
                rec(i + 1, remaining - sz, acc)
                acc.pop()

        rec(0, rem, [])
        _comp_cache[ckey] = results
        return results

    def full_trees(budget: int, tsize: int):
        if budget < 1 or tsize < 1:
            return
        for bits in bit_opts:
            root = (0, -1, bits, ())
            if tsize == 1:
                yield realize((root,))
                continue
            for combo in compositions(budget, 1, tsize - 1):
                nodes = [root]
                for _, cnodes in combo:
                    base = len(nodes)
                    for (d, p, b, a) in cnodes:
                        nodes.append((d, 0 if p == -1 else p + base, b, a))
                yield realize(tuple(nodes))

    def connected(n, interps):
        adj = [set() for _ in range(n)]
        for tuples in interps.values():
            for t in tuples:
                for x in t:
                    for y in t:
                        if x != y:
                            adj[x].add(y)
        seen = {0}
        queue = [0]
        while queue:
            x = queue.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == n

    found: dict = {}

    def consider(s: Structure):
        c = canonical_form(s)
        if c not in found and is_core(s):
            found[c] = s

    if anchored:
        # constant-rooted: an elimination tree rooted at the constant may
        # spend height k+1 in total, the constant itself costing nothing
        for interps in full_trees(k + 1, size):
            if not connected(size, interps):
                continue
            if fold_exists(interps, range(1, size), size):
                continue
            consider(Structure(vocab, size, interps, (0,)))
        # isolated constant beside a connected constant-free part
        for interps in full_trees(k, size - 1):
            if not connected(size - 1, interps):
                continue
            if fold_exists(interps, range(size - 1), size - 1):
                continue
            consider(Structure(vocab, size, interps, (size - 1,)))
    else:
        for interps in full_trees(k, size):
            if not connected(size, interps):
                continue
            if fold_exists(interps, range(size), size):
                continue
            consider(Structure(vocab, size, interps, ()))

    return tuple(s for _, s in sorted(found.items(), key=lambda e: e[0]))
