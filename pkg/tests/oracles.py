"""Independent brute-force oracles used to cross-check the package.

Everything here is deliberately naive: exhaustive map enumeration,
permutation searches, and direct recursion with no memoization, sharing no
code with the implementations under test beyond the data types themselves.
"""

from __future__ import annotations

import itertools
import math

from fmlocal import Structure, gaifman_graph
from fmlocal.logic import And, Atom, Const, Eq, Exists, Forall, Not, Or, Var


# ---------------------------------------------------------------------------
# homomorphisms and isomorphisms by exhaustive map enumeration


def _map_preserves(a: Structure, b: Structure, mapping) -> bool:
    for i, c in enumerate(a.constants):
        if mapping[c] != b.constants[i]:
            return False
    for name, _ in a.vocab.relations:
        target = b.tuples(name)
        for t in a.tuples(name):
            if tuple(mapping[x] for x in t) not in target:
                return False
    return True


def all_homs_brute(a: Structure, b: Structure) -> list[tuple[int, ...]]:
    """Every homomorphism mapping, by checking all |B|^|A| maps."""
    out = []
    for mapping in itertools.product(range(b.universe_size), repeat=a.universe_size):
        if _map_preserves(a, b, mapping):
            out.append(mapping)
    return out


def has_hom_brute(a: Structure, b: Structure) -> bool:
    return any(
        _map_preserves(a, b, mapping)
        for mapping in itertools.product(
            range(b.universe_size), repeat=a.universe_size
        )
    )


def iso_brute(a: Structure, b: Structure):
    """An isomorphism mapping found by trying all bijections, or None."""
    if a.universe_size != b.universe_size:
        return None
    n = a.universe_size
    for perm in itertools.permutations(range(n)):
        if not _map_preserves(a, b, perm):
            continue
        inverse = [0] * n
        for i, p in enumerate(perm):
            inverse[p] = i
        if _map_preserves(b, a, tuple(inverse)):
            return perm
    return None


# ---------------------------------------------------------------------------
# first-order evaluation by structural recursion


def eval_brute(phi, s: Structure, env: dict | None = None) -> bool:
    """Naive evaluator: environments as dicts, quantifiers as loops."""
    env = dict(env or {})

    def term_value(t, env):
        if isinstance(t, Const):
            return s.constants[t.index]
        return env[t.name]

    def rec(phi, env):
        if isinstance(phi, Atom):
            values = tuple(term_value(t, env) for t in phi.terms)
            return values in s.tuples(phi.relation)
        if isinstance(phi, Eq):
            return term_value(phi.left, env) == term_value(phi.right, env)
        if isinstance(phi, Not):
            return not rec(phi.body, env)
        if isinstance(phi, And):
            return all(rec(p, env) for p in phi.parts)
        if isinstance(phi, Or):
            return any(rec(p, env) for p in phi.parts)
        if isinstance(phi, Exists):
            return any(
                rec(phi.body, {**env, phi.var: v})
                for v in range(s.universe_size)
            )
        if isinstance(phi, Forall):
            return all(
                rec(phi.body, {**env, phi.var: v})
                for v in range(s.universe_size)
            )
        raise TypeError(f"unknown formula node {phi!r}")

    return rec(phi, env)


# ---------------------------------------------------------------------------
# the back-and-forth game by direct unmemoized recursion


def ef_brute(a: Structure, a_tuple, b: Structure, b_tuple, k: int) -> bool:
    """Responder wins the k-round back-and-forth game from the position
    pairing the constants and the designated tuples."""
    base_a = tuple(a.constants) + tuple(a_tuple)
    base_b = tuple(b.constants) + tuple(b_tuple)

    def partial_iso(sa, sb) -> bool:
        fwd: dict = {}
        bwd: dict = {}
        for x, y in zip(sa, sb):
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
        chosen = list(fwd)
        for name, arity in a.vocab.relations:
            ta, tb = a.tuples(name), b.tuples(name)
            for combo in itertools.product(chosen, repeat=arity):
                if (combo in ta) != (tuple(fwd[c] for c in combo) in tb):
                    return False
        return True

    def win(sa, sb, rounds) -> bool:
        if not partial_iso(sa, sb):
            return False
        if rounds == 0:
            return True
        for x in range(a.universe_size):
            if not any(
                win(sa + (x,), sb + (y,), rounds - 1)
                for y in range(b.universe_size)
            ):
                return False
        for y in range(b.universe_size):
            if not any(
                win(sa + (x,), sb + (y,), rounds - 1)
                for x in range(a.universe_size)
            ):
                return False
        return True

    return win(base_a, base_b, k)


# ---------------------------------------------------------------------------
# tree-depth by exhaustive elimination-order search


def tree_depth_brute(s: Structure) -> int:
    """Minimum forest height over every elimination order: each order roots
    every component at its earliest listed vertex and recurses."""
    n = s.universe_size
    adj = [set() for _ in range(n)]
    for u, v in gaifman_graph(s).edges:
        adj[u].add(v)
        adj[v].add(u)

    def components(sub):
        seen = set()
        out = []
        for v in sub:
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in sub and y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    best = math.inf
    for perm in itertools.permutations(range(n)):
        position = {v: i for i, v in enumerate(perm)}

        def height(sub):
            result = 0
            for comp in components(sub):
                root = min(comp, key=position.__getitem__)
                rest = comp - {root}
                result = max(result, 1 + (height(rest) if rest else 0))
            return result

        best = min(best, height(frozenset(range(n))))
    return best


# ---------------------------------------------------------------------------
# matched equivalence by factorial bijection search


def d_equivalent_brute(a, a_tuple, b, b_tuple, d, kind):
    """First bijection (in lexicographic order) under which every
    single-element extension pair has equivalent d-neighborhoods."""
    from fmlocal import neighborhoods_equivalent

    if a.universe_size != b.universe_size:
        return None
    n = a.universe_size
    a_tuple, b_tuple = tuple(a_tuple), tuple(b_tuple)
    for perm in itertools.permutations(range(n)):
        if all(
            neighborhoods_equivalent(
                a, a_tuple + (x,), b, b_tuple + (perm[x],), d, kind
            )
            for x in range(n)
        ):
            return perm
    return None


# ---------------------------------------------------------------------------
# counting isomorphism classes without enumerating them


def iso_class_count(n: int) -> int:
    """Number of isomorphism classes of one-binary-relation structures on n
    labeled elements, via orbit counting over the permutation action on
    ordered pairs (loops included)."""
    total = 0
    perms = list(itertools.permutations(range(n)))
    for perm in perms:
        pairs = [(i, j) for i in range(n) for j in range(n)]
        seen = set()
        cycles = 0
        for p in pairs:
            if p in seen:
                continue
            cycles += 1
            q = p
            while True:
                q = (perm[q[0]], perm[q[1]])
                seen.add(q)
                if q == p:
                    break
        total += 2 ** cycles
    return total // len(perms)


def symmetric_class_count(n: int) -> int:
    """Isomorphism classes of loop-free symmetric adjacency on n elements
    (orbit counting over unordered pairs)."""
    total = 0
    perms = list(itertools.permutations(range(n)))
    for perm in perms:
        pairs = [
            frozenset((i, j)) for i in range(n) for j in range(i + 1, n)
        ]
        seen = set()
        cycles = 0
        for p in pairs:
            if p in seen:
                continue
            cycles += 1
            q = p
            while True:
                i, j = tuple(q)
                q = frozenset((perm[i], perm[j]))
                seen.add(q)
                if q == p:
                    break
        total += 2 ** cycles
    return total // len(perms)
