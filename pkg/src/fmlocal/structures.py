"""Finite relational structures over purely relational vocabularies.

A structure has a non-empty universe ``{0, .., n-1}``, one finite set of tuples
per relation symbol, and an optional list of distinguished constants (realized
positionally: the i-th constant is an element index).  The module provides the
Gaifman graph, shortest-path distance, induced r-neighborhoods with appended
anchor constants, isomorphism testing with witnesses, a permutation-based
canonical form, the line-oriented file format, and standard generators.
"""

from __future__ import annotations

import itertools
import math
import random as _random
import re
from collections import deque
from dataclasses import dataclass
from types import MappingProxyType

from .errors import (
    BoundExceededError,
    StructureParseError,
    ValidationError,
    VocabularyMismatchError,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TUPLE_RE = re.compile(r"\((\d+(?:,\d+)*)\)\Z")

DEFAULT_CANONICAL_BOUND = 10


@dataclass(frozen=True)
class Vocabulary:
    """An ordered list of (name, arity) relation symbols plus a constant count."""

    relations: tuple[tuple[str, int], ...]
    constant_count: int = 0

    def __post_init__(self):
        rels = tuple((str(n), int(a)) for n, a in self.relations)
        object.__setattr__(self, "relations", rels)
        names = [n for n, _ in rels]
        for n in names:
            if not _IDENT_RE.match(n):
                raise ValidationError(f"relation name {n!r} is not an identifier")
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation name")
        for n, a in rels:
            if a < 1:
                raise ValidationError(f"relation {n} has arity {a}; arity must be >= 1")
        if self.constant_count < 0:
            raise ValidationError("constant_count must be >= 0")

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    def max_arity(self) -> int:
        return max((a for _, a in self.relations), default=0)

    def key(self) -> str:
        """Stable one-line identity used in canonical byte strings."""
        rels = ",".join(f"{n}/{a}" for n, a in self.relations)
        return f"{rels};c={self.constant_count}"

    def with_constants(self, count: int) -> "Vocabulary":
        return Vocabulary(self.relations, count)


class Structure:
    """A finite structure: universe size, relation interpretations, constants.

    Instances are immutable by convention; all derived data (Gaifman graph,
    canonical form, hom-search tables) is cached lazily and never escapes as
    mutable state.
    """

    __slots__ = (
        "vocab",
        "universe_size",
        "labels",
        "constants",
        "_interps",
        "_canon",
        "_gaifman",
        "_hash",
        "_homtables",
    )

    def __init__(self, vocab, universe_size, interpretations, constants=(), labels=None):
        if not isinstance(vocab, Vocabulary):
            raise ValidationError("vocab must be a Vocabulary")
        n = int(universe_size)
        if n < 1:
            raise ValidationError("universe_size must be a positive integer")
        interps = {}
        names = set(vocab.relation_names)
        for name in interpretations:
            if name not in names:
                raise ValidationError(f"interpretation for unknown relation {name!r}")
        for name, arity in vocab.relations:
            tuples = frozenset(tuple(int(x) for x in t) for t in interpretations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValidationError(
                        f"tuple {t} in {name} has length {len(t)}; arity is {arity}"
                    )
                for x in t:
                    if not 0 <= x < n:
                        raise ValidationError(f"element {x} in {name} outside universe of size {n}")
            interps[name] = tuples
        consts = tuple(int(c) for c in constants)
        if len(consts) != vocab.constant_count:
            raise ValidationError(
                f"expected {vocab.constant_count} constants, got {len(consts)}"
            )
        for c in consts:
            if not 0 <= c < n:
                raise ValidationError(f"constant {c} outside universe of size {n}")
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise ValidationError("labels length must equal universe_size")
            for lab in labels:
                if not lab or any(ch.isspace() for ch in lab) or "#" in lab:
                    raise ValidationError(f"label {lab!r} must be non-empty, without spaces or '#'")
        self.vocab = vocab
        self.universe_size = n
        self.labels = labels
        self.constants = consts
        self._interps = interps
        self._canon = None
        self._gaifman = None
        self._hash = None
        self._homtables = None

    @property
    def interpretations(self):
        return MappingProxyType(self._interps)

    def tuples(self, name: str) -> frozenset:
        return self._interps[name]

    def all_tuples(self):
        """Yield (relation, tuple) pairs in declared relation order, sorted tuples."""
        for name, _ in self.vocab.relations:
            for t in sorted(self._interps[name]):
                yield name, t

    def _key(self):
        return (
            self.vocab,
            self.universe_size,
            tuple(self._interps[n] for n in self.vocab.relation_names),
            self.constants,
            self.labels,
        )

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        rels = ", ".join(
            f"{n}:{len(self._interps[n])}" for n in self.vocab.relation_names
        )
        return f"Structure(|U|={self.universe_size}, {rels}, consts={self.constants})"


class GaifmanGraph:
    """Simple undirected graph on a structure's universe; no self-loops."""

    __slots__ = ("vertex_count", "edges", "_adj")

    def __init__(self, vertex_count: int, edges):
        if vertex_count < 1:
            raise ValidationError("vertex_count must be positive")
        norm = set()
        for e in edges:
            a, b = e
            if a == b:
                raise ValidationError("Gaifman graph edges must join distinct elements")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise ValidationError("edge endpoint outside vertex range")
            norm.add((min(a, b), max(a, b)))
        self.vertex_count = vertex_count
        self.edges = frozenset(norm)
        self._adj = None

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        if self._adj is None:
            adj = [[] for _ in range(self.vertex_count)]
            for a, b in sorted(self.edges):
                adj[a].append(b)
                adj[b].append(a)
            self._adj = tuple(tuple(sorted(x)) for x in adj)
        return self._adj

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def __eq__(self, other):
        if not isinstance(other, GaifmanGraph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertex_count, self.edges))


@dataclass(frozen=True)
class Isomorphism:
    """A bijection witnessing isomorphism; mapping[i] is the image of element i."""

    mapping: tuple[int, ...]

    def apply(self, x: int) -> int:
        return self.mapping[x]

    def inverse(self) -> "Isomorphism":
        inv = [0] * len(self.mapping)
        for i, v in enumerate(self.mapping):
            inv[v] = i
        return Isomorphism(tuple(inv))


def check_same_vocab(a: Structure, b: Structure) -> None:
    if a.vocab != b.vocab:
        raise VocabularyMismatchError(
            f"vocabularies differ: {a.vocab.key()} vs {b.vocab.key()}"
        )


def gaifman_graph(s: Structure) -> GaifmanGraph:
    """Edges join distinct elements co-occurring in some tuple."""
    if s._gaifman is None:
        edges = set()
        for _, t in s.all_tuples():
            distinct = sorted(set(t))
            for i in range(len(distinct)):
                for j in range(i + 1, len(distinct)):
                    edges.add((distinct[i], distinct[j]))
        s._gaifman = GaifmanGraph(s.universe_size, edges)
    return s._gaifman


def distances_from(g: GaifmanGraph, sources) -> list:
    """Multi-source BFS distances; unreachable vertices get math.inf."""
    dist = [math.inf] * g.vertex_count
    q = deque()
    for v in sources:
        if not 0 <= v < g.vertex_count:
            raise ValidationError(f"source {v} outside vertex range")
        if dist[v] != 0:
            dist[v] = 0
            q.append(v)
    adj = g.adjacency
    while q:
        v = q.popleft()
        for w in adj[v]:
            if dist[w] == math.inf:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def distance(g: GaifmanGraph, source, target: int):
    """d(source-tuple, target): the least distance from any source element.

    d(a, a) = 0; math.inf when target is in no common component with the sources.
    """
    if not 0 <= target < g.vertex_count:
        raise ValidationError(f"target {target} outside vertex range")
    return distances_from(g, tuple(source))[target]


def neighborhood_embedded(s: Structure, anchor, r: int):
    """Induced r-neighborhood of the anchor tuple, plus the element embedding.

    Returns (structure, embedding) where embedding[i] is the original index of
    the i-th element of the result.  The result's vocabulary appends one
    constant per anchor component.  An empty anchor returns the structure
    itself (radius ignored).
    """
    anchor = tuple(int(a) for a in anchor)
    if r < 0:
        raise ValidationError("radius must be >= 0")
    pre = s.constants
    if pre and anchor[: len(pre)] != pre:
        raise ValidationError(
            "structure already has constants; the anchor must extend them positionally"
        )
    for a in anchor:
        if not 0 <= a < s.universe_size:
            raise ValidationError(f"anchor element {a} outside universe")
    if not anchor:
        if pre:
            raise ValidationError("empty anchor requires a constant-free structure")
        return s, tuple(range(s.universe_size))
    dist = distances_from(gaifman_graph(s), anchor)
    keep = [v for v in range(s.universe_size) if dist[v] <= r]
    index = {old: new for new, old in enumerate(keep)}
    keepset = set(keep)
    interps = {}
    for name, _ in s.vocab.relations:
        interps[name] = {
            tuple(index[x] for x in t)
            for t in s.tuples(name)
            if all(x in keepset for x in t)
        }
    labels = tuple(s.labels[v] for v in keep) if s.labels is not None else None
    vocab = s.vocab.with_constants(len(anchor))
    out = Structure(vocab, len(keep), interps, tuple(index[a] for a in anchor), labels)
    return out, tuple(keep)


def neighborhood(s: Structure, anchor, r: int) -> Structure:
    return neighborhood_embedded(s, anchor, r)[0]


# ---------------------------------------------------------------------------
# color refinement shared by isomorphism search and canonicalization

def _initial_colors(s: Structure):
    adj = gaifman_graph(s).adjacency
    cols = []
    for v in range(s.universe_size):
        consts = tuple(i for i, c in enumerate(s.constants) if c == v)
        prof = []
        for name, arity in s.vocab.relations:
            rel = s._interps[name]
            if arity == 1:
                prof.append((1,) if (v,) in rel else (0,))
                continue
            counts = [0] * arity
            loop = 0
            for t in rel:
                for j, x in enumerate(t):
                    if x == v:
                        counts[j] += 1
                if len(set(t)) == 1 and t[0] == v:
                    loop = 1
            prof.append((tuple(counts), loop))
        cols.append((consts, tuple(prof), len(adj[v])))
    return cols


def _directed_profiles(s: Structure, colors):
    """Per element: sorted color multisets of out/in partners per binary relation."""
    prof = [[] for _ in range(s.universe_size)]
    for name, arity in s.vocab.relations:
        if arity != 2:
            continue
        outs = [[] for _ in range(s.universe_size)]
        ins = [[] for _ in range(s.universe_size)]
        for a, b in s._interps[name]:
            outs[a].append(colors[b])
            ins[b].append(colors[a])
        for v in range(s.universe_size):
            prof[v].append((tuple(sorted(outs[v])), tuple(sorted(ins[v]))))
    return [tuple(p) for p in prof]


def refine_colors(structs) -> list:
    """Joint iso-invariant color refinement; ranks are shared across the batch."""
    raw = [_initial_colors(s) for s in structs]
    universe = sorted({c for cs in raw for c in cs})
    rank = {c: i for i, c in enumerate(universe)}
    cols = [[rank[c] for c in cs] for cs in raw]
    for _ in range(max(s.universe_size for s in structs) + 1):
        keys = []
        for s, cs in zip(structs, cols):
            adj = gaifman_graph(s).adjacency
            dirp = _directed_profiles(s, cs)
            keys.append(
                [
                    (cs[v], tuple(sorted(cs[w] for w in adj[v])), dirp[v])
                    for v in range(s.universe_size)
                ]
            )
        universe = sorted({k for ks in keys for k in ks})
        rank = {k: i for i, k in enumerate(universe)}
        nxt = [[rank[k] for k in ks] for ks in keys]
        if nxt == cols:
            break
        cols = nxt
    return cols


def _encode(s: Structure, perm) -> tuple:
    """Relabel by perm (element -> new index) and encode as nested tuples."""
    rels = []
    for name in s.vocab.relation_names:
        rels.append(tuple(sorted(tuple(perm[x] for x in t) for t in s._interps[name])))
    return (s.universe_size, tuple(perm[c] for c in s.constants), tuple(rels))


def canonical_form(s: Structure, bound: int = DEFAULT_CANONICAL_BOUND) -> bytes:
    """Lexicographically minimal encoding over universe permutations.

    Equal byte strings characterize isomorphism (labels excluded — they are
    display metadata only).  Raises BoundExceededError above the bound; the
    search is pruned by iso-invariant color classes, so only permutations
    respecting the refined partition are tried.
    """
    if s._canon is not None:
        return s._canon
    n = s.universe_size
    if n > bound:
        raise BoundExceededError(
            f"canonicalization bound {bound} exceeded (universe {n})"
        )
    cols = refine_colors([s])[0]
    classes = {}
    for v in range(n):
        classes.setdefault(cols[v], []).append(v)
    ordered = [classes[c] for c in sorted(classes)]
    active = set()
    for _, t in s.all_tuples():
        active.update(t)
    active.update(s.constants)

    pools = []
    for members in ordered:
        if len(members) == 1 or not active.intersection(members):
            # singletons and fully inactive classes contribute one arrangement
            pools.append([tuple(members)])
        else:
            pools.append(list(itertools.permutations(members)))
    best = None
    for arrangement in itertools.product(*pools):
        perm = [0] * n
        pos = 0
        for block in arrangement:
            for v in block:
                perm[v] = pos
                pos += 1
        enc = _encode(s, perm)
        if best is None or enc < best:
            best = enc
    payload = f"{s.vocab.key()}|{best!r}".encode()
    s._canon = payload
    return payload


def is_isomorphic(a: Structure, b: Structure):
    """Search for an isomorphism; returns an Isomorphism witness or None."""
    check_same_vocab(a, b)
    if a.universe_size != b.universe_size:
        return None
    for name in a.vocab.relation_names:
        if len(a.tuples(name)) != len(b.tuples(name)):
            return None
    ca, cb = refine_colors([a, b])
    if sorted(ca) != sorted(cb):
        return None
    n = a.universe_size
    byc = {}
    for v in range(n):
        byc.setdefault(cb[v], []).append(v)
    # static order: scarcest color class first, then index
    order = sorted(range(n), key=lambda v: (len(byc[ca[v]]), ca[v], v))
    mapping = [-1] * n
    used = [False] * n

    tuples_a = list(a.all_tuples())

    def consistent(v, w):
        for i, c in enumerate(a.constants):
            if c == v and b.constants[i] != w:
                return False
            if b.constants[i] == w and c != v:
                return False
        return True

    def extend(i):
        if i == len(order):
            return verify_isomorphism(a, b, Isomorphism(tuple(mapping)))
        v = order[i]
        for w in byc[ca[v]]:
            if used[w] or not consistent(v, w):
                continue
            mapping[v] = w
            used[w] = True
            ok = True
            # partial check: fully-mapped tuples must transfer
            for name, t in tuples_a:
                if all(mapping[x] >= 0 for x in t):
                    if tuple(mapping[x] for x in t) not in b._interps[name]:
                        ok = False
                        break
            if ok and extend(i + 1):
                return True
            mapping[v] = -1
            used[w] = False
        return False

    if extend(0):
        return Isomorphism(tuple(mapping))
    return None


def verify_isomorphism(a: Structure, b: Structure, iso: Isomorphism) -> bool:
    """Direct check that iso is a constant-preserving relation bijection."""
    m = iso.mapping
    if sorted(m) != list(range(a.universe_size)) or a.universe_size != b.universe_size:
        return False
    for i, c in enumerate(a.constants):
        if m[c] != b.constants[i]:
            return False
    for name, _ in a.vocab.relations:
        image = {tuple(m[x] for x in t) for t in a._interps[name]}
        if image != b._interps[name]:
            return False
    return True


# ---------------------------------------------------------------------------
# file format

def parse_structure(text: str) -> Structure:
    """Parse the line-oriented structure format.

    Line 1: ``vocab <name>/<arity> ... consts=<n>``
    Line 2: ``universe <size>`` optionally followed by ``labels <l0> ...``
    Then zero or more ``rel <name>: (<i>,<j>) ...`` lines, and finally — iff
    n > 0 — ``consts <i0> ...``.  ``#`` starts a comment anywhere.
    """
    lines = []
    for idx, rawline in enumerate(text.splitlines(), start=1):
        body = rawline.split("#", 1)[0]
        if body.strip():
            lines.append((idx, body))
    if not lines:
        raise StructureParseError("empty input", 1)

    def toks(body):
        return body.split()

    ln, body = lines[0]
    parts = toks(body)
    if parts[0] != "vocab":
        raise StructureParseError("expected 'vocab' directive", ln, body.index(parts[0]) + 1)
    if len(parts) < 2 or not parts[-1].startswith("consts="):
        raise StructureParseError("vocab line must end with consts=<n>", ln)
    try:
        ccount = int(parts[-1][len("consts="):])
    except ValueError:
        raise StructureParseError("malformed consts=<n>", ln) from None
    rels = []
    for p in parts[1:-1]:
        if "/" not in p:
            raise StructureParseError(f"malformed relation declaration {p!r}", ln, body.index(p) + 1)
        name, _, ar = p.partition("/")
        try:
            rels.append((name, int(ar)))
        except ValueError:
            raise StructureParseError(f"malformed arity in {p!r}", ln, body.index(p) + 1) from None
    try:
        vocab = Vocabulary(tuple(rels), ccount)
    except ValidationError as e:
        raise StructureParseError(str(e), ln) from None

    if len(lines) < 2:
        raise StructureParseError("missing 'universe' line", ln)
    ln, body = lines[1]
    parts = toks(body)
    if parts[0] != "universe":
        raise StructureParseError("expected 'universe' directive", ln, body.index(parts[0]) + 1)
    if len(parts) < 2:
        raise StructureParseError("universe needs a size", ln)
    try:
        size = int(parts[1])
    except ValueError:
        raise StructureParseError(f"malformed universe size {parts[1]!r}", ln) from None
    if size < 1:
        raise StructureParseError("universe size must be positive", ln)
    labels = None
    if len(parts) > 2:
        if parts[2] != "labels":
            raise StructureParseError("expected 'labels' after universe size", ln, body.index(parts[2]) + 1)
        labels = parts[3:]
        if len(labels) != size:
            raise StructureParseError(
                f"expected {size} labels, got {len(labels)}", ln
            )

    interps = {}
    constants = None
    seen = set()
    for ln, body in lines[2:]:
        parts = toks(body)
        if parts[0] == "rel":
            if constants is not None:
                raise StructureParseError("'rel' after 'consts'", ln)
            if len(parts) < 2 or not parts[1].endswith(":"):
                raise StructureParseError("expected 'rel <name>:'", ln)
            name = parts[1][:-1]
            if name not in vocab.relation_names:
                raise StructureParseError(f"unknown relation {name!r}", ln, body.index(parts[1]) + 1)
            if name in seen:
                raise StructureParseError(f"duplicate relation declaration {name!r}", ln)
            seen.add(name)
            arity = vocab.arity(name)
            tuples = set()
            for p in parts[2:]:
                p = p.rstrip(",")
                m = _TUPLE_RE.match(p)
                if not m:
                    raise StructureParseError(f"malformed tuple {p!r}", ln, body.index(p) + 1)
                t = tuple(int(x) for x in m.group(1).split(","))
                if len(t) != arity:
                    raise StructureParseError(
                        f"tuple {p} has arity {len(t)}; {name} expects {arity}", ln, body.index(p) + 1
                    )
                for x in t:
                    if not 0 <= x < size:
                        raise StructureParseError(
                            f"element {x} outside universe of size {size}", ln, body.index(p) + 1
                        )
                tuples.add(t)
            interps[name] = tuples
        elif parts[0] == "consts":
            if constants is not None:
                raise StructureParseError("duplicate 'consts' line", ln)
            if ccount == 0:
                raise StructureParseError("'consts' present but vocab declares consts=0", ln)
            try:
                constants = tuple(int(x) for x in parts[1:])
            except ValueError:
                raise StructureParseError("malformed constant index", ln) from None
            if len(constants) != ccount:
                raise StructureParseError(
                    f"expected {ccount} constants, got {len(constants)}", ln
                )
            for c in constants:
                if not 0 <= c < size:
                    raise StructureParseError(
                        f"constant {c} outside universe of size {size}", ln
                    )
        else:
            raise StructureParseError(f"unknown directive {parts[0]!r}", ln, body.index(parts[0]) + 1)
    if ccount > 0 and constants is None:
        raise StructureParseError("missing 'consts' line", lines[-1][0])
    try:
        return Structure(vocab, size, interps, constants or (), labels)
    except ValidationError as e:
        raise StructureParseError(str(e), lines[-1][0]) from None


def serialize_structure(s: Structure) -> str:
    """Canonical text: declared vocab order, relation blocks sorted by name."""
    out = []
    rels = " ".join(f"{n}/{a}" for n, a in s.vocab.relations)
    sep = " " if rels else ""
    out.append(f"vocab {rels}{sep}consts={s.vocab.constant_count}")
    if s.labels is not None:
        out.append(f"universe {s.universe_size} labels " + " ".join(s.labels))
    else:
        out.append(f"universe {s.universe_size}")
    for name in sorted(s.vocab.relation_names):
        ts = " ".join("(" + ",".join(str(x) for x in t) + ")" for t in sorted(s.tuples(name)))
        out.append(f"rel {name}:" + (" " + ts if ts else ""))
    if s.constants:
        out.append("consts " + " ".join(str(c) for c in s.constants))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# generators

BINARY_GRAPH_VOCAB = Vocabulary((("E", 2),), 0)

_KINDS = ("path", "cycle", "clique", "linear_order", "edgeless", "random")


def generate(kind: str, n: int, density: float = 0.5, seed: int = 0) -> Structure:
    """Standard one-binary-relation generators over vocabulary E/2.

    path and cycle take the symmetric closure; linear_order emits the strict
    order; random draws each of the n^2 tuples independently with the given
    density from the given seed.
    """
    if kind not in _KINDS:
        raise ValidationError(f"unknown generator kind {kind!r}; expected one of {_KINDS}")
    if n < 1:
        raise ValidationError("size must be >= 1")
    edges = set()
    if kind == "path":
        for i in range(n - 1):
            edges.add((i, i + 1))
            edges.add((i + 1, i))
    elif kind == "cycle":
        if n < 3:
            raise ValidationError("cycle requires size >= 3")
        for i in range(n):
            j = (i + 1) % n
            edges.add((i, j))
            edges.add((j, i))
    elif kind == "clique":
        for i in range(n):
            for j in range(n):
                if i != j:
                    edges.add((i, j))
    elif kind == "linear_order":
        for i in range(n):
            for j in range(i + 1, n):
                edges.add((i, j))
    elif kind == "random":
        if not 0.0 <= density <= 1.0:
            raise ValidationError("density must lie in [0, 1]")
        rng = _random.Random(seed)
        for i in range(n):
            for j in range(n):
                if rng.random() < density:
                    edges.add((i, j))
    return Structure(BINARY_GRAPH_VOCAB, n, {"E": edges})
