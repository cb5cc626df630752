"""First-order formulas over relational vocabularies.

Covers the s-expression formula language (parser, printer, evaluator),
primitive-positive fragments, query answering, the canonical existential
sentence of a bounded-tree-depth structure, and the hom-signature agreement
oracle that decides primitive-positive indistinguishability without ever
enumerating sentences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .enumeration import (
    candidate_block,
    candidate_groups,
    fast_candidates_supported,
    td_bounded_structures,
)
from .errors import FormulaParseError, ValidationError
from .hom import elimination_forest, enumerate_homs, find_hom
from .structures import Structure, Vocabulary, canonical_form, check_same_vocab

enumerate_td_bounded_structures = td_bounded_structures


# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    index: int


Term = Var | Const


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Atom | Eq | Not | And | Or | Exists | Forall

_CONST_TOKEN = re.compile(r"c(\d+)\Z")
_NAME_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def free_variables(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Atom):
        return frozenset(t.name for t in phi.terms if isinstance(t, Var))
    if isinstance(phi, Eq):
        return frozenset(
            t.name for t in (phi.left, phi.right) if isinstance(t, Var)
        )
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, (And, Or)):
        out: frozenset[str] = frozenset()
        for p in phi.parts:
            out |= free_variables(p)
        return out
    if isinstance(phi, (Exists, Forall)):
        return free_variables(phi.body) - {phi.var}
    raise ValidationError(f"not a formula: {phi!r}")


def quantifier_rank(phi: Formula) -> int:
    if isinstance(phi, (Atom, Eq)):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.body)
    if isinstance(phi, (And, Or)):
        return max(quantifier_rank(p) for p in phi.parts)
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_rank(phi.body)
    raise ValidationError(f"not a formula: {phi!r}")


def is_primitive_positive(phi: Formula) -> bool:
    """Existential quantification, conjunction, atoms, and equalities only."""
    if isinstance(phi, (Atom, Eq)):
        return True
    if isinstance(phi, And):
        return all(is_primitive_positive(p) for p in phi.parts)
    if isinstance(phi, Exists):
        return is_primitive_positive(phi.body)
    return False


# ---------------------------------------------------------------------------
# parsing and printing


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()#":
                j += 1
            tokens.append((text[i:j], i))
            i = j
    return tokens


def parse_formula(text: str, vocab: Vocabulary) -> Formula:
    """Parse one s-expression formula; errors carry a character offset."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaParseError("empty formula", 0)
    arities = dict(vocab.relations)

    def term(tok: str, pos: int) -> Term:
        m = _CONST_TOKEN.match(tok)
        if m:
            idx = int(m.group(1))
            if idx >= vocab.constant_count:
                raise FormulaParseError(
                    f"constant c{idx} out of range (vocabulary has "
                    f"{vocab.constant_count})",
                    pos,
                )
            return Const(idx)
        if not _NAME_TOKEN.match(tok):
            raise FormulaParseError(f"bad term {tok!r}", pos)
        return Var(tok)

    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, len(text))

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def formula() -> Formula:
        tok, at = take()
        if tok != "(":
            raise FormulaParseError(f"expected '(', got {tok!r}", at)
        head, hat = take()
        if head is None or head in "()":
            raise FormulaParseError("missing operator", hat)
        if head in ("exists", "forall"):
            vtok, vat = take()
            if vtok is None or vtok in "()" or not _NAME_TOKEN.match(vtok):
                raise FormulaParseError("expected a variable name", vat)
            if _CONST_TOKEN.match(vtok):
                raise FormulaParseError(
                    f"{vtok!r} is a constant token, not a variable", vat
                )
            body = formula()
            close()
            return (Exists if head == "exists" else Forall)(vtok, body)
        if head in ("and", "or"):
            parts = []
            while peek()[0] == "(":
                parts.append(formula())
            close()
            if not parts:
                raise FormulaParseError(f"({head}) needs at least one part", hat)
            return (And if head == "and" else Or)(tuple(parts))
        if head == "not":
            body = formula()
            close()
            return Not(body)
        if head == "=":
            lt, lat = take()
            rt, rat = take()
            for t, at_ in ((lt, lat), (rt, rat)):
                if t is None or t in "()":
                    raise FormulaParseError("= needs two terms", at_)
            close()
            return Eq(term(lt, lat), term(rt, rat))
        if head in arities:
            terms = []
            while True:
                t, at_ = peek()
                if t == ")" or t is None:
                    break
                if t == "(":
                    raise FormulaParseError(
                        f"relation {head} takes terms, not formulas", at_
                    )
                take()
                terms.append(term(t, at_))
            close()
            if len(terms) != arities[head]:
                raise FormulaParseError(
                    f"relation {head} has arity {arities[head]}, "
                    f"got {len(terms)} terms",
                    hat,
                )
            return Atom(head, tuple(terms))
        raise FormulaParseError(f"unknown operator {head!r}", hat)

    def close():
        tok, at = take()
        if tok != ")":
            raise FormulaParseError(f"expected ')', got {tok!r}", at)

    out = formula()
    tok, at = peek()
    if tok is not None:
        raise FormulaParseError(f"trailing input {tok!r}", at)
    return out


def format_formula(phi: Formula) -> str:
    def term(t: Term) -> str:
        return t.name if isinstance(t, Var) else f"c{t.index}"

    if isinstance(phi, Atom):
        return "(" + " ".join([phi.relation, *map(term, phi.terms)]) + ")"
    if isinstance(phi, Eq):
        return f"(= {term(phi.left)} {term(phi.right)})"
    if isinstance(phi, Not):
        return f"(not {format_formula(phi.body)})"
    if isinstance(phi, And):
        return "(and " + " ".join(map(format_formula, phi.parts)) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(map(format_formula, phi.parts)) + ")"
    if isinstance(phi, Exists):
        return f"(exists {phi.var} {format_formula(phi.body)})"
    if isinstance(phi, Forall):
        return f"(forall {phi.var} {format_formula(phi.body)})"
    raise ValidationError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# semantics


def evaluate(phi: Formula, s: Structure, assignment: dict[str, int] | None = None):
    """Truth of `phi` in `s` under an assignment covering its free variables."""
    env = dict(assignment or {})
    for name, val in env.items():
        if not 0 <= val < s.universe_size:
            raise ValidationError(f"assignment sends {name} outside the universe")
    missing = free_variables(phi) - env.keys()
    if missing:
        raise ValidationError(f"unassigned free variables: {sorted(missing)}")
    n = s.universe_size

    def term(t: Term) -> int:
        if isinstance(t, Var):
            return env[t.name]
        if t.index >= len(s.constants):
            raise ValidationError(f"constant c{t.index} out of range")
        return s.constants[t.index]

    def rec(phi: Formula) -> bool:
        if isinstance(phi, Atom):
            if phi.relation not in s.vocab.relation_names:
                raise ValidationError(f"unknown relation {phi.relation}")
            return tuple(term(t) for t in phi.terms) in s.tuples(phi.relation)
        if isinstance(phi, Eq):
            return term(phi.left) == term(phi.right)
        if isinstance(phi, Not):
            return not rec(phi.body)
        if isinstance(phi, And):
            return all(rec(p) for p in phi.parts)
        if isinstance(phi, Or):
            return any(rec(p) for p in phi.parts)
        if isinstance(phi, (Exists, Forall)):
            want = isinstance(phi, Exists)
            saved = env.get(phi.var)
            had = phi.var in env
            result = not want
            for val in range(n):
                env[phi.var] = val
                if rec(phi.body) is want:
                    result = want
                    break
            if had:
                env[phi.var] = saved
            else:
                env.pop(phi.var, None)
            return result
        raise ValidationError(f"not a formula: {phi!r}")

    return rec(phi)


class Query:
    """A formula with an explicit tuple of output variables."""

    def __init__(self, formula: Formula, variables: tuple[str, ...]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValidationError("duplicate output variables")
        extra = free_variables(formula) - set(variables)
        if extra:
            raise ValidationError(
                f"free variables not listed as outputs: {sorted(extra)}"
            )
        self.formula = formula
        self.variables = variables

    def __repr__(self):
        return f"Query({self.variables}, {format_formula(self.formula)})"


def query_answers(q: Query, s: Structure) -> list[tuple[int, ...]]:
    """All satisfying assignments to the output variables, lexicographic."""
    out = []
    env: dict[str, int] = {}

    def rec(i: int):
        if i == len(q.variables):
            if evaluate(q.formula, s, env):
                out.append(tuple(env[v] for v in q.variables))
            return
        for val in range(s.universe_size):
            env[q.variables[i]] = val
            rec(i + 1)
        del env[q.variables[i]]

    rec(0)
    return out


def parse_query(text: str, vocab: Vocabulary) -> Query:
    """Query file: a `vars x y ...` line followed by one formula."""
    lines = text.split("\n")
    header = None
    header_end = 0
    offset = 0
    for line in lines:
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            if not stripped.startswith("vars"):
                raise FormulaParseError(
                    "query must start with a 'vars' line", offset
                )
            header = stripped[4:].split()
            header_end = offset + len(line)
            break
        offset += len(line) + 1
    if header is None:
        raise FormulaParseError("missing 'vars' line", len(text))
    for v in header:
        if not _NAME_TOKEN.match(v) or _CONST_TOKEN.match(v):
            raise FormulaParseError(f"bad output variable {v!r}", offset)
    # blank the header instead of slicing so error offsets stay aligned
    body = " " * header_end + text[header_end:]
    phi = parse_formula(body, vocab)
    try:
        return Query(phi, tuple(header))
    except ValidationError as e:
        raise FormulaParseError(str(e), header_end) from e


# ---------------------------------------------------------------------------
# the canonical sentence of a bounded-tree-depth structure


def pp_sentence_of_structure(c: Structure) -> Formula:
    """A primitive-positive sentence holding in exactly the structures that
    `c` maps into, with quantifier rank equal to the tree-depth of `c`."""
    if c.vocab.constant_count:
        raise ValidationError("sentence extraction needs a constant-free structure")
    parent = elimination_forest(c)
    n = c.universe_size
    depth = [0] * n

    def vdepth(v):
        d, x = 0, v
        while parent[x] != -1:
            x = parent[x]
            d += 1
        return d

    for v in range(n):
        depth[v] = vdepth(v)
    children: list[list[int]] = [[] for _ in range(n)]
    roots = []
    for v, p in enumerate(parent):
        if p == -1:
            roots.append(v)
        else:
            children[p].append(v)
    at_vertex: list[list[Formula]] = [[] for _ in range(n)]
    for name, t in c.all_tuples():
        deepest = max(t, key=lambda v: depth[v])
        at_vertex[deepest].append(Atom(name, tuple(Var(f"x{v}") for v in t)))

    def build(v: int) -> Formula:
        parts: list[Formula] = list(at_vertex[v])
        parts.extend(build(w) for w in children[v])
        if not parts:
            body: Formula = Eq(Var(f"x{v}"), Var(f"x{v}"))
        elif len(parts) == 1:
            body = parts[0]
        else:
            body = And(tuple(parts))
        return Exists(f"x{v}", body)

    trees = [build(r) for r in roots]
    return trees[0] if len(trees) == 1 else And(tuple(trees))


# ---------------------------------------------------------------------------
# agreement oracle


@dataclass(frozen=True)
class PPOracleResult:
    status: str  # "agree" | "separated"
    separator: Structure | None
    hom_to_a: bool | None
    hom_to_b: bool | None
    k: int
    size_bound: int

    @property
    def conclusive(self) -> bool:
        """Separation is witnessed; agreement only means no separator was
        found within the size bound."""
        return self.status == "separated"


_sig_cache: dict = {}
_gsig_cache: dict = {}
_downset_cache: dict = {}


def _downset(packed: int, nf: int, width: int) -> int:
    """Bitmask over packed decoration vectors dominated pointwise by
    `packed` (each vertex field restricted to a submask of its field)."""
    key = (packed, nf, width)
    got = _downset_cache.get(key)
    if got is not None:
        return got
    mask = 1
    field = (1 << width) - 1
    for v in range(nf):
        pv = packed >> (width * v) & field
        acc = 0
        sub = pv
        while True:
            acc |= mask << (sub << (width * v))
            if sub == 0:
                break
            sub = (sub - 1) & pv
        mask = acc
    _downset_cache[key] = mask
    return mask


def _grouped_block_signature(s: Structure, groups) -> int:
    """Hom-existence bits for one decoration-grouped pool slice.

    A decorated candidate maps into `s` exactly when its free part has a
    homomorphism into `s` (constants ignored) whose images carry all the
    decoration's constant-edge states, and the constant's own unary and loop
    states hold at the constant of `s`.  One homomorphism enumeration per
    free part covers every decoration in the group at once.
    """
    vocab = s.vocab
    base = vocab.with_constants(0)
    unaries = [n for n, a in vocab.relations if a == 1]
    binaries = [n for n, a in vocab.relations if a == 2]
    nun, nbin = len(unaries), len(binaries)
    width = 2 * nbin
    n = s.universe_size
    cx = s.constants[0]
    stripped = Structure(
        base, n, {name: s.tuples(name) for name, _ in vocab.relations}, ()
    )
    cxbits = 0
    for ui, uname in enumerate(unaries):
        if (cx,) in s.tuples(uname):
            cxbits |= 1 << ui
    states = [0] * n
    for bi, bname in enumerate(binaries):
        tuples = s.tuples(bname)
        if (cx, cx) in tuples:
            cxbits |= 1 << (nun + bi)
        for w in range(n):
            st = 0
            if (cx, w) in tuples:
                st |= 1
            if (w, cx) in tuples:
                st |= 2
            states[w] |= st << (2 * bi)
    cmask = (1 << (nun + nbin)) - 1
    sig = 0
    offset = 0
    for f, emitted in groups:
        nf = f.universe_size
        homs, truncated = enumerate_homs(f, stripped, limit=200000)
        gsig = 0
        if truncated:
            # unreasonably many maps; fall back to one search per member
            for j, (_, _, c) in enumerate(emitted):
                if find_hom(c, s) is not None:
                    gsig |= 1 << j
        elif homs:
            closure = 0
            seen = set()
            for h in homs:
                packed = 0
                for v in range(nf):
                    packed |= states[h.mapping[v]] << (width * v)
                if packed not in seen:
                    seen.add(packed)
                    closure |= _downset(packed, nf, width)
            gkey = (id(emitted), cxbits & cmask, closure)
            gsig = _gsig_cache.get(gkey)
            if gsig is None:
                gsig = 0
                for j, (cbits, svec, _) in enumerate(emitted):
                    if cbits & ~cxbits == 0 and closure >> svec & 1:
                        gsig |= 1 << j
                _gsig_cache[gkey] = gsig
        if gsig:
            sig |= gsig << offset
        offset += len(emitted)
    return sig


def _block_signature(s: Structure, k: int, size: int) -> int:
    """Hom-existence bits for the pool slice at exactly `size`, bit i
    matching candidate_block(...)[i]; cached per canonical form."""
    key = (canonical_form(s), k, size)
    got = _sig_cache.get(key)
    if got is not None:
        return got
    groups = candidate_groups(s.vocab, k, size)
    if groups is not None:
        sig = _grouped_block_signature(s, groups)
    else:
        sig = 0
        for i, c in enumerate(candidate_block(s.vocab, k, size)):
            if find_hom(c, s) is not None:
                sig |= 1 << i
    _sig_cache[key] = sig
    return sig


def pp_agree_oracle(a: Structure, b: Structure, k: int, size_bound: int):
    """Do `a` and `b` satisfy the same primitive-positive sentences of
    quantifier rank <= k?  Decided by comparing hom-existence signatures over
    the bounded-tree-depth candidate pool; the first differing candidate (in
    pool order: sizes ascending, deterministic within a size) is returned as
    the separating witness."""
    check_same_vocab(a, b)
    if k < 0:
        raise ValidationError("k must be >= 0")
    if size_bound < 1:
        raise ValidationError("size_bound must be >= 1")
    if fast_candidates_supported(a.vocab):
        for size in range(1, size_bound + 1):
            siga = _block_signature(a, k, size)
            sigb = _block_signature(b, k, size)
            if siga != sigb:
                diff = siga ^ sigb
                idx = (diff & -diff).bit_length() - 1
                c = candidate_block(a.vocab, k, size)[idx]
                fa = siga >> idx & 1 == 1
                fb = sigb >> idx & 1 == 1
                return PPOracleResult("separated", c, fa, fb, k, size_bound)
    else:
        for c in td_bounded_structures(a.vocab, k, size_bound):
            fa = find_hom(c, a) is not None
            fb = find_hom(c, b) is not None
            if fa != fb:
                return PPOracleResult("separated", c, fa, fb, k, size_bound)
    return PPOracleResult("agree", None, None, None, k, size_bound)
