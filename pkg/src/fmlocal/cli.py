"""Command-line surface: argument parsing, corpus loading, subcommand
dispatch, and witness replay.

Every subcommand writes one deterministic JSON report (see `report.py`) and
exits 0 on success, 1 when a checked property is violated (the report holds
the witnesses), 2 on input or configuration errors, and 3 when a bounded
search ended without settling the answer.  `fmlocal replay --report r.json
--check i` re-verifies the cited check record from the report alone.
"""

from __future__ import annotations

import argparse
import ast
import os
import sys
import time
from multiprocessing import get_context

from .enumeration import fast_candidates, fast_candidates_supported, td_bounded_structures
from .errors import (
    BoundExceededError,
    FmlocalError,
    FormulaParseError,
    InconclusiveError,
    StructureParseError,
    ValidationError,
    VocabularyMismatchError,
)
from .games import ef_equivalent, forth_khom, k_extendable, khom_equivalent, lemma1_audit
from .hom import (
    Homomorphism,
    core,
    elimination_forest,
    find_hom,
    forest_height,
    k_core_search,
    tree_depth,
    verify_homomorphism,
)
from .homotopy import ho_quotient, make_pointed, zero_pointed_object
from .locality import (
    Corpus,
    CoreIso,
    FO,
    Iso,
    KHom,
    d_equivalent,
    diagram_check,
    e_local_objects,
    gaifman_rank,
    hanf_rank,
    homiso_gaifman_rank,
    homiso_hanf_rank,
    neighborhoods_equivalent,
)
from .logic import parse_query, pp_agree_oracle, query_answers
from .report import (
    BOUNDS_ENV_VAR,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VIOLATION,
    ReportBuilder,
    RunConfig,
    bounds_from_env,
    emit_report,
    load_report,
)
from .structures import (
    Isomorphism,
    Structure,
    canonical_form,
    gaifman_graph,
    generate,
    is_isomorphic,
    neighborhood,
    parse_structure,
    serialize_structure,
    verify_isomorphism,
)

# Default oracle ceiling for agreement checks, and how far a disagreement
# escalates it before the run declares a mismatch.
ORACLE_SIZE_BOUND = 5
ORACLE_ESCALATION = 2

GENERATOR_KINDS = ("path", "cycle", "clique", "linear_order", "edgeless", "random")


class UsageError(FmlocalError):
    """Bad command-line input detected outside the argument parser."""


# ---------------------------------------------------------------------------
# small input helpers


def _parse_int_tuple(text: str | None) -> tuple[int, ...]:
    if text is None:
        return ()
    body = text.strip().strip("()")
    if not body:
        return ()
    try:
        return tuple(int(p) for p in body.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _parse_opening(text: str | None):
    """Pairs `x:y,x:y` forming the opening position of a seeded game."""
    if text is None:
        return None
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        left, sep, right = part.partition(":")
        if not sep:
            raise UsageError(f"opening entry {part!r} is not x:y")
        try:
            pairs.append((int(left), int(right)))
        except ValueError:
            raise UsageError(f"opening entry {part!r} is not a pair of integers") from None
    return pairs


def _read_structure_file(path: str) -> Structure:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    try:
        return parse_structure(text)
    except StructureParseError as e:
        raise UsageError(f"{path}: {e}") from e


def _structures_from(args, count: int) -> list[Structure]:
    if len(args.inputs) != count:
        raise UsageError(
            f"expected exactly {count} --in file(s), got {len(args.inputs)}"
        )
    return [_read_structure_file(p) for p in args.inputs]


def _check_anchor(s: Structure, anchor: tuple[int, ...], label: str) -> None:
    for x in anchor:
        if not 0 <= x < s.universe_size:
            raise UsageError(
                f"{label} element {x} out of range for universe {s.universe_size}"
            )


def _kind_from_args(args, config: RunConfig):
    name = getattr(args, "kind", None) or "iso"
    k = args.k if getattr(args, "k", None) is not None else config.bounds["k_max"]
    size_bound = (
        args.size_bound
        if getattr(args, "size_bound", None) is not None
        else config.bounds["kcore_size"]
    )
    if name == "iso":
        return Iso()
    if name == "khom":
        return KHom(k)
    if name == "fo":
        return FO(k)
    if name == "coreiso":
        return CoreIso(k, size_bound)
    raise UsageError(f"unknown equivalence kind {name!r}")


def _kind_json(kind) -> dict | None:
    if kind is None:
        return None
    if isinstance(kind, Iso):
        return {"name": "iso"}
    if isinstance(kind, KHom):
        return {"name": "khom", "k": kind.k}
    if isinstance(kind, FO):
        return {"name": "fo", "k": kind.k}
    if isinstance(kind, CoreIso):
        return {"name": "coreiso", "k": kind.k, "size_bound": kind.size_bound}
    raise ValidationError(f"unknown equivalence kind {kind!r}")


def _kind_from_json(data: dict | None):
    if data is None:
        return None
    name = data.get("name")
    if name == "iso":
        return Iso()
    if name == "khom":
        return KHom(data["k"])
    if name == "fo":
        return FO(data["k"])
    if name == "coreiso":
        return CoreIso(data["k"], data["size_bound"])
    raise ValidationError(f"unknown equivalence kind {data!r}")


def load_corpus(path: str) -> Corpus:
    """A directory of ``.fm`` files, or a manifest listing files with
    optional designated tuples (``a.fm: (0, 1)``).  Entries are ordered
    lexicographically by filename; relative manifest names resolve against
    the manifest's own directory."""
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".fm"))
        if not names:
            raise UsageError(f"no .fm structure files in directory {path}")
        base = path
        pairs = [(n, ()) for n in names]
    else:
        base = os.path.dirname(path) or "."
        pairs = []
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e}") from e
        for ln, raw in enumerate(lines, start=1):
            body = raw.split("#", 1)[0].strip()
            if not body:
                continue
            name, sep, annot = body.partition(":")
            name = name.strip()
            t: tuple[int, ...] = ()
            if sep:
                annot = annot.strip()
                try:
                    value = ast.literal_eval(annot)
                except (ValueError, SyntaxError):
                    raise UsageError(
                        f"{path}:{ln}: bad designated tuple {annot!r}"
                    ) from None
                if isinstance(value, int):
                    value = (value,)
                if not (
                    isinstance(value, tuple)
                    and all(isinstance(x, int) and not isinstance(x, bool) for x in value)
                ):
                    raise UsageError(f"{path}:{ln}: bad designated tuple {annot!r}")
                t = value
            pairs.append((name, t))
        if not pairs:
            raise UsageError(f"manifest {path} lists no structures")
        pairs.sort(key=lambda p: p[0])
    entries = []
    provenance = []
    for name, t in pairs:
        full = os.path.join(base, name)
        s = _read_structure_file(full)
        entries.append((s, t))
        provenance.append(name)
    try:
        return Corpus(tuple(entries), tuple(provenance))
    except ValidationError as e:
        raise UsageError(f"{path}: {e}") from e


def _record_corpus(rb: ReportBuilder, corpus: Corpus, path: str) -> list[int]:
    """Embed every corpus entry and echo the entry list; returns the
    structure-table index of each entry in order."""
    table = [rb.structure_index(s) for s, _ in corpus.entries]
    rb.set_inputs(
        corpus=path,
        corpus_entries=[
            {"structure": table[i], "tuple": list(t)}
            for i, (_, t) in enumerate(corpus.entries)
        ],
        provenance=list(corpus.provenance),
    )
    return table


def _corpus_from_report(report: dict, structures: list[Structure]) -> Corpus:
    entries = tuple(
        (structures[e["structure"]], tuple(e["tuple"]))
        for e in report["inputs"]["corpus_entries"]
    )
    return Corpus(entries)


def _mapping_list(h) -> list | None:
    return None if h is None else list(h.mapping)


# ---------------------------------------------------------------------------
# plain structure queries


def cmd_gaifman(args, config, rb):
    (s,) = _structures_from(args, 1)
    rb.set_inputs(file=args.inputs[0])
    g = gaifman_graph(s)
    edges = sorted([list(e) for e in g.edges])
    rb.add_check(
        "gaifman",
        structure=rb.structure_index(s),
        vertex_count=g.vertex_count,
        edges=edges,
    )
    rb.set_summary(universe=s.universe_size, edges=len(edges))
    return EXIT_OK


def cmd_nbhd(args, config, rb):
    (s,) = _structures_from(args, 1)
    if args.d is None:
        raise UsageError("--d is required")
    anchor = _parse_int_tuple(args.anchor)
    _check_anchor(s, anchor, "anchor")
    rb.set_inputs(file=args.inputs[0], anchor=list(anchor), d=args.d)
    result = neighborhood(s, anchor, args.d)
    rb.add_check(
        "neighborhood",
        source=rb.structure_index(s),
        anchor=list(anchor),
        d=args.d,
        result=rb.structure_index(result),
    )
    rb.set_summary(universe=result.universe_size)
    return EXIT_OK


def cmd_iso(args, config, rb):
    a, b = _structures_from(args, 2)
    rb.set_inputs(files=list(args.inputs))
    m = is_isomorphic(a, b)
    rb.add_check(
        "iso",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        mapping=_mapping_list(m),
        verdict=m is not None,
    )
    rb.set_summary(verdict=m is not None)
    return EXIT_OK


def cmd_hom(args, config, rb):
    a, b = _structures_from(args, 2)
    rb.set_inputs(files=list(args.inputs))
    h = find_hom(a, b)
    rb.add_check(
        "hom",
        source=rb.structure_index(a),
        target=rb.structure_index(b),
        mapping=_mapping_list(h),
        verdict=h is not None,
    )
    rb.set_summary(verdict=h is not None)
    return EXIT_OK


def cmd_core(args, config, rb):
    (s,) = _structures_from(args, 1)
    rb.set_inputs(file=args.inputs[0])
    c = core(s)
    rb.add_check(
        "core",
        input=rb.structure_index(s),
        core=rb.structure_index(c),
        size=c.universe_size,
    )
    rb.set_summary(core_size=c.universe_size)
    return EXIT_OK


def cmd_treedepth(args, config, rb):
    (s,) = _structures_from(args, 1)
    rb.set_inputs(file=args.inputs[0])
    value = tree_depth(s)
    forest = elimination_forest(s)
    rb.add_check(
        "treedepth",
        structure=rb.structure_index(s),
        value=value,
        forest=list(forest),
    )
    rb.set_summary(value=value)
    return EXIT_OK


def cmd_kcore(args, config, rb):
    (s,) = _structures_from(args, 1)
    k = args.k if args.k is not None else config.bounds["k_max"]
    size_bound = (
        args.size_bound if args.size_bound is not None else config.bounds["kcore_size"]
    )
    rb.set_inputs(file=args.inputs[0], k=k, size_bound=size_bound)
    result = k_core_search(s, k, size_bound)
    rb.add_check(
        "kcore",
        input=rb.structure_index(s),
        k=k,
        size_bound=size_bound,
        found=result is not None,
        result=None if result is None else rb.structure_index(result),
    )
    if result is None:
        rb.set_summary(outcome="inconclusive", size_bound=size_bound)
        return EXIT_INCONCLUSIVE
    rb.set_summary(outcome="found", size=result.universe_size)
    return EXIT_OK


# ---------------------------------------------------------------------------
# games and the agreement oracle


def cmd_efgame(args, config, rb):
    a, b = _structures_from(args, 2)
    k = args.k if args.k is not None else config.bounds["k_max"]
    left_anchor = _parse_int_tuple(args.anchor)
    right_anchor = _parse_int_tuple(args.anchor_b)
    _check_anchor(a, left_anchor, "anchor")
    _check_anchor(b, right_anchor, "right anchor")
    rb.set_inputs(files=list(args.inputs), k=k)
    verdict = ef_equivalent(a, left_anchor, b, right_anchor, k)
    rb.add_check(
        "efgame",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        left_tuple=list(left_anchor),
        right_tuple=list(right_anchor),
        k=k,
        verdict=verdict,
    )
    rb.set_summary(verdict=verdict)
    return EXIT_OK


def cmd_forth(args, config, rb):
    a, b = _structures_from(args, 2)
    k = args.k if args.k is not None else config.bounds["k_max"]
    opening = _parse_opening(args.opening)
    rb.set_inputs(files=list(args.inputs), k=k)
    verdict = forth_khom(a, b, opening, k)
    rb.add_check(
        "forth",
        source=rb.structure_index(a),
        target=rb.structure_index(b),
        k=k,
        opening=None if opening is None else [list(p) for p in opening],
        verdict=verdict,
    )
    rb.set_summary(verdict=verdict)
    return EXIT_OK


def cmd_khom_equiv(args, config, rb):
    a, b = _structures_from(args, 2)
    k = args.k if args.k is not None else config.bounds["k_max"]
    rb.set_inputs(files=list(args.inputs), k=k)
    verdict = khom_equivalent(a, b, k)
    rb.add_check(
        "khom-equiv",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        k=k,
        verdict=verdict,
    )
    rb.set_summary(verdict=verdict)
    return EXIT_OK


def cmd_pp_oracle(args, config, rb):
    a, b = _structures_from(args, 2)
    k = args.k if args.k is not None else config.bounds["k_max"]
    size_bound = args.size_bound if args.size_bound is not None else ORACLE_SIZE_BOUND
    rb.set_inputs(files=list(args.inputs), k=k, size_bound=size_bound)
    rb.set_interpretation(
        "candidate_rank",
        "candidate structures are ranked by the tree-depth of their "
        "constant-free part; named constants cost no quantifier",
    )
    result = pp_agree_oracle(a, b, k, size_bound)
    rb.add_check(
        "pp-oracle",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        k=k,
        size_bound=size_bound,
        status=result.status,
        separator=None
        if result.separator is None
        else rb.structure_index(result.separator),
        separator_hom_to_left=result.hom_to_a,
        separator_hom_to_right=result.hom_to_b,
    )
    rb.set_summary(status=result.status)
    return EXIT_OK


def cmd_extendable(args, config, rb):
    (s,) = _structures_from(args, 1)
    k = args.k if args.k is not None else config.bounds["k_max"]
    size_bound = (
        args.size_bound if args.size_bound is not None else config.bounds["kcore_size"]
    )
    if args.corpus:
        corpus = load_corpus(args.corpus)
        _record_corpus(rb, corpus, args.corpus)
        pool = corpus.structures()
        pool_source = "corpus"
    elif fast_candidates_supported(s.vocab):
        pool = fast_candidates(s.vocab, k, size_bound)
        pool_source = "generated"
    else:
        pool = list(td_bounded_structures(s.vocab, k, size_bound))
        pool_source = "generated"
    rb.set_inputs(file=args.inputs[0], k=k, size_bound=size_bound)
    result = k_extendable(s, k, pool)
    rb.add_check(
        "extendable",
        structure=rb.structure_index(s),
        k=k,
        size_bound=size_bound,
        pool_source=pool_source,
        pool_size=len(pool),
        passed=result.passed,
        x_set=None if result.x_set is None else list(result.x_set),
        candidate=None
        if result.candidate_index is None
        else rb.structure_index(pool[result.candidate_index]),
        opening=None if result.seed is None else [list(p) for p in result.seed],
        missing_element=result.b,
    )
    rb.set_summary(passed=result.passed, pool_size=len(pool))
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_lemma1(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    table = _record_corpus(rb, corpus, args.corpus)
    k = args.k if args.k is not None else config.bounds["k_max"]
    n = args.n if args.n is not None else k
    rb.set_inputs(k=k, n=n)
    violations = lemma1_audit(corpus.structures(), k, n)
    for v in violations:
        rb.add_check(
            "lemma1-violation",
            left=table[v.i],
            left_entry=v.i,
            right=table[v.j],
            right_entry=v.j,
            k=v.k,
            n=v.n,
        )
    rb.set_summary(violations=len(violations), entries=len(corpus.entries))
    return EXIT_VIOLATION if violations else EXIT_OK


# ---------------------------------------------------------------------------
# locality


def cmd_d_equiv(args, config, rb):
    a, b = _structures_from(args, 2)
    if args.d is None:
        raise UsageError("--d is required")
    left_anchor = _parse_int_tuple(args.anchor)
    right_anchor = _parse_int_tuple(args.anchor_b)
    _check_anchor(a, left_anchor, "anchor")
    _check_anchor(b, right_anchor, "right anchor")
    kind = _kind_from_args(args, config)
    rb.set_inputs(files=list(args.inputs), d=args.d, kind=_kind_json(kind))
    bijection = d_equivalent(a, left_anchor, b, right_anchor, args.d, kind)
    rb.add_check(
        "d-equiv",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        left_tuple=list(left_anchor),
        right_tuple=list(right_anchor),
        d=args.d,
        equivalence=_kind_json(kind),
        bijection=None if bijection is None else list(bijection),
        verdict=bijection is not None,
    )
    rb.set_summary(verdict=bijection is not None)
    return EXIT_OK


def _report_rank(rb, rank_report, table, query_text, style):
    for v in rank_report.counterexamples:
        rb.add_check(
            "locality-violation",
            style=style,
            d=v.d,
            left=table[v.left_index],
            left_entry=v.left_index,
            left_tuple=list(v.left_tuple),
            right=table[v.right_index],
            right_entry=v.right_index,
            right_tuple=list(v.right_tuple),
            left_in_query=v.left_in_query,
            right_in_query=v.right_in_query,
            witness=None if v.witness is None else list(v.witness),
            equivalence=_kind_json(rank_report.kind),
            query=query_text,
        )
    rb.set_summary(
        rank=rank_report.rank,
        d_max=rank_report.d_max,
        counterexamples=len(rank_report.counterexamples),
        vacuous=list(rank_report.vacuous),
        pool=rank_report.pool_description,
    )
    return EXIT_OK if rank_report.rank is not None else EXIT_INCONCLUSIVE


def _load_query(args, corpus: Corpus):
    if not args.query:
        raise UsageError("--query is required")
    try:
        with open(args.query, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.query}: {e}") from e
    vocab = corpus.entries[0][0].vocab
    try:
        return text, parse_query(text, vocab)
    except FormulaParseError as e:
        raise UsageError(f"{args.query}: {e}") from e


def cmd_gaifman_rank(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    table = _record_corpus(rb, corpus, args.corpus)
    query_text, q = _load_query(args, corpus)
    kind = _kind_from_args(args, config)
    d_max = args.d_max if args.d_max is not None else config.bounds["d_max"]
    rb.set_inputs(query=query_text, kind=_kind_json(kind), d_max=d_max)
    rank_report = gaifman_rank(q, corpus, kind, d_max)
    return _report_rank(rb, rank_report, table, query_text, "gaifman")


def cmd_hanf_rank(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    table = _record_corpus(rb, corpus, args.corpus)
    query_text, q = _load_query(args, corpus)
    kind = _kind_from_args(args, config)
    d_max = args.d_max if args.d_max is not None else config.bounds["d_max"]
    rb.set_inputs(query=query_text, kind=_kind_json(kind), d_max=d_max)
    rank_report = hanf_rank(q, corpus, kind, d_max)
    return _report_rank(rb, rank_report, table, query_text, "hanf")


def cmd_elocal(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    _record_corpus(rb, corpus, args.corpus)
    local = sorted(e_local_objects(corpus))
    rb.add_check("elocal", local_entries=local, entries=len(corpus.entries))
    rb.set_summary(local=len(local), entries=len(corpus.entries))
    return EXIT_OK


def cmd_homiso_rank(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    table = _record_corpus(rb, corpus, args.corpus)
    query_text, q = _load_query(args, corpus)
    d_max = args.d_max if args.d_max is not None else config.bounds["d_max"]
    style = f"homiso-{args.style}"
    rb.set_inputs(query=query_text, d_max=d_max, style=style)
    rb.set_interpretation(
        "hypothesis",
        "two neighborhoods count as equivalent when some weak equivalence "
        "between them precomposes to a hom-set bijection with a "
        "precomposition-local object from the corpus neighborhood pool",
    )
    if args.style == "gaifman":
        rank_report = homiso_gaifman_rank(q, corpus, d_max)
    else:
        rank_report = homiso_hanf_rank(q, corpus, d_max)
    return _report_rank(rb, rank_report, table, query_text, style)


def cmd_diagram_check(args, config, rb):
    a, b = _structures_from(args, 2)
    if args.d is None:
        raise UsageError("--d is required")
    k = args.k if args.k is not None else config.bounds["k_max"]
    size_bound = (
        args.size_bound if args.size_bound is not None else config.bounds["kcore_size"]
    )
    left_anchor = _parse_int_tuple(args.anchor)
    right_anchor = _parse_int_tuple(args.anchor_b)
    _check_anchor(a, left_anchor, "anchor")
    _check_anchor(b, right_anchor, "right anchor")
    rb.set_inputs(files=list(args.inputs), d=args.d, k=k, size_bound=size_bound)
    result = diagram_check(a, left_anchor, b, right_anchor, args.d, k, size_bound)
    rb.add_check(
        "diagram",
        left=rb.structure_index(a),
        right=rb.structure_index(b),
        left_tuple=list(left_anchor),
        right_tuple=list(right_anchor),
        d=args.d,
        k=k,
        size_bound=size_bound,
        lhs=result.lhs,
        core_left=None if result.core_a is None else rb.structure_index(result.core_a),
        core_right=None if result.core_b is None else rb.structure_index(result.core_b),
        cores_isomorphic=result.cores_isomorphic,
        leg_left=result.leg_a,
        leg_right=result.leg_b,
        rhs=result.rhs,
        holds=result.holds,
        inconclusive=result.inconclusive,
    )
    if result.inconclusive:
        rb.set_summary(outcome="inconclusive")
        return EXIT_INCONCLUSIVE
    rb.set_summary(outcome="holds" if result.holds else "fails")
    return EXIT_OK if result.holds else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# homotopy-layer commands


def cmd_ho_quotient(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    table = _record_corpus(rb, corpus, args.corpus)
    classes = ho_quotient(corpus)
    for cls in classes:
        rb.add_check(
            "ho-class",
            members=[table[i] for i in cls.members],
            member_entries=list(cls.members),
            representative=rb.structure_index(cls.representative),
        )
    rb.set_summary(classes=len(classes), entries=len(corpus.entries))
    return EXIT_OK


def _build_pointed(base: Structure, total: Structure, section, retraction):
    """Guarded construction: returns (valid, reason)."""
    if len(section) != base.universe_size:
        return False, "section length does not match the base universe"
    if len(retraction) != total.universe_size:
        return False, "retraction length does not match the total universe"
    if any(not 0 <= v < total.universe_size for v in section):
        return False, "section image out of range"
    if any(not 0 <= v < base.universe_size for v in retraction):
        return False, "retraction image out of range"
    try:
        make_pointed(base, total, Homomorphism(section), Homomorphism(retraction))
    except ValidationError as e:
        return False, str(e)
    return True, None


def cmd_pointed(args, config, rb):
    if len(args.inputs) == 1:
        (base,) = _structures_from(args, 1)
        rb.set_inputs(files=list(args.inputs), mode="zero")
        obj = zero_pointed_object(base)
        idx = rb.structure_index(base)
        rb.add_check(
            "pointed",
            mode="zero",
            base=idx,
            total=idx,
            section=list(obj.section.hom.mapping),
            retraction=list(obj.retraction.hom.mapping),
            valid=True,
            reason=None,
        )
        rb.set_summary(valid=True)
        return EXIT_OK
    base, total = _structures_from(args, 2)
    if args.section is None or args.retraction is None:
        raise UsageError("--section and --retraction are required with two inputs")
    section = _parse_int_tuple(args.section)
    retraction = _parse_int_tuple(args.retraction)
    rb.set_inputs(files=list(args.inputs), mode="explicit")
    valid, reason = _build_pointed(base, total, section, retraction)
    rb.add_check(
        "pointed",
        mode="explicit",
        base=rb.structure_index(base),
        total=rb.structure_index(total),
        section=list(section),
        retraction=list(retraction),
        valid=valid,
        reason=reason,
    )
    rb.set_summary(valid=valid)
    return EXIT_OK if valid else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# the bridge pipeline


def _bridge_pair(a: Structure, b: Structure, k: int, size_bound: int, escalation_bound: int):
    """Game verdict vs oracle verdict for one pair, with escalation when the
    game separates but the bounded oracle still agrees."""
    game = khom_equivalent(a, b, k)
    result = pp_agree_oracle(a, b, k, size_bound)
    escalated = False
    if not game and result.status == "agree":
        result = pp_agree_oracle(a, b, k, escalation_bound)
        escalated = True
    separator = (
        None if result.separator is None else serialize_structure(result.separator)
    )
    return (game, result.status, escalated, separator, result.hom_to_a, result.hom_to_b)


_CT_STATE: dict = {}


def _ct_init(texts, k, size_bound, escalation_bound):
    _CT_STATE["structures"] = [parse_structure(t) for t in texts]
    _CT_STATE["params"] = (k, size_bound, escalation_bound)


def _ct_pair(pair):
    i, j = pair
    reps = _CT_STATE["structures"]
    k, size_bound, escalation_bound = _CT_STATE["params"]
    return _bridge_pair(reps[i], reps[j], k, size_bound, escalation_bound)


def cmd_check_theorem(args, config, rb):
    if not args.corpus:
        raise UsageError("--corpus is required")
    corpus = load_corpus(args.corpus)
    k = args.k if args.k is not None else config.bounds["k_max"]
    size_bound = args.size_bound if args.size_bound is not None else ORACLE_SIZE_BOUND
    escalation_bound = size_bound + ORACLE_ESCALATION
    d = args.d
    items: list[tuple[Structure, str]] = []
    if d is None:
        for idx, (s, _) in enumerate(corpus.entries):
            items.append((s, f"entry {idx}"))
    else:
        for idx, (s, t) in enumerate(corpus.entries):
            anchors = [t] if t else [(e,) for e in range(s.universe_size)]
            for anchor in anchors:
                items.append(
                    (
                        neighborhood(s, anchor, d),
                        f"entry {idx} anchor {list(anchor)} radius {d}",
                    )
                )
    reps: list[Structure] = []
    origins: list[str] = []
    seen: dict[bytes, int] = {}
    for s, origin in items:
        key = canonical_form(s)
        if key not in seen:
            seen[key] = len(reps)
            reps.append(s)
            origins.append(origin)
    table = [rb.structure_index(s) for s in reps]
    rb.set_inputs(
        corpus=args.corpus,
        entries=len(corpus.entries),
        pool=len(items),
        representatives=len(reps),
        origins=origins,
        k=k,
        d=d,
        size_bound=size_bound,
        escalation_bound=escalation_bound,
    )
    rb.set_interpretation(
        "candidate_rank",
        "candidate structures are ranked by the tree-depth of their "
        "constant-free part; named constants cost no quantifier",
    )
    if d is not None:
        rb.set_interpretation(
            "unanchored_entries",
            "corpus entries without designated tuples contribute one "
            "neighborhood per single-element anchor",
        )
    pairs = [(i, j) for i in range(len(reps)) for j in range(i + 1, len(reps))]
    if config.jobs > 1 and len(pairs) > 1:
        # warm the per-representative signature caches once in the parent;
        # forked workers inherit them instead of each recomputing the lot
        for s in reps:
            pp_agree_oracle(s, s, k, size_bound)
        texts = [serialize_structure(s) for s in reps]
        ctx = get_context()
        with ctx.Pool(
            processes=config.jobs,
            initializer=_ct_init,
            initargs=(texts, k, size_bound, escalation_bound),
        ) as pool:
            chunk = max(1, len(pairs) // (config.jobs * 4))
            results = list(pool.imap(_ct_pair, pairs, chunksize=chunk))
    else:
        results = [
            _bridge_pair(reps[i], reps[j], k, size_bound, escalation_bound)
            for i, j in pairs
        ]
    mismatches = 0
    escalations = 0
    for (i, j), (game, status, escalated, sep_text, hom_left, hom_right) in zip(
        pairs, results
    ):
        ok = game == (status == "agree")
        if escalated:
            escalations += 1
        if not ok:
            mismatches += 1
        separator = (
            None if sep_text is None else rb.structure_index(parse_structure(sep_text))
        )
        rb.add_check(
            "bridge-pair",
            left=table[i],
            right=table[j],
            k=k,
            size_bound=size_bound,
            escalation_bound=escalation_bound,
            game_equivalent=game,
            oracle_status=status,
            escalated=escalated,
            separator=separator,
            separator_hom_to_left=hom_left,
            separator_hom_to_right=hom_right,
            ok=ok,
        )
    rb.set_summary(
        pairs=len(pairs),
        mismatches=mismatches,
        escalations=escalations,
        outcome="pass" if mismatches == 0 else "mismatch",
    )
    return EXIT_VIOLATION if mismatches else EXIT_OK


# ---------------------------------------------------------------------------
# generation and replay


def cmd_generate(args, config, rb):
    if args.kind is None:
        raise UsageError("--kind is required")
    if args.n is None:
        raise UsageError("--n is required")
    s = generate(args.kind, args.n, density=args.density, seed=config.seed)
    rb.set_inputs(kind=args.kind, n=args.n, density=args.density)
    rb.add_check(
        "generate",
        generator=args.kind,
        n=args.n,
        density=args.density,
        seed=config.seed,
        structure=rb.structure_index(s),
    )
    if args.structure_out:
        try:
            with open(args.structure_out, "w", encoding="utf-8") as fh:
                fh.write(serialize_structure(s))
        except OSError as e:
            raise UsageError(f"cannot write {args.structure_out}: {e}") from e
        rb.set_inputs(structure_out=args.structure_out)
    rb.set_summary(universe=s.universe_size)
    return EXIT_OK


def cmd_replay(args, config, rb):
    if not args.report:
        raise UsageError("--report is required")
    if args.check is None:
        raise UsageError("--check is required")
    try:
        report = load_report(args.report)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot load report {args.report}: {e}") from e
    checks = report.get("checks", [])
    if not 0 <= args.check < len(checks):
        raise UsageError(
            f"--check {args.check} out of range; report has {len(checks)} check(s)"
        )
    record = checks[args.check]
    try:
        structures = [parse_structure(t) for t in report.get("structures", [])]
    except StructureParseError as e:
        raise UsageError(f"report structure table is corrupt: {e}") from e
    replayer = REPLAYERS.get(record.get("kind"))
    if replayer is None:
        raise UsageError(f"check kind {record.get('kind')!r} has no replay procedure")
    reproduced = bool(replayer(record, structures, report))
    rb.set_inputs(report=args.report, check=args.check, source_kind=record["kind"])
    rb.add_check(
        "replay",
        source_report=args.report,
        source_check=args.check,
        source_kind=record["kind"],
        reproduced=reproduced,
    )
    rb.set_summary(reproduced=reproduced)
    return EXIT_OK if reproduced else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# replay procedures, one per replayable check kind


def _replay_gaifman(rec, structures, report):
    g = gaifman_graph(structures[rec["structure"]])
    return sorted([list(e) for e in g.edges]) == rec["edges"]


def _replay_neighborhood(rec, structures, report):
    result = neighborhood(structures[rec["source"]], tuple(rec["anchor"]), rec["d"])
    return serialize_structure(result) == serialize_structure(structures[rec["result"]])


def _replay_iso(rec, structures, report):
    a, b = structures[rec["left"]], structures[rec["right"]]
    verdict = is_isomorphic(a, b) is not None
    if verdict != rec["verdict"]:
        return False
    if rec["mapping"] is not None:
        return verify_isomorphism(a, b, Isomorphism(tuple(rec["mapping"])))
    return True


def _replay_hom(rec, structures, report):
    a, b = structures[rec["source"]], structures[rec["target"]]
    verdict = find_hom(a, b) is not None
    if verdict != rec["verdict"]:
        return False
    if rec["mapping"] is not None:
        return verify_homomorphism(a, b, Homomorphism(tuple(rec["mapping"])))
    return True


def _replay_core(rec, structures, report):
    recomputed = core(structures[rec["input"]])
    return is_isomorphic(recomputed, structures[rec["core"]]) is not None


def _replay_treedepth(rec, structures, report):
    s = structures[rec["structure"]]
    if tree_depth(s) != rec["value"]:
        return False
    parent = rec["forest"]
    if len(parent) != s.universe_size:
        return False
    if forest_height(parent) != rec["value"]:
        return False
    # every Gaifman edge must join an ancestor/descendant pair
    ancestors = []
    for v in range(len(parent)):
        chain = set()
        x = v
        while x >= 0:
            chain.add(x)
            x = parent[x]
        ancestors.append(chain)
    return all(
        u in ancestors[v] or v in ancestors[u] for u, v in gaifman_graph(s).edges
    )


def _replay_kcore(rec, structures, report):
    s = structures[rec["input"]]
    result = k_core_search(s, rec["k"], rec["size_bound"])
    if rec["found"] != (result is not None):
        return False
    if rec["result"] is not None:
        return khom_equivalent(structures[rec["result"]], s, rec["k"])
    return True


def _replay_efgame(rec, structures, report):
    return rec["verdict"] == ef_equivalent(
        structures[rec["left"]],
        tuple(rec["left_tuple"]),
        structures[rec["right"]],
        tuple(rec["right_tuple"]),
        rec["k"],
    )


def _replay_forth(rec, structures, report):
    opening = None if rec["opening"] is None else [tuple(p) for p in rec["opening"]]
    return rec["verdict"] == forth_khom(
        structures[rec["source"]], structures[rec["target"]], opening, rec["k"]
    )


def _replay_khom_equiv(rec, structures, report):
    return rec["verdict"] == khom_equivalent(
        structures[rec["left"]], structures[rec["right"]], rec["k"]
    )


def _replay_pp_oracle(rec, structures, report):
    a, b = structures[rec["left"]], structures[rec["right"]]
    result = pp_agree_oracle(a, b, rec["k"], rec["size_bound"])
    if result.status != rec["status"]:
        return False
    if rec["separator"] is not None:
        sep = structures[rec["separator"]]
        to_left = find_hom(sep, a) is not None
        to_right = find_hom(sep, b) is not None
        if to_left == to_right:
            return False
        if (
            to_left != rec["separator_hom_to_left"]
            or to_right != rec["separator_hom_to_right"]
        ):
            return False
    return True


def _replay_extendable(rec, structures, report):
    s = structures[rec["structure"]]
    if rec["pool_source"] == "corpus":
        pool = _corpus_from_report(report, structures).structures()
    elif fast_candidates_supported(s.vocab):
        pool = fast_candidates(s.vocab, rec["k"], rec["size_bound"])
    else:
        pool = list(td_bounded_structures(s.vocab, rec["k"], rec["size_bound"]))
    result = k_extendable(s, rec["k"], pool)
    if result.passed != rec["passed"]:
        return False
    if not rec["passed"] and rec["candidate"] is not None:
        # the recorded candidate must still defeat extendability on its own
        rerun = k_extendable(s, rec["k"], [structures[rec["candidate"]]])
        return not rerun.passed
    return True


def _replay_lemma1_violation(rec, structures, report):
    corpus = _corpus_from_report(report, structures)
    pool = corpus.structures()
    a = pool[rec["left_entry"]]
    b = pool[rec["right_entry"]]
    return (
        k_extendable(a, rec["k"], pool).passed
        and k_extendable(b, rec["k"], pool).passed
        and khom_equivalent(a, b, rec["n"])
        and not ef_equivalent(a, (), b, (), rec["k"])
    )


def _replay_d_equiv(rec, structures, report):
    bijection = d_equivalent(
        structures[rec["left"]],
        tuple(rec["left_tuple"]),
        structures[rec["right"]],
        tuple(rec["right_tuple"]),
        rec["d"],
        _kind_from_json(rec["equivalence"]),
    )
    if rec["verdict"] != (bijection is not None):
        return False
    if rec["bijection"] is not None:
        return bijection is not None and list(bijection) == rec["bijection"]
    return True


def _replay_locality_violation(rec, structures, report):
    style = rec["style"]
    if style in ("gaifman", "hanf"):
        kind = _kind_from_json(rec["equivalence"])
        s1, t1 = structures[rec["left"]], tuple(rec["left_tuple"])
        s2, t2 = structures[rec["right"]], tuple(rec["right_tuple"])
        q = parse_query(rec["query"], s1.vocab)
        in1 = t1 in set(query_answers(q, s1))
        in2 = t2 in set(query_answers(q, s2))
        if in1 != rec["left_in_query"] or in2 != rec["right_in_query"] or in1 == in2:
            return False
        if style == "gaifman":
            return neighborhoods_equivalent(s1, t1, s2, t2, rec["d"], kind)
        bijection = d_equivalent(s1, t1, s2, t2, rec["d"], kind)
        if bijection is None:
            return False
        return rec["witness"] is None or list(bijection) == rec["witness"]
    # the hypothesis of the homiso styles depends on the whole corpus pool,
    # so re-run the rank search and look for the cited violation
    corpus = _corpus_from_report(report, structures)
    q = parse_query(rec["query"], corpus.entries[0][0].vocab)
    d_max = report["summary"]["d_max"]
    if style == "homiso-gaifman":
        rank_report = homiso_gaifman_rank(q, corpus, d_max)
    elif style == "homiso-hanf":
        rank_report = homiso_hanf_rank(q, corpus, d_max)
    else:
        raise ValidationError(f"unknown locality style {style!r}")
    return any(
        v.d == rec["d"]
        and v.left_index == rec["left_entry"]
        and list(v.left_tuple) == rec["left_tuple"]
        and v.right_index == rec["right_entry"]
        and list(v.right_tuple) == rec["right_tuple"]
        for v in rank_report.counterexamples
    )


def _replay_elocal(rec, structures, report):
    corpus = _corpus_from_report(report, structures)
    return sorted(e_local_objects(corpus)) == rec["local_entries"]


def _replay_diagram(rec, structures, report):
    result = diagram_check(
        structures[rec["left"]],
        tuple(rec["left_tuple"]),
        structures[rec["right"]],
        tuple(rec["right_tuple"]),
        rec["d"],
        rec["k"],
        rec["size_bound"],
    )
    return (
        result.lhs == rec["lhs"]
        and result.cores_isomorphic == rec["cores_isomorphic"]
        and result.leg_a == rec["leg_left"]
        and result.leg_b == rec["leg_right"]
        and result.rhs == rec["rhs"]
        and result.holds == rec["holds"]
        and result.inconclusive == rec["inconclusive"]
    )


def _replay_ho_class(rec, structures, report):
    rep = structures[rec["representative"]]
    for idx in rec["members"]:
        member = structures[idx]
        if find_hom(member, rep) is None or find_hom(rep, member) is None:
            return False
    return True


def _replay_pointed(rec, structures, report):
    base = structures[rec["base"]]
    total = structures[rec["total"]]
    valid, _ = _build_pointed(
        base, total, tuple(rec["section"]), tuple(rec["retraction"])
    )
    return valid == rec["valid"]


def _replay_bridge_pair(rec, structures, report):
    a, b = structures[rec["left"]], structures[rec["right"]]
    game = khom_equivalent(a, b, rec["k"])
    result = pp_agree_oracle(a, b, rec["k"], rec["size_bound"])
    escalated = False
    if not game and result.status == "agree":
        result = pp_agree_oracle(a, b, rec["k"], rec["escalation_bound"])
        escalated = True
    if (
        game != rec["game_equivalent"]
        or result.status != rec["oracle_status"]
        or escalated != rec["escalated"]
    ):
        return False
    if rec["separator"] is not None:
        sep = structures[rec["separator"]]
        to_left = find_hom(sep, a) is not None
        to_right = find_hom(sep, b) is not None
        if to_left == to_right:
            return False
        if (
            to_left != rec["separator_hom_to_left"]
            or to_right != rec["separator_hom_to_right"]
        ):
            return False
    return True


def _replay_generate(rec, structures, report):
    s = generate(rec["generator"], rec["n"], density=rec["density"], seed=rec["seed"])
    return serialize_structure(s) == serialize_structure(structures[rec["structure"]])


REPLAYERS = {
    "gaifman": _replay_gaifman,
    "neighborhood": _replay_neighborhood,
    "iso": _replay_iso,
    "hom": _replay_hom,
    "core": _replay_core,
    "treedepth": _replay_treedepth,
    "kcore": _replay_kcore,
    "efgame": _replay_efgame,
    "forth": _replay_forth,
    "khom-equiv": _replay_khom_equiv,
    "pp-oracle": _replay_pp_oracle,
    "extendable": _replay_extendable,
    "lemma1-violation": _replay_lemma1_violation,
    "d-equiv": _replay_d_equiv,
    "locality-violation": _replay_locality_violation,
    "elocal": _replay_elocal,
    "diagram": _replay_diagram,
    "ho-class": _replay_ho_class,
    "pointed": _replay_pointed,
    "bridge-pair": _replay_bridge_pair,
    "generate": _replay_generate,
}


# ---------------------------------------------------------------------------
# parser and dispatch


HANDLERS = {
    "gaifman": cmd_gaifman,
    "nbhd": cmd_nbhd,
    "iso": cmd_iso,
    "hom": cmd_hom,
    "core": cmd_core,
    "treedepth": cmd_treedepth,
    "kcore": cmd_kcore,
    "efgame": cmd_efgame,
    "forth": cmd_forth,
    "khom-equiv": cmd_khom_equiv,
    "pp-oracle": cmd_pp_oracle,
    "extendable": cmd_extendable,
    "lemma1": cmd_lemma1,
    "d-equiv": cmd_d_equiv,
    "gaifman-rank": cmd_gaifman_rank,
    "hanf-rank": cmd_hanf_rank,
    "elocal": cmd_elocal,
    "homiso-rank": cmd_homiso_rank,
    "diagram-check": cmd_diagram_check,
    "ho-quotient": cmd_ho_quotient,
    "pointed": cmd_pointed,
    "check-theorem": cmd_check_theorem,
    "replay": cmd_replay,
    "generate": cmd_generate,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="determinism seed, echoed into the report")
    p.add_argument("--jobs", type=int, default=1, help="worker count for fan-out subcommands")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument(
        "--timing",
        action="store_true",
        help="record wall-clock timing (off by default so equal runs stay byte-identical)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmlocal",
        description=(
            "Workbench for finite relational structures: homomorphism "
            "games, bounded-rank agreement oracles, cores, and "
            "neighborhood locality checks.  Every run writes a "
            "deterministic JSON report; the FMLOCAL_BOUNDS environment "
            "variable (name=value,... over canonical_size, hom_limit, "
            "kcore_size, d_max, k_max) overrides the default bounds and "
            "is echoed into every report."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, help_text, *, inputs=False, corpus=False, k=False, d=False,
            d_max=False, size_bound=False, kind=False, query=False, anchors=False):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if inputs:
            p.add_argument(
                "--in", dest="inputs", action="append", default=[], metavar="FILE",
                help="structure file (repeatable)",
            )
        if corpus:
            p.add_argument("--corpus", help="corpus directory or manifest file")
        if k:
            p.add_argument("--k", type=int, help="round count / rank bound")
        if d:
            p.add_argument("--d", type=int, help="neighborhood radius")
        if d_max:
            p.add_argument("--d-max", dest="d_max", type=int, help="radius ceiling")
        if size_bound:
            p.add_argument("--size-bound", dest="size_bound", type=int, help="universe-size ceiling for bounded searches")
        if kind:
            p.add_argument(
                "--kind", choices=("iso", "khom", "fo", "coreiso"), default="iso",
                help="neighborhood equivalence notion",
            )
        if query:
            p.add_argument("--query", metavar="FILE", help="query file: a 'vars ...' line then one formula")
        if anchors:
            p.add_argument("--anchor", help="designated tuple of the first structure, e.g. 0,1")
            p.add_argument("--anchor-b", dest="anchor_b", help="designated tuple of the second structure")
        return p

    add("gaifman", "adjacency graph of co-occurrence in tuples", inputs=True)
    p = add("nbhd", "induced neighborhood of a designated tuple", inputs=True, d=True)
    p.add_argument("--anchor", help="designated tuple, e.g. 0,1")
    add("iso", "isomorphism test with witness", inputs=True)
    add("hom", "homomorphism search with witness", inputs=True)
    add("core", "minimum retract", inputs=True)
    add("treedepth", "tree-depth with an elimination forest witness", inputs=True)
    add("kcore", "smallest bounded-rank-equivalent structure within a size bound",
        inputs=True, k=True, size_bound=True)
    add("efgame", "back-and-forth round-game equivalence", inputs=True, k=True, anchors=True)
    p = add("forth", "one-sided existential round game", inputs=True, k=True)
    p.add_argument("--opening", help="opening position pairs x:y,x:y")
    add("khom-equiv", "mutual one-sided round-game equivalence", inputs=True, k=True)
    add("pp-oracle", "bounded agreement oracle over rank-limited existential positive sentences",
        inputs=True, k=True, size_bound=True)
    add("extendable", "extension-property audit against a candidate pool",
        inputs=True, corpus=True, k=True, size_bound=True)
    p = add("lemma1", "extendability plus forth-equivalence forces game equivalence",
            corpus=True, k=True)
    p.add_argument("--n", type=int, help="forth-equivalence round count (default: --k)")
    add("d-equiv", "matching-based equivalence of all single-element extensions",
        inputs=True, d=True, kind=True, k=True, size_bound=True, anchors=True)
    add("gaifman-rank", "least radius at which equivalent neighborhoods agree on the query",
        corpus=True, query=True, kind=True, k=True, d_max=True, size_bound=True)
    add("hanf-rank", "least radius at which extension-matched structures agree on designated tuples",
        corpus=True, query=True, kind=True, k=True, d_max=True, size_bound=True)
    add("elocal", "objects whose hom-sets invert every corpus weak equivalence", corpus=True)
    p = add("homiso-rank", "locality rank under the weak-equivalence/hom-set hypothesis",
            corpus=True, query=True, d_max=True)
    p.add_argument("--style", choices=("gaifman", "hanf"), default="gaifman",
                   help="per-tuple or per-structure form")
    add("diagram-check", "bounded-rank equivalence of neighborhoods vs a shared bounded core",
        inputs=True, d=True, k=True, size_bound=True, anchors=True)
    add("ho-quotient", "hom-equivalence classes with core representatives", corpus=True)
    p = add("pointed", "validate or build split section/retraction data over a base", inputs=True)
    p.add_argument("--section", help="base-to-total mapping, e.g. 0,1")
    p.add_argument("--retraction", help="total-to-base mapping")
    add("check-theorem", "game-vs-oracle agreement across all corpus pairs",
        corpus=True, k=True, d=True, size_bound=True)
    p = add("replay", "re-verify one check record from an earlier report")
    p.add_argument("--report", metavar="FILE", help="report to replay from")
    p.add_argument("--check", type=int, metavar="N", help="check index to re-verify")
    p = add("generate", "write a standard one-relation structure")
    p.add_argument("--kind", choices=GENERATOR_KINDS, help="generator family")
    p.add_argument("--n", type=int, help="universe size")
    p.add_argument("--density", type=float, default=0.5, help="edge density for --kind random")
    p.add_argument("--structure-out", dest="structure_out", metavar="FILE",
                   help="write the structure itself here (the report still goes to --out)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    raw_env = os.environ.get(BOUNDS_ENV_VAR)
    try:
        bounds = bounds_from_env(raw_env)
        config = RunConfig(
            seed=args.seed, bounds=bounds, jobs=args.jobs, out=args.out,
            bounds_env=raw_env,
        )
    except ValidationError as e:
        print(f"fmlocal: {e}", file=sys.stderr)
        return EXIT_USAGE
    rb = ReportBuilder(args.command, config)
    started = time.perf_counter()
    try:
        code = HANDLERS[args.command](args, config, rb)
    except (
        UsageError,
        StructureParseError,
        FormulaParseError,
        VocabularyMismatchError,
        ValidationError,
        OSError,
    ) as e:
        print(f"fmlocal: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InconclusiveError, BoundExceededError) as e:
        rb.set_summary(outcome="inconclusive", reason=str(e))
        code = EXIT_INCONCLUSIVE
    timing = (
        {"seconds": round(time.perf_counter() - started, 3)} if args.timing else None
    )
    try:
        emit_report(rb.finish(timing), config.out)
    except OSError as e:
        print(f"fmlocal: cannot write report: {e}", file=sys.stderr)
        return EXIT_USAGE
    return code
