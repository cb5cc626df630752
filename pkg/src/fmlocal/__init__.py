"""fmlocal: a workbench for finite relational structures.

Core layers: structures (vocabularies, relational structures, Gaifman
graphs, neighborhoods, canonical forms), hom (homomorphism search, cores,
tree-depth), games (back-and-forth and one-sided round games,
extendability audits), logic (first-order evaluation and the bounded
agreement oracle over rank-limited existential positive sentences),
locality (neighborhood equivalence notions and locality ranks), homotopy
(morphisms, weak equivalences, quotients, split pointed objects), and a
deterministic report-writing command-line interface.
"""

from .errors import (
    BoundExceededError,
    EnumerationTruncatedError,
    FmlocalError,
    FormulaParseError,
    InconclusiveError,
    InvalidSeedError,
    StructureParseError,
    ValidationError,
    VocabularyMismatchError,
)
from .structures import (
    BINARY_GRAPH_VOCAB,
    GaifmanGraph,
    Isomorphism,
    Structure,
    Vocabulary,
    canonical_form,
    check_same_vocab,
    distance,
    distances_from,
    gaifman_graph,
    generate,
    is_isomorphic,
    neighborhood,
    neighborhood_embedded,
    parse_structure,
    serialize_structure,
    verify_isomorphism,
)
from .hom import (
    Homomorphism,
    anchored_tree_depth,
    compose,
    core,
    core_embedded,
    elimination_forest,
    enumerate_homs,
    find_hom,
    forest_height,
    hom_equivalent,
    is_core,
    k_core_search,
    tree_depth,
    verify_homomorphism,
)
from .games import (
    ExtendabilityResult,
    LemmaViolation,
    ef_equivalent,
    ef_equivalent_reference,
    forth_khom,
    k_extendable,
    khom_equivalent,
    lemma1_audit,
)
from .logic import (
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Not,
    Or,
    PPOracleResult,
    Query,
    Var,
    evaluate,
    format_formula,
    free_variables,
    is_primitive_positive,
    parse_formula,
    parse_query,
    pp_agree_oracle,
    pp_sentence_of_structure,
    quantifier_rank,
    query_answers,
)
from .enumeration import (
    fast_candidates,
    fast_candidates_supported,
    iso_classes,
    td_bounded_structures,
)
from .locality import (
    CoreIso,
    Corpus,
    DiagramReport,
    FO,
    Iso,
    KHom,
    LocalityReport,
    LocalityViolation,
    d_equivalent,
    diagram_check,
    e_local_objects,
    gaifman_rank,
    hanf_rank,
    homiso_gaifman_rank,
    homiso_hanf_rank,
    neighborhoods_equivalent,
    precomposition_bijective,
)
from .homotopy import (
    HoClass,
    LiftedClassification,
    Morphism,
    PointedMorphism,
    PointedObject,
    UnderMorphism,
    UnderObject,
    are_homotopic,
    compose_morphisms,
    compose_pointed,
    ho_quotient,
    identity_morphism,
    initial_under_object,
    is_acyclic_fibration,
    is_cofibrant,
    is_fibrant,
    is_weak_equivalence,
    lifted_class,
    make_pointed,
    make_under,
    quotient_hom_set,
    zero_pointed_object,
)
from .report import (
    DEFAULT_BOUNDS,
    RunConfig,
    TOOL_VERSION,
    bounds_from_env,
    emit_report,
    render_report,
)

__version__ = TOOL_VERSION
