"""Proof-corpus tooling for Rocq scripts: parsing, sub-proof mining,
proof-aware distances, contrastive pair datasets, correlation analysis, and
premise-selection ranking."""

__version__ = "0.1.0"

from .analysis import (
    CorrelationReport,
    DegenerateInput,
    average_ranks,
    correlation_experiment,
    distance_histogram,
    pearson,
    spearman,
)
from .corpus import Corpus, corpus_filename, record_from_obj, record_to_obj
from .metrics import (
    Bm25Index,
    Bm25Params,
    DistanceParams,
    bm25_scores,
    char_levenshtein,
    jaccard_proof_distance,
    jaccard_statement_similarity,
    proof_distance,
    proof_levenshtein,
    tactic_substitution_cost,
)
from .pairs import (
    Label,
    LabeledPair,
    MiningConfig,
    SplitAssignment,
    TooFewFiles,
    all_pair_distances,
    build_dataset,
    export_dataset,
    label_pair,
    mine_labeled_pairs,
    split_by_file,
)
from .parsing import (
    Bullet,
    CloseBrace,
    Diagnostic,
    OpenBrace,
    RecordOrigin,
    Severity,
    SourceFile,
    Tactic,
    TacticSequence,
    TheoremKind,
    TheoremRecord,
    detect_goal_selectors,
    parse_file,
    split_tactics,
    tokenize_statement,
)
from .ranking import (
    Bm25Scorer,
    DimMismatch,
    EmbeddingFormatError,
    EmbeddingMissing,
    EmbeddingScorer,
    EmbeddingStore,
    EmptyPool,
    EvaluationReport,
    JaccardScorer,
    MockGenerator,
    NotNormalized,
    RankedResult,
    RankerError,
    Scorer,
    evaluate_ranker,
    load_embeddings,
    make_scorer,
    rank_similar,
    save_embeddings,
    top_k,
)
from .treemine import (
    GoalOracle,
    GoalSelectorUnsupported,
    KOutOfRange,
    MalformedBullets,
    MinedRecord,
    ProofNode,
    ProofTree,
    TreeError,
    UnknownNode,
    build_tree,
    linearize,
    mine_after_k,
    mine_subproofs,
    mined_to_record,
)

__all__ = [
    "__version__",
    # parsing
    "Bullet",
    "OpenBrace",
    "CloseBrace",
    "Tactic",
    "TacticSequence",
    "TheoremKind",
    "TheoremRecord",
    "RecordOrigin",
    "SourceFile",
    "Severity",
    "Diagnostic",
    "parse_file",
    "split_tactics",
    "detect_goal_selectors",
    "tokenize_statement",
    # trees and mining
    "TreeError",
    "MalformedBullets",
    "GoalSelectorUnsupported",
    "UnknownNode",
    "KOutOfRange",
    "ProofNode",
    "ProofTree",
    "GoalOracle",
    "MinedRecord",
    "build_tree",
    "linearize",
    "mine_subproofs",
    "mine_after_k",
    "mined_to_record",
    # metrics
    "char_levenshtein",
    "tactic_substitution_cost",
    "proof_levenshtein",
    "jaccard_proof_distance",
    "jaccard_statement_similarity",
    "proof_distance",
    "DistanceParams",
    "Bm25Params",
    "Bm25Index",
    "bm25_scores",
    # corpus
    "Corpus",
    "corpus_filename",
    "record_to_obj",
    "record_from_obj",
    # pairs
    "Label",
    "LabeledPair",
    "MiningConfig",
    "SplitAssignment",
    "TooFewFiles",
    "all_pair_distances",
    "label_pair",
    "mine_labeled_pairs",
    "split_by_file",
    "export_dataset",
    "build_dataset",
    # analysis
    "DegenerateInput",
    "CorrelationReport",
    "pearson",
    "spearman",
    "average_ranks",
    "distance_histogram",
    "correlation_experiment",
    # ranking
    "RankerError",
    "EmptyPool",
    "EmbeddingMissing",
    "EmbeddingFormatError",
    "DimMismatch",
    "NotNormalized",
    "RankedResult",
    "Scorer",
    "JaccardScorer",
    "Bm25Scorer",
    "EmbeddingScorer",
    "EmbeddingStore",
    "load_embeddings",
    "save_embeddings",
    "make_scorer",
    "top_k",
    "rank_similar",
    "MockGenerator",
    "EvaluationReport",
    "evaluate_ranker",
]
