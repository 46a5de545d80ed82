"""Cross-lingual word embedding alignment and lexicon-induction evaluation."""

from .embeddings import (
    DEFAULT_MAX_VOCAB,
    EmbeddingSpace,
    frequency_cut,
    load_embeddings,
    save_aligned,
)
from .errors import ConfigError, DegenerateSeedError, FormatError
from .evaluation import (
    DEFAULT_CSLS_K,
    HARD_FAIL_MRR,
    WEAK_FAIL_MRR,
    BliReport,
    classify_success,
    csls_scores,
    evaluate_bli,
    group_test_pairs,
)
from .harness import (
    CONFIG_NAMES,
    AggregateTable,
    ExperimentReport,
    ModelConfig,
    RestartResult,
    SeedSource,
    aggregate_reports,
    generate_synthetic_pair,
    run_experiment,
)
from .seed import (
    DEFAULT_SEED_VOCAB,
    Dictionary,
    identical_strings_seed,
    induce_unsupervised_seed,
    load_dictionary,
    read_word_pairs,
    similarity_profiles,
)
from .self_learning import (
    DEFAULT_VOCAB_CUT,
    LearningTrace,
    SelfLearnConfig,
    induce_dictionary,
    self_learn,
)
from .transforms import (
    ProjectionModel,
    WhiteningTransform,
    full_projection_step,
    length_normalize,
    normalize_rows,
    s1_normalize,
    solve_orthogonal,
    whitening_transform,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateTable",
    "BliReport",
    "CONFIG_NAMES",
    "ConfigError",
    "DEFAULT_CSLS_K",
    "DEFAULT_MAX_VOCAB",
    "DEFAULT_SEED_VOCAB",
    "DEFAULT_VOCAB_CUT",
    "DegenerateSeedError",
    "Dictionary",
    "EmbeddingSpace",
    "ExperimentReport",
    "FormatError",
    "HARD_FAIL_MRR",
    "LearningTrace",
    "ModelConfig",
    "ProjectionModel",
    "RestartResult",
    "SeedSource",
    "SelfLearnConfig",
    "WEAK_FAIL_MRR",
    "WhiteningTransform",
    "aggregate_reports",
    "classify_success",
    "csls_scores",
    "evaluate_bli",
    "frequency_cut",
    "full_projection_step",
    "generate_synthetic_pair",
    "group_test_pairs",
    "identical_strings_seed",
    "induce_dictionary",
    "induce_unsupervised_seed",
    "length_normalize",
    "load_dictionary",
    "load_embeddings",
    "normalize_rows",
    "read_word_pairs",
    "run_experiment",
    "s1_normalize",
    "save_aligned",
    "self_learn",
    "similarity_profiles",
    "solve_orthogonal",
    "whitening_transform",
]
