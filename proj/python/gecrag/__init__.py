"""ASR error correction via TF-IDF retrieval-augmented generation."""

from gecrag._core import (  # noqa: F401
    ConfigError,
    DataError,
    EvalReport,
    HypothesisSet,
    IoError,
    KbEntry,
    NormalizationConfig,
    PromptBundle,
    PromptTemplates,
    RetrievalResult,
    ScoredEntry,
    TfIdfIndex,
    __version__,
    align,
    build_index,
    build_prompt,
    corrupt,
    default_templates,
    load_index,
    load_normalization_config,
    load_templates,
    normalize,
    postprocess_output,
    retrieve,
    save_index,
    score_corpus,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EvalReport",
    "HypothesisSet",
    "IoError",
    "KbEntry",
    "NormalizationConfig",
    "PromptBundle",
    "PromptTemplates",
    "RetrievalResult",
    "ScoredEntry",
    "TfIdfIndex",
    "__version__",
    "align",
    "build_index",
    "build_prompt",
    "corrupt",
    "default_templates",
    "load_index",
    "load_normalization_config",
    "load_templates",
    "normalize",
    "postprocess_output",
    "retrieve",
    "save_index",
    "score_corpus",
    "tokenize",
]
