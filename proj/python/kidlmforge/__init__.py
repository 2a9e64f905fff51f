"""Python surface for the kidlm-forge core.

The heavy lifting lives in the `_kidlmforge` extension module; this package
re-exports it and adds path helpers for the bundled data files.
"""
import os
import pathlib

from _kidlmforge import (  # noqa: F401
    KidlmError,
    MaskingPolicy,
    ReferenceScorer,
    StrataLexicon,
    build_stereotype_prompts,
    classify_word,
    cloze_topk,
    detect_language,
    expected_mask_fraction,
    fit_reference_scorer,
    kidlm_policy,
    kidlm_plus_policy,
    lexical_simplification,
    load_lexicons,
    mask_words,
    mlm_loss,
    normalize_word,
    parse_policy,
    pseudo_perplexity,
    scrub_pii,
    segment_sentences,
    strata_proportions,
    word_segment,
)

__version__ = "0.1.0"


def data_dir() -> pathlib.Path:
    """Directory holding the bundled lexicons and templates."""
    env = os.environ.get("KIDLM_DATA_DIR")
    if env:
        return pathlib.Path(env)
    here = pathlib.Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "data"
        if (candidate / "lexicons" / "stopwords_en.txt").exists():
            return candidate
    raise FileNotFoundError(
        "bundled data directory not found; set KIDLM_DATA_DIR")


def load_bundled_lexicons() -> StrataLexicon:
    d = data_dir()
    return load_lexicons(
        str(d / "lexicons" / "stopwords_en.txt"),
        str(d / "lexicons" / "dale_chall_familiar_words.txt"),
    )
