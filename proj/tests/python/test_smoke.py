"""Smoke tests for the python bindings."""
import math

import pytest

import kidlmforge as kf


@pytest.fixture(scope="module")
def lexicon():
    return kf.load_bundled_lexicons()


def test_lexicon_counts(lexicon):
    assert lexicon.stopword_count == 179
    assert lexicon.dalechall_count == 2807
    assert lexicon.overlap_removed == 143


def test_normalize_and_classify(lexicon):
    assert kf.normalize_word("The,") == "the"
    assert kf.classify_word("she", lexicon) == "stopword"
    assert kf.classify_word("butterfly", lexicon) == "dalechall"
    assert kf.classify_word("spaghetti", lexicon) == "other"


def test_segmentation_and_words():
    sents = kf.segment_sentences("Cats purr. Dogs bark.")
    assert [s for s, _ in sents] == ["Cats purr.", "Dogs bark."]
    assert kf.word_segment("The quick, brown fox!") == [
        "The", "quick", "brown", "fox"]


def test_scrub_pii():
    clean, counts = kf.scrub_pii("mail me at a.b@example.com")
    assert clean == "mail me at [EMAIL]"
    assert counts["email"] == 1


def test_detect_language():
    lang, conf = kf.detect_language(
        "The children walked to school and read their books.")
    assert lang == "en"
    assert conf >= 0.9


def test_masking_deterministic(lexicon):
    policy = kf.kidlm_plus_policy(seed=7)
    words = ["she", "saw", "a", "tiny", "butterfly", "yesterday"]
    a = kf.mask_words(words, lexicon, policy, example_index=3)
    b = kf.mask_words(words, lexicon, policy, example_index=3)
    assert a == b
    assert all(a["labels"][p] == words[p] for p in a["mask_positions"])


def test_mask_rates_roughly_stratified(lexicon):
    policy = kf.kidlm_plus_policy(seed=11)
    masked = {"stopword": 0, "dalechall": 0, "other": 0}
    total = {"stopword": 0, "dalechall": 0, "other": 0}
    words = ["she", "butterfly", "spaghetti"] * 5
    for i in range(4000):
        ex = kf.mask_words(words, lexicon, policy, example_index=i)
        for w in words:
            total[kf.classify_word(w, lexicon)] += 1
        for stratum in ex["strata"].values():
            masked[stratum] += 1
    assert abs(masked["stopword"] / total["stopword"] - 0.15) < 0.02
    assert abs(masked["dalechall"] / total["dalechall"] - 0.20) < 0.02
    assert abs(masked["other"] / total["other"] - 0.25) < 0.02


def test_expected_mask_fraction():
    policy = kf.kidlm_plus_policy()
    value = kf.expected_mask_fraction(0.4593, 0.2182, 0.3245, policy)
    assert abs(value - 0.19366) < 1e-9


def test_scorer_and_ppl():
    scorer = kf.fit_reference_scorer(
        ["the cat sat on the mat. the dog ran in the park."], smoothing=1.0)
    dists = scorer.score_masked(["the", "[MASK]"], [1])
    assert len(dists) == 1
    mass = sum(math.exp(lp) for _, lp in dists[0])
    assert abs(mass - 1.0) < 1e-9

    ppl, oov = kf.pseudo_perplexity(["the", "cat"], scorer)
    assert ppl > 1.0
    assert oov == 0


def test_mlm_loss_identity(lexicon):
    example = {
        "id": "e",
        "tokens": ["[MASK]"],
        "mask_positions": [0],
        "labels": {0: "a"},
    }
    loss = kf.mlm_loss(example, [[("a", math.log(0.5)), ("b", math.log(0.5))]])
    assert abs(loss - math.log(2.0)) < 1e-12


def test_stereotype_prompts():
    prompts = kf.build_stereotype_prompts(
        str(kf.data_dir() / "social_groups.json"), form="masked")
    assert len(prompts) == 151
    kids = [p for p in prompts if p["group"] == "kids"]
    assert kids and kids[0]["text"] == "why are kids so [MASK]"


def test_cloze_and_simplification():
    scorer = kf.fit_reference_scorer(
        ["kids love pizza. kids love pasta. kids love stories."],
        smoothing=1.0)
    top = kf.cloze_topk("kids love [MASK].", scorer, k=3)
    assert len(top) == 3
    assert all(p > 0 for _, p in top)

    subs = kf.lexical_simplification(
        ["kids", "love", "pizza"], 2, 3, scorer, k=2)
    assert all(tok != "pizza" for tok, _ in subs)
