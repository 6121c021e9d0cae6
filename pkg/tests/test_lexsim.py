import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsearch.lexsim import (
    Lexicon,
    LexiconError,
    Synset,
    fit_tfidf,
    load_lexicon,
    sense_similarity,
    sentence_similarity,
    tokenize,
    word_contribution,
)

from synth import build_topic_lexicon


class TestTokenize:
    def test_length_filter_keeps_order_and_duplicates(self):
        assert tokenize("A man rides the horse.") == ["man", "rides", "the", "horse"]

    def test_all_short_tokens_dropped(self):
        assert tokenize("Of an ox") == []

    def test_case_folding_and_punctuation(self):
        assert tokenize("DOG, dog; Dog!") == ["dog", "dog", "dog"]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_splits_on_non_alphanumeric_runs(self):
        assert tokenize("snow-covered...mountain_top") == ["snow", "covered", "mountain", "top"]


class TestLexiconLoading:
    def _write(self, tmp_path, records):
        path = tmp_path / "lex.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
        return path

    def test_directed_edge_becomes_symmetric(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"id": "a", "lemmas": ["apple"], "neighbors": ["b"]},
                {"id": "b", "lemmas": ["berry"], "neighbors": []},
            ],
        )
        lex = load_lexicon(path)
        assert "a" in lex.synsets["b"].neighbors
        assert "b" in lex.synsets["a"].neighbors

    def test_dangling_neighbor_rejected(self, tmp_path):
        path = self._write(tmp_path, [{"id": "a", "lemmas": ["apple"], "neighbors": ["ghost"]}])
        with pytest.raises(LexiconError, match="missing neighbor"):
            load_lexicon(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = self._write(
            tmp_path,
            [{"id": "a", "lemmas": [], "neighbors": []}, {"id": "a", "lemmas": [], "neighbors": []}],
        )
        with pytest.raises(LexiconError, match="duplicate"):
            load_lexicon(path)

    def test_polysemous_lemma_indexes_both_synsets(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"id": "bank.river", "lemmas": ["bank"], "neighbors": []},
                {"id": "bank.money", "lemmas": ["bank"], "neighbors": []},
            ],
        )
        lex = load_lexicon(path)
        assert lex.synsets_of("bank") == frozenset({"bank.river", "bank.money"})

    def test_self_loop_dropped(self, tmp_path):
        path = self._write(tmp_path, [{"id": "a", "lemmas": ["apple"], "neighbors": ["a"]}])
        lex = load_lexicon(path)
        assert lex.synsets["a"].neighbors == frozenset()


class TestSenseSimilarity:
    def test_identity(self, chain_lexicon):
        assert sense_similarity("dog.n", "dog.n", chain_lexicon) == 1.0

    def test_direct_neighbors(self, chain_lexicon):
        assert sense_similarity("dog.n", "canine.n", chain_lexicon) == 0.5

    def test_two_hops(self, chain_lexicon):
        assert sense_similarity("dog.n", "feline.n", chain_lexicon) == pytest.approx(1 / 3)

    def test_disconnected_components(self, chain_lexicon):
        assert sense_similarity("dog.n", "bird.n", chain_lexicon) == 0.0

    def test_unknown_id(self, chain_lexicon):
        with pytest.raises(LexiconError, match="unknown synset"):
            sense_similarity("dog.n", "nope", chain_lexicon)

    def test_symmetry_over_taxonomy(self):
        lex, _ = build_topic_lexicon(4, 5)
        ids = sorted(lex.synsets)
        for a in ids[::3]:
            for b in ids[::4]:
                assert sense_similarity(a, b, lex) == sense_similarity(b, a, lex)

    def test_equals_one_iff_same_id(self):
        lex, _ = build_topic_lexicon(3, 4)
        ids = sorted(lex.synsets)
        for a in ids:
            for b in ids:
                sim = sense_similarity(a, b, lex)
                assert (sim == 1.0) == (a == b)


class TestWordContribution:
    def test_verbatim_match_wins(self, chain_lexicon):
        sentence = ["bird", "dog"]
        assert word_contribution("dog", sentence, chain_lexicon) == 1.0

    def test_best_sense_pair_at_path_length_one(self, chain_lexicon):
        # "dog" against a sentence containing "canine": best pair is
        # dog.n -- canine.n at distance 1, so the contribution is 0.5.
        assert word_contribution("dog", ["canine", "bird"], chain_lexicon) == 0.5

    def test_no_synsets_no_match_gives_zero(self, chain_lexicon):
        assert word_contribution("zeppelin", ["dog", "bird"], chain_lexicon) == 0.0

    def test_synonym_via_shared_synset(self, chain_lexicon):
        # "cat" and "feline" share a synset: distance 0.
        assert word_contribution("cat", ["feline"], chain_lexicon) == 1.0


class TestTfIdf:
    def test_term_in_all_documents(self):
        model = fit_tfidf([["dog"], ["dog"], ["dog"]])
        assert model.idf_of("dog") == pytest.approx(1.0)

    def test_out_of_vocabulary(self):
        model = fit_tfidf([["dog"], ["cat"], ["cow"]])
        assert model.idf_of("bird") == pytest.approx(math.log(4.0) + 1.0)

    def test_single_document(self):
        model = fit_tfidf([["dog"]])
        assert model.idf_of("dog") == pytest.approx(math.log(2.0 / 2.0) + 1.0)

    def test_df_counts_documents_not_occurrences(self):
        model = fit_tfidf([["dog", "dog", "dog"], ["cat"]])
        assert model.df["dog"] == 1
        assert 1 <= model.df["dog"] <= model.doc_count
        assert all(v > 0 for v in model.idf.values())

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty corpus"):
            fit_tfidf([])


def hand_eq3(terms_a, terms_b, contributions, idf):
    """Independent evaluation of the weighted-average similarity formula."""
    num = den = 0.0
    for term in terms_a:
        t = idf[term]
        num += t * contributions[(term, "b")]
        den += t
    for term in terms_b:
        t = idf[term]
        num += t * contributions[(term, "a")]
        den += t
    return num / den


class TestSentenceSimilarity:
    def test_identical_sentences(self, chain_lexicon):
        model = fit_tfidf([["dog", "bird"], ["cat"]])
        assert sentence_similarity(["dog", "bird"], ["dog", "bird"], chain_lexicon, model) == 1.0

    def test_unrelated_sentences(self, chain_lexicon):
        model = fit_tfidf([["dog"], ["bird"], ["zeppelin"]])
        assert sentence_similarity(["dog"], ["bird"], chain_lexicon, model) == 0.0

    def test_both_empty(self, chain_lexicon):
        model = fit_tfidf([["dog"]])
        assert sentence_similarity([], [], chain_lexicon, model) == 0.0

    def test_one_empty(self, chain_lexicon):
        model = fit_tfidf([["dog"]])
        assert sentence_similarity(["dog"], [], chain_lexicon, model) == 0.0

    def test_hand_evaluated_two_token_sentences(self, chain_lexicon):
        # a = "dog bird", b = "canine bird" over the chain lexicon.
        # Contributions: dog->0.5 (dog.n--canine.n), bird->1 (verbatim),
        # canine->0.5; importances are count * idf over the 2-document corpus.
        docs = [["dog", "bird"], ["canine", "bird"]]
        model = fit_tfidf(docs)
        idf = {
            "dog": math.log(3.0 / 2.0) + 1.0,
            "canine": math.log(3.0 / 2.0) + 1.0,
            "bird": 1.0,
        }
        expected = hand_eq3(
            ["dog", "bird"],
            ["canine", "bird"],
            {
                ("dog", "b"): 0.5,
                ("bird", "b"): 1.0,
                ("canine", "a"): 0.5,
                ("bird", "a"): 1.0,
            },
            idf,
        )
        got = sentence_similarity(["dog", "bird"], ["canine", "bird"], chain_lexicon, model)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(3.4054651081081646 / 4.810930216216329, abs=1e-12)

    def test_duplicating_tokens_leaves_similarity_unchanged(self, chain_lexicon):
        model = fit_tfidf([["dog", "bird"], ["canine", "bird"], ["cat"]])
        a, b = ["dog", "bird"], ["canine", "cat"]
        base = sentence_similarity(a, b, chain_lexicon, model)
        for k in (2, 3, 5):
            assert sentence_similarity(a * k, b * k, chain_lexicon, model) == pytest.approx(
                base, abs=1e-12
            )


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_similarity_symmetric_and_bounded(data):
    lex, topic_words = build_topic_lexicon(4, 6)
    vocab = [w for words in topic_words for w in words] + ["unknownword"]
    docs = [["t0w0", "t1w1"], ["t2w2", "t3w3", "t0w1"]]
    model = fit_tfidf(docs)
    a = data.draw(st.lists(st.sampled_from(vocab), min_size=0, max_size=6))
    b = data.draw(st.lists(st.sampled_from(vocab), min_size=0, max_size=6))
    s_ab = sentence_similarity(a, b, lex, model)
    s_ba = sentence_similarity(b, a, lex, model)
    assert s_ab == s_ba
    assert 0.0 <= s_ab <= 1.0
    if a:
        assert sentence_similarity(a, a, lex, model) == 1.0


def test_word_similarity_prefers_closest_sense_of_polysemous_word():
    # "jaguar" names both a cat synset and a car synset; against "engine"
    # the car sense (distance 1) must win over the cat sense (far away).
    lex = Lexicon(
        {
            "cat.n": Synset("cat.n", frozenset({"jaguar", "cat"}), frozenset()),
            "car.n": Synset("car.n", frozenset({"jaguar", "car"}), frozenset({"engine.n"})),
            "engine.n": Synset("engine.n", frozenset({"engine"}), frozenset({"car.n"})),
        }
    )
    assert lex.word_similarity("jaguar", "engine") == 0.5
    assert lex.word_similarity("engine", "jaguar") == 0.5
