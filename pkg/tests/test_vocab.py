import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cw2v.strmetrics import norm_distance
from cw2v.tokenizer import TokenizedDoc
from cw2v.vocab import (
    SUBSAMPLE_MODES,
    SpellingIndex,
    Vocabulary,
    build_vocab,
    cluster_index,
    cluster_partition,
    index_size,
    load_index,
    save_index,
    subsample_keep_probability,
)
from oracles import average_linkage_merges, clusters_after_k_merges


def docs_from(*sentences):
    return [TokenizedDoc(tokens=tuple(s.split())) for s in sentences]


class TestBuildVocab:
    def test_counts_and_freqs(self):
        vocab = build_vocab(docs_from("a b a", "b c a"))
        assert vocab.counts == {"a": 3, "b": 2, "c": 1}
        assert vocab.total_count == 6
        assert vocab.freq("a") == pytest.approx(0.5)
        assert sum(vocab.freqs.values()) == pytest.approx(1.0)

    def test_min_count_filters_and_renormalizes(self):
        vocab = build_vocab(docs_from("a b a", "b c a"), min_count=2)
        assert set(vocab.counts) == {"a", "b"}
        assert vocab.freq("a") == pytest.approx(3 / 5)
        assert sum(vocab.freqs.values()) == pytest.approx(1.0)

    def test_unknown_word_freq_raises(self):
        vocab = build_vocab(docs_from("a b"))
        with pytest.raises(ValueError):
            vocab.freq("zzz")

    def test_most_common_orders_by_count_then_word(self):
        vocab = build_vocab(docs_from("b a c b a"))
        assert vocab.most_common() == ["a", "b", "c"]
        assert vocab.most_common(2) == ["a", "b"]

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_vocab([])
        with pytest.raises(ValueError):
            build_vocab(docs_from(""))


class TestSubsample:
    def test_modes_exposed(self):
        assert SUBSAMPLE_MODES == ("standard", "literal")

    def test_standard_formula(self):
        vocab = build_vocab(docs_from("a a a a a a a a a b"))
        t = 1e-2
        expected = min(1.0, math.sqrt(t / 0.9))
        assert subsample_keep_probability("a", vocab, t, "standard") == pytest.approx(expected)

    def test_literal_formula_drops_frequent_words(self):
        vocab = build_vocab(docs_from("a a a a a a a a a b"))
        t = 1e-2
        expected = 1.0 - math.sqrt(t / 0.9)
        assert subsample_keep_probability("a", vocab, t, "literal") == pytest.approx(expected)

    def test_rare_word_kept_in_standard_mode(self):
        vocab = build_vocab(docs_from("a a a a a a a a a b"))
        assert subsample_keep_probability("b", vocab, 1e-1, "standard") == 1.0

    def test_clamped_to_unit_interval(self):
        vocab = build_vocab(docs_from("a b"))
        for mode in SUBSAMPLE_MODES:
            for t in (1e-8, 1e-3, 10.0):
                p = subsample_keep_probability("a", vocab, t, mode)
                assert 0.0 <= p <= 1.0

    def test_unknown_mode_rejected(self):
        vocab = build_vocab(docs_from("a b"))
        with pytest.raises(ValueError):
            subsample_keep_probability("a", vocab, 1e-3, "bogus")


class TestIndexSize:
    def test_rounds_rho_fraction(self):
        assert index_size(10000, 0.005) == 50
        assert index_size(977, 0.005) == 5
        assert index_size(77000, 0.005) == 385

    def test_literal_formula_can_reach_zero(self):
        # the formula is not clamped; cluster_index rejects n < 1 with an
        # actionable message instead
        assert index_size(10, 0.001) == 0
        vocab = build_vocab(docs_from("a b c"))
        with pytest.raises(ValueError):
            cluster_index(vocab, 0, seed=0)


class TestClusterIndex:
    @pytest.fixture()
    def vocab(self):
        words = (
            "like liked likes bike mike share shared sharing "
            "win winner winning free freed cat dog door"
        ).split()
        docs = [TokenizedDoc(tokens=tuple(words))]
        return build_vocab(docs)

    def test_exact_cluster_count(self, vocab):
        for n in (2, 5, 9, 16):
            index = cluster_index(vocab, n, seed=0)
            assert len(index) == n
            assert len(set(index.words)) == n

    def test_representatives_come_from_vocab(self, vocab):
        index = cluster_index(vocab, 5, seed=0)
        assert set(index.words) <= set(vocab.counts)

    def test_deterministic_given_seed(self, vocab):
        a = cluster_index(vocab, 6, seed=42)
        b = cluster_index(vocab, 6, seed=42)
        assert a.words == b.words

    def test_seed_affects_random_pick(self, vocab):
        picks = {cluster_index(vocab, 4, seed=s).words for s in range(12)}
        assert len(picks) > 1

    def test_medoid_pick_ignores_seed(self, vocab):
        a = cluster_index(vocab, 6, seed=1, pick="medoid")
        b = cluster_index(vocab, 6, seed=99, pick="medoid")
        assert a.words == b.words

    def test_n_equals_vocab_size_keeps_every_word(self, vocab):
        n = len(vocab)
        index = cluster_index(vocab, n, seed=0)
        assert sorted(index.words) == sorted(vocab.counts)

    def test_n_too_large_rejected(self, vocab):
        with pytest.raises(ValueError):
            cluster_index(vocab, len(vocab) + 1, seed=0)

    def test_partition_matches_bruteforce_average_linkage(self):
        # Compare against a brute-force O(m^3) average-linkage oracle on the
        # same normalized-Levenshtein distances.
        words = ["like", "bike", "mike", "door", "doors", "win", "wins", "zebra"]
        m = len(words)
        dist = np.zeros((m, m))
        for i in range(m):
            for j in range(m):
                if i != j:
                    dist[i, j] = norm_distance(words[i], words[j])
        merges = average_linkage_merges(dist)
        for n_clusters in (2, 3, 4, 6):
            expected_parts = clusters_after_k_merges(m, merges, m - n_clusters)
            expected = {frozenset(words[i] for i in part) for part in expected_parts}
            got = {frozenset(members) for members in cluster_partition(words, n_clusters)}
            assert got == expected

    def test_representative_in_its_cluster(self, vocab):
        ordered = vocab.most_common()
        for n in (3, 6):
            parts = cluster_partition(ordered, n)
            index = cluster_index(vocab, n, seed=7)
            # every representative must belong to exactly one cluster
            for rep in index.words:
                assert sum(rep in members for members in parts) == 1

    def test_medoid_is_min_total_distance(self):
        words = ["like", "liked", "likes", "zebra"]
        docs = [TokenizedDoc(tokens=tuple(words))]
        vocab = build_vocab(docs)
        index = cluster_index(vocab, 2, seed=0, pick="medoid")
        # the spelling cluster {like, liked, likes} is summarized by "like"
        # ("liked"/"likes" tie on total distance; lexicographic tiebreak)
        assert "like" in index.words or "liked" in index.words

    def test_max_cluster_words_caps_input(self, vocab):
        index = cluster_index(vocab, 3, seed=0, max_cluster_words=8)
        most_frequent = set(vocab.most_common()[:8])
        assert set(index.words) <= most_frequent


class TestSpellingIndex:
    def test_distinct_words_enforced(self):
        with pytest.raises(ValueError):
            SpellingIndex(words=("a", "a"))

    def test_non_empty_words_enforced(self):
        with pytest.raises(ValueError):
            SpellingIndex(words=("a", ""))

    def test_save_load_round_trip(self, tmp_path):
        index = SpellingIndex(words=("win", "free", "cat"), provenance={"note": "x"})
        path = tmp_path / "index.json"
        save_index(index, path)
        loaded = load_index(path)
        assert loaded.words == index.words
        assert loaded.provenance == index.provenance

    def test_load_rejects_wrong_format(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "other", "version": 1, "words": ["a"]}')
        with pytest.raises(ValueError):
            load_index(path)
