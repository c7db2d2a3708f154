import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cw2v.defense import (
    ZERO_WIDTH_CHARS,
    ConfusablesMap,
    ConfusablesParseError,
    MapValidationError,
    acd,
    default_confusables,
    defend_lines,
    deobfuscate,
    load_confusables,
    parse_confusables,
    unicode_canonicalize,
)
from cw2v.perturb import PerturbationConfig, PerturbationKind, perturb_word

alnum_words = st.text(
    alphabet=st.sampled_from(string.ascii_letters + string.digits),
    min_size=3,
    max_size=12,
)


class TestACD:
    def test_joins_alternating_dots(self):
        assert acd("t.e.x.t") == "text"
        assert acd("P.l.e.a.s.e") == "Please"

    def test_joins_spaced_single_chars(self):
        assert acd("t e x t") == "text"

    def test_strips_zero_width(self):
        assert acd("t​e​x​t") == "text"
        assert acd("t‌e‌x‌t") == "text"
        assert acd("t‍e﻿xt") == "text"

    def test_arbitrary_alternating_separator(self):
        assert acd("w-o-r-d") == "word"
        assert acd("s*h*a*r*e") == "share"

    def test_two_fragment_run_not_joined(self):
        # Runs must contain at least three single-character fragments.
        assert acd("a b") == "a b"

    def test_mixed_document(self):
        text = "Please l i k e and s.h.a.r.e this"
        assert acd(text) == "Please like and share this"

    def test_all_alnum_words_untouched(self):
        assert acd("normal words stay 100 intact") == "normal words stay 100 intact"

    def test_alternating_rule_needs_majority_separator(self):
        # one dot in a long word is ordinary punctuation, not obfuscation
        assert acd("ab.cdef") == "ab.cdef"

    def test_known_false_positive_on_short_leet(self):
        # the alternating heuristic sees | at both even indices of "|-|i"
        # and strips it; documented limitation of the rule
        assert acd("|-|i") == "-i"

    def test_separator_deleted_everywhere_in_word(self):
        # once the alternating pattern is established, every occurrence of
        # the separator goes, including a trailing one
        assert acd("w.o.r.d.") == "word"

    @given(alnum_words)
    def test_non_destructive_on_plain_words(self, word):
        assert acd(word) == word

    @given(st.lists(alnum_words, min_size=1, max_size=6))
    def test_non_destructive_on_plain_documents(self, words):
        # words of length ≥ 2 can never be merged or rewritten
        doc = " ".join(w for w in words if len(w) >= 2)
        assert acd(doc) == doc

    @given(st.text(max_size=30))
    @settings(max_examples=200)
    def test_idempotent(self, text):
        once = acd(text)
        assert acd(once) == once

    def test_idempotent_on_known_tricky_inputs(self):
        for text in (".,.,.,", ".a. .b. .c.", "a b c d", "- - - -"):
            once = acd(text)
            assert acd(once) == once


class TestACDRoundTrip:
    @pytest.mark.parametrize(
        "kind",
        [
            PerturbationKind.SPACE_SEPARATION,
            PerturbationKind.ZERO_WIDTH_SEPARATION,
            PerturbationKind.COMBINED_UNICODE,
        ],
    )
    @given(word=alnum_words)
    @settings(max_examples=120)
    def test_inverts_separator_attacks(self, kind, word):
        cfg = PerturbationConfig(rng_seed=1)
        assert acd(perturb_word(word, kind, cfg)) == word


class TestUnicodeCanonicalize:
    def test_accent_folding(self):
        assert unicode_canonicalize("tëxt") == "text"
        assert unicode_canonicalize("ãnîmêç") == "animec"

    def test_leet_sequences(self):
        assert unicode_canonicalize("|-|i") == "Hi"
        assert unicode_canonicalize("|\\/|ore") == "More"

    def test_longest_match_wins(self):
        # "|\/|" must be read as m, not as | + \/ (v) + |
        cmap = default_confusables()
        assert unicode_canonicalize("|\\/|", cmap) == "M"

    def test_plain_ascii_untouched(self):
        text = "nothing to fix here 123"
        assert unicode_canonicalize(text) == text

    def test_fullwidth_forms(self):
        assert unicode_canonicalize("ｆｒｅｅ") == "free"

    def test_idempotent(self):
        attacked = "техт |-|i"
        once = unicode_canonicalize(attacked)
        assert unicode_canonicalize(once) == once

    @given(st.text(max_size=30))
    @settings(max_examples=150)
    def test_idempotent_random(self, text):
        once = unicode_canonicalize(text)
        assert unicode_canonicalize(once) == once


class TestUCRoundTrip:
    def test_replace_unicode_inverts(self):
        cfg = PerturbationConfig(rng_seed=5, per_char_probability=1.0)
        rng = random.Random(0)
        from cw2v.perturb import default_lookalike_map

        covered = sorted(default_lookalike_map())
        for _ in range(300):
            word = "".join(rng.choice(covered) for _ in range(rng.randint(3, 12)))
            attacked = perturb_word(word, PerturbationKind.REPLACE_UNICODE, cfg)
            assert unicode_canonicalize(attacked) == word

    def test_tandem_inverts_on_canonical_alphabet(self):
        cfg = PerturbationConfig(rng_seed=5, per_char_probability=1.0)
        cmap = default_confusables()
        from cw2v.perturb import default_tandem_map

        tandem = default_tandem_map()
        canonical = sorted(t for t in tandem if cmap.entries[tandem[t]] == t)
        assert len(canonical) >= 15
        rng = random.Random(1)
        for _ in range(300):
            word = "".join(rng.choice(canonical) for _ in range(rng.randint(3, 12)))
            attacked = perturb_word(word, PerturbationKind.TANDEM_CHARACTER, cfg)
            assert unicode_canonicalize(attacked) == word

    def test_tandem_recovers_lowercase_up_to_case(self):
        cfg = PerturbationConfig(rng_seed=5, per_char_probability=1.0)
        attacked = perturb_word("hello", PerturbationKind.TANDEM_CHARACTER, cfg)
        assert unicode_canonicalize(attacked).lower() == "hello"


class TestDeobfuscate:
    def test_both_defenses_compose(self):
        assert deobfuscate("w i n |-|appy") == "win Happy"

    def test_acd_runs_before_uc(self):
        # dots interleaved with a multi-char leet sequence defeat the
        # alternating-separator test, so only UC fires on this word
        assert deobfuscate("|3.a.d") == "B.a.d"

    def test_toggles(self):
        attacked = "t e x t |-|ello"
        assert deobfuscate(attacked, use_acd=False, use_uc=False) == attacked
        assert deobfuscate(attacked, use_acd=True, use_uc=False) == "text |-|ello"
        assert deobfuscate(attacked, use_acd=False, use_uc=True) == "t e x t Hello"
        assert deobfuscate(attacked, use_acd=True, use_uc=True) == "text Hello"

    def test_defend_lines(self):
        lines = ["w i n", "ｆree"]
        assert defend_lines(lines) == ["win", "free"]


class TestConfusablesParsing:
    def test_parses_published_format(self):
        lines = [
            "# comment",
            "",
            "0041 ;\t0061 ;\tMA\t# ( A → a ) COMMENT",
            "00E9 ;\t0065 ;\tMA\t# accent",
        ]
        entries = parse_confusables(lines, origin="inline")
        assert entries == [("A", "a"), ("é", "e")]

    def test_multi_codepoint_source(self):
        entries = parse_confusables(["007C 002D 007C ;\t0048 ;\tMA\t#"], origin="x")
        assert entries == [("|-|", "H")]

    def test_bom_tolerated(self):
        entries = parse_confusables(["﻿0041 ;\t0061 ;\tMA"], origin="x")
        assert entries == [("A", "a")]

    def test_malformed_line_reports_position(self):
        with pytest.raises(ConfusablesParseError) as err:
            parse_confusables(["0041 ;\t0061 ;\tMA", "garbage line"], origin="bad.txt")
        assert "bad.txt" in str(err.value)
        assert "2" in str(err.value)

    def test_bad_hex_reports_position(self):
        with pytest.raises(ConfusablesParseError):
            parse_confusables(["XXXX ;\t0061 ;\tMA"], origin="f")

    def test_bundled_files_load(self):
        cmap = default_confusables()
        assert len(cmap.entries) > 300
        assert cmap.entries["é"] == "e"
        assert cmap.entries["|-|"] == "H"


class TestMapValidation:
    def test_source_equals_target_rejected(self):
        with pytest.raises(MapValidationError):
            ConfusablesMap([("a", "a")])

    def test_empty_source_rejected(self):
        with pytest.raises(MapValidationError):
            ConfusablesMap([("", "a")])

    def test_target_containing_source_rejected(self):
        # applying "l" → "ll" would never reach a fixed point
        with pytest.raises(MapValidationError):
            ConfusablesMap([("l", "ll")])

    def test_target_containing_other_source_rejected(self):
        with pytest.raises(MapValidationError):
            ConfusablesMap([("x", "ab"), ("a", "z")])

    def test_conflicting_duplicate_source_rejected(self):
        with pytest.raises(MapValidationError):
            ConfusablesMap([("x", "a"), ("x", "b")])

    def test_valid_map_accepted(self):
        cmap = ConfusablesMap([("é", "e"), ("|3", "B")])
        assert cmap.apply("é|3") == "eB"

    def test_error_lists_all_problems(self):
        with pytest.raises(MapValidationError) as err:
            ConfusablesMap([("a", "a"), ("b", "b")])
        message = str(err.value)
        assert "'a'" in message and "'b'" in message


class TestZeroWidthChars:
    def test_contains_the_four_invisibles(self):
        assert set(ZERO_WIDTH_CHARS) == {"​", "‌", "‍", "﻿"}
