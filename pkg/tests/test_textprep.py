import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge.errors import ConfigError, DataError
from corpusforge.textprep import (
    AbbreviationList,
    Document,
    detect_file_language,
    detect_language,
    normalize_text,
    sample_line_indices,
    split_sentences,
    train_profile,
)


class TestNormalize:
    def test_nfc_composition(self):
        assert normalize_text("é") == "é"

    def test_bom_removed(self):
        assert normalize_text("﻿abc") == "abc"

    def test_whitespace_merged(self):
        assert normalize_text("a \t\t b") == "a b"

    def test_newlines_collapse_to_space(self):
        assert normalize_text("a\n\nb") == "a b"

    def test_no_case_change(self):
        assert normalize_text("MiXeD CaSe") == "MiXeD CaSe"

    @given(st.text(max_size=200))
    @settings(max_examples=200)
    def test_idempotent(self, text):
        once = normalize_text(text)
        assert normalize_text(once) == once

    @given(st.text(max_size=200))
    @settings(max_examples=100)
    def test_never_inserts_non_space(self, text):
        out = normalize_text(text)
        for ch in out:
            if not ch.isspace():
                assert ch in normalize_text("".join(c for c in text if not c.isspace()))


class TestDetect:
    def test_english(self, profiles):
        lang, conf = detect_language(
            "the quick brown fox jumped over the lazy dog", profiles)
        assert lang == "en"
        assert conf >= 0.9

    def test_irish(self, profiles):
        lang, conf = detect_language(
            "tá fáilte romhat agus go raibh maith agat", profiles)
        assert lang == "ga"
        assert conf >= 0.9

    def test_empty_errors(self, profiles):
        with pytest.raises(DataError):
            detect_language("", profiles)

    def test_too_few_profiles(self, profiles):
        with pytest.raises(ConfigError):
            detect_language("hello", profiles[:1])

    def test_normalization_invariant(self, profiles):
        raw = "﻿the   quick\t brown fox"
        assert detect_language(raw, profiles) == detect_language(
            normalize_text(raw), profiles)

    def test_profile_order_invariant(self, profiles):
        text = "the committee will meet again on thursday"
        expected = detect_language(text, profiles)[0]
        assert detect_language(text, list(reversed(profiles)))[0] == expected

    def test_confidence_in_unit_interval(self, profiles):
        _, conf = detect_language("maidin mhaith", profiles)
        assert 0.0 <= conf <= 1.0


class TestFileDetect:
    def test_sampling_indices_250(self):
        assert sample_line_indices(250) == list(range(1, 51)) + [100, 200]

    def test_sampling_indices_short(self):
        assert sample_line_indices(10) == list(range(1, 11))

    def test_sampling_indices_300(self):
        assert sample_line_indices(300) == list(range(1, 51)) + [100, 200, 300]

    def test_unanimous(self, profiles):
        doc = Document(id="d", path="", lang=None,
                       lines=["The cat sat on the mat."] * 10)
        assert detect_file_language(doc, profiles) == "en"

    def test_unsampled_lines_ignored(self, profiles):
        # Irish lines sit only at (1-based) 51..99 and 101..199 excluding 100,
        # so no sampled line is Irish and the file still reads as English.
        en = "The committee will meet again on thursday morning."
        ga = "Beidh an coiste ag bualadh le chéile arís maidin amárach."
        lines = []
        for i in range(1, 301):
            if 51 <= i <= 99 or (101 <= i <= 199 and i != 100):
                lines.append(ga)
            else:
                lines.append(en)
        doc = Document(id="d", path="", lang=None, lines=lines)
        sampled = sample_line_indices(300)
        assert all(lines[i - 1] == en for i in sampled)
        assert detect_file_language(doc, profiles) == "en"

    def test_empty_doc_errors(self, profiles):
        with pytest.raises(DataError):
            detect_file_language(Document(id="d", path="", lang=None, lines=[]),
                                 profiles)


class TestSplitSentences:
    def _doc(self, lines, lang="en"):
        return Document(id="d", path="", lang=lang, lines=lines)

    def test_abbreviation_protects_boundary(self):
        abbrevs = AbbreviationList(lang="en", entries={"Dr."})
        doc = self._doc(["Dr. Smith arrived. He left."])
        assert split_sentences(doc, abbrevs) == ["Dr. Smith arrived.", "He left."]

    def test_without_abbrev_splits_after_dr(self):
        doc = self._doc(["Dr. Smith arrived. He left."])
        assert split_sentences(doc, None) == ["Dr.", "Smith arrived.", "He left."]

    def test_forced_line_start_paren_letter(self):
        doc = self._doc(["items follow", "(a) first item"])
        assert split_sentences(doc, None) == ["items follow", "(a) first item"]

    def test_forced_line_start_numbered(self):
        doc = self._doc(["the list begins", "12. twelfth item"])
        assert split_sentences(doc, None) == ["the list begins", "12. twelfth item"]

    def test_empty_doc(self):
        assert split_sentences(self._doc([]), None) == []

    def test_no_boundary_before_lowercase(self):
        doc = self._doc(["this ends. but lowercase follows"])
        assert split_sentences(doc, None) == ["this ends. but lowercase follows"]

    def test_irish_prothesis_counts_as_capital(self):
        doc = self._doc(["Chuaigh siad suas. hAon rud eile."], lang="ga")
        assert split_sentences(doc, None) == ["Chuaigh siad suas.", "hAon rud eile."]

    def test_boundary_spans_lines(self):
        doc = self._doc(["First sentence ends here.", "Second one starts."])
        assert split_sentences(doc, None) == [
            "First sentence ends here.", "Second one starts."]

    def test_round_trip_fixture(self):
        lines = [
            "Dr. Smith arrived. He left early.",
            "(a) first item",
            "Then what? Nobody knew!",
            "12. a numbered line",
        ]
        doc = self._doc(lines)
        abbrevs = AbbreviationList(lang="en", entries={"Dr."})
        sents = split_sentences(doc, abbrevs)
        assert " ".join(sents) == " ".join(lines)

    @given(st.lists(
        st.text(
            alphabet=st.sampled_from("aA bB.?!cD ( )1"),
            min_size=1, max_size=30,
        ),
        max_size=6,
    ))
    @settings(max_examples=150)
    def test_round_trip_property(self, raw_lines):
        lines = []
        for raw in raw_lines:
            line = normalize_text(raw).strip()
            if line:
                lines.append(line)
        doc = self._doc(lines)
        sents = split_sentences(doc, None)
        assert " ".join(sents) == " ".join(lines)


class TestAbbreviationList:
    def test_entries_must_end_with_dot(self):
        with pytest.raises(DataError):
            AbbreviationList(lang="en", entries={"Dr"})

    def test_load_skips_comments(self, tmp_path):
        path = tmp_path / "ab.txt"
        path.write_text("# comment\nDr.\n\nMr.\n", encoding="utf-8")
        abbrevs = AbbreviationList.load(path, lang="en")
        assert abbrevs.entries == {"Dr.", "Mr."}


class TestDocument:
    def test_load_normalizes_and_drops_blanks(self, tmp_path):
        path = tmp_path / "doc.txt"
        path.write_text("﻿a  b\n\n  \nć\n", encoding="utf-8")
        doc = Document.load(path)
        assert doc.lines == ["a b", "ć"]
        for line in doc.lines:
            assert "﻿" not in line
            assert "  " not in line

    def test_invalid_utf8_names_offset(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_bytes(b"abc\xff\xfedef")
        with pytest.raises(DataError, match="byte offset 3"):
            Document.load(path)

    def test_bad_lang_code(self):
        with pytest.raises(DataError):
            Document(id="d", path="", lang="English", lines=["x"])


class TestProfileTraining:
    def test_frequencies_sum_to_one(self):
        profile = train_profile("the cat sat on the mat", "en")
        profile.validate()

    def test_retrained_profile_detects(self, profiles):
        # a profile trained on held-out text still beats the other languages
        text = "an index of place names and the roads between the towns"
        lang, _ = detect_language(text, profiles)
        assert lang == "en"
