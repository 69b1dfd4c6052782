import math

import pytest

from streamsim import BleuConfig, corpus_bleu, tokenize_13a
from oracles import brute_corpus_bleu, walk_tokenize_13a

FIXTURE_PAIRS = [
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("the cat sat on a mat", "the cat sat on the mat"),
    ("a quick brown fox jumps over the lazy dog", "the quick brown fox jumped over a lazy dog"),
    ("Hello, world!", "Hello, world!"),
    ("Hello there, world!", "Hello, wide world!"),
    ("it costs 3.5 million today", "it cost 3.5 million yesterday"),
    ("numbers like 1,000 stay intact", "numbers like 1,000 stay whole"),
    ("short", "a much longer reference sentence here"),
    ("a much longer hypothesis sentence here", "short"),
    ("completely different words appear", "nothing matches in this one at all"),
    ("punctuation; tests: colons? and (parens)", "punctuation; tests: colons? and (parens)"),
    ("Case Matters Here", "case matters here"),
    ("repeat repeat repeat repeat", "repeat repeat"),
    ("one two three four five six", "one two three four five six seven eight"),
    ("the translation quality is quite good overall", "the translation quality is very good overall"),
    ("streaming output arrives word by word", "streaming output arrives token by token"),
    ("he said \"quoted text\" yesterday", "he said \"quoted text\" yesterday"),
    ("final subtitle block ends here", "final subtitle blocks end here"),
    ("x y z", "x y z w"),
    ("mixed 42 numbers and words", "mixed 42 numbers and words"),
]


class TestTokenizer13a:
    def test_punctuation_is_padded(self):
        assert tokenize_13a("Hello, world!") == ["Hello", ",", "world", "!"]

    def test_digit_adjacent_period_kept(self):
        assert tokenize_13a("3.5") == ["3.5"]

    def test_digit_adjacent_comma_kept(self):
        assert tokenize_13a("1,000 things") == ["1,000", "things"]

    def test_empty(self):
        assert tokenize_13a("") == []

    def test_entities_unescaped(self):
        assert tokenize_13a("a &amp; b &quot;c&quot;") == ["a", "&", "b", '"', "c", '"']

    def test_symbols_always_split(self):
        assert tokenize_13a("f(x)=y") == ["f", "(", "x", ")", "=", "y"]

    def test_trailing_period_split(self):
        assert tokenize_13a("done.") == ["done", "."]

    def test_dash_after_digit(self):
        assert tokenize_13a("2-3 items") == ["2", "-", "3", "items"]

    def test_whitespace_collapse(self):
        assert tokenize_13a("  spaced \t out\ntext ") == ["spaced", "out", "text"]

    def test_case_preserved(self):
        assert tokenize_13a("MiXeD CaSe") == ["MiXeD", "CaSe"]

    @pytest.mark.parametrize("text", [pair[0] for pair in FIXTURE_PAIRS])
    def test_matches_independent_rule_walk(self, text):
        assert tokenize_13a(text) == walk_tokenize_13a(text)


class TestBleuConfig:
    def test_signature_is_fixed(self):
        cfg = BleuConfig()
        assert cfg.signature == "case:mixed|eff:no|tok:13a|smooth:exp"

    def test_variants_rejected(self):
        with pytest.raises(ValueError):
            BleuConfig(max_order=3)
        with pytest.raises(ValueError):
            BleuConfig(smoothing="floor")
        with pytest.raises(ValueError):
            BleuConfig(case="lower")


class TestCorpusBleu:
    def test_identity_scores_100(self):
        refs = ["the cat sat on the mat", "Hello, world!"]
        assert corpus_bleu(refs, refs).score == pytest.approx(100.0)

    def test_brevity_penalty_fixture(self):
        result = corpus_bleu(["a b c d"], ["a b c d e"])
        assert result.score == pytest.approx(77.88, abs=0.01)
        assert result.precisions == (1.0, 1.0, 1.0, 1.0)
        assert result.brevity_penalty == pytest.approx(math.exp(-0.25))

    def test_smoothing_keeps_score_strictly_inside_range(self):
        # full unigram overlap, zero 4-gram overlap
        result = corpus_bleu(["b a d c"], ["a b c d"])
        assert 0.0 < result.score < 100.0
        assert result.precisions[0] == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            corpus_bleu(["a"], ["a", "b"])

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            corpus_bleu([], [])

    def test_empty_hypotheses_score_zero_with_flag(self):
        result = corpus_bleu(["", ""], ["a b", "c d"])
        assert result.score == 0.0
        assert result.degenerate

    def test_range_and_identity_property(self):
        hyps = [pair[0] for pair in FIXTURE_PAIRS]
        refs = [pair[1] for pair in FIXTURE_PAIRS]
        result = corpus_bleu(hyps, refs)
        assert 0.0 <= result.score <= 100.0
        assert corpus_bleu(hyps, hyps).score == pytest.approx(100.0)

    def test_permutation_invariance(self):
        hyps = [pair[0] for pair in FIXTURE_PAIRS[:8]]
        refs = [pair[1] for pair in FIXTURE_PAIRS[:8]]
        forward = corpus_bleu(hyps, refs).score
        reordered = corpus_bleu(hyps[::-1], refs[::-1]).score
        assert forward == pytest.approx(reordered)

    def test_dropping_a_correct_token_never_helps_precisions(self):
        full = corpus_bleu(["the cat sat on the mat"], ["the cat sat on the mat"])
        dropped = corpus_bleu(["the cat sat on the"], ["the cat sat on the mat"])
        assert all(d <= f for d, f in zip(dropped.precisions, full.precisions))
        assert dropped.score < full.score

    def test_matches_brute_force_oracle_on_fixtures(self):
        hyps = [pair[0] for pair in FIXTURE_PAIRS]
        refs = [pair[1] for pair in FIXTURE_PAIRS]
        # corpus-level on all 20 pairs at once
        assert corpus_bleu(hyps, refs).score == pytest.approx(
            brute_corpus_bleu(hyps, refs), abs=0.01
        )
        # and pair by pair
        for hyp, ref in FIXTURE_PAIRS:
            assert corpus_bleu([hyp], [ref]).score == pytest.approx(
                brute_corpus_bleu([hyp], [ref]), abs=0.01
            )
