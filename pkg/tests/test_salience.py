import random

import pytest

from _oracles import oracle_salience, oracle_window_bounds
from helpers import (ConstScorer, NoiseScorer, PositionScorer, RecordingScorer,
                     random_corpus, sent)
from storysalience.corpus import Story
from storysalience.errors import MissingAnnotationError, WindowingError
from storysalience.removal import RemovalMethod, remove_events
from storysalience.salience import (SalienceConfig, assemble, coherence,
                                    pairwise_likelihood_diff, salience_corpus,
                                    salience_story, sequence_logprob,
                                    windowed_bounds, _bounds_from_counts)


def make_story(story_id, *texts):
    sentences = tuple(sent([(w, "NN") for w in t.split(" ")]) for t in texts)
    return Story(id=story_id, sentences=sentences)


ABC_STORY = make_story("abc", "a b", "c d", "e f")


def test_assemble_drops_empty_parts():
    assert assemble(["a b", "", "c"]) == "a b c"
    assert assemble(["", ""]) == ""
    assert assemble([]) == ""


def test_bounds_hand_examples():
    counts = [3, 4, 5]
    assert _bounds_from_counts(counts, 1, 100) == (0, 0)
    # context is dropped before the suffix
    assert _bounds_from_counts(counts, 1, 9) == (1, 0)
    # the first sentence has no context, only suffix left to drop
    assert _bounds_from_counts(counts, 0, 9) == (0, 1)
    assert _bounds_from_counts(counts, 2, 9) == (1, 0)
    # exactly at the limit: no truncation
    assert _bounds_from_counts(counts, 1, 12) == (0, 0)


def test_bounds_infeasible_raises():
    # target plus one suffix sentence can never fit
    with pytest.raises(WindowingError, match="cannot fit"):
        _bounds_from_counts([2, 50, 3], 0, 4)
    with pytest.raises(WindowingError, match="cannot fit"):
        _bounds_from_counts([2, 50, 3], 1, 4)


def test_bounds_index_out_of_range():
    with pytest.raises(WindowingError, match="out of range"):
        _bounds_from_counts([3], 1, 10)
    with pytest.raises(WindowingError, match="out of range"):
        _bounds_from_counts([3], -1, 10)


def test_windowed_bounds_names_the_story():
    story = make_story("tiny", "a a", "b " * 49 + "b", "c c c")
    with pytest.raises(WindowingError, match="story 'tiny'"):
        windowed_bounds(story, 0, ConstScorer(), max_input_length=4)


def test_bounds_match_exhaustive_search():
    rng = random.Random(11)
    for _ in range(300):
        n = rng.randint(1, 7)
        counts = [rng.randint(1, 8) for _ in range(n)]
        k = rng.randrange(n)
        limit = rng.choice([1, 3, 5, 8, 12, 100])
        try:
            expected = oracle_window_bounds(counts, k, limit)
        except ValueError:
            with pytest.raises(WindowingError):
                _bounds_from_counts(counts, k, limit)
        else:
            assert _bounds_from_counts(counts, k, limit) == expected


def test_coherence_hand_values():
    scorer = PositionScorer()
    texts = ["a b", "c d", "e f"]
    # suffix of sentence 0 is "c d e f": token logprobs -2 -3 -4 -5
    assert coherence(texts, 0, (0, 0), scorer) == pytest.approx(-3.5)
    # deleting the target renumbers the suffix to -0 -1 -2 -3
    assert coherence(texts, 0, (0, 0), scorer, replacement="") == pytest.approx(-1.5)
    # last sentence: the end-of-text event is the whole suffix
    assert coherence(texts, 2, (0, 0), scorer) == pytest.approx(-6.0)
    assert coherence(texts, 2, (0, 0), scorer, replacement="") == pytest.approx(-4.0)


def test_coherence_rejects_suffix_truncation_for_last_sentence():
    with pytest.raises(WindowingError, match="last sentence"):
        coherence(["a b", "c d"], 1, (0, 1), PositionScorer())


def test_position_scorer_salience_hand_values():
    config = SalienceConfig(method=RemovalMethod.SD, scorer=PositionScorer())
    result = salience_story(ABC_STORY, config)
    # deleting any sentence shifts every later token two positions left,
    # so each mean gains exactly 2
    assert result.scores == pytest.approx((-2.0, -2.0, -2.0))
    assert result.method == "sd"
    last = result.diagnostics[-1]
    assert last.suffix_token_count == 1  # the end-of-text event alone
    assert all(d.ell == 0 and d.ell_prime == 0 for d in result.diagnostics)
    assert [d.sentence_index for d in result.diagnostics] == [0, 1, 2]
    for d, score in zip(result.diagnostics, result.scores):
        assert d.coherence_original - d.coherence_removed == pytest.approx(score)


def test_constant_scorer_gives_exact_zero():
    config = SalienceConfig(method=RemovalMethod.SD, scorer=ConstScorer(-3.25))
    for story in random_corpus(seed=2, stories=4, max_sentences=5).stories:
        result = salience_story(story, config)
        assert all(s == 0.0 for s in result.scores)


def test_salience_matches_oracle_all_methods():
    scorer = NoiseScorer(seed=1)
    corpus = random_corpus(seed=5, stories=5, max_sentences=6, max_tokens=10)
    for story in corpus.stories:
        texts = [s.raw_text for s in story.sentences]
        for method in RemovalMethod:
            replacements = [remove_events(s, method).replacement_text
                            for s in story.sentences]
            expected = oracle_salience(texts, replacements, scorer)
            config = SalienceConfig(method=method, scorer=scorer)
            result = salience_story(story, config)
            assert result.scores == pytest.approx(expected, abs=1e-9)


def test_salience_matches_oracle_under_truncation():
    scorer = NoiseScorer(seed=4, max_input_length=18)
    corpus = random_corpus(seed=6, stories=4, max_sentences=7, max_tokens=6)
    for story in corpus.stories:
        texts = [s.raw_text for s in story.sentences]
        replacements = [remove_events(s, RemovalMethod.SD).replacement_text
                        for s in story.sentences]
        expected = oracle_salience(texts, replacements, scorer, limit=18)
        config = SalienceConfig(method=RemovalMethod.SD, scorer=scorer)
        result = salience_story(story, config)
        assert result.scores == pytest.approx(expected, abs=1e-9)


def test_window_calls_respect_limit_and_share_suffix():
    story = make_story("w8", *["w x y z"] * 8)
    recorder = RecordingScorer(ConstScorer(-1.0, max_input_length=13))
    config = SalienceConfig(method=RemovalMethod.SD, scorer=recorder)
    result = salience_story(story, config)
    n = 8
    assert len(recorder.calls) == n + 2 * n
    for text, _, n_tokens in recorder.calls:
        assert n_tokens <= 13
    # counting pass first, then (original, removed) per sentence
    assert all(not call[1] for call in recorder.calls[:n])
    texts = [s.raw_text for s in story.sentences]
    for k in range(n):
        orig_text, orig_eot, _ = recorder.calls[n + 2 * k]
        rm_text, rm_eot, _ = recorder.calls[n + 2 * k + 1]
        assert orig_eot == rm_eot == (k == n - 1)
        suffix = assemble(texts[k + 1:n - result.diagnostics[k].ell_prime])
        for t in (orig_text, rm_text):
            assert t.endswith(suffix)
            if suffix and len(t) > len(suffix):
                assert t[-len(suffix) - 1] == " "
    # truncation did happen, on both sides
    assert result.diagnostics[0].ell_prime == 5
    assert result.diagnostics[4].ell == 4 and result.diagnostics[4].ell_prime == 1
    assert result.diagnostics[7].ell == 5


def test_errors_name_story_and_sentence():
    bad = Story(id="no-pos", sentences=(sent([("run", "")]), sent([("x", "NN")])))
    config = SalienceConfig(method=RemovalMethod.VA, scorer=ConstScorer())
    with pytest.raises(MissingAnnotationError, match="story 'no-pos' sentence 0"):
        salience_story(bad, config)
    tight = SalienceConfig(method=RemovalMethod.SD, scorer=ConstScorer(),
                           max_input_length=3)
    with pytest.raises(WindowingError, match="story 'w4' sentence 0"):
        salience_story(make_story("w4", "a b c d", "e f"), tight)


def test_config_window_limit_validation():
    config = SalienceConfig(method=RemovalMethod.SD,
                            scorer=ConstScorer(max_input_length=0))
    with pytest.raises(WindowingError, match="positive"):
        config.window_limit
    override = SalienceConfig(method=RemovalMethod.SD,
                              scorer=ConstScorer(max_input_length=100),
                              max_input_length=7)
    assert override.window_limit == 7


def test_salience_corpus_covers_every_story():
    corpus = random_corpus(seed=9, stories=3, max_sentences=4)
    config = SalienceConfig(method=RemovalMethod.SD, scorer=NoiseScorer())
    results = salience_corpus(corpus, config)
    assert [r.story_id for r in results] == [s.id for s in corpus.stories]
    for story, result in zip(corpus.stories, results):
        assert len(result.scores) == len(story.sentences)


def test_pairwise_matrix_hand_values():
    matrix = pairwise_likelihood_diff(ABC_STORY, PositionScorer())
    assert matrix[0] == [None, None, None]
    assert matrix[1] == [pytest.approx(-2.0), None, None]
    assert matrix[2] == [pytest.approx(-2.0), pytest.approx(-2.0), None]


def test_pairwise_matches_deletion_salience_on_adjacent_pair():
    # with three sentences, the suffix of sentence 1 is exactly sentence 2,
    # so the pooled-suffix score equals the per-sentence matrix entry
    story = make_story("tri", "the king rode", "a wolf howled", "night fell fast")
    scorer = NoiseScorer(seed=7)
    config = SalienceConfig(method=RemovalMethod.SD, scorer=scorer)
    sigma = salience_story(story, config).scores[1]
    matrix = pairwise_likelihood_diff(story, scorer)
    assert matrix[2][1] == pytest.approx(sigma, abs=1e-12)


def test_sequence_logprob_chunks_whole_sentences():
    recorder = RecordingScorer(ConstScorer(-1.0, max_input_length=4))
    total, count = sequence_logprob(["a b c", "d e", "f"], recorder)
    assert (total, count) == (-7.0, 7)
    scoring = recorder.calls[3:]
    assert [call[0] for call in scoring] == ["a b c", "d e f"]
    assert [call[1] for call in scoring] == [False, True]


def test_sequence_logprob_single_window_and_eot_flag():
    assert sequence_logprob(["a b"], ConstScorer(-0.5)) == (-1.5, 3)
    assert sequence_logprob(["a b"], ConstScorer(-0.5), include_eot=False) == (-1.0, 2)


def test_sequence_logprob_empty_input():
    assert sequence_logprob([], ConstScorer(-2.0)) == (-2.0, 1)
    assert sequence_logprob([], ConstScorer(-2.0), include_eot=False) == (0.0, 0)


def test_sequence_logprob_overlong_sentence():
    with pytest.raises(WindowingError, match="exceeds the limit"):
        sequence_logprob(["a b c d e"], ConstScorer(max_input_length=3))
