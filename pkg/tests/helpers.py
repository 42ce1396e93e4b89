"""Shared builders: annotated sentences, synthetic stories, stub scorers."""

import math
import random
import re
import zlib

from storysalience.corpus import ArgumentSpan, Corpus, Sentence, Story, Token
from storysalience.scorer import CoherenceScorer, ScoredText, ScoredToken

WORDS = ["king", "queen", "wolf", "girl", "boy", "forest", "castle", "road",
         "bird", "old", "young", "dark", "gold", "ring", "horse", "river",
         "walks", "walked", "sees", "saw", "take", "taken", "taking", "go",
         "went", "gone", "home", "night", "day", "fire"]

VERB_POS = ["VB", "VBP", "VBZ", "VBD", "VBN", "VBG"]
OTHER_POS = ["NN", "NNS", "NNP", "DT", "IN", "PRP", "JJ", "RB", "CC", "MD"]


def sent(words_pos, gold=None, spans=()):
    tokens = tuple(Token(surface=w, pos=p, index=i)
                   for i, (w, p) in enumerate(words_pos))
    return Sentence(tokens=tokens, spans=tuple(spans), gold_salient=gold)


def span(label, start, end, predicate):
    return ArgumentSpan(label=label, start_token=start, end_token=end,
                        predicate_token=predicate)


def story_text(story):
    return " ".join(s.raw_text for s in story.sentences)


def random_story(rng, story_id, max_sentences=10, max_tokens=12):
    """Annotated story with random POS tags and ARG spans (possibly messy:
    overlapping spans and verb/span collisions are intended)."""
    sentences = []
    for _ in range(rng.randint(2, max_sentences)):
        n = rng.randint(3, max_tokens)
        pairs = []
        for i in range(n - 1):
            if rng.random() < 0.3:
                pos = rng.choice(VERB_POS)
            else:
                pos = rng.choice(OTHER_POS)
            pairs.append((rng.choice(WORDS), pos))
        pairs.append((".", "."))
        spans = []
        for _ in range(rng.randint(0, 2)):
            start = rng.randrange(n)
            end = min(n - 1, start + rng.randint(0, 3))
            spans.append(span(rng.choice(["ARG0", "ARG1", "ARG2"]),
                              start, end, rng.randrange(n)))
        sentences.append(sent(pairs, gold=rng.random() < 0.3, spans=spans))
    return Story(id=story_id, sentences=tuple(sentences))


def random_corpus(seed, stories=20, max_sentences=10, max_tokens=12):
    rng = random.Random(seed)
    return Corpus(stories=tuple(random_story(rng, f"story-{i}", max_sentences,
                                             max_tokens)
                                for i in range(stories)),
                  meta={"source": "synthetic"})


class ConstScorer(CoherenceScorer):
    """Context-independent scorer: every token gets the same logprob."""

    def __init__(self, logprob=-1.0, eot_logprob=None, max_input_length=10 ** 9):
        self.logprob = logprob
        self._eot = eot_logprob if eot_logprob is not None else logprob
        self._limit = max_input_length

    @property
    def max_input_length(self):
        return self._limit

    def score(self, text, include_eot=True):
        tokens = tuple(ScoredToken(text=m.group(0), logprob=self.logprob,
                                   start=m.start(), end=m.end())
                       for m in re.finditer(r"\S+", text))
        return ScoredText(tokens=tokens,
                          eot_logprob=self._eot if include_eot else None)


class PositionScorer(CoherenceScorer):
    """Hand-checkable scorer: the i-th token of a text gets logprob -i and
    the end-of-text event gets -(token count)."""

    def __init__(self, max_input_length=10 ** 9):
        self._limit = max_input_length

    @property
    def max_input_length(self):
        return self._limit

    def score(self, text, include_eot=True):
        tokens = tuple(ScoredToken(text=m.group(0), logprob=-float(i),
                                   start=m.start(), end=m.end())
                       for i, m in enumerate(re.finditer(r"\S+", text)))
        return ScoredText(tokens=tokens,
                          eot_logprob=-float(len(tokens)) if include_eot else None)


class NoiseScorer(CoherenceScorer):
    """Deterministic per text, iid across texts: logprobs seeded by a hash."""

    def __init__(self, seed=0, max_input_length=10 ** 9):
        self.seed = seed
        self._limit = max_input_length

    @property
    def max_input_length(self):
        return self._limit

    def score(self, text, include_eot=True):
        rng = random.Random(zlib.crc32(f"{self.seed}:{text}".encode()))
        tokens = tuple(ScoredToken(text=m.group(0),
                                   logprob=-10 * rng.random() - 1e-9,
                                   start=m.start(), end=m.end())
                       for m in re.finditer(r"\S+", text))
        return ScoredText(tokens=tokens,
                          eot_logprob=-10 * rng.random() - 1e-9 if include_eot else None)


class RecordingScorer(CoherenceScorer):
    """Wrapper that logs every score() call for invariant checks."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    @property
    def max_input_length(self):
        return self.inner.max_input_length

    def score(self, text, include_eot=True):
        scored = self.inner.score(text, include_eot=include_eot)
        self.calls.append((text, include_eot, len(scored.tokens)))
        return scored


def uniform_logprob(vocab_size):
    return -math.log(vocab_size)
