"""Sanity harnesses: shuffled-order discrimination and deletion detection."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Corpus, Story
from .errors import InsufficientDataError
from .removal import RemovalMethod
from .salience import SalienceConfig, salience_story, sequence_logprob
from .scorer import CoherenceScorer


@dataclass(frozen=True)
class PermutationPair:
    story_id: str
    original: tuple[str, ...]
    permuted: tuple[str, ...]
    permutation: tuple[int, ...]


def generate_permutations(story: Story, count: int = 80,
                          seed: int = 0) -> list[PermutationPair]:
    """Uniform non-identity sentence permutations, reproducible per seed.

    Sampling is with replacement, so duplicates may appear; only the
    identity order is excluded.
    """
    n = len(story.sentences)
    if n < 2:
        raise InsufficientDataError(
            f"story {story.id!r} has {n} sentence(s); no non-identity permutation")
    texts = tuple(s.raw_text for s in story.sentences)
    identity = list(range(n))
    rng = random.Random(f"{seed}:{story.id}")
    pairs = []
    for _ in range(count):
        perm = identity[:]
        while perm == identity:
            rng.shuffle(perm)
        pairs.append(PermutationPair(
            story_id=story.id, original=texts,
            permuted=tuple(texts[i] for i in perm), permutation=tuple(perm)))
    return pairs


def _mean_logprob(texts: Sequence[str], scorer: CoherenceScorer) -> float:
    total, count = sequence_logprob(texts, scorer, include_eot=True)
    return total / count


def ordering_accuracy(pairs: Iterable[PermutationPair],
                      scorer: CoherenceScorer) -> float:
    """Fraction of pairs whose original order scores strictly higher.

    Compared by mean token log-likelihood; an exact tie counts as a miss.
    """
    pairs = list(pairs)
    if not pairs:
        raise InsufficientDataError("no permutation pairs to evaluate")
    correct = 0
    for pair in pairs:
        if _mean_logprob(pair.original, scorer) > _mean_logprob(pair.permuted, scorer):
            correct += 1
    return correct / len(pairs)


def deletion_detection_accuracy(corpus: Corpus, scorer: CoherenceScorer) -> float:
    """Fraction of (story, sentence) pairs with positive deletion salience.

    A sound scorer should assign sigma > 0 when a sentence is deleted;
    sigma = 0 (a context-blind scorer) counts as a failure.
    """
    config = SalienceConfig(method=RemovalMethod.SD, scorer=scorer)
    hits = 0
    total = 0
    for story in corpus.stories:
        if len(story.sentences) < 2:
            raise InsufficientDataError(
                f"story {story.id!r} has fewer than 2 sentences")
        result = salience_story(story, config)
        for sigma in result.scores:
            total += 1
            if sigma > 0:
                hits += 1
    return hits / total
