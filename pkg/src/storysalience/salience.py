"""Per-sentence salience as loss of suffix likelihood under event removal.

For target sentence k of a story S_1..S_n, the salience score is

    sigma_k = c(S) - c(S~)

where S~ replaces S_k with its event-removed form and c is the mean
log-likelihood of the tokens AFTER the target (a left-to-right model
cannot change anything before it).  The end-of-text probability stands
in for the suffix when k = n and is ignored for every other k.  Long
stories are truncated to the scorer's input budget L by dropping leading
context sentences first, trailing suffix sentences second.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Corpus, Story
from .errors import StorySalienceError, WindowingError
from .removal import RemovalMethod, remove_events
from .scorer import CoherenceScorer


@dataclass(frozen=True)
class SalienceConfig:
    method: RemovalMethod
    scorer: CoherenceScorer
    # optional window budget override; defaults to the scorer's own limit
    max_input_length: int | None = None

    @property
    def window_limit(self) -> int:
        limit = self.max_input_length
        if limit is None:
            limit = self.scorer.max_input_length
        if limit < 1:
            raise WindowingError(f"window limit must be positive, got {limit}")
        return limit


@dataclass(frozen=True)
class SentenceDiagnostics:
    sentence_index: int
    ell: int
    ell_prime: int
    suffix_token_count: int
    coherence_original: float
    coherence_removed: float


@dataclass(frozen=True)
class SalienceResult:
    story_id: str
    method: str
    scores: tuple[float, ...]
    diagnostics: tuple[SentenceDiagnostics, ...] = field(default=())


def count_tokens(text: str, scorer: CoherenceScorer) -> int:
    return len(scorer.score(text, include_eot=False).tokens)


def assemble(parts: Sequence[str]) -> str:
    """Join sentence texts with single spaces, dropping deleted (empty) ones."""
    return " ".join(p for p in parts if p)


def windowed_bounds(story: Story, k: int, scorer: CoherenceScorer,
                    max_input_length: int | None = None) -> tuple[int, int]:
    """Truncation amounts (ell, ell_prime) fitting sentence k's window into L.

    ell leading context sentences and ell_prime trailing suffix sentences
    are dropped so that the kept token counts satisfy
    |S_{ell..k}| + |S_{k+1..n-1-ell_prime}| <= L.  Context is sacrificed
    before suffix: ell_prime is the smallest suffix truncation for which
    any context fits, and ell the smallest context truncation for that
    ell_prime.  The suffix never shrinks below one sentence (the
    end-of-text token serves as the suffix when k is the last sentence).
    Counts come from the original sentences; callers reuse the bounds for
    the event-removed variant so both share an identical suffix.
    """
    limit = max_input_length if max_input_length is not None else scorer.max_input_length
    counts = [count_tokens(s.raw_text, scorer) for s in story.sentences]
    try:
        return _bounds_from_counts(counts, k, limit)
    except WindowingError as e:
        raise WindowingError(f"story {story.id!r}: {e}") from e


def _bounds_from_counts(counts: Sequence[int], k: int, limit: int) -> tuple[int, int]:
    n = len(counts)
    if not 0 <= k < n:
        raise WindowingError(f"sentence index {k} out of range for {n} sentences")
    prefix = [0]
    for c in counts:
        prefix.append(prefix[-1] + c)
    max_ell = k
    max_ell_prime = n - k - 2 if k < n - 1 else 0
    for ell_prime in range(max_ell_prime + 1):
        # window is counts[ell : n - ell_prime]: smallest feasible ell has
        # prefix[ell] >= (tokens up to the window end) - limit
        needed = prefix[n - ell_prime] - limit
        if prefix[max_ell] >= needed:
            return bisect.bisect_left(prefix, needed, 0, max_ell + 1), ell_prime
    raise WindowingError(
        f"sentence {k} cannot fit the window limit {limit}: the target "
        f"plus a minimal suffix needs {prefix[n - max_ell_prime] - prefix[k]} tokens")


def _window_text(sentences: Sequence[str], k: int, bounds: tuple[int, int],
                 replacement: str | None) -> tuple[str, int]:
    """Assembled window text and the character offset where the suffix starts."""
    ell, ell_prime = bounds
    n = len(sentences)
    target = sentences[k] if replacement is None else replacement
    context = assemble(list(sentences[ell:k]) + [target])
    suffix = assemble(sentences[k + 1:n - ell_prime])
    if not suffix:
        return context, len(context)
    if not context:
        return suffix, 0
    return context + " " + suffix, len(context) + 1


def _coherence_detail(text: str, suffix_start: int, scorer: CoherenceScorer,
                      with_eot: bool) -> tuple[float, int, str]:
    scored = scorer.score(text, include_eot=with_eot)
    total = 0.0
    count = 0
    for tok in scored.tokens:
        if tok.end > suffix_start:
            total += tok.logprob
            count += 1
    if with_eot:
        total += scored.eot_logprob
        count += 1
    if count == 0:
        raise WindowingError("empty suffix: nothing to score after the target")
    return total / count, count, text[suffix_start:]


def coherence(sentences: Sequence[str], k: int, bounds: tuple[int, int],
              scorer: CoherenceScorer, replacement: str | None = None) -> float:
    """Mean suffix-token log-likelihood for the window around sentence k.

    replacement=None scores the original story; a string scores the
    variant with sentence k's text swapped out (empty string = deleted).
    The end-of-text log-probability is the whole suffix when k is the
    last sentence and is excluded otherwise.
    """
    ell, ell_prime = bounds
    last = k == len(sentences) - 1
    if last and ell_prime != 0:
        raise WindowingError("the last sentence has no suffix sentences to truncate")
    text, suffix_start = _window_text(sentences, k, bounds, replacement)
    value, _, _ = _coherence_detail(text, suffix_start, scorer, with_eot=last)
    return value


def salience_story(story: Story, config: SalienceConfig) -> SalienceResult:
    """Score every sentence of one story: sigma_k = c(original) - c(removed)."""
    scorer = config.scorer
    limit = config.window_limit
    texts = [s.raw_text for s in story.sentences]
    counts = [count_tokens(t, scorer) for t in texts]
    n = len(texts)
    scores: list[float] = []
    diagnostics: list[SentenceDiagnostics] = []
    for k in range(n):
        try:
            removed = remove_events(story.sentences[k], config.method)
            bounds = _bounds_from_counts(counts, k, limit)
            last = k == n - 1
            text_orig, start_orig = _window_text(texts, k, bounds, None)
            text_rm, start_rm = _window_text(texts, k, bounds,
                                             removed.replacement_text)
            c_orig, n_suffix, suffix_orig = _coherence_detail(
                text_orig, start_orig, scorer, with_eot=last)
            c_rm, _, suffix_rm = _coherence_detail(
                text_rm, start_rm, scorer, with_eot=last)
        except StorySalienceError as e:
            raise type(e)(f"story {story.id!r} sentence {k}: {e}") from e
        if suffix_orig != suffix_rm:
            raise WindowingError(
                f"story {story.id!r} sentence {k}: suffix text diverged "
                f"between original and removed variants")
        scores.append(c_orig - c_rm)
        diagnostics.append(SentenceDiagnostics(
            sentence_index=k, ell=bounds[0], ell_prime=bounds[1],
            suffix_token_count=n_suffix,
            coherence_original=c_orig, coherence_removed=c_rm))
    return SalienceResult(story_id=story.id, method=config.method.value,
                          scores=tuple(scores), diagnostics=tuple(diagnostics))


def salience_corpus(corpus: Corpus, config: SalienceConfig) -> list[SalienceResult]:
    return [salience_story(story, config) for story in corpus.stories]


def pairwise_likelihood_diff(story: Story, scorer: CoherenceScorer) -> list[list[float | None]]:
    """Matrix of per-sentence likelihood drops under single-sentence deletion.

    Entry [i][j] with j < i is the mean token log-likelihood of sentence i
    in the intact story minus its mean when sentence j is deleted; other
    entries are None.  A left-to-right model only reacts to earlier
    deletions, hence the lower triangle.  Texts are scored in full, so
    stories must fit the scorer's input budget; this is a diagnostic for
    short stories, not a batch scoring path.
    """
    texts = [s.raw_text for s in story.sentences]
    n = len(texts)
    base = _sentence_means(texts, scorer)
    matrix: list[list[float | None]] = [[None] * n for _ in range(n)]
    for j in range(n - 1):
        variant = texts[:j] + texts[j + 1:]
        means = _sentence_means(variant, scorer)
        for i in range(j + 1, n):
            matrix[i][j] = base[i] - means[i - 1]
    return matrix


def _sentence_means(texts: Sequence[str], scorer: CoherenceScorer) -> list[float]:
    spans = []
    pos = 0
    for t in texts:
        start = pos if pos == 0 else pos + 1
        end = start + len(t)
        spans.append((start, end))
        pos = end
    text = " ".join(texts)
    scored = scorer.score(text, include_eot=False)
    means = []
    for start, end in spans:
        values = [tok.logprob for tok in scored.tokens if start < tok.end <= end]
        if not values:
            raise WindowingError(f"sentence at {start}:{end} produced no tokens")
        means.append(sum(values) / len(values))
    return means


def sequence_logprob(texts: Sequence[str], scorer: CoherenceScorer,
                     include_eot: bool = True) -> tuple[float, int]:
    """Total log-likelihood and token count of sentences scored in order.

    Sentences are packed greedily into windows of at most L tokens and each
    window is scored independently; the end-of-text probability is added
    once, after the final window.  Used for perplexity and for whole-text
    likelihood comparisons.
    """
    limit = scorer.max_input_length
    chunks: list[list[str]] = []
    load = 0
    for t in texts:
        c = count_tokens(t, scorer)
        if c > limit:
            raise WindowingError(f"sentence of {c} tokens exceeds the limit {limit}")
        if not chunks or load + c > limit:
            chunks.append([t])
            load = c
        else:
            chunks[-1].append(t)
            load += c
    total = 0.0
    count = 0
    if not chunks:
        if include_eot:
            scored = scorer.score("", include_eot=True)
            return scored.eot_logprob, 1
        return 0.0, 0
    for idx, chunk in enumerate(chunks):
        with_eot = include_eot and idx == len(chunks) - 1
        scored = scorer.score(assemble(chunk), include_eot=with_eot)
        total += sum(tok.logprob for tok in scored.tokens)
        count += len(scored.tokens)
        if with_eot:
            total += scored.eot_logprob
            count += 1
    return total, count
