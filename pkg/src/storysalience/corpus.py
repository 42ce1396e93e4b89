"""Annotated story corpora: domain types, JSON loading, validation, statistics.

A corpus is a single JSON file::

    {"meta": {...},
     "stories": [{"id": str,
                  "sentences": [{"raw_text": str,
                                 "gold_salient": bool|null,
                                 "tokens": [{"surface": str, "pos": str}],
                                 "spans": [{"label": str,
                                            "start_token": int,
                                            "end_token": int,
                                            "predicate_token": int}]}]}]}

Token indices are implicit by array position.  The detokenization rule is a
single-space join of token surfaces; ``raw_text`` records it explicitly and
is recomputed when absent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusParseError, CorpusValidationError


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    index: int


@dataclass(frozen=True)
class ArgumentSpan:
    label: str
    start_token: int
    end_token: int
    predicate_token: int


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    spans: tuple[ArgumentSpan, ...] = ()
    gold_salient: bool | None = None
    raw_text: str = ""

    def __post_init__(self):
        if not self.raw_text:
            object.__setattr__(self, "raw_text", detokenize(self.tokens))

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Story:
    id: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Corpus:
    stories: tuple[Story, ...]
    meta: dict = field(default_factory=dict)

    def story(self, story_id: str) -> Story:
        for s in self.stories:
            if s.id == story_id:
                return s
        raise KeyError(story_id)


@dataclass(frozen=True)
class StatsSummary:
    story_count: int
    sentence_count: int
    word_count: int
    gold_salient_count: int
    avg_sentences_per_story: float
    avg_words_per_story: float
    avg_salient_per_story: float


def detokenize(tokens) -> str:
    """Canonical single-space join of token surfaces."""
    return " ".join(t.surface for t in tokens)


def _require(mapping, key, kind, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise CorpusParseError(f"missing field {where}.{key}")
    value = mapping[key]
    if kind is bool and not isinstance(value, bool):
        raise CorpusParseError(f"field {where}.{key} must be a boolean")
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise CorpusParseError(f"field {where}.{key} must be an integer")
    if kind is str and not isinstance(value, str):
        raise CorpusParseError(f"field {where}.{key} must be a string")
    if kind is list and not isinstance(value, list):
        raise CorpusParseError(f"field {where}.{key} must be an array")
    return value


def _sentence_from_dict(data, where) -> Sentence:
    tokens = []
    for i, tok in enumerate(_require(data, "tokens", list, where)):
        tokens.append(Token(surface=_require(tok, "surface", str, f"{where}.tokens[{i}]"),
                            pos=_require(tok, "pos", str, f"{where}.tokens[{i}]"),
                            index=i))
    spans = []
    for i, span in enumerate(data.get("spans", [])):
        w = f"{where}.spans[{i}]"
        spans.append(ArgumentSpan(label=_require(span, "label", str, w),
                                  start_token=_require(span, "start_token", int, w),
                                  end_token=_require(span, "end_token", int, w),
                                  predicate_token=_require(span, "predicate_token", int, w)))
    gold = data.get("gold_salient")
    if gold is not None and not isinstance(gold, bool):
        raise CorpusParseError(f"field {where}.gold_salient must be a boolean or null")
    raw_text = data.get("raw_text")
    if raw_text is not None and not isinstance(raw_text, str):
        raise CorpusParseError(f"field {where}.raw_text must be a string")
    return Sentence(tokens=tuple(tokens), spans=tuple(spans), gold_salient=gold,
                    raw_text=raw_text or "")


def corpus_from_dict(data) -> Corpus:
    stories = []
    for si, story in enumerate(_require(data, "stories", list, "$")):
        where = f"$.stories[{si}]"
        story_id = _require(story, "id", str, where)
        sentences = [_sentence_from_dict(s, f"{where}.sentences[{i}]")
                     for i, s in enumerate(_require(story, "sentences", list, where))]
        stories.append(Story(id=story_id, sentences=tuple(sentences)))
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise CorpusParseError("field $.meta must be an object")
    corpus = Corpus(stories=tuple(stories), meta=meta)
    validate_corpus(corpus)
    return corpus


def validate_corpus(corpus: Corpus) -> None:
    """Check every structural invariant, raising CorpusValidationError on the first violation."""
    if not corpus.stories:
        raise CorpusValidationError("corpus has no stories")
    seen = set()
    for story in corpus.stories:
        if story.id in seen:
            raise CorpusValidationError(f"duplicate story id {story.id!r}")
        seen.add(story.id)
        if not story.sentences:
            raise CorpusValidationError(f"story {story.id!r} has no sentences")
        for k, sentence in enumerate(story.sentences):
            where = f"story {story.id!r} sentence {k}"
            if not sentence.tokens:
                raise CorpusValidationError(f"{where}: no tokens")
            for tok in sentence.tokens:
                if not tok.surface:
                    raise CorpusValidationError(f"{where} token {tok.index}: empty surface")
                if not tok.pos or tok.pos != tok.pos.upper():
                    raise CorpusValidationError(
                        f"{where} token {tok.index}: pos must be a non-empty uppercase tag")
            n = len(sentence.tokens)
            for span in sentence.spans:
                if not span.label:
                    raise CorpusValidationError(f"{where}: span with empty label")
                if not (0 <= span.start_token <= span.end_token < n):
                    raise CorpusValidationError(
                        f"{where}: span {span.label} [{span.start_token}, {span.end_token}] "
                        f"out of range for {n} tokens")
                if not (0 <= span.predicate_token < n):
                    raise CorpusValidationError(
                        f"{where}: span {span.label} predicate_token {span.predicate_token} "
                        f"out of range for {n} tokens")
            if sentence.raw_text != detokenize(sentence.tokens):
                raise CorpusValidationError(
                    f"{where}: raw_text does not match the single-space join of token surfaces")


def load_corpus(path) -> Corpus:
    """Load and validate a corpus JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorpusParseError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return corpus_from_dict(data)


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "meta": corpus.meta,
        "stories": [
            {
                "id": story.id,
                "sentences": [
                    {
                        "raw_text": s.raw_text,
                        "gold_salient": s.gold_salient,
                        "tokens": [{"surface": t.surface, "pos": t.pos} for t in s.tokens],
                        "spans": [
                            {"label": sp.label, "start_token": sp.start_token,
                             "end_token": sp.end_token, "predicate_token": sp.predicate_token}
                            for sp in s.spans
                        ],
                    }
                    for s in story.sentences
                ],
            }
            for story in corpus.stories
        ],
    }


def save_corpus(corpus: Corpus, path) -> None:
    Path(path).write_text(json.dumps(corpus_to_dict(corpus), ensure_ascii=False, indent=2),
                          encoding="utf-8")


def corpus_stats(corpus: Corpus) -> StatsSummary:
    """Counts and per-story arithmetic means over the whole corpus."""
    story_count = len(corpus.stories)
    sentence_count = sum(len(s.sentences) for s in corpus.stories)
    word_count = sum(len(sent.tokens) for s in corpus.stories for sent in s.sentences)
    salient = sum(1 for s in corpus.stories for sent in s.sentences if sent.gold_salient)
    return StatsSummary(
        story_count=story_count,
        sentence_count=sentence_count,
        word_count=word_count,
        gold_salient_count=salient,
        avg_sentences_per_story=sentence_count / story_count,
        avg_words_per_story=word_count / story_count,
        avg_salient_per_story=salient / story_count,
    )
