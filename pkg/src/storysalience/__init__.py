"""Unsupervised sentence-salience scoring for narrative text.

A sentence's salience is the drop in the story's suffix log-likelihood
when the events it describes are removed, measured with a left-to-right
language model (the built-in n-gram scorer or a remote neural sidecar).
"""

__version__ = "0.1.0"

from .baselines import (BaselineMethod, TfIdfModel, baseline_scores,
                        combine_scores, fit_tfidf, min_max)
from .corpus import (ArgumentSpan, Corpus, Sentence, Story, Token, corpus_stats,
                     load_corpus, save_corpus)
from .errors import (CorpusParseError, CorpusValidationError, InsufficientDataError,
                     MissingAnnotationError, ProtocolError, StorySalienceError,
                     TransportError, WindowingError)
from .evaluation import (EvalReport, average_precision, mean_average_precision,
                         spearman_rho, wilcoxon_signed_rank)
from .experiments import (PermutationPair, deletion_detection_accuracy,
                          generate_permutations, ordering_accuracy)
from .removal import Edit, RemovalMethod, RemovalResult, remove_events
from .salience import (SalienceConfig, SalienceResult, SentenceDiagnostics,
                       coherence, pairwise_likelihood_diff, salience_corpus,
                       salience_story, windowed_bounds)
from .scorer import (CoherenceScorer, NGramLM, RemoteScorer, ScoredText,
                     ScoredToken, check_scored_text, load_ngram_model,
                     perplexity, save_ngram_model)

__all__ = [name for name in dir() if not name.startswith("_")]
