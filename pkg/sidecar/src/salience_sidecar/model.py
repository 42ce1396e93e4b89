"""Causal-LM scoring: load a checkpoint once, emit token logprobs with offsets."""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer


class CheckpointError(Exception):
    """The checkpoint cannot be loaded or the configured limit is invalid."""


class OverLengthError(Exception):
    """The text encodes to more model tokens than the advertised limit."""

    def __init__(self, token_count: int, limit: int):
        super().__init__(
            f"text encodes to {token_count} tokens, over the {limit}-token limit")
        self.token_count = token_count
        self.limit = limit


class CausalScorer:
    """Deterministic per-token natural log-probabilities from a causal LM.

    The end-of-text token is prepended as context so the first text token is
    conditioned like any other; that occupies one position, so the advertised
    max_input_length is the checkpoint's context size minus one.  Offsets are
    codepoint indices into the request text.  Byte-level subword pieces that
    split one character report overlapping character spans; consecutive
    overlapping pieces are folded into one token with their log-probabilities
    summed (the chain rule keeps the text's total likelihood unchanged), so
    the emitted spans are non-overlapping and tile the input.
    """

    def __init__(self, checkpoint: str | Path, max_input_length: int | None = None):
        path = str(checkpoint)
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(path)
            self.model = AutoModelForCausalLM.from_pretrained(path)
        except Exception as e:
            raise CheckpointError(f"cannot load checkpoint {path!r}: {e}") from e
        self.model.eval()
        self.eot_id = self.tokenizer.eos_token_id
        if self.eot_id is None:
            raise CheckpointError(f"checkpoint {path!r} defines no end-of-text token")
        # minus one: the prepended eot context token takes a position
        capacity = int(self.model.config.max_position_embeddings) - 1
        if max_input_length is None:
            max_input_length = capacity
        if not 1 <= max_input_length <= capacity:
            raise CheckpointError(
                f"max_input_length {max_input_length} outside [1, {capacity}] "
                f"for this checkpoint")
        self.max_input_length = int(max_input_length)
        self.name = Path(path).name or path

    def score(self, text: str, include_eot: bool = True) -> dict:
        enc = self.tokenizer(text, add_special_tokens=False,
                             return_offsets_mapping=True)
        ids = enc["input_ids"]
        if len(ids) > self.max_input_length:
            raise OverLengthError(len(ids), self.max_input_length)
        with torch.inference_mode():
            out = self.model(torch.tensor([[self.eot_id] + list(ids)]))
            logprobs = torch.log_softmax(out.logits[0].float(), dim=-1)
        tokens: list[dict] = []
        # with the eot prepended, the logits at position j predict ids[j]
        for j, (tid, (start, end)) in enumerate(zip(ids, enc["offset_mapping"])):
            lp = float(logprobs[j, tid])
            if tokens and start < tokens[-1]["end"]:
                prev = tokens[-1]
                prev["end"] = max(prev["end"], end)
                prev["text"] = text[prev["start"]:prev["end"]]
                prev["logprob"] += lp
            else:
                tokens.append({"text": text[start:end], "logprob": lp,
                               "start": start, "end": end})
        eot = float(logprobs[len(ids), self.eot_id]) if include_eot else None
        return {"tokens": tokens, "eot_logprob": eot}
