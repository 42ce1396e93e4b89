import threading

import pytest

pytest.importorskip("salience_sidecar", reason="sidecar package not installed")

import torch
from tokenizers import ByteLevelBPETokenizer
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

from salience_sidecar.service import ServiceConfig, make_server

# tiny corpus: deliberately no "z" so single-letter token counting in the
# length tests stays merge-free, and some non-ASCII so accents are in-vocab
TRAIN_TEXTS = [
    "the wolf howled at the pale moon .",
    "a girl walked into the dark woods .",
    "the hunter followed the tracks home .",
    "everyone slept while the fire burned low .",
    "héllo café touché naïve 🦊",
    "“curly quotes” and, plain punctuation!? fine.",
]

N_POSITIONS = 40


def build_checkpoint(path, n_positions=N_POSITIONS):
    tok = ByteLevelBPETokenizer()
    tok.train_from_iterator(TRAIN_TEXTS, vocab_size=500, min_frequency=1,
                            special_tokens=["<|endoftext|>"])
    path.mkdir(parents=True, exist_ok=True)
    tok.save(str(path / "tokenizer.json"))
    fast = PreTrainedTokenizerFast(tokenizer_file=str(path / "tokenizer.json"),
                                   eos_token="<|endoftext|>",
                                   bos_token="<|endoftext|>")
    fast.save_pretrained(path)
    torch.manual_seed(7)
    config = GPT2Config(vocab_size=tok.get_vocab_size(), n_positions=n_positions,
                        n_embd=32, n_layer=2, n_head=2,
                        bos_token_id=0, eos_token_id=0)
    GPT2LMHeadModel(config).save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    return build_checkpoint(tmp_path_factory.mktemp("ckpt") / "tiny-gpt2")


@pytest.fixture(scope="session")
def server(checkpoint):
    srv = make_server(ServiceConfig(checkpoint=str(checkpoint), port=0))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


@pytest.fixture(scope="session")
def base_url(server):
    host, port = server.server_address[:2]
    return f"http://{host}:{port}"
