"""Shared fixtures: a tiny randomly initialized BERT-style encoder.

Built once per session with a hand-rolled WordPiece vocabulary that covers
the topical test corpora, one continuation piece (``##fall``) so multi-piece
words exist, and nothing else — any other word tokenizes to the unknown
token. Weights are seeded, so every value derived from the model is stable
within a session.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
import torch

TOPIC_WORDS = {
    "arctic": ["arctic", "snow", "ice", "glacier", "frost", "polar"],
    "botany": ["botany", "flower", "leaf", "root", "stem", "seed"],
    "finance": ["finance", "market", "trade", "stock", "price", "profit"],
    "sport": ["sport", "hockey", "team", "goal", "coach", "league"],
}
FILLER_WORDS = ["the", "on", "and", "with", "about", "daily", "news", "from", "study", "report"]


def vocab_tokens() -> list[str]:
    words = sorted({w for ws in TOPIC_WORDS.values() for w in ws} | set(FILLER_WORDS))
    return ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", *words, "##fall"]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertModel, BertTokenizerFast

    vocab = {token: idx for idx, token in enumerate(vocab_tokens())}
    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = BertNormalizer(lowercase=True)
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        do_lower_case=True,
    )
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=128,
        pad_token_id=vocab["[PAD]"],
    )
    torch.manual_seed(0)
    model = BertModel(config)
    target = tmp_path_factory.mktemp("tiny-model")
    tokenizer.save_pretrained(target)
    model.save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def tiny_model(tiny_model_dir):
    from embed_export import load_model

    return load_model(tiny_model_dir)


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def make_topic_corpus(
    path: Path, docs_per_topic: int = 24, seed: int = 11, doc_len: tuple[int, int] = (8, 14)
) -> Path:
    """Labeled corpus of in-vocabulary words, one topic word pool per class.

    Every document mentions its class name, so the class names themselves are
    part of the exported vocabulary (the engine looks seen-class names up).
    """
    rng = random.Random(seed)
    rows = []
    for topic in sorted(TOPIC_WORDS):
        for n in range(docs_per_topic):
            length = rng.randint(*doc_len)
            words = [topic]
            while len(words) < length:
                pool = TOPIC_WORDS[topic] if rng.random() < 0.7 else FILLER_WORDS
                words.append(rng.choice(pool))
            rng.shuffle(words)
            rows.append(
                {"id": f"{topic}-{n:03d}", "text": " ".join(words), "label": topic}
            )
    return write_jsonl(path, rows)
