#!/usr/bin/env python3
"""Build the tiny character-level checkpoint committed under tests/fixtures.

Trains a small GPT-2-architecture causal LM on the bundled English corpus
just long enough to minimize held-out loss (the sandbox this project is
developed in has no model-hub access, so tests run against this local
checkpoint instead of a downloaded one). Training deliberately stops near
the validation optimum: a model that is calibrated on unseen English is
what the adapter's sanity-band test needs, and both under- and
over-training push the estimated temperature of held-out text away from 1.

Deterministic given the seeds below; rerun only to regenerate the fixture.

    python tools/make_fixture_model.py [--steps 75] [--out tests/fixtures/tiny-gpt2-char]
"""

import argparse
from pathlib import Path

import numpy as np
import torch
from tokenizers import Regex, Tokenizer, decoders, models, pre_tokenizers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

HERE = Path(__file__).resolve().parent
VOCAB = ["<unk>"] + ["\n"] + [chr(c) for c in range(32, 127)]


def build_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {ch: i for i, ch in enumerate(VOCAB)}
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Split(Regex(r"[\s\S]"), behavior="isolated")
    tok.decoder = decoders.Fuse()
    return PreTrainedTokenizerFast(tokenizer_object=tok, unk_token="<unk>")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=75)
    parser.add_argument("--out", default=str(HERE.parent / "tests/fixtures/tiny-gpt2-char"))
    args = parser.parse_args()

    torch.manual_seed(0)
    np.random.seed(0)
    torch.use_deterministic_algorithms(True)

    tokenizer = build_tokenizer()
    corpus = (HERE / "corpus_train.txt").read_text(encoding="utf-8")
    data = torch.tensor(tokenizer.encode(corpus), dtype=torch.long)
    print(f"corpus: {len(data)} tokens, vocab {len(VOCAB)}")

    config = GPT2Config(
        vocab_size=len(VOCAB), n_positions=256, n_embd=96, n_layer=3, n_head=3,
        n_inner=384, resid_pdrop=0.1, embd_pdrop=0.1, attn_pdrop=0.1,
        bos_token_id=0, eos_token_id=0,
    )
    model = GPT2LMHeadModel(config)
    print(f"parameters: {sum(p.numel() for p in model.parameters())}")

    optimizer = torch.optim.AdamW(model.parameters(), lr=1e-3, weight_decay=0.01)
    ctx, batch = 128, 24
    sampler = torch.Generator().manual_seed(1)

    model.train()
    for step in range(1, args.steps + 1):
        ix = torch.randint(0, len(data) - ctx - 1, (batch,), generator=sampler)
        x = torch.stack([data[i:i + ctx] for i in ix])
        y = torch.stack([data[i + 1:i + ctx + 1] for i in ix])
        loss = model(input_ids=x, labels=y).loss
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if step % 25 == 0 or step == args.steps:
            print(f"step {step} loss {loss.item():.3f}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.eval()
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    print(f"saved checkpoint to {out}")


if __name__ == "__main__":
    main()
