"""Dump per-token next-token logits from a causal LM checkpoint.

For each input text the model is run once over the token sequence; the
logit row at position i-1 (the model's prediction made before seeing
token i) is paired with the token actually at position i. Row count is
therefore token count minus one, and the full vocabulary row is kept:
the downstream estimator needs the complete distribution, not a top-k
slice.

An alignment self-check recomputes the unit-temperature log-likelihood
two ways, straight from the model's log-softmax and again from the
written file, and refuses to keep a dump when they disagree: off-by-one
pairing is the classic failure mode of this kind of export and it shifts
the likelihood by far more than float32 rounding can.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .tlog import read_tlog, write_tlog

SELF_CHECK_REL_TOL = 1e-3  # float32 storage rounding leaves plenty of headroom


@dataclass
class AdapterConfig:
    model: str  # checkpoint identifier or local path
    texts: list[str] = field(default_factory=list)  # input text file paths
    output_dir: str = "."
    max_length: int = 1024
    device: str = "cpu"
    quantization_note: str = "none"

    def __post_init__(self):
        if not self.texts:
            raise ValueError("no input texts")
        if self.max_length < 2:
            raise ValueError("max_length must be >= 2")


@dataclass(frozen=True)
class DumpReport:
    source: str
    dump_path: str
    n_steps: int
    vocab: int
    log_likelihood_model: float
    log_likelihood_file: float


def load_model(config: AdapterConfig):
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForCausalLM.from_pretrained(config.model)
    model.to(config.device)
    model.eval()
    return model, tokenizer


def dump_text_logits(config: AdapterConfig) -> list[DumpReport]:
    """Write one TLOG file per input text, plus a sidecar metadata file.

    Returns a report per text. Raises if the model cannot be loaded, a
    text tokenizes to fewer than 2 tokens, the vocabulary exceeds the
    32-bit header field, or the alignment self-check fails.
    """
    model, tokenizer = load_model(config)
    vocab = int(model.get_output_embeddings().weight.shape[0])
    if vocab >= 2**32:
        raise ValueError("vocab does not fit the 32-bit header field")
    max_length = min(config.max_length, _context_limit(model))
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    for text_path in config.texts:
        text = Path(text_path).read_text(encoding="utf-8")
        ids = tokenizer.encode(text)[:max_length]
        if len(ids) < 2:
            raise ValueError(f"{text_path}: tokenizes to fewer than 2 tokens")
        with torch.no_grad():
            logits = model(
                input_ids=torch.tensor([ids], device=config.device)
            ).logits[0].float().cpu()

        rows = logits[:-1]  # prediction rows; row i-1 predicts ids[i]
        observed = np.asarray(ids[1:], dtype=np.int64)
        dump_path = out_dir / (Path(text_path).stem + ".tlog")
        write_tlog(dump_path, rows.numpy(), observed)

        ll_model = float(
            torch.log_softmax(rows.double(), dim=-1)[
                torch.arange(len(observed)), torch.tensor(observed)
            ].sum()
        )
        ll_file = _file_log_likelihood(dump_path)
        if abs(ll_file - ll_model) > SELF_CHECK_REL_TOL * max(abs(ll_model), 1.0):
            dump_path.unlink()
            raise RuntimeError(
                f"{text_path}: alignment self-check failed "
                f"(model {ll_model:.6f} vs file {ll_file:.6f})"
            )

        _write_sidecar(dump_path, config, tokenizer, len(observed), vocab)
        reports.append(DumpReport(
            source=str(text_path),
            dump_path=str(dump_path),
            n_steps=len(observed),
            vocab=vocab,
            log_likelihood_model=ll_model,
            log_likelihood_file=ll_file,
        ))
    return reports


def _context_limit(model) -> int:
    """The longest input the checkpoint can score in one pass."""
    for attr in ("max_position_embeddings", "n_positions"):
        limit = getattr(model.config, attr, None)
        if isinstance(limit, int) and limit > 0:
            return limit
    return 2**31  # no positional limit declared (e.g. rotary/alibi models)


def _file_log_likelihood(dump_path) -> float:
    """Unit-temperature log-likelihood recomputed from the written bytes."""
    logits, tokens = read_tlog(dump_path)
    rowmax = logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(logits - rowmax).sum(axis=1)) + rowmax[:, 0]
    return float((logits[np.arange(len(tokens)), tokens] - lse).sum())


def _write_sidecar(dump_path: Path, config: AdapterConfig, tokenizer, n_steps, vocab) -> None:
    meta = {
        "model": config.model,
        "tokenizer": tokenizer.name_or_path,
        "n_steps": n_steps,
        "vocab": vocab,
        "max_length": config.max_length,
        "quantization": config.quantization_note,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    dump_path.with_suffix(".tlog.meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
