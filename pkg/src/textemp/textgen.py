"""Seeded synthetic autoregressive logit models and a temperature sampler.

A synthetic model is an order-k logit table over a finite vocabulary:
the logit row for a context is a deterministic function of (seed, last k
tokens), materialized lazily by hashing the context window (see prng for
the scheme) and drawing vocab unit normals scaled by logit_scale. Rows
are never stored as a full vocab**k table, so high orders stay O(1) in
memory up to a bounded row cache.

The same model plays two roles: generator (sample a text at temperature
T) and scorer (produce the logit row for every continuation position of
an arbitrary token sequence), which is what cross-model estimation needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prng
from .estimation import LogitSequence, TokenSequence, tempered_softmax

_ROW_CACHE_LIMIT = 65536


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Defines a synthetic model; equal specs build identical models."""

    vocab: int = 128
    order: int = 1
    logit_scale: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.vocab < 2:
            raise ValueError(f"vocab must be >= 2, got {self.vocab}")
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        if not self.logit_scale > 0:
            raise ValueError(f"logit_scale must be positive, got {self.logit_scale}")

    def model_id(self) -> str:
        return f"syn-v{self.vocab}-k{self.order}-sc{self.logit_scale:g}-s{self.seed}"


@dataclass(frozen=True)
class GenerationConfig:
    temperature: float
    n_tokens: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.n_tokens < 1:
            raise ValueError(f"n_tokens must be >= 1, got {self.n_tokens}")


@dataclass(frozen=True)
class GeneratedText:
    """A sampled token sequence with the logit row used at each step.

    tokens[0] is the seeded uniform start token; logits has one row per
    continuation step, aligned with tokens[1:]. The start token has no
    logit record because it is not drawn from the model.
    """

    tokens: TokenSequence
    logits: LogitSequence
    gen_temperature: float
    gen_seed: int
    model_id: str


class SyntheticModel:
    """Immutable handle for a built synthetic model.

    The row cache only memoizes pure recomputation, so sharing a handle
    across threads is safe.
    """

    def __init__(self, spec: SyntheticModelSpec):
        self.spec = spec
        self.vocab = spec.vocab
        self.order = spec.order
        self.model_id = spec.model_id()
        self._start_symbol = spec.vocab  # reserved padding id for short contexts
        self._rows: dict[tuple[int, ...], np.ndarray] = {}

    def __repr__(self) -> str:
        return f"SyntheticModel({self.model_id})"

    def _window(self, context: list[int] | tuple[int, ...]) -> tuple[int, ...]:
        ctx = tuple(int(t) for t in context[-self.order:]) if self.order else ()
        if len(ctx) < self.order:
            ctx = (self._start_symbol,) * (self.order - len(ctx)) + ctx
        return ctx

    def logits_for_context(self, context) -> np.ndarray:
        """Logit row keyed by the last `order` tokens of context.

        Shorter contexts are left-padded with the reserved start symbol.
        The returned array is a read-only cached row.
        """
        for t in context:
            if not 0 <= int(t) < self.vocab:
                raise ValueError(f"token {t} out of range for vocab {self.vocab}")
        return self._row(self._window(context))

    def _row(self, window: tuple[int, ...]) -> np.ndarray:
        row = self._rows.get(window)
        if row is None:
            key = prng.derive_key(self.spec.seed, *[s + 1 for s in window])
            z = np.asarray(prng.normals(key, self.vocab), dtype=np.float64)
            row = self.spec.logit_scale * z
            row.setflags(write=False)
            if len(self._rows) < _ROW_CACHE_LIMIT:
                self._rows[window] = row
        return row


def build_model(spec: SyntheticModelSpec) -> SyntheticModel:
    """Build the deterministic model a SyntheticModelSpec defines."""
    return SyntheticModel(spec)


def token_at_quantile(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF pick: first index whose cumulative probability exceeds u."""
    cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


def sample_token(probs: np.ndarray, rng: prng.Stream64) -> int:
    """Sample one token id by inverse CDF in index order.

    Consumes exactly one uniform draw from rng regardless of outcome.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or (p < 0).any() or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError("probs must be a non-negative vector summing to 1")
    return token_at_quantile(p, rng.uniform())


def generate_text(model: SyntheticModel, config: GenerationConfig) -> GeneratedText:
    """Sample a text: seeded uniform start token, then n_tokens model steps.

    Each continuation token is drawn from tempered_softmax of the model's
    logit row for the current context; the raw (untempered) row is
    recorded so the text can be re-scored exactly.
    """
    rng = prng.Stream64(config.seed)
    start = min(int(rng.uniform() * model.vocab), model.vocab - 1)
    tokens = [start]
    rows = np.empty((config.n_tokens, model.vocab), dtype=np.float64)
    for i in range(config.n_tokens):
        row = model._row(model._window(tokens))  # tokens are in-range by construction
        rows[i] = row
        probs = tempered_softmax(row, config.temperature)
        tokens.append(sample_token(probs, rng))
    return GeneratedText(
        tokens=TokenSequence(tokens, model.vocab),
        logits=LogitSequence(rows, model.vocab),
        gen_temperature=config.temperature,
        gen_seed=config.seed,
        model_id=model.model_id,
    )


def score_text(model: SyntheticModel, tokens: TokenSequence) -> LogitSequence:
    """Logit rows a model assigns to every continuation position of a text.

    Row i-1 is the model's logits for predicting tokens[i], i = 1..N-1;
    the first token has no prediction. The scoring model may differ from
    the generator, but must share the vocabulary.
    """
    if tokens.vocab != model.vocab:
        raise ValueError(
            f"vocabulary mismatch: text has vocab {tokens.vocab}, scorer {model.vocab}"
        )
    ids = [int(t) for t in tokens.tokens]
    n = len(ids)
    rows = np.empty((max(n - 1, 0), model.vocab), dtype=np.float64)
    for i in range(1, n):
        rows[i - 1] = model._row(model._window(ids[:i]))  # ids validated by TokenSequence
    return LogitSequence(rows, model.vocab)
