"""Numerical kernels for tempered-softmax temperature estimation.

A token sequence scored by a next-token model gives, at every step, a
full logit vector u and the logit u_obs of the token actually present.
The maximum-likelihood temperature is the T at which the sum of observed
logits equals the sum of expected logits under the tempered distribution
p_l = exp(u_l/T) / sum_k exp(u_k/T). This module provides those kernels:
the tempered softmax, the expected logit and its variance, the total
log-likelihood, and the residual whose root (in inverse temperature
beta = 1/T) is the estimate.

All accumulation is float64 regardless of input storage width, and every
softmax/log-sum-exp subtracts the per-step maximum logit first, so no
finite input can overflow. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_logit_matrix(steps) -> np.ndarray:
    arr = np.asarray(steps, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"logit steps must be a 2-d array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LogitSequence:
    """Per-step logit vectors for a token sequence.

    steps: shape (n_steps, vocab), float64, all finite. May be empty
    (a one-token text has no scored steps), but estimation requires at
    least one step.
    """

    steps: np.ndarray
    vocab: int

    def __post_init__(self):
        object.__setattr__(self, "steps", _as_logit_matrix(self.steps))
        if self.vocab < 1:
            raise ValueError(f"vocab must be positive, got {self.vocab}")
        if self.steps.size and self.steps.shape[1] != self.vocab:
            raise ValueError(
                f"each step must have {self.vocab} logits, got {self.steps.shape[1]}"
            )
        if not np.isfinite(self.steps).all():
            raise ValueError("logits must all be finite")

    def __len__(self) -> int:
        return self.steps.shape[0] if self.steps.size else 0


@dataclass(frozen=True)
class TokenSequence:
    """Observed token ids, each in [0, vocab)."""

    tokens: np.ndarray
    vocab: int

    def __post_init__(self):
        toks = np.asarray(self.tokens, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "tokens", toks)
        if self.vocab < 1:
            raise ValueError(f"vocab must be positive, got {self.vocab}")
        if toks.size and (toks.min() < 0 or toks.max() >= self.vocab):
            raise ValueError(f"token ids must lie in [0, {self.vocab})")

    def __len__(self) -> int:
        return int(self.tokens.size)


def _check_temperature(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t <= 0.0:
        raise ValueError(f"temperature must be positive and finite, got {t}")
    return t


def _check_aligned(logits: LogitSequence, tokens: TokenSequence) -> None:
    if logits.vocab != tokens.vocab:
        raise ValueError(f"vocab mismatch: logits {logits.vocab} vs tokens {tokens.vocab}")
    if len(logits) != len(tokens):
        raise ValueError(f"length mismatch: {len(logits)} logit steps vs {len(tokens)} tokens")
    if len(logits) == 0:
        raise ValueError("estimation needs at least one step")


def tempered_softmax(logits, temperature: float) -> np.ndarray:
    """Probabilities p_l = exp(u_l/T) / sum_k exp(u_k/T) for one step.

    Stable for any finite logits: the per-step max is subtracted before
    exponentiation, so the largest exponent is exactly zero.
    """
    t = _check_temperature(temperature)
    u = np.asarray(logits, dtype=np.float64).reshape(-1)
    if u.size == 0:
        raise ValueError("logit vector is empty")
    if not np.isfinite(u).all():
        raise ValueError("logits must all be finite")
    with np.errstate(over="ignore"):  # u - max can round to -inf for extreme spreads
        z = np.exp((u - u.max()) / t)
    return z / z.sum()


def expected_logit(logits, temperature: float) -> float:
    """Mean logit under the tempered distribution; lies in [min u, max u]."""
    u = np.asarray(logits, dtype=np.float64).reshape(-1)
    p = tempered_softmax(u, temperature)
    return float(p @ u)


def step_variance(logits, temperature: float) -> float:
    """Variance of the logit under the tempered distribution.

    Equals the derivative of the expected logit with respect to the
    inverse temperature beta = 1/T; zero exactly when all logits are equal.
    """
    u = np.asarray(logits, dtype=np.float64).reshape(-1)
    p = tempered_softmax(u, temperature)
    m = float(p @ u)
    # centred form keeps the value non-negative under rounding
    return float(p @ np.square(u - m))


@dataclass
class _Prepared:
    """Shared precomputation for repeated residual/likelihood evaluations."""

    centered: np.ndarray  # u - rowmax, shape (n, vocab)
    rowmax: np.ndarray  # shape (n,)
    obs_centered: np.ndarray  # u_obs - rowmax, shape (n,)
    obs_sum: float = field(init=False)
    max_sum: float = field(init=False)

    def __post_init__(self):
        self.obs_sum = float(self.obs_centered.sum() + self.rowmax.sum())
        self.max_sum = float(self.rowmax.sum())

    def residual(self, beta: float) -> float:
        """sum_i E[u_i | beta] - sum_i u_obs_i, all in float64."""
        with np.errstate(over="ignore"):
            z = np.exp(beta * self.centered)
        denom = z.sum(axis=1)
        e_centered = (z * self.centered).sum(axis=1) / denom
        return float(e_centered.sum() + self.max_sum - self.obs_sum)

    def log_likelihood(self, beta: float) -> float:
        """sum_i log p(t_i | u_i, T=1/beta) via per-step log-sum-exp."""
        with np.errstate(over="ignore"):
            z = np.exp(beta * self.centered)
        lse = np.log(z.sum(axis=1))
        return float((beta * self.obs_centered - lse).sum())


def prepare(logits: LogitSequence, tokens: TokenSequence) -> _Prepared:
    """Precompute centred logits and observed sums for solver loops."""
    _check_aligned(logits, tokens)
    u = logits.steps
    rowmax = u.max(axis=1)
    centered = u - rowmax[:, None]
    obs = u[np.arange(len(tokens)), tokens.tokens]
    return _Prepared(centered=centered, rowmax=rowmax, obs_centered=obs - rowmax)


def log_likelihood(logits: LogitSequence, tokens: TokenSequence, temperature: float) -> float:
    """Total log-likelihood of the observed tokens at the given temperature.

    Computed as sum_i [u_obs/T - logsumexp(u/T)], never as log of a
    softmax output, so steps with vanishing probability stay finite.
    """
    t = _check_temperature(temperature)
    return prepare(logits, tokens).log_likelihood(1.0 / t)


def residual(logits: LogitSequence, tokens: TokenSequence, beta: float) -> float:
    """MLE residual R(beta) = sum_i E[u_i | T=1/beta] - sum_i u_obs_i.

    R is nondecreasing in beta (strictly increasing when any step has
    unequal logits); the temperature estimate is T = 1/beta at R = 0.
    Steps whose logits are all equal contribute zero at every beta.
    """
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0.0:
        raise ValueError(f"beta must be positive and finite, got {beta}")
    return prepare(logits, tokens).residual(beta)
