"""Experiment drivers: temperature sweeps, cross-model grids, corpus stats.

A sweep generates texts_per_t texts at every grid temperature with one
model and estimates each text's temperature with another (or the same)
model. A cross grid runs a sweep for every ordered (generator, estimator)
pair and aggregates goodness metrics. Everything is deterministic given
the experiment seed: each (temperature, text) cell derives its own
generation seed, so results do not depend on execution order and cells
may run in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import prng
from .estimation import TokenSequence
from .solver import SolverConfig, SolverStatus, TemperatureEstimate, estimate_temperature
from .textgen import GenerationConfig, SyntheticModel, generate_text, score_text


@dataclass(frozen=True)
class TemperatureGrid:
    """Inclusive arithmetic grid t_min, t_min + t_step, ... up to t_max."""

    t_min: float = 0.001
    t_max: float = 2.401
    t_step: float = 0.1

    def __post_init__(self):
        if not (0 < self.t_min <= self.t_max):
            raise ValueError(f"need 0 < t_min <= t_max, got [{self.t_min}, {self.t_max}]")
        if not self.t_step > 0:
            raise ValueError(f"t_step must be positive, got {self.t_step}")

    def values(self) -> list[float]:
        n = int(math.floor((self.t_max - self.t_min) / self.t_step + 1e-9)) + 1
        # rounding keeps grid values equal to their decimal literals
        return [round(self.t_min + k * self.t_step, 12) for k in range(n)]


@dataclass(frozen=True)
class SweepRow:
    gen_temperature: float
    text_index: int
    t_hat: float
    status: SolverStatus
    gen_model_id: str
    est_model_id: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def converged_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status == SolverStatus.CONVERGED]


@dataclass(frozen=True)
class CrossCellMetrics:
    """Aggregates for one (generator, estimator) pair, pooled over all rows.

    mae_all uses every row at its (possibly clamped) estimate; r2 and
    pearson use converged rows only, and are nan when undefined.
    """

    gen_model_id: str
    est_model_id: str
    mae_all: float
    mae_converged: float
    r2: float
    pearson: float
    n_rows: int
    n_saturated: int


@dataclass(frozen=True)
class CrossGridResult:
    model_ids: tuple[str, ...]
    cells: tuple[CrossCellMetrics, ...]

    def cell(self, gen_id: str, est_id: str) -> CrossCellMetrics:
        for c in self.cells:
            if c.gen_model_id == gen_id and c.est_model_id == est_id:
                return c
        raise KeyError(f"no cell ({gen_id}, {est_id})")


@dataclass(frozen=True)
class CorpusStats:
    corpus_id: str
    n_texts: int
    mean_t: float
    std_t: float  # population convention (divide by n)
    n_saturated: int


def mae(xs, ys) -> float:
    """Mean absolute error between two equal-length sequences."""
    x, y = _paired(xs, ys)
    return float(np.mean(np.abs(x - y)))


def r2(xs, ys) -> float:
    """Coefficient of determination treating xs as predictions of ys."""
    x, y = _paired(xs, ys)
    denom = float(np.sum((y - y.mean()) ** 2))
    if denom == 0.0:
        raise ValueError("r2 undefined: ys is constant")
    return 1.0 - float(np.sum((y - x) ** 2)) / denom


def pearson(xs, ys) -> float:
    """Sample correlation; undefined (raises) when either input is constant."""
    x, y = _paired(xs, ys)
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = float(np.sqrt(np.sum(xc**2))), float(np.sqrt(np.sum(yc**2)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson undefined on constant input")
    return float(np.sum(xc * yc) / (sx * sy))


def _paired(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64).reshape(-1)
    y = np.asarray(ys, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise ValueError("empty input")
    return x, y


def run_sweep(
    gen_model: SyntheticModel,
    est_model: SyntheticModel,
    grid: TemperatureGrid,
    texts_per_t: int = 10,
    n_tokens: int = 200,
    seed: int = 0,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Generate and estimate texts over the whole temperature grid.

    The per-cell seed is derived from (seed, text_index, temperature_index)
    only, so a generator produces identical texts no matter which model
    estimates them.
    """
    if gen_model.vocab != est_model.vocab:
        raise ValueError(
            f"vocab mismatch: generator {gen_model.vocab} vs estimator {est_model.vocab}"
        )
    if texts_per_t < 1:
        raise ValueError(f"texts_per_t must be >= 1, got {texts_per_t}")
    cfg = solver_config or SolverConfig()
    temps = grid.values()
    same_model = est_model.model_id == gen_model.model_id

    def cell(ti_xi: tuple[int, int]) -> SweepRow:
        ti, xi = ti_xi
        text_seed = prng.derive_key(seed, xi, ti)
        text = generate_text(
            gen_model, GenerationConfig(temperature=temps[ti], n_tokens=n_tokens, seed=text_seed)
        )
        if same_model:
            logits = text.logits  # identical to re-scoring, by self-consistency
        else:
            logits = score_text(est_model, text.tokens)
        continuation = TokenSequence(text.tokens.tokens[1:], text.tokens.vocab)
        est = estimate_temperature(logits, continuation, cfg)
        return SweepRow(
            gen_temperature=temps[ti],
            text_index=xi,
            t_hat=est.t_hat,
            status=est.status,
            gen_model_id=gen_model.model_id,
            est_model_id=est_model.model_id,
        )

    cells = [(ti, xi) for ti in range(len(temps)) for xi in range(texts_per_t)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(cell, cells))
    else:
        rows = [cell(c) for c in cells]
    return SweepResult(rows=tuple(rows))


def cross_grid(
    models: list[SyntheticModel],
    grid: TemperatureGrid,
    texts_per_t: int = 10,
    n_tokens: int = 200,
    seed: int = 0,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
) -> CrossGridResult:
    """Sweep every ordered (generator, estimator) pair and aggregate metrics."""
    if len(models) < 2:
        raise ValueError("cross grid needs at least 2 models")
    cells = []
    for gen in models:
        for est in models:
            sweep = run_sweep(
                gen, est, grid, texts_per_t, n_tokens, seed, solver_config, jobs=jobs
            )
            cells.append(aggregate_sweep(sweep))
    return CrossGridResult(
        model_ids=tuple(m.model_id for m in models), cells=tuple(cells)
    )


def aggregate_sweep(sweep: SweepResult) -> CrossCellMetrics:
    """Pool all (temperature, text) rows of one sweep into cell metrics."""
    rows = sweep.rows
    if not rows:
        raise ValueError("empty sweep")
    xs_all = [r.gen_temperature for r in rows]
    ys_all = [r.t_hat for r in rows]
    conv = sweep.converged_rows()
    xs_c = [r.gen_temperature for r in conv]
    ys_c = [r.t_hat for r in conv]

    def _or_nan(fn, xs, ys):
        try:
            return fn(xs, ys)
        except ValueError:
            return math.nan

    return CrossCellMetrics(
        gen_model_id=rows[0].gen_model_id,
        est_model_id=rows[0].est_model_id,
        mae_all=mae(xs_all, ys_all),
        mae_converged=_or_nan(mae, xs_c, ys_c),
        r2=_or_nan(r2, xs_c, ys_c),
        pearson=_or_nan(pearson, xs_c, ys_c),
        n_rows=len(rows),
        n_saturated=len(rows) - len(conv),
    )


def corpus_stats(estimates: list[TemperatureEstimate], corpus_id: str) -> CorpusStats:
    """Mean/std of converged estimates; saturated and degenerate are counted.

    std uses the population convention (divide by n).
    """
    if not estimates:
        raise ValueError("no estimates")
    converged = [e.t_hat for e in estimates if e.status == SolverStatus.CONVERGED]
    n_saturated = len(estimates) - len(converged)
    if not converged:
        raise ValueError("no usable estimates: every input is saturated or degenerate")
    arr = np.asarray(converged, dtype=np.float64)
    return CorpusStats(
        corpus_id=corpus_id,
        n_texts=len(estimates),
        mean_t=float(arr.mean()),
        std_t=float(arr.std()),  # ddof=0: population convention
        n_saturated=n_saturated,
    )
