"""Maximum-likelihood temperature estimation for token sequences.

Given per-step next-token logits and the tokens actually observed, the
estimator finds the temperature T at which the sum of observed logits
equals the sum of expected logits under the tempered softmax — the
unique stationary point of the sequence log-likelihood in T. Synthetic
seeded logit models, sweep/cross-grid experiment drivers, binary logit
dump IO, and a CLI are included.
"""

from .estimation import (
    LogitSequence,
    TokenSequence,
    expected_logit,
    log_likelihood,
    residual,
    step_variance,
    tempered_softmax,
)
from .experiments import (
    CorpusStats,
    CrossCellMetrics,
    CrossGridResult,
    SweepResult,
    SweepRow,
    TemperatureGrid,
    aggregate_sweep,
    corpus_stats,
    cross_grid,
    mae,
    pearson,
    r2,
    run_sweep,
)
from .solver import (
    RootResult,
    SolverConfig,
    SolverStatus,
    TemperatureEstimate,
    estimate_temperature,
    find_root,
)
from .storage import (
    FormatError,
    ResultTable,
    read_logit_dump,
    read_model_roster,
    read_results,
    write_logit_dump,
    write_model_roster,
    write_results,
)
from .textgen import (
    GeneratedText,
    GenerationConfig,
    SyntheticModel,
    SyntheticModelSpec,
    build_model,
    generate_text,
    sample_token,
    score_text,
    token_at_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "LogitSequence",
    "TokenSequence",
    "tempered_softmax",
    "expected_logit",
    "step_variance",
    "log_likelihood",
    "residual",
    "SolverConfig",
    "SolverStatus",
    "TemperatureEstimate",
    "RootResult",
    "estimate_temperature",
    "find_root",
    "SyntheticModelSpec",
    "SyntheticModel",
    "GenerationConfig",
    "GeneratedText",
    "build_model",
    "generate_text",
    "score_text",
    "sample_token",
    "token_at_quantile",
    "TemperatureGrid",
    "SweepRow",
    "SweepResult",
    "CrossCellMetrics",
    "CrossGridResult",
    "CorpusStats",
    "run_sweep",
    "cross_grid",
    "aggregate_sweep",
    "corpus_stats",
    "mae",
    "r2",
    "pearson",
    "FormatError",
    "ResultTable",
    "read_logit_dump",
    "write_logit_dump",
    "read_results",
    "write_results",
    "read_model_roster",
    "write_model_roster",
]
