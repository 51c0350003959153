"""Bit-exact file formats: TLOG logit dumps, result tables, model rosters.

TLOG layout (all integers little-endian unsigned 32-bit):

    offset  size            field
    0       4               magic "TLOG"
    4       4               format_version (1)
    8       4               n_steps
    12      4               vocab
    16      4               dtype_code (1 = IEEE-754 float32)
    20      4*n_steps*vocab logit payload, row-major float32, little-endian
    ...     4*n_steps       observed token ids, one per row, uint32

Tokens live in the same file as the logits because estimation needs both
and alignment bugs are the main integration risk. Values are stored at
32-bit precision; readers hand back float64 for accumulation. Readers
reject any invariant violation (bad magic, unknown version or dtype,
truncated or oversized payload, non-finite values, out-of-range tokens)
rather than repairing it.

Result tables are comma-delimited text with a fixed, documented header
row per schema; numeric fields carry 9 significant digits and writing is
canonical, so equal tables serialize to identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimation import LogitSequence, TokenSequence
from .experiments import CorpusStats, CrossGridResult, SweepResult, SweepRow
from .solver import SolverStatus, TemperatureEstimate
from .textgen import SyntheticModelSpec

TLOG_MAGIC = b"TLOG"
TLOG_VERSION = 1
TLOG_DTYPE_F32 = 1
_HEADER = struct.Struct("<4sIIII")


class FormatError(ValueError):
    """A file violates its declared format."""


def write_logit_dump(logits: LogitSequence, tokens: TokenSequence, destination) -> None:
    """Write an aligned (logits, tokens) pair as a TLOG file.

    destination may be a path or a binary file object. Raises FormatError
    if any logit is not finite at 32-bit precision.
    """
    if logits.vocab != tokens.vocab:
        raise ValueError(f"vocab mismatch: {logits.vocab} vs {tokens.vocab}")
    if len(logits) != len(tokens):
        raise ValueError(f"length mismatch: {len(logits)} rows vs {len(tokens)} tokens")
    with np.errstate(over="ignore"):  # overflow is detected and rejected below
        payload = logits.steps.astype("<f4")
    if payload.size and not np.isfinite(payload).all():
        raise FormatError("logit magnitude overflows 32-bit float storage")
    header = _HEADER.pack(TLOG_MAGIC, TLOG_VERSION, len(logits), logits.vocab, TLOG_DTYPE_F32)
    ids = tokens.tokens.astype("<u4")
    data = header + payload.tobytes() + ids.tobytes()
    _write_bytes(destination, data)


def read_logit_dump(source) -> tuple[LogitSequence, TokenSequence]:
    """Read and validate a TLOG file; returns float64 logits."""
    data = _read_bytes(source)
    if len(data) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, n_steps, vocab, dtype_code = _HEADER.unpack_from(data)
    if magic != TLOG_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TLOG_MAGIC!r}")
    if version != TLOG_VERSION:
        raise FormatError(f"unsupported format version {version}")
    if dtype_code != TLOG_DTYPE_F32:
        raise FormatError(f"unsupported dtype code {dtype_code}")
    if vocab < 1:
        raise FormatError("vocab must be positive")
    expected = _HEADER.size + 4 * n_steps * vocab + 4 * n_steps
    if len(data) != expected:
        raise FormatError(f"payload size {len(data)} does not match header (expected {expected})")
    off = _HEADER.size
    payload = np.frombuffer(data, dtype="<f4", count=n_steps * vocab, offset=off)
    if payload.size and not np.isfinite(payload).all():
        raise FormatError("non-finite value in logit payload")
    ids = np.frombuffer(data, dtype="<u4", count=n_steps, offset=off + 4 * n_steps * vocab)
    if ids.size and int(ids.max()) >= vocab:
        raise FormatError(f"token id {int(ids.max())} out of range for vocab {vocab}")
    logits = LogitSequence(payload.astype(np.float64).reshape(n_steps, vocab), vocab)
    tokens = TokenSequence(ids.astype(np.int64), vocab)
    return logits, tokens


def _write_bytes(destination, data: bytes) -> None:
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        Path(destination).write_bytes(data)


def _read_bytes(source) -> bytes:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_bytes()


# ---------------------------------------------------------------------------
# result tables

SWEEP_COLUMNS = ["gen_temperature", "text_index", "t_hat", "status", "gen_model_id", "est_model_id"]
CROSSGRID_COLUMNS = [
    "gen_model_id", "est_model_id", "mae_all", "mae_converged",
    "r2", "pearson", "n_rows", "n_saturated",
]
CORPUS_TEXT_COLUMNS = ["text_id", "t_hat", "beta_hat", "status", "n_steps", "log_likelihood"]
CORPUS_SUMMARY_COLUMNS = ["corpus_id", "n_texts", "mean_t", "std_t", "n_saturated"]
ESTIMATE_COLUMNS = [
    "t_hat", "beta_hat", "status", "iterations",
    "residual_at_root", "log_likelihood", "n_steps",
]
SWEEP_PLOT_COLUMNS = ["x", "y", "series"]
HEATMAP_COLUMNS = ["row", "col", "value"]


def format_number(x) -> str:
    """Canonical table form of a number: 9 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class ResultTable:
    """A delimited text table: header plus string-valued records."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        cells = list(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row has {len(row)} fields, header has {len(self.columns)}"
                )
            cells.extend(row)
        for cell in cells:
            if "," in cell or "\n" in cell or "\r" in cell:
                raise ValueError(f"cell {cell!r} contains a delimiter or newline")

    def column(self, name: str) -> list[str]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def make_table(columns, rows) -> ResultTable:
    """Build a table from typed cells, applying canonical number formatting."""
    out_rows = []
    for row in rows:
        out_rows.append(tuple(
            cell if isinstance(cell, str) else format_number(cell) for cell in row
        ))
    return ResultTable(columns=tuple(columns), rows=tuple(out_rows))


def write_results(table: ResultTable, destination) -> None:
    text = "\n".join([",".join(table.columns)] + [",".join(r) for r in table.rows]) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="ascii")


def read_results(source) -> ResultTable:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="ascii")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty results file")
    columns = tuple(lines[0].split(","))
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        fields = tuple(line.split(","))
        if len(fields) != len(columns):
            raise FormatError(f"line {i}: {len(fields)} fields, header has {len(columns)}")
        rows.append(fields)
    return ResultTable(columns=columns, rows=tuple(rows))


def require_columns(table: ResultTable, expected: list[str], what: str) -> None:
    if list(table.columns) != expected:
        raise FormatError(
            f"{what} table must have columns {expected}, got {list(table.columns)}"
        )


def sweep_table(result: SweepResult) -> ResultTable:
    return make_table(
        SWEEP_COLUMNS,
        [
            (r.gen_temperature, r.text_index, r.t_hat, r.status.value,
             r.gen_model_id, r.est_model_id)
            for r in result.rows
        ],
    )


def parse_sweep_table(table: ResultTable) -> SweepResult:
    require_columns(table, SWEEP_COLUMNS, "sweep")
    rows = []
    for rec in table.rows:
        rows.append(SweepRow(
            gen_temperature=float(rec[0]),
            text_index=int(rec[1]),
            t_hat=float(rec[2]),
            status=SolverStatus(rec[3]),
            gen_model_id=rec[4],
            est_model_id=rec[5],
        ))
    return SweepResult(rows=tuple(rows))


def crossgrid_table(result: CrossGridResult) -> ResultTable:
    return make_table(
        CROSSGRID_COLUMNS,
        [
            (c.gen_model_id, c.est_model_id, c.mae_all, c.mae_converged,
             c.r2, c.pearson, c.n_rows, c.n_saturated)
            for c in result.cells
        ],
    )


def estimate_table(est: TemperatureEstimate, n_steps: int) -> ResultTable:
    return make_table(
        ESTIMATE_COLUMNS,
        [(est.t_hat, est.beta_hat, est.status.value, est.iterations,
          est.residual_at_root, est.log_likelihood_at_root, n_steps)],
    )


def corpus_text_table(records) -> ResultTable:
    """records: iterable of (text_id, TemperatureEstimate, n_steps)."""
    return make_table(
        CORPUS_TEXT_COLUMNS,
        [
            (text_id, e.t_hat, e.beta_hat, e.status.value, n_steps, e.log_likelihood_at_root)
            for text_id, e, n_steps in records
        ],
    )


def corpus_summary_table(stats: CorpusStats) -> ResultTable:
    return make_table(
        CORPUS_SUMMARY_COLUMNS,
        [(stats.corpus_id, stats.n_texts, stats.mean_t, stats.std_t, stats.n_saturated)],
    )


# ---------------------------------------------------------------------------
# model rosters (experiment specs)

def read_model_roster(source) -> list[SyntheticModelSpec]:
    """Parse a JSON model roster: {"models": [{vocab, order, logit_scale, seed}]}."""
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "models" not in doc:
        raise FormatError('roster must be a JSON object with a "models" list')
    entries = doc["models"]
    if not isinstance(entries, list) or not entries:
        raise FormatError('"models" must be a non-empty list')
    specs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise FormatError(f"models[{i}] must be an object")
        unknown = set(entry) - {"vocab", "order", "logit_scale", "seed"}
        if unknown:
            raise FormatError(f"models[{i}] has unknown fields {sorted(unknown)}")
        try:
            specs.append(SyntheticModelSpec(
                vocab=int(entry.get("vocab", 128)),
                order=int(entry.get("order", 1)),
                logit_scale=float(entry.get("logit_scale", 3.0)),
                seed=int(entry.get("seed", 0)),
            ))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"models[{i}]: {exc}") from exc
    return specs


def write_model_roster(specs: list[SyntheticModelSpec], destination) -> None:
    doc = {
        "models": [
            {"vocab": s.vocab, "order": s.order, "logit_scale": s.logit_scale, "seed": s.seed}
            for s in specs
        ]
    }
    text = json.dumps(doc, indent=2) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")
