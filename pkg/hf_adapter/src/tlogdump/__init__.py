"""Per-token logit dumps from transformer checkpoints, in TLOG format."""

from .adapter import AdapterConfig, DumpReport, dump_text_logits
from .tlog import read_tlog, write_tlog

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "DumpReport", "dump_text_logits", "read_tlog", "write_tlog"]
