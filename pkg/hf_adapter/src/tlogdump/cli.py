"""CLI: tlogdump --model PATH --out DIR text1.txt text2.txt ..."""

from __future__ import annotations

import argparse
import sys

from .adapter import AdapterConfig, dump_text_logits


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tlogdump",
        description="Dump per-token next-token logits from a causal LM into TLOG files.",
    )
    parser.add_argument("texts", nargs="+", metavar="TEXT", help="input text files")
    parser.add_argument("--model", required=True,
                        help="checkpoint identifier or local path")
    parser.add_argument("--out", default=".", metavar="DIR", help="output directory")
    parser.add_argument("--max-length", type=int, default=1024,
                        help="truncate each text to this many tokens (default 1024)")
    parser.add_argument("--device", default="cpu", help="torch device (default cpu)")
    parser.add_argument("--quantization-note", default="none",
                        help="recorded in the sidecar metadata (default none)")
    args = parser.parse_args(argv)

    config = AdapterConfig(
        model=args.model,
        texts=args.texts,
        output_dir=args.out,
        max_length=args.max_length,
        device=args.device,
        quantization_note=args.quantization_note,
    )
    try:
        reports = dump_text_logits(config)
    except Exception as exc:  # surface load/tokenize/self-check failures cleanly
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in reports:
        print(f"{r.dump_path}: {r.n_steps} steps, vocab {r.vocab}, "
              f"ll {r.log_likelihood_model:.3f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
