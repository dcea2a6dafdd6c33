"""Command line: batch feature/token extraction over a directory of WAVs."""

from __future__ import annotations

import argparse
import sys

from .errors import ExtractorError
from .pipeline import ExtractorConfig, batch_extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speecheval-extract",
        description="Extract SSL encoder features (and optional codebook tokens) from WAV files.",
    )
    parser.add_argument("--wav-dir", required=True, help="directory of 16 kHz-or-resampled .wav files")
    parser.add_argument("--model", required=True,
                        help="encoder alias (e.g. wav2vec2-base), hub id, or local checkpoint dir")
    parser.add_argument("--layer", type=int, required=True,
                        help="1-based transformer block whose hidden states are emitted")
    parser.add_argument("--stretch", type=float, default=1.0,
                        help="time-stretch factor applied to every waveform (default 1.0)")
    parser.add_argument("--kmeans", help="codebook (.spkm); also writes tokens.txt")
    parser.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    cfg = ExtractorConfig(
        model_id=args.model, layer=args.layer, stretch_factor=args.stretch, output_dir=args.out
    )
    try:
        utt_ids = batch_extract(args.wav_dir, cfg, args.out, kmeans_path=args.kmeans)
    except ExtractorError as e:
        print(f"speecheval-extract: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"speecheval-extract: error: {e}", file=sys.stderr)
        return 1
    print(f"extracted {len(utt_ids)} utterance(s) to {args.out}")
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
