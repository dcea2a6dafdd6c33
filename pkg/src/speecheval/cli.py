"""Command-line front end: score manifests, train models, correlate reports.

Exit codes: 0 success, 1 data/runtime error, 2 usage error. Every randomized
behavior is seed-controlled, and any two runs with identical inputs and flags
produce byte-identical outputs; ``--jobs`` changes wall time only. To keep
parallel and serial scoring bitwise identical, each pair is scored with the
BLAS thread pool pinned to one thread (OpenBLAS results vary with thread
count), with process-level parallelism across pairs.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bertscore as bs
from . import bleu as bl
from . import bpe as bp
from . import core
from . import harness
from . import kmeans as km
from . import tokdist as td
from .errors import SpeechEvalError

_SMOOTHING_NAMES = {"none": "none", "add1": "add_one_higher_order"}
_MEASURE_NAMES = {"levenshtein": "levenshtein", "jaro-winkler": "jaro_winkler"}


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _positive_float(value: str) -> float:
    x = float(value)
    if x <= 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {x}")
    return x


def _resolve(root: str | None, base_dir: Path, p: str) -> str:
    path = Path(p)
    if path.is_absolute():
        return str(path)
    if root is not None:
        return str(Path(root) / path)
    return str(base_dir / path)


def _collect_feature_files(source: str) -> list[Path]:
    """A directory of .feat files (sorted) or a text file listing paths."""
    path = Path(source)
    if path.is_dir():
        files = sorted(path.glob("*.feat"))
        if not files:
            raise SpeechEvalError(f"{path}: no .feat files found")
        return files
    files = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            entry = Path(line)
            files.append(entry if entry.is_absolute() else path.parent / entry)
    if not files:
        raise SpeechEvalError(f"{path}: empty feature list")
    return files


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# pair scoring (runs serially or inside worker processes)
# ---------------------------------------------------------------------------

_CTX: dict | None = None


def _init_worker(ctx: dict) -> None:
    global _CTX
    _CTX = ctx


def _tokens_for(utt_id: str, feat_path: str, side: str) -> core.TokenSequence:
    ctx = _CTX
    if ctx["token_source"] == "files":
        table = ctx["gen_tokens"] if side == "gen" else ctx["ref_tokens"]
        if utt_id not in table:
            raise SpeechEvalError(f"{utt_id}: missing from {side} token file")
        return table[utt_id]
    m = core.read_feature_file(feat_path)
    return km.assign_tokens(ctx["kmeans_model"], m)


def _score_one(task: tuple[str, str, str]) -> tuple[str, float, float | None]:
    """Score one manifest pair; returns (utt_id, score, raw_distance_or_None)."""
    from threadpoolctl import threadpool_limits

    utt_id, gen_path, ref_path = task
    ctx = _CTX
    with threadpool_limits(limits=1):
        if ctx["metric"] == "speech_bert_score":
            gen = core.read_feature_file(gen_path)
            ref = core.read_feature_file(ref_path)
            cfg: bs.BertScoreConfig = ctx["cfg"]
            gen_toks = ref_toks = None
            if cfg.weighting != "none":
                if cfg.variant in ("precision", "f1"):
                    gen_toks = _tokens_for(utt_id, gen_path, "gen")
                if cfg.variant in ("recall", "f1"):
                    ref_toks = _tokens_for(utt_id, ref_path, "ref")
            return utt_id, bs.speech_bert_score(gen, ref, cfg, gen_toks, ref_toks), None
        gen_seq = _tokens_for(utt_id, gen_path, "gen")
        ref_seq = _tokens_for(utt_id, ref_path, "ref")
        if ctx["metric"] == "speech_bleu":
            return utt_id, bl.speech_bleu(gen_seq, ref_seq, ctx["cfg"]), None
        dcfg: td.DistanceConfig = ctx["cfg"]
        raw = None
        if dcfg.measure == "levenshtein":
            g, r = gen_seq, ref_seq
            if dcfg.dedup:
                g, r = km.collapse_repeats(g), km.collapse_repeats(r)
            raw = float(td.levenshtein_distance(g, r))
        return utt_id, td.speech_token_distance(gen_seq, ref_seq, dcfg), raw


def _run_scoring(tasks: list[tuple[str, str, str]], ctx: dict, jobs: int):
    if jobs <= 1:
        _init_worker(ctx)
        return [_score_one(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(ctx,)) as ex:
        return list(ex.map(_score_one, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _prepare_token_context(args, parser, require_tokens: bool) -> dict:
    has_files = args.tokens_gen is not None or args.tokens_ref is not None
    has_kmeans = getattr(args, "kmeans", None) is not None
    if has_files and (args.tokens_gen is None or args.tokens_ref is None):
        parser.error("--tokens-gen and --tokens-ref must be given together")
    if has_files and has_kmeans:
        parser.error("give either --kmeans or --tokens-gen/--tokens-ref, not both")
    if require_tokens and not (has_files or has_kmeans):
        parser.error("a token source is required: --kmeans or --tokens-gen/--tokens-ref")
    ctx = {"token_source": "none", "kmeans_model": None, "gen_tokens": None, "ref_tokens": None}
    fingerprint = None
    if has_files:
        ctx["token_source"] = "files"
        ctx["gen_tokens"] = core.index_token_file(args.tokens_gen)
        ctx["ref_tokens"] = core.index_token_file(args.tokens_ref)
    elif has_kmeans:
        ctx["token_source"] = "kmeans"
        ctx["kmeans_model"] = km.load_kmeans_model(args.kmeans)
        fingerprint = _file_sha256(args.kmeans)
    ctx["kmeans_fingerprint"] = fingerprint
    return ctx


def _cmd_score(args, parser) -> int:
    manifest = core.parse_manifest(args.manifest)
    manifest_dir = Path(args.manifest).resolve().parent
    tasks = [
        (
            p.utt_id,
            _resolve(args.gen_root, manifest_dir, p.gen_path),
            _resolve(args.ref_root, manifest_dir, p.ref_path),
        )
        for p in manifest
    ]

    if args.metric == "bertscore":
        weighting = args.weighting
        if weighting != "none" and args.weight_corpus is None:
            parser.error("--weight-corpus is required when --weighting != none")
        ctx = _prepare_token_context(args, parser, require_tokens=weighting != "none")
        table = None
        if weighting != "none":
            corpus = core.read_token_file(args.weight_corpus)
            table = bs.df_idf_weights(corpus, weighting)
        cfg = bs.BertScoreConfig(
            variant=args.variant,
            weighting=weighting,
            weight_table=table,
            strict_zero_norm=args.strict_zero_norm,
        )
        metric = "speech_bert_score"
        config = {
            "variant": cfg.variant,
            "weighting": cfg.weighting,
            "weight_corpus": args.weight_corpus,
            "strict_zero_norm": cfg.strict_zero_norm,
        }
    elif args.metric == "bleu":
        ctx = _prepare_token_context(args, parser, require_tokens=True)
        cfg = bl.BleuConfig(
            max_order=args.max_ngram,
            dedup=args.dedup,
            smoothing=_SMOOTHING_NAMES[args.smoothing],
            brevity_penalty=args.brevity_penalty,
        )
        metric = "speech_bleu"
        config = {
            "max_ngram": cfg.max_order,
            "dedup": cfg.dedup,
            "smoothing": cfg.smoothing,
            "brevity_penalty": cfg.brevity_penalty,
        }
    else:
        ctx = _prepare_token_context(args, parser, require_tokens=True)
        cfg = td.DistanceConfig(
            measure=_MEASURE_NAMES[args.measure],
            dedup=args.dedup,
            winkler_prefix_scale=args.winkler_p,
            winkler_max_prefix=args.winkler_maxprefix,
        )
        metric = "speech_token_distance"
        config = {
            "measure": cfg.measure,
            "dedup": cfg.dedup,
            "winkler_p": cfg.winkler_prefix_scale,
            "winkler_max_prefix": cfg.winkler_max_prefix,
        }
        if cfg.measure == "levenshtein":
            config["normalization"] = "1 - distance / max_length"

    config["token_source"] = ctx["token_source"]
    config["kmeans_fingerprint"] = ctx["kmeans_fingerprint"]
    ctx["metric"] = metric
    ctx["cfg"] = cfg

    results = _run_scoring(tasks, ctx, args.jobs)
    scores = {utt_id: score for utt_id, score, _ in results}
    extras = {}
    raw = {utt_id: dist for utt_id, _, dist in results if dist is not None}
    if raw:
        extras["levenshtein_distance"] = raw
    report = core.ScoreReport(metric=metric, config=config, scores=scores, extras=extras)
    core.write_report(report, args.out)
    return 0


def _cmd_train_kmeans(args) -> int:
    frames = [core.read_feature_file(p) for p in _collect_feature_files(args.features)]
    model = km.train_kmeans(
        frames,
        k=args.k,
        seed=args.seed,
        max_iters=args.max_iters,
        rel_tol=args.tol,
        max_train_frames=args.max_frames,
    )
    km.save_kmeans_model(model, args.out)
    print(
        f"trained k={model.k} on {sum(m.n_frames for m in frames)} frames: "
        f"{model.iters_run} iterations, final SSE {model.final_sse:.6g}"
    )
    return 0


def _cmd_quantize(args) -> int:
    model = km.load_kmeans_model(args.model)
    seqs = []
    for path in _collect_feature_files(args.features):
        seq = km.assign_tokens(model, core.read_feature_file(path))
        if args.dedup:
            seq = km.collapse_repeats(seq)
        seqs.append(seq)
    core.write_token_file(seqs, args.out)
    return 0


def _cmd_train_bpe(args) -> int:
    corpus = core.read_token_file(args.tokens)
    model = bp.train_bpe(corpus, vocab_size=args.vocab_size, base_vocab=args.base_vocab)
    bp.save_bpe_model(model, args.out)
    print(f"learned {len(model.merges)} merges (vocab {model.base_vocab} -> {model.vocab_size})")
    return 0


def _cmd_bpe_encode(args) -> int:
    model = bp.load_bpe_model(args.model)
    seqs = [bp.bpe_encode(model, s) for s in core.read_token_file(args.tokens)]
    core.write_token_file(seqs, args.out)
    return 0


def _cmd_correlate(args) -> int:
    report = core.read_report(args.report)
    manifest = core.parse_manifest(args.manifest)
    result = harness.correlate(report, manifest, args.level)
    harness.write_correlation_summary(result, report, args.out)
    print(
        f"{args.level}-level n={result.n}: |LCC|={result.lcc_abs:.4f} |SRCC|={result.srcc_abs:.4f}"
    )
    return 0


def _cmd_unalign(args) -> int:
    manifest = core.parse_manifest(args.manifest)
    pool_dir = Path(args.ref_pool)
    # prefer feature files so sidecars/token files in the directory are skipped
    pool = sorted(str(p) for p in pool_dir.glob("*.feat"))
    if not pool:
        pool = sorted(str(p) for p in pool_dir.iterdir() if p.is_file())
    unaligned = harness.make_unaligned_manifest(
        manifest, pool, seed=args.seed, pool_mode=args.pool_mode
    )
    core.write_manifest(unaligned, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_token_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kmeans", help="codebook (.spkm) for in-pipeline quantization")
    p.add_argument("--tokens-gen", help="precomputed token file for generated side")
    p.add_argument("--tokens-ref", help="precomputed token file for reference side")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speecheval",
        description="Reference-aware objective metrics for generated speech.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="score a manifest of generated/reference pairs")
    score_sub = score.add_subparsers(dest="metric", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", required=True)
    common.add_argument("--gen-root", help="root for relative gen_path entries")
    common.add_argument("--ref-root", help="root for relative ref_path entries")
    common.add_argument("--out", required=True)
    common.add_argument("--jobs", type=_positive_int, default=1,
                        help="parallel scoring workers (output is identical for any value)")

    p_bert = score_sub.add_parser("bertscore", parents=[common])
    p_bert.add_argument("--variant", choices=bs.VARIANTS, default="precision")
    p_bert.add_argument("--weighting", choices=bs.WEIGHTINGS, default="none")
    p_bert.add_argument("--weight-corpus", help="token file used to fit df/idf weights")
    p_bert.add_argument("--strict-zero-norm", action="store_true",
                        help="error on zero-norm frames instead of similarity 0")
    _add_token_source_flags(p_bert)

    p_bleu = score_sub.add_parser("bleu", parents=[common])
    p_bleu.add_argument("--max-ngram", type=_positive_int, default=2)
    p_bleu.add_argument("--dedup", action=argparse.BooleanOptionalAction, default=True)
    p_bleu.add_argument("--smoothing", choices=sorted(_SMOOTHING_NAMES), default="add1")
    p_bleu.add_argument("--brevity-penalty", action=argparse.BooleanOptionalAction, default=True)
    _add_token_source_flags(p_bleu)

    p_td = score_sub.add_parser("tokdist", parents=[common])
    p_td.add_argument("--measure", choices=sorted(_MEASURE_NAMES), default="jaro-winkler")
    p_td.add_argument("--dedup", action=argparse.BooleanOptionalAction, default=False)
    p_td.add_argument("--winkler-p", type=_positive_float, default=0.1)
    p_td.add_argument("--winkler-maxprefix", type=int, default=4)
    _add_token_source_flags(p_td)

    p_km = sub.add_parser("train-kmeans", help="train a k-means codebook on features")
    p_km.add_argument("--features", required=True, help="directory of .feat files or a list file")
    p_km.add_argument("--k", type=_positive_int, required=True)
    p_km.add_argument("--seed", type=int, required=True)
    p_km.add_argument("--max-iters", type=_positive_int, default=100)
    p_km.add_argument("--tol", type=float, default=1e-6)
    p_km.add_argument("--max-frames", type=_positive_int, default=None)
    p_km.add_argument("--out", required=True)
    p_km.set_defaults(func=lambda a, _p: _cmd_train_kmeans(a))

    p_q = sub.add_parser("quantize", help="assign features to codebook tokens")
    p_q.add_argument("--features", required=True)
    p_q.add_argument("--model", required=True)
    p_q.add_argument("--dedup", action="store_true", help="collapse token repetitions")
    p_q.add_argument("--out", required=True)
    p_q.set_defaults(func=lambda a, _p: _cmd_quantize(a))

    p_tb = sub.add_parser("train-bpe", help="learn subword merges over a token corpus")
    p_tb.add_argument("--tokens", required=True)
    p_tb.add_argument("--vocab-size", type=_positive_int, required=True)
    p_tb.add_argument("--base-vocab", type=_positive_int, default=None,
                      help="quantizer vocabulary size (default: max token + 1)")
    p_tb.add_argument("--out", required=True)
    p_tb.set_defaults(func=lambda a, _p: _cmd_train_bpe(a))

    p_be = sub.add_parser("bpe-encode", help="encode token files with a BPE model")
    p_be.add_argument("--tokens", required=True)
    p_be.add_argument("--model", required=True)
    p_be.add_argument("--out", required=True)
    p_be.set_defaults(func=lambda a, _p: _cmd_bpe_encode(a))

    p_c = sub.add_parser("correlate", help="correlate a score report with ratings")
    p_c.add_argument("--report", required=True)
    p_c.add_argument("--manifest", required=True)
    p_c.add_argument("--level", choices=("utterance", "system"), required=True)
    p_c.add_argument("--out", required=True)
    p_c.set_defaults(func=lambda a, _p: _cmd_correlate(a))

    p_u = sub.add_parser("unalign", help="replace references with random pool draws")
    p_u.add_argument("--manifest", required=True)
    p_u.add_argument("--ref-pool", required=True, help="directory of reference files")
    p_u.add_argument("--seed", type=int, required=True)
    p_u.add_argument("--pool-mode", choices=("single", "per_pair"), default="single")
    p_u.add_argument("--out", required=True)
    p_u.set_defaults(func=lambda a, _p: _cmd_unalign(a))

    for sp in (p_bert, p_bleu, p_td):
        sp.set_defaults(func=_cmd_score, score_parser=sp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        if args.func is _cmd_score:
            return _cmd_score(args, args.score_parser)
        return args.func(args, parser)
    except SystemExit as e:  # parser.error() inside a subcommand
        return int(e.code) if e.code is not None else 0
    except SpeechEvalError as e:
        print(f"speecheval: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"speecheval: error: {e}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
