"""Acceptance suite: one test per mandatory criterion, with stated tolerances.

Each test prints an ``ACCEPTANCE: <name>: PASS/FAIL`` line (visible with
``pytest -s tests/test_acceptance.py``). Criteria with runtime budgets
measure and assert them.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from speecheval import (
    BertScoreConfig,
    BleuConfig,
    FeatureMatrix,
    TokenSequence,
    assign_tokens,
    jaro,
    jaro_winkler,
    levenshtein_distance,
    levenshtein_similarity,
    pearson,
    spearman,
    speech_bert_score,
    speech_bleu,
    train_kmeans,
    write_feature_file,
)
from speecheval.cli import main as cli_main
from oracles import (
    bertscore_oracle,
    bleu_oracle,
    jaro_oracle,
    levenshtein_oracle,
    pearson_oracle,
    spearman_oracle,
)


@contextmanager
def acceptance(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE: {name}: FAIL")
        raise
    print(f"ACCEPTANCE: {name}: PASS")


def test_bleu_oracle_equivalence():
    with acceptance("bleu-oracle-equivalence"):
        rng = np.random.default_rng(20240901)
        orders = (1, 2, 4, 6)
        start = time.perf_counter()
        for i in range(1000):
            gen = [int(t) for t in rng.integers(0, 200, size=rng.integers(5, 401))]
            ref = [int(t) for t in rng.integers(0, 200, size=rng.integers(5, 401))]
            order = orders[i % 4]
            dedup = bool((i // 4) % 2)
            smooth = bool((i // 8) % 2)
            cfg = BleuConfig(
                max_order=order,
                dedup=dedup,
                smoothing="add_one_higher_order" if smooth else "none",
            )
            got = speech_bleu(TokenSequence("g", tuple(gen)), TokenSequence("r", tuple(ref)), cfg)
            want = bleu_oracle(gen, ref, order, dedup, smooth, True)
            assert abs(got - want) <= 1e-12, (i, got, want)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_edit_distance_oracles():
    with acceptance("edit-distance-oracles"):
        rng = np.random.default_rng(20240902)
        start = time.perf_counter()
        for i in range(1000):
            a = [int(t) for t in rng.integers(0, 200, size=rng.integers(1, 201))]
            b = [int(t) for t in rng.integers(0, 200, size=rng.integers(1, 201))]
            sa, sb = TokenSequence("a", tuple(a)), TokenSequence("b", tuple(b))

            d_want = levenshtein_oracle(a, b)
            assert levenshtein_distance(sa, sb) == d_want, i
            assert levenshtein_similarity(sa, sb) == 1.0 - d_want / max(len(a), len(b)), i

            j_want = jaro_oracle(a, b)
            assert jaro(sa, sb) == j_want, i
            ell = 0
            for x, y in zip(a, b):
                if x != y or ell >= 4:
                    break
                ell += 1
            assert jaro_winkler(sa, sb) == j_want + ell * 0.1 * (1.0 - j_want), i
        elapsed = time.perf_counter() - start

        # classic instances, hand-derived
        martha = TokenSequence("a", (0, 1, 2, 3, 4, 1))
        marhta = TokenSequence("b", (0, 1, 2, 4, 3, 1))
        assert round(jaro_winkler(martha, marhta), 4) == 0.9611
        kitten = TokenSequence("a", (10, 8, 19, 19, 4, 13))
        sitting = TokenSequence("b", (18, 8, 19, 19, 8, 13, 6))
        assert levenshtein_distance(kitten, sitting) == 3
        assert abs(levenshtein_similarity(kitten, sitting) - (1 - 3 / 7)) < 1e-15

        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_bertscore_invariants():
    with acceptance("bertscore-invariants"):
        rng = np.random.default_rng(20240903)

        # identity = 1 within 1e-6 (no zero-norm frames in random data)
        for _ in range(20):
            m = FeatureMatrix("m", rng.standard_normal((int(rng.integers(1, 12)), 5)).astype(np.float32))
            for variant in ("precision", "recall", "f1"):
                assert abs(speech_bert_score(m, m, BertScoreConfig(variant=variant)) - 1.0) < 1e-6

        for _ in range(50):
            na, nb, d = int(rng.integers(1, 10)), int(rng.integers(1, 10)), int(rng.integers(1, 6))
            a = FeatureMatrix("a", rng.standard_normal((na, d)).astype(np.float32))
            b = FeatureMatrix("b", rng.standard_normal((nb, d)).astype(np.float32))

            # reference-frame permutation invariance of precision, exact
            p = speech_bert_score(a, b)
            shuffled = FeatureMatrix("b", b.data[rng.permutation(nb)])
            assert speech_bert_score(a, shuffled) == p

            # positive-scale invariance within 1e-6
            a2 = FeatureMatrix("a", a.data * np.float32(17.0))
            b2 = FeatureMatrix("b", b.data * np.float32(0.03))
            for variant in ("precision", "recall", "f1"):
                cfg = BertScoreConfig(variant=variant)
                assert abs(speech_bert_score(a, b, cfg) - speech_bert_score(a2, b2, cfg)) < 1e-6

            # precision(a, b) == recall(b, a), exact
            assert p == speech_bert_score(b, a, BertScoreConfig(variant="recall"))

        # brute-force double-loop oracle, 200 random small matrices
        for _ in range(200):
            na, nb, d = int(rng.integers(1, 7)), int(rng.integers(1, 7)), int(rng.integers(1, 5))
            a = FeatureMatrix("a", rng.standard_normal((na, d)).astype(np.float32))
            b = FeatureMatrix("b", rng.standard_normal((nb, d)).astype(np.float32))
            for variant in ("precision", "recall", "f1"):
                got = speech_bert_score(a, b, BertScoreConfig(variant=variant))
                want = bertscore_oracle(a.data.tolist(), b.data.tolist(), variant)
                assert abs(got - want) < 1e-12


def test_kmeans_criteria():
    with acceptance("kmeans-training"):
        rng = np.random.default_rng(20240904)

        def check_monotone(model):
            hist = model.sse_history
            assert all(x >= y for x, y in zip(hist, hist[1:])), hist

        # SSE non-increasing on generic training runs
        for trial in range(5):
            frames = [
                FeatureMatrix(f"u{i}", rng.standard_normal((60, 6)).astype(np.float32))
                for i in range(4)
            ]
            model = train_kmeans(frames, k=7, seed=trial)
            check_monotone(model)

        # k = 1 centroid equals the global mean to 1e-6
        m = FeatureMatrix("u", rng.standard_normal((300, 9)).astype(np.float32))
        model = train_kmeans([m], k=1, seed=0)
        check_monotone(model)
        assert np.allclose(model.centroids[0], m.data.astype(np.float64).mean(axis=0), atol=1e-6)

        # 3-cluster separation recovery for >= 9/10 seeds
        centers = np.array([[0.0, 0.0, 0.0], [12.0, 0.0, 0.0], [0.0, 12.0, 0.0]])
        truth = np.repeat([0, 1, 2], 100)
        successes = 0
        for seed in range(10):
            data_rng = np.random.default_rng(5000 + seed)
            pts = np.concatenate(
                [c + 0.01 * data_rng.standard_normal((100, 3)) for c in centers]
            ).astype(np.float32)
            model = train_kmeans([FeatureMatrix("u", pts)], k=3, seed=seed)
            check_monotone(model)
            labels = np.array(assign_tokens(model, FeatureMatrix("u", pts)).tokens)
            uniform = all(len(set(labels[truth == t])) == 1 for t in range(3))
            distinct = len({labels[truth == t][0] for t in range(3)}) == 3
            successes += uniform and distinct
        assert successes >= 9, f"recovered {successes}/10"


def test_correlation_statistic_oracles():
    with acceptance("correlation-oracles"):
        rng = np.random.default_rng(20240905)
        for i in range(1000):
            n = int(rng.integers(3, 80))
            if i % 3 == 0:
                x = rng.integers(0, max(2, n // 4), size=n).astype(float)  # ties
            else:
                x = rng.standard_normal(n)
            y = rng.standard_normal(n)
            if np.all(x == x[0]) or np.all(y == y[0]):
                continue
            assert abs(pearson(x, y) - pearson_oracle(list(x), list(y))) <= 1e-12, i
            assert abs(spearman(x, y) - spearman_oracle(list(x), list(y))) <= 1e-12, i

        # strictly increasing transforms leave spearman exactly unchanged
        for _ in range(20):
            x = rng.standard_normal(40)
            y = rng.standard_normal(40)
            base = spearman(x, y)
            assert spearman(x ** 3, y) == base
            assert spearman(x, np.exp(y / 4)) == base


def _smooth_trajectory(rng, n, dim):
    # moving-average filtered white noise, rescaled to unit variance
    window = 9
    white = rng.standard_normal((n + window - 1, dim))
    cs = np.cumsum(white, axis=0)
    smoothed = (cs[window:] - cs[:-window]) / window
    smoothed = np.concatenate([cs[window - 1:window] / window, smoothed])
    return (smoothed * np.sqrt(window)).astype(np.float32)


def test_end_to_end_degradation_monotonicity():
    with acceptance("degradation-monotonicity"):
        start = time.perf_counter()
        with threadpool_limits(limits=1):
            rng = np.random.default_rng(20240906)
            severities = [0.0, 0.1, 0.2, 0.4, 0.8]
            clean = [
                FeatureMatrix(f"u{i}", _smooth_trajectory(rng, int(rng.integers(100, 401)), 64))
                for i in range(50)
            ]
            noisy = {
                sigma: [
                    FeatureMatrix(
                        m.utt_id,
                        m.data + np.float32(sigma) * rng.standard_normal(m.data.shape).astype(np.float32),
                    )
                    for m in clean
                ]
                for sigma in severities
            }

            # frame-matching score strictly decreases with severity
            bert_scores = {
                sigma: [speech_bert_score(g, r) for g, r in zip(noisy[sigma], clean)]
                for sigma in severities
            }
            means = [float(np.mean(bert_scores[s])) for s in severities]
            assert all(a > b for a, b in zip(means, means[1:])), means

            sev_col, score_col = [], []
            for sigma in severities:
                sev_col.extend([sigma] * 50)
                score_col.extend(bert_scores[sigma])
            assert abs(spearman(sev_col, score_col)) >= 0.8

            # token BLEU over a codebook trained on the clean set
            model = train_kmeans(clean, k=50, seed=1)
            ref_tokens = [assign_tokens(model, m) for m in clean]
            bleu_cfg = BleuConfig(max_order=2)
            sev_col, bleu_col = [], []
            for sigma in severities:
                for m, ref_seq in zip(noisy[sigma], ref_tokens):
                    gen_seq = assign_tokens(model, m)
                    sev_col.append(sigma)
                    bleu_col.append(speech_bleu(gen_seq, ref_seq, bleu_cfg))
            assert abs(spearman(sev_col, bleu_col)) >= 0.6
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


@pytest.fixture(scope="module")
def perf_workspace(tmp_path_factory):
    """1000 manifest rows over a cycled pool of 500x768 feature files."""
    root = tmp_path_factory.mktemp("perf")
    rng = np.random.default_rng(20240907)
    gen_dir = root / "gen"
    ref_dir = root / "ref"
    gen_dir.mkdir()
    ref_dir.mkdir()
    pool = 16
    for i in range(pool):
        write_feature_file(
            FeatureMatrix(f"g{i}", rng.standard_normal((500, 768)).astype(np.float32)),
            gen_dir / f"g{i}.feat",
        )
        write_feature_file(
            FeatureMatrix(f"r{i}", rng.standard_normal((500, 768)).astype(np.float32)),
            ref_dir / f"r{i}.feat",
        )
    manifest = root / "manifest.csv"
    lines = ["utt_id,system_id,gen_path,ref_path,rating"]
    for i in range(1000):
        lines.append(f"p{i:04d},sys0,gen/g{i % pool}.feat,ref/r{i % pool}.feat,3.0")
    manifest.write_text("\n".join(lines) + "\n")
    return root


def test_throughput_and_parallel_determinism(perf_workspace):
    with acceptance("throughput-1000-pairs"):
        import os

        jobs = max(1, min(4, os.cpu_count() or 1))
        root = perf_workspace
        base = [
            "score", "bertscore",
            "--manifest", str(root / "manifest.csv"),
            "--variant", "precision",
        ]
        out_par = root / "parallel.json"
        start = time.perf_counter()
        assert cli_main(base + ["--out", str(out_par), "--jobs", str(jobs)]) == 0
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s with {jobs} workers"

        out_ser = root / "serial.json"
        assert cli_main(base + ["--out", str(out_ser), "--jobs", "1"]) == 0
        assert out_par.read_bytes() == out_ser.read_bytes()

        doc = json.loads(out_par.read_text())
        assert len(doc["scores"]) == 1000
