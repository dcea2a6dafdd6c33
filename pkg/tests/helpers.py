"""Small builders shared by the test modules."""

from speecheval import FeatureMatrix, TokenSequence


def random_matrix(rng, n, d, utt_id="u"):
    return FeatureMatrix(utt_id, rng.standard_normal((n, d)).astype("float32"))


def random_tokens(rng, length, k, utt_id="u"):
    return TokenSequence(utt_id, tuple(int(t) for t in rng.integers(0, k, size=length)))
