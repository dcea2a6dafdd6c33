import sys
from pathlib import Path

import pytest
import torch
from transformers import Wav2Vec2Config, Wav2Vec2Model

sys.path.insert(0, str(Path(__file__).parent))  # make wavgen importable

from wavgen import write_wav


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized encoder saved as a local checkpoint."""
    cfg = Wav2Vec2Config(
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(32, 32, 32, 32, 32, 32, 32),
    )
    torch.manual_seed(1234)
    model = Wav2Vec2Model(cfg).eval()
    out = tmp_path_factory.mktemp("tiny_model")
    model.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def base_model_dir(tmp_path_factory):
    """A base-size encoder (768-dim, 12 blocks); weights random but frozen."""
    torch.manual_seed(5678)
    model = Wav2Vec2Model(Wav2Vec2Config()).eval()
    out = tmp_path_factory.mktemp("base_model")
    model.save_pretrained(out)
    return str(out)


@pytest.fixture
def wav_dir(tmp_path):
    d = tmp_path / "wavs"
    d.mkdir()
    for i, seconds in enumerate([0.6, 1.0, 1.4]):
        write_wav(d / f"utt{i}.wav", seconds=seconds, seed=i)
    return d
