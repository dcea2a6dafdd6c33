"""Waveform loading and time-stretch contracts."""

import numpy as np
import pytest

from speecheval_extractor import AudioError, Waveform, load_wav, time_stretch
from wavgen import write_wav


class TestLoadWav:
    def test_mono_16k(self, tmp_path):
        wav = load_wav(write_wav(tmp_path / "a.wav", seconds=1.0))
        assert wav.sample_rate == 16000
        assert wav.duration_samples == 16000
        assert wav.samples.dtype == np.float32
        assert np.all(np.abs(wav.samples) <= 1.0)

    def test_stereo_downmixed(self, tmp_path):
        wav = load_wav(write_wav(tmp_path / "s.wav", seconds=0.5, stereo=True))
        assert wav.samples.ndim == 1

    def test_resampled_to_16k(self, tmp_path):
        wav = load_wav(write_wav(tmp_path / "r.wav", seconds=1.0, rate=8000))
        assert wav.sample_rate == 16000
        assert abs(wav.duration_samples - 16000) <= 1

    def test_unreadable_file(self, tmp_path):
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"definitely not a wav")
        with pytest.raises(AudioError):
            load_wav(bad)


class TestTimeStretch:
    def _wav(self, n=48000):
        rng = np.random.default_rng(3)
        return Waveform(samples=rng.standard_normal(n).astype(np.float32))

    def test_identity_factor(self):
        wav = self._wav()
        out = time_stretch(wav, 1.0)
        assert out is wav

    def test_factor_0_99(self):
        out = time_stretch(self._wav(48000), 0.99)
        assert abs(out.duration_samples - 47520) <= 1

    def test_factor_1_01(self):
        out = time_stretch(self._wav(48000), 1.01)
        assert abs(out.duration_samples - 48480) <= 1

    def test_factor_out_of_range(self):
        with pytest.raises(AudioError):
            time_stretch(self._wav(100), 0.4)
        with pytest.raises(AudioError):
            time_stretch(self._wav(100), 2.5)

    def test_duration_monotone_in_factor(self):
        wav = self._wav(10000)
        lengths = [time_stretch(wav, f).duration_samples for f in (0.5, 0.8, 1.0, 1.3, 2.0)]
        assert lengths == sorted(lengths)

    def test_deterministic(self):
        wav = self._wav(12345)
        a = time_stretch(wav, 0.99).samples
        b = time_stretch(wav, 0.99).samples
        assert a.tobytes() == b.tobytes()
