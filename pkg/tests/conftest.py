import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from audioscape.audio_io import write_wav
from audioscape.features import MfccConfig

import synth


@pytest.fixture
def mfcc_cfg():
    return MfccConfig.for_sample_rate(synth.SR)


@pytest.fixture
def sine_wav(tmp_path):
    path = tmp_path / "sine440.wav"
    write_wav(path, synth.sine(440.0, duration_s=0.25))
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
