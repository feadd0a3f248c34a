"""Synthetic audio used throughout the tests."""

import numpy as np

from audioscape.audio_io import PcmBuffer

SR = 8000


def sine(freq, duration_s=1.0, sr=SR, amp=0.8, phase=0.0):
    t = np.arange(round(duration_s * sr)) / sr
    return PcmBuffer(samples=amp * np.sin(2 * np.pi * freq * t + phase), sample_rate=sr)


def chirp(f0, f1, duration_s=1.0, sr=SR, amp=0.8):
    t = np.arange(round(duration_s * sr)) / sr
    phase = 2 * np.pi * (f0 * t + 0.5 * (f1 - f0) * t * t / duration_s)
    return PcmBuffer(samples=amp * np.sin(phase), sample_rate=sr)


def band_noise(lo_hz, hi_hz, duration_s=1.0, sr=SR, amp=0.8, rng=None):
    """Noise band-limited to [lo_hz, hi_hz], built in the frequency domain."""
    rng = rng or np.random.default_rng(0)
    n = round(duration_s * sr)
    spectrum = np.zeros(n // 2 + 1, dtype=np.complex128)
    freqs = np.arange(n // 2 + 1) * sr / n
    band = (freqs >= lo_hz) & (freqs <= hi_hz)
    spectrum[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
    x = np.fft.irfft(spectrum, n)
    peak = np.max(np.abs(x))
    return PcmBuffer(samples=amp * x / peak, sample_rate=sr)


def random_segment(rng, duration_s=0.3, sr=SR, amp=0.5):
    return PcmBuffer(samples=amp * (2.0 * rng.random(round(duration_s * sr)) - 1.0),
                     sample_rate=sr)


def three_timbre_wave(per_class=30, duration_s=1.0, sr=SR, rng=None):
    """Concatenated 3-class program: sine 220 Hz, band noise, linear chirp.

    Returns (samples, truth labels per segment). Per-segment jitter keeps
    rows distinct without blurring the classes.
    """
    rng = rng or np.random.default_rng(0)
    chunks, truth = [], []
    for i in range(per_class):
        chunks.append(sine(220.0, duration_s, sr, amp=0.7 + 0.1 * rng.random(),
                           phase=2 * np.pi * rng.random()).samples)
        truth.append(0)
    for i in range(per_class):
        chunks.append(band_noise(1000.0, 3000.0, duration_s, sr,
                                 amp=0.7 + 0.1 * rng.random(), rng=rng).samples)
        truth.append(1)
    for i in range(per_class):
        f0 = 300.0 + 50.0 * rng.random()
        chunks.append(chirp(f0, f0 + 1200.0, duration_s, sr,
                            amp=0.7 + 0.1 * rng.random()).samples)
        truth.append(2)
    return np.concatenate(chunks), truth
