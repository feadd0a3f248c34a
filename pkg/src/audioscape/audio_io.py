"""WAV loading, track mixing, and fixed-length segmentation.

All audio is carried as mono float64 in [-1, 1]. Only RIFF/WAV is
supported: PCM 16-bit for read and write, IEEE float 32-bit read-only.
"""

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.io.wavfile

from .validation import as_samples, check_positive

INT16_SCALE = 32768.0


@dataclass
class PcmBuffer:
    """Mono PCM audio: samples in [-1, 1] plus the sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = as_samples(self.samples)
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)
        peak = float(np.max(np.abs(self.samples))) if self.samples.size else 0.0
        if peak > 1.0 + 1e-12:
            raise ValueError(f"samples exceed [-1, 1] (peak {peak:.6g})")

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


@dataclass
class SegmentSet:
    """Ordered, equal-length segments cut from one source recording."""

    segments: list[PcmBuffer]
    segment_duration_s: float
    source_id: str
    sample_rate: int

    def __post_init__(self):
        if not self.segments:
            raise ValueError("SegmentSet needs at least one segment")
        lengths = {len(s) for s in self.segments}
        if len(lengths) != 1:
            raise ValueError(f"segments have unequal lengths: {sorted(lengths)}")
        rates = {s.sample_rate for s in self.segments}
        if rates != {self.sample_rate}:
            raise ValueError("segment sample rates disagree with the set")
        expected = round(self.segment_duration_s * self.sample_rate)
        if lengths != {expected}:
            raise ValueError(
                f"segment length {lengths.pop()} != round(duration*rate) = {expected}"
            )

    @property
    def n_segments(self):
        return len(self.segments)

    @property
    def segment_samples(self):
        return len(self.segments[0])


def load_audio(path):
    """Load a WAV file as a mono PcmBuffer.

    Accepts PCM 16-bit and IEEE float 32-bit, 1 or 2 channels. Stereo is
    downmixed by the per-sample mean. Integer samples are scaled by
    1/32768; float samples with a peak above 1 are rescaled to peak 1.
    """
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"cannot read WAV file {path!r}: {exc}") from exc
    if data.size == 0:
        raise ValueError(f"{path!r} contains no audio samples")
    dtype = data.dtype
    if dtype != np.int16 and dtype != np.float32:
        raise ValueError(
            f"unsupported WAV encoding {dtype} in {path!r} (PCM 16-bit or float 32-bit only)"
        )

    samples = data.astype(np.float64)
    if samples.ndim == 2:
        if samples.shape[1] > 2:
            raise ValueError(f"{path!r} has {samples.shape[1]} channels; only 1 or 2 supported")
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise ValueError(f"unexpected WAV data shape {samples.shape} in {path!r}")

    if dtype == np.int16:
        samples = samples / INT16_SCALE
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples = samples / peak
    return PcmBuffer(samples=samples, sample_rate=int(rate))


def write_wav(path, pcm):
    """Write a PcmBuffer as PCM 16-bit little-endian WAV.

    Inverse of the load scaling: values are multiplied by 32768 and
    rounded, with +1.0 clipped to the int16 maximum.
    """
    scaled = np.clip(np.rint(pcm.samples * INT16_SCALE), -INT16_SCALE, INT16_SCALE - 1)
    scipy.io.wavfile.write(path, pcm.sample_rate, scaled.astype("<i2"))


def mix_tracks(buffers):
    """Sum tracks into one buffer, zero-padding short ones, then peak-normalize.

    The sum runs in a canonical content order so the result is bit-identical
    under any permutation of the inputs. An all-zero sum is returned as-is.
    """
    if not buffers:
        raise ValueError("mix_tracks needs at least one buffer")
    rates = {b.sample_rate for b in buffers}
    if len(rates) != 1:
        raise ValueError(f"mixed sample rates {sorted(rates)}; resampling is not supported")
    ordered = sorted(
        buffers,
        key=lambda b: (len(b), hashlib.sha256(b.samples.tobytes()).digest()),
    )
    total = np.zeros(max(len(b) for b in buffers), dtype=np.float64)
    for buf in ordered:
        total[: len(buf)] += buf.samples
    peak = float(np.max(np.abs(total)))
    if peak > 0.0:
        total = total / peak
    return PcmBuffer(samples=total, sample_rate=rates.pop())


def segment(pcm, duration_s, source_id="source"):
    """Cut a buffer into contiguous equal-length segments of duration_s seconds.

    The trailing remainder shorter than a full segment is dropped
    (tail_policy: drop), so every segment has the same frame count
    downstream.
    """
    check_positive(duration_s, "duration_s")
    seg_samples = round(duration_s * pcm.sample_rate)
    if seg_samples <= 0:
        raise ValueError(f"duration_s {duration_s} is below one sample at {pcm.sample_rate} Hz")
    n = len(pcm) // seg_samples
    if n < 1:
        raise ValueError(
            f"audio is {len(pcm)} samples, shorter than one {seg_samples}-sample segment"
        )
    segments = [
        PcmBuffer(samples=pcm.samples[i * seg_samples : (i + 1) * seg_samples].copy(),
                  sample_rate=pcm.sample_rate)
        for i in range(n)
    ]
    return SegmentSet(
        segments=segments,
        segment_duration_s=float(duration_s),
        source_id=source_id,
        sample_rate=pcm.sample_rate,
    )


def write_segments(segment_set, out_dir):
    """Write one 16-bit WAV per segment into out_dir.

    Files are named `<source_id>_<NNNN>.wav` with a zero-padded index.
    Returns a list of (index, relative path) in segment order.
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for i, seg in enumerate(segment_set.segments):
        rel = f"{segment_set.source_id}_{i:04d}.wav"
        write_wav(os.path.join(out_dir, rel), seg)
        manifest.append((i, rel))
    return manifest
