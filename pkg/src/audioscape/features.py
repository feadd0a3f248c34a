"""MFCC feature extraction and per-segment aggregation.

Each segment becomes a 39-row matrix (13 cepstral coefficients plus their
first and second regression deltas, one column per frame). The matrix is
aggregated over frames with (mean, std, min, max) and flattened
coefficient-major into a 156-element row, one row per segment.

Conventions, fixed so results are reproducible and testable:

* frames: ``F = 1 + floor((n_samples - frame_len) / hop)``, no padding
* window: symmetric Hann, ``w[k] = 0.5 - 0.5*cos(2*pi*k/(M-1))``
* power spectrum: ``|DFT(frame * w, n_fft)|**2`` over the first
  ``n_fft//2 + 1`` bins, no 1/N scaling
* mel scale: ``mel(f) = 2595 * log10(1 + f/700)``; triangular filters with
  unit peak, evaluated at the bin center frequencies ``k * sr / n_fft``
* log energies floored at ``log_floor`` before the log
* orthonormal DCT-II over the mel axis, coefficients 0..12 kept
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft
from sklearn.base import BaseEstimator, TransformerMixin

from .audio_io import PcmBuffer, SegmentSet
from .validation import as_float_matrix

N_BASE_COEFFS = 13
N_STACKED = 39
STAT_ORDER = ("mean", "std", "min", "max")
ROW_WIDTH = N_STACKED * len(STAT_ORDER)  # 156


@dataclass
class MfccConfig:
    """Framing and filterbank parameters for MFCC extraction.

    ``frame_len``, ``hop`` and ``n_fft`` are in samples; use
    :meth:`for_sample_rate` to derive them from the usual 25 ms / 10 ms
    windows at a given rate.
    """

    frame_len: int
    hop: int
    n_fft: int
    n_mels: int = 40
    n_coeffs: int = N_BASE_COEFFS
    fmin: float = 0.0
    fmax: float = 4000.0
    log_floor: float = 1e-10
    delta_width: int = 2

    def __post_init__(self):
        if self.frame_len <= 0 or self.hop <= 0:
            raise ValueError("frame_len and hop must be positive")
        if self.n_fft < 1 or self.n_fft & (self.n_fft - 1):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if self.frame_len > self.n_fft:
            raise ValueError(f"frame_len {self.frame_len} exceeds n_fft {self.n_fft}")
        if not 0 <= self.fmin < self.fmax:
            raise ValueError(f"need 0 <= fmin < fmax, got [{self.fmin}, {self.fmax}]")
        if self.n_coeffs > self.n_mels:
            raise ValueError(f"n_coeffs {self.n_coeffs} exceeds n_mels {self.n_mels}")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        if self.delta_width < 1:
            raise ValueError("delta_width must be >= 1")

    @classmethod
    def for_sample_rate(cls, sample_rate, frame_ms=25.0, hop_ms=10.0, fmax=None, **kw):
        """Build a config with frame/hop in samples and fmax <= Nyquist."""
        frame_len = round(frame_ms * sample_rate / 1000.0)
        hop = round(hop_ms * sample_rate / 1000.0)
        n_fft = 1
        while n_fft < frame_len:
            n_fft *= 2
        if fmax is None:
            fmax = sample_rate / 2.0
        return cls(frame_len=frame_len, hop=hop, n_fft=n_fft, fmax=float(fmax), **kw)

    def validate_rate(self, sample_rate):
        if self.fmax > sample_rate / 2.0 + 1e-9:
            raise ValueError(f"fmax {self.fmax} exceeds Nyquist for {sample_rate} Hz")


@dataclass
class SegmentFeatures:
    """39 x F coefficient matrix for one segment (13 MFCC + delta + delta-delta)."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = as_float_matrix(self.matrix, "feature matrix")
        if self.matrix.shape[0] != N_STACKED:
            raise ValueError(f"expected {N_STACKED} rows, got {self.matrix.shape[0]}")

    @property
    def n_frames(self):
        return self.matrix.shape[1]


@dataclass
class FeatureTable:
    """N x 156 matrix of aggregated segment features, rows in segment order."""

    values: np.ndarray

    def __post_init__(self):
        self.values = as_float_matrix(self.values, "feature table", min_rows=1)
        if self.values.shape[1] != ROW_WIDTH:
            raise ValueError(f"expected {ROW_WIDTH} columns, got {self.values.shape[1]}")

    @property
    def n_segments(self):
        return self.values.shape[0]


def column_names():
    """CSV header: c<i>_<stat> in coefficient-major order."""
    return [f"c{i}_{stat}" for i in range(N_STACKED) for stat in STAT_ORDER]


def mel_of_hz(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def hz_of_mel(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg, sample_rate):
    """Triangular mel filter weights, shape (n_mels, n_fft//2 + 1)."""
    n_bins = cfg.n_fft // 2 + 1
    bin_hz = np.arange(n_bins) * (sample_rate / cfg.n_fft)
    edges = hz_of_mel(np.linspace(mel_of_hz(cfg.fmin), mel_of_hz(cfg.fmax), cfg.n_mels + 2))
    left, center, right = edges[:-2], edges[1:-1], edges[2:]
    rising = (bin_hz[None, :] - left[:, None]) / (center - left)[:, None]
    falling = (right[:, None] - bin_hz[None, :]) / (right - center)[:, None]
    return np.maximum(0.0, np.minimum(rising, falling))


def frame_signal(samples, frame_len, hop):
    """Slice a 1-D signal into (F, frame_len) overlapping frames."""
    n = len(samples)
    if n < frame_len:
        raise ValueError(f"segment of {n} samples is shorter than one {frame_len}-sample frame")
    n_frames = 1 + (n - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return samples[idx]


def mfcc(segment, cfg):
    """Extract the first 13 cepstral coefficients of every frame.

    Args:
        segment: PcmBuffer holding one audio segment
        cfg: MfccConfig (fmax must not exceed the segment's Nyquist)

    Returns:
        (13, F) array, rows = coefficients, columns = frames.
    """
    cfg.validate_rate(segment.sample_rate)
    frames = frame_signal(segment.samples, cfg.frame_len, cfg.hop)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(cfg.frame_len) / (cfg.frame_len - 1))
    spectrum = np.fft.rfft(frames * window, n=cfg.n_fft, axis=1)
    power = np.abs(spectrum) ** 2
    energies = power @ mel_filterbank(cfg, segment.sample_rate).T
    log_mel = np.log(np.maximum(energies, cfg.log_floor))
    cepstra = scipy.fft.dct(log_mel, type=2, norm="ortho", axis=1)
    return cepstra[:, : cfg.n_coeffs].T


def deltas(coeffs, width=2):
    """Regression delta of each coefficient trajectory.

    d_t = sum_{w=1..W} w * (c_{t+w} - c_{t-w}) / (2 * sum_{w} w^2), with the
    boundary frames replicated so d has the same frame count as c.
    """
    coeffs = as_float_matrix(coeffs, "coeffs")
    n_frames = coeffs.shape[1]
    if n_frames < 2 * width + 1:
        raise ValueError(f"need at least {2 * width + 1} frames for width {width}, got {n_frames}")
    padded = np.pad(coeffs, ((0, 0), (width, width)), mode="edge")
    denom = 2.0 * sum(w * w for w in range(1, width + 1))
    out = np.zeros_like(coeffs)
    for w in range(1, width + 1):
        out += w * (padded[:, width + w : width + w + n_frames]
                    - padded[:, width - w : width - w + n_frames])
    return out / denom


def feature_stack(segment, cfg):
    """Stack MFCC, delta, and delta-delta rows into a (39, F) matrix."""
    base = mfcc(segment, cfg)
    d1 = deltas(base, cfg.delta_width)
    d2 = deltas(d1, cfg.delta_width)
    return SegmentFeatures(matrix=np.vstack([base, d1, d2]))


def aggregate_and_flatten(feats):
    """Aggregate a (39, F) matrix into a 156-vector.

    Each row contributes (mean, population std, min, max); position
    4*i + k holds statistic k of coefficient i.
    """
    m = feats.matrix
    stats = np.stack([m.mean(axis=1), m.std(axis=1), m.min(axis=1), m.max(axis=1)], axis=1)
    return stats.reshape(-1)


def build_table(segment_set, cfg, zscore=False):
    """Compute the N x 156 feature table for a SegmentSet, rows in segment order.

    With zscore=True each column is standardized to zero mean and unit
    variance (constant columns are left centered); off by default.
    """
    if segment_set.n_segments < 2:
        raise ValueError("need at least 2 segments to build a feature table")
    rows = [aggregate_and_flatten(feature_stack(seg, cfg)) for seg in segment_set.segments]
    values = np.vstack(rows)
    if zscore:
        mu = values.mean(axis=0)
        sd = values.std(axis=0)
        sd[sd == 0.0] = 1.0
        values = (values - mu) / sd
    return FeatureTable(values=values)


def diversity_check(table):
    """Maximum pairwise cosine similarity between feature rows.

    The caller compares the value against the 0.9 redundancy threshold; a
    result near 1 means the data set is dominated by near-duplicate
    segments.
    """
    X = table.values if isinstance(table, FeatureTable) else as_float_matrix(table)
    if X.shape[0] < 2:
        raise ValueError("diversity_check needs at least 2 rows")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"zero-norm feature row at index {int(np.argmin(norms))}")
    unit = X / norms[:, None]
    sims = unit @ unit.T
    np.fill_diagonal(sims, -np.inf)
    return float(sims.max())


def table_to_csv(table, path):
    header = ",".join(column_names())
    lines = [header]
    for row in table.values:
        lines.append(",".join(format(v, ".9g") for v in row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def table_from_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",") != column_names():
        raise ValueError(f"{path!r} is not a feature table (unexpected header)")
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return FeatureTable(values=values)


class MfccFeaturizer(BaseEstimator, TransformerMixin):
    """Stateless transformer from audio segments to 156-column feature rows.

    transform() accepts a SegmentSet or a sequence of equal-rate 1-D sample
    arrays (sample_rate then comes from the constructor).
    """

    def __init__(self, sample_rate=22050, frame_ms=25.0, hop_ms=10.0, n_mels=40,
                 n_coeffs=N_BASE_COEFFS, fmin=0.0, fmax=None, log_floor=1e-10,
                 delta_width=2, zscore=False):
        self.sample_rate = sample_rate
        self.frame_ms = frame_ms
        self.hop_ms = hop_ms
        self.n_mels = n_mels
        self.n_coeffs = n_coeffs
        self.fmin = fmin
        self.fmax = fmax
        self.log_floor = log_floor
        self.delta_width = delta_width
        self.zscore = zscore

    def _config(self, sample_rate):
        return MfccConfig.for_sample_rate(
            sample_rate, frame_ms=self.frame_ms, hop_ms=self.hop_ms, fmax=self.fmax,
            n_mels=self.n_mels, n_coeffs=self.n_coeffs, fmin=self.fmin,
            log_floor=self.log_floor, delta_width=self.delta_width,
        )

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if isinstance(X, SegmentSet):
            segment_set = X
        else:
            buffers = [PcmBuffer(samples=np.asarray(x, dtype=np.float64),
                                 sample_rate=self.sample_rate) for x in X]
            lengths = {len(b) for b in buffers}
            if len(lengths) != 1:
                raise ValueError("all segments must have equal length")
            duration = lengths.pop() / self.sample_rate
            segment_set = SegmentSet(segments=buffers, segment_duration_s=duration,
                                     source_id="in-memory", sample_rate=self.sample_rate)
        cfg = self._config(segment_set.sample_rate)
        return build_table(segment_set, cfg, zscore=self.zscore).values
