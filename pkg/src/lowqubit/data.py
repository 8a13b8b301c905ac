"""Datasets: a deterministic synthetic waveform generator and a minimal
RIFF/PCM WAV reader-writer for speech-commands-style directory corpora.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

CACHE_MAGIC = b"QSPD"
CACHE_VERSION = 1


class WavFormatError(ValueError):
    """Malformed or unsupported WAV content."""


@dataclass
class WaveDataset:
    """Fixed-length waveforms in [-1, 1] with integer class labels."""

    waveforms: np.ndarray
    labels: np.ndarray
    n_classes: int
    sample_rate: int = 16000
    class_names: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.waveforms = np.asarray(self.waveforms, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.waveforms.ndim != 2:
            raise ConfigError("waveforms must be a (n, length) array")
        if self.labels.shape != (self.waveforms.shape[0],):
            raise ConfigError("one label per waveform required")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ConfigError(f"labels must lie in [0, {self.n_classes})")
        if self.waveforms.size and np.max(np.abs(self.waveforms)) > 1.0 + 1e-12:
            raise ConfigError("waveform values must lie in [-1, 1]")

    def __len__(self):
        return self.waveforms.shape[0]

    @property
    def length(self) -> int:
        return self.waveforms.shape[1]


def class_frequency(c: int, n_classes: int, length: int) -> int:
    """Distinct per-class tone frequency, in cycles over the window.

    Scaled with length so the local period stays comparable to a short
    convolution kernel, capped so the third harmonic stays below
    Nyquist for every class.
    """
    mult = max(1, min(length // 32, (length // 2 - 1) // (3 * n_classes)))
    return (c + 1) * mult


def gen_synthetic(n_classes: int = 4, per_class: int = 64, length: int = 1024,
                  noise_sigma: float = 0.05, seed: int = 0) -> WaveDataset:
    """Class-separable two-tone waveforms.

    Class c is 0.8 sin(2 pi f_c t / L) + 0.2 sin(2 pi 3 f_c t / L) with
    distinct per-class f_c, plus gaussian noise, clipped to [-1, 1].
    Fully determined by the seed.
    """
    if n_classes < 2:
        raise ConfigError(f"need at least 2 classes, got {n_classes}")
    if length < 64:
        raise ConfigError(f"length must be >= 64, got {length}")
    if per_class < 1:
        raise ConfigError("per_class must be >= 1")
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    waves = np.empty((n_classes * per_class, length))
    labels = np.empty(n_classes * per_class, dtype=np.int64)
    row = 0
    for c in range(n_classes):
        f = class_frequency(c, n_classes, length)
        base = 0.8 * np.sin(2 * np.pi * f * t / length) + 0.2 * np.sin(
            2 * np.pi * 3 * f * t / length
        )
        for _ in range(per_class):
            noisy = base + rng.normal(0.0, noise_sigma, length) if noise_sigma > 0 else base
            waves[row] = np.clip(noisy, -1.0, 1.0)
            labels[row] = c
            row += 1
    names = tuple(f"class{c}" for c in range(n_classes))
    return WaveDataset(waves, labels, n_classes, class_names=names)


# -- WAV read/write ----------------------------------------------------------


def write_wav(path, samples, sample_rate: int = 16000):
    """Write mono 16-bit PCM; samples are floats in [-1, 1]."""
    samples = np.asarray(samples, dtype=np.float64)
    pcm = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    with open(path, "wb") as fh:
        fh.write(b"RIFF")
        fh.write(struct.pack("<I", 4 + 8 + 16 + 8 + len(payload)))
        fh.write(b"WAVE")
        fh.write(b"fmt ")
        fh.write(struct.pack("<IHHIIHH", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16))
        fh.write(b"data")
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)


def read_wav(path) -> tuple[np.ndarray, int]:
    """Parse a RIFF/WAVE file; returns (float samples in [-1, 1], rate).

    Accepts only PCM (format 1), mono, 16-bit.  Anything else raises
    WavFormatError naming the problem.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise WavFormatError("file too short for a RIFF header")
    if blob[:4] != b"RIFF":
        raise WavFormatError(f"bad magic {blob[:4]!r}, expected b'RIFF'")
    if blob[8:12] != b"WAVE":
        raise WavFormatError(f"bad form type {blob[8:12]!r}, expected b'WAVE'")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + size]
        if len(body) != size:
            raise WavFormatError(f"chunk {chunk_id!r} truncated")
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None:
        raise WavFormatError("missing fmt chunk")
    if data is None:
        raise WavFormatError("missing data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise WavFormatError(f"unsupported format code {audio_format}, PCM only")
    if channels != 1:
        raise WavFormatError(f"unsupported channel count {channels}, mono only")
    if bits != 16:
        raise WavFormatError(f"unsupported bit depth {bits}, 16-bit only")
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    return samples, sample_rate


def _fit_length(samples: np.ndarray, length: int) -> np.ndarray:
    if samples.shape[0] >= length:
        return samples[:length]
    padded = np.zeros(length)
    padded[: samples.shape[0]] = samples
    return padded


def load_wav_dir(root, length: int = 1024) -> tuple[WaveDataset, list[str]]:
    """Load a per-class directory tree of mono PCM16 WAV files.

    Class label = index of the subdirectory name in lexicographic order
    (empty or fully-unreadable classes are dropped).  Returns the
    dataset plus one diagnostic string per skipped file.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"{root} is not a directory")
    skipped: list[str] = []
    kept: list[tuple[str, list[np.ndarray]]] = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        waves = []
        for wav_path in sorted(sub.glob("*.wav")):
            try:
                samples, _rate = read_wav(wav_path)
            except WavFormatError as exc:
                skipped.append(f"{wav_path}: {exc}")
                continue
            waves.append(_fit_length(samples, length))
        if waves:
            kept.append((sub.name, waves))
        else:
            skipped.append(f"{sub}: no readable WAV files, class excluded")
    if not kept:
        raise WavFormatError(f"no usable classes under {root}")
    waveforms = np.vstack([np.stack(waves) for _, waves in kept])
    labels = np.concatenate(
        [np.full(len(waves), i, dtype=np.int64) for i, (_, waves) in enumerate(kept)]
    )
    names = tuple(name for name, _ in kept)
    return WaveDataset(waveforms, labels, len(kept), class_names=names), skipped


def write_wav_dataset(dataset: WaveDataset, root):
    """Write one subdirectory per class (round-trip counterpart of load_wav_dir)."""
    root = Path(root)
    for c in range(dataset.n_classes):
        name = dataset.class_names[c] if dataset.class_names else f"class{c}"
        (root / name).mkdir(parents=True, exist_ok=True)
    counters = [0] * dataset.n_classes
    for wave, label in zip(dataset.waveforms, dataset.labels):
        name = dataset.class_names[label] if dataset.class_names else f"class{label}"
        write_wav(root / name / f"{counters[label]:05d}.wav", wave, dataset.sample_rate)
        counters[label] += 1


# -- flat binary cache --------------------------------------------------------


def save_cache(dataset: WaveDataset, path):
    """Flat binary cache: magic, version, n, length, classes, rate, f32 + u16."""
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<H", CACHE_VERSION))
        fh.write(struct.pack("<IIHI", len(dataset), dataset.length,
                             dataset.n_classes, dataset.sample_rate))
        fh.write(dataset.waveforms.astype("<f4").tobytes())
        fh.write(dataset.labels.astype("<u2").tobytes())


def load_cache(path) -> WaveDataset:
    with open(path, "rb") as fh:
        if fh.read(4) != CACHE_MAGIC:
            raise ValueError("bad cache magic")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        n, length, n_classes, rate = struct.unpack("<IIHI", fh.read(14))
        waves = np.frombuffer(fh.read(4 * n * length), dtype="<f4")
        waves = waves.astype(np.float64).reshape(n, length)
        labels = np.frombuffer(fh.read(2 * n), dtype="<u2").astype(np.int64)
    return WaveDataset(waves, labels, n_classes, sample_rate=rate)
