"""Bonn-format EEG ingestion, binary pair datasets, seeded stratified fold
splits and synthetic surrogate corpora.

The on-disk format is one directory per recording set holding exactly 100
plain-text files (.txt/.TXT), each with one ASCII integer per line. Loading
applies no scaling, filtering or resampling: loaded values equal file values
exactly. Optional per-sequence standardization is a separate, explicitly
flagged step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import IngestionError

SET_IDS = ("A", "B", "C", "D", "E")

# Directory / file-prefix codes used by the public distribution of the corpus.
BONN_CODES = {"A": "Z", "B": "O", "C": "N", "D": "F", "E": "S"}

BONN_SEQ_LEN = 4097
BONN_SET_SIZE = 100

TRAIN_FRACTION_TENTHS = 7
VAL_FRACTION_TENTHS = 2


@dataclass(frozen=True)
class LabeledSequence:
    """One recording with a binary label and its provenance id."""

    values: np.ndarray
    label: int
    source_id: str


@dataclass(frozen=True)
class RecordingSet:
    """All sequences of one recording set, ordered by filename."""

    set_id: str
    sequences: tuple


@dataclass(frozen=True)
class PairDataset:
    """Two-set binary classification corpus.

    Samples are ordered first set then second; the second-named set is the
    positive class (label 1). `standardized` records whether per-sequence
    standardization was applied.
    """

    pair: tuple
    samples: tuple
    standardized: bool = False

    @property
    def seq_len(self) -> int:
        return int(self.samples[0].values.shape[0])

    @property
    def n_per_class(self) -> int:
        return len(self.samples) // 2

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def values(self) -> np.ndarray:
        return np.stack([s.values for s in self.samples])

    def subset(self, indices):
        return [self.samples[int(i)] for i in indices]


@dataclass(frozen=True)
class FoldSplit:
    """Disjoint train/val/test index sets into a dataset's samples."""

    fold_index: int
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def resolve_set_dir(root, set_id: str) -> Path:
    """Find the directory of a set under `root` by letter or Bonn code."""
    if set_id not in SET_IDS:
        raise ValueError(f"unknown set id {set_id!r}, expected one of {SET_IDS}")
    root = Path(root)
    names = [set_id, BONN_CODES[set_id]]
    candidates = [n for base in names for n in (base, base.lower())]
    for name in candidates:
        p = root / name
        if p.is_dir():
            return p
    raise IngestionError(f"no directory for set {set_id} under {root} (tried {', '.join(candidates)})")


def _read_sequence(path: Path, expected_len: int) -> np.ndarray:
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh.read().splitlines(), start=1):
            text = line.strip()
            try:
                values.append(int(text))
            except ValueError:
                raise IngestionError(f"{path}:{lineno}: not an integer: {text!r}") from None
    if len(values) != expected_len:
        raise IngestionError(f"{path}: expected {expected_len} samples, found {len(values)}")
    return np.array(values, dtype=np.float64)


def load_bonn_set(
    directory,
    set_id: str,
    expected_len: int = BONN_SEQ_LEN,
    expected_count: int = BONN_SET_SIZE,
) -> RecordingSet:
    """Load one recording set from `directory` (the corpus root).

    Files are parsed in filename order; values are kept raw (no scaling).
    """
    set_dir = resolve_set_dir(directory, set_id)
    files = sorted(p for p in set_dir.iterdir() if p.suffix.lower() == ".txt")
    if len(files) != expected_count:
        raise IngestionError(f"{set_dir}: expected {expected_count} .txt files, found {len(files)}")
    sequences = tuple(_read_sequence(p, expected_len) for p in files)
    return RecordingSet(set_id=set_id, sequences=sequences)


def make_pair_dataset(first: RecordingSet, second: RecordingSet) -> PairDataset:
    """Label the first set 0 and the second (target) set 1, in stable order."""
    lengths = {seq.shape[0] for seq in first.sequences} | {seq.shape[0] for seq in second.sequences}
    if len(lengths) != 1:
        raise ValueError(f"sets have mixed sequence lengths: {sorted(lengths)}")
    if len(first.sequences) != len(second.sequences):
        raise ValueError(
            f"sets differ in size: {len(first.sequences)} vs {len(second.sequences)}"
        )
    samples = [
        LabeledSequence(seq, 0, f"{first.set_id}{i:03d}")
        for i, seq in enumerate(first.sequences)
    ] + [
        LabeledSequence(seq, 1, f"{second.set_id}{i:03d}")
        for i, seq in enumerate(second.sequences)
    ]
    return PairDataset(pair=(first.set_id, second.set_id), samples=tuple(samples))


def kfold_split(n_per_class: int, k: int, seed: int):
    """Generate k independent stratified 70/20/10 splits.

    Sample indices follow the PairDataset layout: 0..n-1 are class 0,
    n..2n-1 are class 1. Each fold reshuffles both classes with a generator
    seeded by (seed, fold_index), so folds are independent but reproducible.
    """
    if n_per_class % 10 != 0:
        raise ValueError(f"n_per_class must be divisible by 10, got {n_per_class}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    n_train = n_per_class * TRAIN_FRACTION_TENTHS // 10
    n_val = n_per_class * VAL_FRACTION_TENTHS // 10
    folds = []
    for fold in range(k):
        rng = np.random.default_rng(np.random.SeedSequence([seed, fold]))
        train, val, test = [], [], []
        for cls in (0, 1):
            perm = rng.permutation(n_per_class) + cls * n_per_class
            train.append(perm[:n_train])
            val.append(perm[n_train : n_train + n_val])
            test.append(perm[n_train + n_val :])
        folds.append(
            FoldSplit(
                fold_index=fold,
                train=np.concatenate(train),
                val=np.concatenate(val),
                test=np.concatenate(test),
            )
        )
    return folds


@dataclass(frozen=True)
class ToneSpec:
    """Sinusoid-plus-noise recipe for one synthetic class."""

    freq_hz: float
    amplitude: float
    noise_sd: float

    def __post_init__(self):
        if not np.isfinite([self.freq_hz, self.amplitude, self.noise_sd]).all():
            raise ValueError(f"spec values must be finite: {self}")
        if self.freq_hz < 0 or self.noise_sd < 0:
            raise ValueError(f"frequency and noise_sd must be non-negative: {self}")


# Desk-scale default: well separated tones, mild noise, two seconds at 64 Hz.
DEFAULT_CLASS0 = ToneSpec(freq_hz=2.0, amplitude=1.0, noise_sd=0.1)
DEFAULT_CLASS1 = ToneSpec(freq_hz=10.0, amplitude=1.0, noise_sd=0.1)
DEFAULT_SAMPLE_RATE_HZ = 64.0
DEFAULT_SYNTH_SEQ_LEN = 128


def gen_synthetic(
    class0: ToneSpec,
    class1: ToneSpec,
    n_per_class: int,
    seq_len: int,
    sample_rate_hz: float,
    seed: int,
    pair=("syn0", "syn1"),
) -> PairDataset:
    """Deterministic surrogate corpus: amplitude*sin(2 pi f t) + Gaussian noise."""
    if seq_len < 2:
        raise ValueError(f"seq_len must be >= 2, got {seq_len}")
    if sample_rate_hz <= 0:
        raise ValueError(f"sample_rate_hz must be positive, got {sample_rate_hz}")
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    t = np.arange(seq_len, dtype=np.float64) / float(sample_rate_hz)
    rng = np.random.default_rng(int(seed))
    samples = []
    for label, spec, name in ((0, class0, pair[0]), (1, class1, pair[1])):
        base = spec.amplitude * np.sin(2.0 * np.pi * spec.freq_hz * t)
        for i in range(n_per_class):
            noise = rng.standard_normal(seq_len) * spec.noise_sd
            samples.append(LabeledSequence(base + noise, label, f"{name}-{i:03d}"))
    return PairDataset(pair=tuple(pair), samples=tuple(samples))


def standardize_dataset(ds: PairDataset) -> PairDataset:
    """Per-sequence (x - mean) / std; std is floored at 1e-12 for constants."""
    samples = []
    for s in ds.samples:
        sd = float(s.values.std())
        scaled = (s.values - s.values.mean()) / max(sd, 1e-12)
        samples.append(replace(s, values=scaled))
    return PairDataset(pair=ds.pair, samples=tuple(samples), standardized=True)


def export_bonn_format(ds: PairDataset, out_dir, set_names=None):
    """Write a dataset as two Bonn-layout set directories.

    Values are rounded to the nearest integer (the format is integer-per-
    line); choose amplitudes accordingly when fidelity matters. Returns the
    two directory paths, class 0 first.
    """
    out_dir = Path(out_dir)
    names = tuple(set_names) if set_names else ds.pair
    dirs = []
    for label, name in ((0, names[0]), (1, names[1])):
        target = out_dir / name
        target.mkdir(parents=True, exist_ok=True)
        members = [s for s in ds.samples if s.label == label]
        for i, s in enumerate(members, start=1):
            lines = "\n".join(str(int(round(float(v)))) for v in s.values)
            (target / f"{name}{i:03d}.txt").write_text(lines + "\n", encoding="ascii")
        dirs.append(target)
    return tuple(dirs)
