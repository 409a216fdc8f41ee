"""DTW-metric k-nearest-neighbour surface recognition.

Training just stores labeled exemplar signatures; classification votes among
the k nearest under DTW distance. The database file format is a fixed binary
layout (documented in the README) so round trips are bit-exact.
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .dtw import dtw_distance
from .errors import (
    BadFoldCount,
    BadFormat,
    EmptyDatabase,
    EmptyInput,
    MixedSampleRates,
    TooFewSamples,
    VersionMismatch,
)
from .extraction import ExtractionConfig, VibrationSignature

FORMAT_VERSION = 1
_MAGIC = b"VSIG"
_CONFIG_STRUCT = struct.Struct("<IIIdddddIddddQIB")


@dataclass(frozen=True)
class SignatureDatabase:
    """Labeled signature exemplars plus the config that produced them."""

    entries: tuple
    config: ExtractionConfig
    version: int = FORMAT_VERSION

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> tuple:
        return tuple(sorted({label for label, _ in self.entries}))


@dataclass(frozen=True)
class ClassificationResult:
    """Majority-vote outcome plus the neighbours that produced it."""

    predicted_label: str
    neighbor_labels: tuple
    neighbor_distances: tuple
    vote_counts: dict


@dataclass(frozen=True)
class EvalReport:
    """Cross-validation outcome: confusion matrix and derived rates.

    ``confusion`` rows are true labels, columns predicted, both in ``labels``
    order. Labels whose false-positive rate is undefined (no negatives) are
    reported as 0.0 and listed in ``undefined_fpr``.
    """

    labels: tuple
    confusion: np.ndarray
    per_class_tpr: dict
    per_class_fpr: dict
    mean_accuracy: float
    folds: int
    undefined_fpr: tuple = ()


def train(samples, cfg: ExtractionConfig) -> SignatureDatabase:
    """Build a database from (label, signature) pairs, order preserved."""
    samples = list(samples)
    if not samples:
        raise EmptyInput("no training samples")
    rates = {sig.sample_rate_hz for _, sig in samples}
    if len(rates) != 1:
        raise MixedSampleRates(f"sample rates differ: {sorted(rates)}")
    entries = []
    for label, sig in samples:
        if not label:
            raise ValueError("labels must be non-empty")
        entries.append((str(label), replace(sig, label=str(label))))
    return SignatureDatabase(entries=tuple(entries), config=cfg)


def classify(db: SignatureDatabase, query: VibrationSignature, k: int = 5) -> ClassificationResult:
    """Majority vote among the k nearest entries under DTW distance.

    Vote ties are broken by the smallest summed neighbour distance among the
    tied labels, then lexicographically; neighbour order is (distance, label)
    so the result never depends on database entry order.
    """
    if len(db) == 0:
        raise EmptyDatabase("database has no entries")
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(
        (float(dtw_distance(query.values, sig.values)), label)
        for label, sig in db.entries
    )
    top = ranked[: min(k, len(ranked))]
    votes = Counter(label for _, label in top)
    best = max(votes.values())
    tied = [label for label, count in votes.items() if count == best]
    if len(tied) > 1:
        summed = {
            label: sum(d for d, l in top if l == label) for label in tied
        }
        smallest = min(summed.values())
        tied = [label for label in tied if summed[label] == smallest]
    return ClassificationResult(
        predicted_label=min(tied),
        neighbor_labels=tuple(label for _, label in top),
        neighbor_distances=tuple(d for d, _ in top),
        vote_counts=dict(votes),
    )


def _stratified_folds(samples, folds, seed):
    by_label: dict = {}
    for idx, (label, _) in enumerate(samples):
        by_label.setdefault(label, []).append(idx)
    smallest = min(len(v) for v in by_label.values())
    if smallest < folds:
        raise TooFewSamples(
            f"smallest class has {smallest} samples, fewer than {folds} folds"
        )
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(samples), dtype=np.int64)
    for label in sorted(by_label):
        indices = np.asarray(by_label[label])
        for position, idx in enumerate(rng.permutation(indices)):
            fold_of[idx] = position % folds
    return fold_of


def cross_validate(
    samples,
    folds: int,
    k: int = 5,
    seed: int = 0,
    cfg: ExtractionConfig | None = None,
) -> EvalReport:
    """Stratified k-fold evaluation: train on out-of-fold, test in-fold.

    Fold assignment shuffles each class independently with the given seed
    and deals round-robin, so every class is split as evenly as possible.
    """
    samples = list(samples)
    if folds < 2:
        raise BadFoldCount("need at least 2 folds")
    if not samples:
        raise EmptyInput("no samples to evaluate")
    cfg = cfg if cfg is not None else ExtractionConfig()
    fold_of = _stratified_folds(samples, folds, seed)

    labels = tuple(sorted({label for label, _ in samples}))
    index_of = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for fold in range(folds):
        train_part = [s for i, s in enumerate(samples) if fold_of[i] != fold]
        test_part = [s for i, s in enumerate(samples) if fold_of[i] == fold]
        db = train(train_part, cfg)
        for true_label, sig in test_part:
            result = classify(db, sig, k=k)
            confusion[index_of[true_label], index_of[result.predicted_label]] += 1

    total = int(confusion.sum())
    tpr = {}
    fpr = {}
    undefined = []
    for i, label in enumerate(labels):
        tp = int(confusion[i, i])
        row = int(confusion[i].sum())
        col = int(confusion[:, i].sum())
        fp = col - tp
        tn = total - row - fp
        tpr[label] = tp / row if row else 0.0
        if fp + tn > 0:
            fpr[label] = fp / (fp + tn)
        else:
            fpr[label] = 0.0
            undefined.append(label)
    return EvalReport(
        labels=labels,
        confusion=confusion,
        per_class_tpr=tpr,
        per_class_fpr=fpr,
        mean_accuracy=float(np.trace(confusion)) / total,
        folds=folds,
        undefined_fpr=tuple(undefined),
    )


# -- persistence ------------------------------------------------------------
#
# Database file: b"VSIG", u32 version, config block, u32 entry count, entry
# blocks. A standalone signature file (.vsig) is exactly one entry block.
# All integers and floats are little-endian; values are IEEE-754 binary64.


def _pack_config(cfg: ExtractionConfig) -> bytes:
    return _CONFIG_STRUCT.pack(
        cfg.n_rms,
        cfg.window_len,
        cfg.m_patterns,
        cfg.minpro,
        cfg.delta_f_hz,
        cfg.minstr,
        cfg.band_low_hz,
        cfg.band_high_hz,
        cfg.filter_order,
        cfg.f_search_low_hz,
        cfg.f_search_high_hz,
        cfg.len_tol_low,
        cfg.len_tol_high,
        cfg.rng_seed,
        0 if cfg.max_windows is None else cfg.max_windows,
        1 if cfg.envelope_first else 0,
    )


def _unpack_config(blob: bytes, offset: int):
    if offset + _CONFIG_STRUCT.size > len(blob):
        raise BadFormat("config block truncated")
    fields = _CONFIG_STRUCT.unpack_from(blob, offset)
    cfg = ExtractionConfig(
        n_rms=fields[0],
        window_len=fields[1],
        m_patterns=fields[2],
        minpro=fields[3],
        delta_f_hz=fields[4],
        minstr=fields[5],
        band_low_hz=fields[6],
        band_high_hz=fields[7],
        filter_order=fields[8],
        f_search_low_hz=fields[9],
        f_search_high_hz=fields[10],
        len_tol_low=fields[11],
        len_tol_high=fields[12],
        rng_seed=fields[13],
        max_windows=fields[14] or None,
        envelope_first=bool(fields[15]),
    )
    return cfg, offset + _CONFIG_STRUCT.size


def _pack_entry(label: str, sig: VibrationSignature) -> bytes:
    encoded = label.encode("utf-8")
    head = struct.pack(
        "<I", len(encoded)
    ) + encoded + struct.pack(
        "<IdIII",
        sig.sample_rate_hz,
        sig.f_hat_hz,
        sig.patterns_used,
        sig.windows_examined,
        len(sig.values),
    )
    return head + np.asarray(sig.values, dtype="<f8").tobytes()


def _unpack_entry(blob: bytes, offset: int):
    def need(count):
        if offset + count > len(blob):
            raise BadFormat("entry block truncated")

    need(4)
    (label_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    need(label_len)
    try:
        label = blob[offset : offset + label_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadFormat("entry label is not UTF-8") from exc
    offset += label_len
    need(24)
    rate, f_hat, patterns_used, windows_examined, n_values = struct.unpack_from(
        "<IdIII", blob, offset
    )
    offset += 24
    need(8 * n_values)
    values = np.frombuffer(blob, dtype="<f8", count=n_values, offset=offset).copy()
    offset += 8 * n_values
    sig = VibrationSignature(
        values=values,
        sample_rate_hz=rate,
        f_hat_hz=f_hat,
        patterns_used=patterns_used,
        windows_examined=windows_examined,
        label=label or None,
    )
    return label, sig, offset


def save_db(db: SignatureDatabase, path) -> None:
    """Write the database in the versioned binary layout."""
    parts = [_MAGIC, struct.pack("<I", db.version), _pack_config(db.config)]
    parts.append(struct.pack("<I", len(db.entries)))
    for label, sig in db.entries:
        parts.append(_pack_entry(label, sig))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_db(path) -> SignatureDatabase:
    """Read a database file; rejects foreign versions and truncations."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != _MAGIC:
        raise BadFormat(f"{path}: not a signature database")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    cfg, offset = _unpack_config(blob, 8)
    if offset + 4 > len(blob):
        raise BadFormat(f"{path}: entry count truncated")
    (count,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    entries = []
    for _ in range(count):
        label, sig, offset = _unpack_entry(blob, offset)
        entries.append((label, sig))
    if offset != len(blob):
        raise BadFormat(f"{path}: {len(blob) - offset} trailing bytes")
    return SignatureDatabase(entries=tuple(entries), config=cfg, version=version)


def save_signature(sig: VibrationSignature, path) -> None:
    """Write one signature as a standalone entry block (.vsig)."""
    with open(path, "wb") as fh:
        fh.write(_pack_entry(sig.label or "", sig))


def load_signature(path) -> VibrationSignature:
    """Read a standalone signature file written by save_signature."""
    with open(path, "rb") as fh:
        blob = fh.read()
    _, sig, offset = _unpack_entry(blob, 0)
    if offset != len(blob):
        raise BadFormat(f"{path}: {len(blob) - offset} trailing bytes")
    return sig
