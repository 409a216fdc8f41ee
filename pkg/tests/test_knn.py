import numpy as np
import pytest

from helpers import brute_knn_label
from vibsig import (
    ExtractionConfig,
    SignatureDatabase,
    VibrationSignature,
    classify,
    cross_validate,
    load_db,
    load_signature,
    save_db,
    save_signature,
    train,
)
from vibsig.errors import (
    BadFoldCount,
    BadFormat,
    EmptyDatabase,
    EmptyInput,
    MixedSampleRates,
    TooFewSamples,
    VersionMismatch,
)

CFG = ExtractionConfig()


def sig(values, rate=44100, label=None):
    return VibrationSignature(
        values=np.atleast_1d(np.asarray(values, dtype=float)),
        sample_rate_hz=rate,
        f_hat_hz=200.0,
        patterns_used=100,
        windows_examined=5,
        label=label,
    )


def scalar_db(entries):
    """Database of single-sample signatures; DTW distance is then |a - b|."""
    return train([(label, sig(v)) for label, v in entries], CFG)


# -- train ----------------------------------------------------------------------

def test_train_stores_all_entries_in_order():
    samples = [(f"label{i % 2}", sig(i)) for i in range(30)]
    db = train(samples, CFG)
    assert len(db) == 30
    assert [label for label, _ in db.entries] == [f"label{i % 2}" for i in range(30)]
    assert all(s.label == label for label, s in db.entries)


def test_train_single_entry():
    db = train([("only", sig(1.0))], CFG)
    assert len(db) == 1
    assert db.labels == ("only",)


def test_train_rejects_mixed_rates():
    with pytest.raises(MixedSampleRates):
        train([("a", sig(1.0, rate=44100)), ("b", sig(2.0, rate=48000))], CFG)


def test_train_rejects_empty():
    with pytest.raises(EmptyInput):
        train([], CFG)
    with pytest.raises(ValueError):
        train([("", sig(1.0))], CFG)


# -- classify ---------------------------------------------------------------------

def test_classify_identity_query():
    db = scalar_db([("A", 0.0), ("B", 5.0)])
    result = classify(db, sig(0.0), k=1)
    assert result.predicted_label == "A"
    assert result.neighbor_distances == (0.0,)
    assert result.neighbor_labels == ("A",)


def test_classify_majority_three_against_two():
    db = scalar_db([("A", 1.0), ("A", 2.0), ("A", 3.0), ("B", 1.5), ("B", 2.5)])
    result = classify(db, sig(0.0), k=5)
    assert result.predicted_label == "A"
    assert result.vote_counts == {"A": 3, "B": 2}
    assert result.neighbor_labels == ("A", "B", "A", "B", "A")
    assert result.neighbor_distances == (1.0, 1.5, 2.0, 2.5, 3.0)


def test_classify_vote_tie_broken_by_summed_distance():
    db = scalar_db([("A", 1.0), ("A", 2.0), ("B", 1.5), ("B", 2.5)])
    assert classify(db, sig(0.0), k=4).predicted_label == "A"  # sums 3 vs 4
    db = scalar_db([("A", 1.5), ("A", 2.5), ("B", 1.0), ("B", 2.0)])
    assert classify(db, sig(0.0), k=4).predicted_label == "B"  # sums 4 vs 3


def test_classify_full_tie_broken_lexicographically():
    db = scalar_db([("B", 1.0), ("A", 1.0)])
    result = classify(db, sig(0.0), k=2)
    assert result.predicted_label == "A"
    assert result.neighbor_labels == ("A", "B")  # equal distance: label order


def test_classify_k_larger_than_database():
    db = scalar_db([("A", 1.0), ("B", 2.0)])
    result = classify(db, sig(0.0), k=10)
    assert len(result.neighbor_labels) == 2


def test_classify_entry_order_is_irrelevant(rng):
    entries = [("A", 1.0), ("B", 1.5), ("A", 2.0), ("C", 0.5), ("B", 3.0)]
    base = classify(scalar_db(entries), sig(0.0), k=3)
    for _ in range(10):
        rng.shuffle(entries)
        shuffled = classify(scalar_db(entries), sig(0.0), k=3)
        assert shuffled == base


def test_classify_k1_is_nearest_neighbor(rng):
    entries = [(f"label{i}", float(v)) for i, v in enumerate(rng.normal(size=20))]
    db = scalar_db(entries)
    for _ in range(20):
        q = float(rng.normal())
        expected = min(entries, key=lambda e: (abs(e[1] - q), e[0]))[0]
        assert classify(db, sig(q), k=1).predicted_label == expected


def test_classify_duplicate_of_query_wins_at_k1(rng):
    values = rng.normal(size=40)
    db = train(
        [("other", sig(rng.normal(size=40))), ("target", sig(values))], CFG
    )
    assert classify(db, sig(values), k=1).predicted_label == "target"


def test_classify_matches_brute_force_on_mixed_db(rng):
    entries = [
        (f"label{i % 4}", sig(rng.normal(size=int(rng.integers(5, 25)))))
        for i in range(24)
    ]
    db = train(entries, CFG)
    for _ in range(15):
        q = sig(rng.normal(size=int(rng.integers(5, 25))))
        for k in (1, 3, 5):
            assert classify(db, q, k=k).predicted_label == brute_knn_label(
                db.entries, q.values, k
            )


def test_classify_empty_database():
    empty = SignatureDatabase(entries=(), config=CFG)
    with pytest.raises(EmptyDatabase):
        classify(empty, sig(0.0), k=1)
    db = scalar_db([("A", 1.0)])
    with pytest.raises(ValueError):
        classify(db, sig(0.0), k=0)


# -- cross_validate ------------------------------------------------------------------

def separable_samples():
    lows = [("low", sig(v)) for v in np.linspace(0.0, 0.5, 6)]
    highs = [("high", sig(v)) for v in np.linspace(10.0, 10.5, 6)]
    return lows + highs


def test_cross_validate_separable_corpus():
    report = cross_validate(separable_samples(), folds=2, k=3, seed=0, cfg=CFG)
    assert report.mean_accuracy == 1.0
    np.testing.assert_array_equal(report.confusion, [[6, 0], [0, 6]])
    assert report.per_class_tpr == {"high": 1.0, "low": 1.0}
    assert report.per_class_fpr == {"high": 0.0, "low": 0.0}
    assert report.undefined_fpr == ()


def test_cross_validate_single_class_flags_fpr():
    samples = [("solo", sig(v)) for v in np.linspace(0, 1, 6)]
    report = cross_validate(samples, folds=2, k=1, seed=0, cfg=CFG)
    assert report.per_class_tpr == {"solo": 1.0}
    assert report.per_class_fpr == {"solo": 0.0}
    assert report.undefined_fpr == ("solo",)


def test_cross_validate_determinism():
    a = cross_validate(separable_samples(), folds=3, k=3, seed=7, cfg=CFG)
    b = cross_validate(separable_samples(), folds=3, k=3, seed=7, cfg=CFG)
    assert np.array_equal(a.confusion, b.confusion)
    assert a.labels == b.labels
    assert a.per_class_tpr == b.per_class_tpr
    assert a.per_class_fpr == b.per_class_fpr
    assert a.mean_accuracy == b.mean_accuracy


def test_cross_validate_confusion_consistency(rng):
    samples = [
        (f"label{i % 3}", sig(rng.normal(size=8) + (i % 3) * 1.5)) for i in range(18)
    ]
    report = cross_validate(samples, folds=3, k=3, seed=1, cfg=CFG)
    assert report.confusion.sum() == 18
    for i, label in enumerate(report.labels):
        assert report.confusion[i].sum() == 6  # stratified: every sample tested once
        tp = report.confusion[i, i]
        fn = report.confusion[i].sum() - tp
        fp = report.confusion[:, i].sum() - tp
        tn = report.confusion.sum() - tp - fn - fp
        assert report.per_class_tpr[label] == pytest.approx(tp / (tp + fn))
        assert report.per_class_fpr[label] == pytest.approx(fp / (fp + tn))
    assert report.mean_accuracy == pytest.approx(
        np.trace(report.confusion) / report.confusion.sum()
    )


def test_cross_validate_errors():
    with pytest.raises(BadFoldCount):
        cross_validate(separable_samples(), folds=1, cfg=CFG)
    with pytest.raises(TooFewSamples):
        cross_validate(separable_samples(), folds=7, cfg=CFG)
    with pytest.raises(EmptyInput):
        cross_validate([], folds=2, cfg=CFG)


# -- persistence -----------------------------------------------------------------------

def rich_db(rng):
    samples = []
    for i in range(30):
        samples.append(
            (
                f"surface{i % 2}",
                VibrationSignature(
                    values=rng.normal(size=int(rng.integers(180, 260))),
                    sample_rate_hz=44100,
                    f_hat_hz=float(rng.uniform(150, 250)),
                    patterns_used=int(rng.integers(100, 140)),
                    windows_examined=int(rng.integers(5, 30)),
                ),
            )
        )
    return train(samples, ExtractionConfig(rng_seed=11, max_windows=50, minpro=0.7))


def test_db_round_trip_is_bit_exact(tmp_path, rng):
    db = rich_db(rng)
    path = tmp_path / "surfaces.vsdb"
    save_db(db, path)
    back = load_db(path)
    assert back.version == db.version
    assert back.config == db.config
    assert len(back) == len(db)
    for (l1, s1), (l2, s2) in zip(db.entries, back.entries):
        assert l1 == l2
        assert s1.label == s2.label
        assert s1.sample_rate_hz == s2.sample_rate_hz
        assert s1.f_hat_hz == s2.f_hat_hz  # bit-exact float
        assert s1.patterns_used == s2.patterns_used
        assert s1.windows_examined == s2.windows_examined
        assert np.array_equal(s1.values, s2.values)


def test_db_rejects_truncation(tmp_path, rng):
    db = rich_db(rng)
    path = tmp_path / "surfaces.vsdb"
    save_db(db, path)
    blob = path.read_bytes()
    for cut in (3, 7, 40, len(blob) // 2, len(blob) - 5):
        bad = tmp_path / f"cut{cut}.vsdb"
        bad.write_bytes(blob[:cut])
        with pytest.raises(BadFormat):
            load_db(bad)


def test_db_rejects_trailing_garbage(tmp_path, rng):
    db = rich_db(rng)
    path = tmp_path / "garbage.vsdb"
    save_db(db, path)
    path.write_bytes(path.read_bytes() + b"extra")
    with pytest.raises(BadFormat):
        load_db(path)


def test_db_rejects_foreign_version(tmp_path, rng):
    import struct

    db = rich_db(rng)
    path = tmp_path / "surfaces.vsdb"
    save_db(db, path)
    blob = bytearray(path.read_bytes())
    blob[4:8] = struct.pack("<I", 999)
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionMismatch):
        load_db(path)


def test_db_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bogus.vsdb"
    path.write_bytes(b"WXYZ" + b"\x00" * 64)
    with pytest.raises(BadFormat):
        load_db(path)


def test_signature_file_round_trip(tmp_path, rng):
    original = VibrationSignature(
        values=rng.normal(size=220),
        sample_rate_hz=44100,
        f_hat_hz=202.125,
        patterns_used=104,
        windows_examined=5,
        label="kitchen",
    )
    path = tmp_path / "kitchen.vsig"
    save_signature(original, path)
    back = load_signature(path)
    assert back.label == "kitchen"
    assert back.f_hat_hz == original.f_hat_hz
    assert np.array_equal(back.values, original.values)

    unlabeled = VibrationSignature(
        values=np.ones(3), sample_rate_hz=44100, f_hat_hz=1.0,
        patterns_used=1, windows_examined=1,
    )
    save_signature(unlabeled, path)
    assert load_signature(path).label is None


def test_signature_file_rejects_truncation(tmp_path, rng):
    path = tmp_path / "sig.vsig"
    save_signature(sig(rng.normal(size=50)), path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 9])
    with pytest.raises(BadFormat):
        load_signature(path)
