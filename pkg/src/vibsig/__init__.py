"""Vibration-signature surface recognition.

Extracts noise-robust time-series signatures from audio recorded while a
device vibrates on a surface, and recognizes surfaces by DTW-distance kNN
classification against a database of labeled signatures.
"""

from .audio_io import AudioRecording, load_wav, save_wav
from .dtw import WarpPath, distance_matrix, dtw_distance, dtw_path
from .errors import VibsigError
from .extraction import (
    ExtractionConfig,
    PeakSet,
    VibrationSignature,
    combine_median,
    detect_peaks,
    estimate_f_hat,
    extract_patterns,
    extract_signature,
    max_min_normalize,
    select_windows,
)
from .knn import (
    ClassificationResult,
    EvalReport,
    SignatureDatabase,
    classify,
    cross_validate,
    load_db,
    load_signature,
    save_db,
    save_signature,
    train,
)
from .preprocess import (
    EnvelopeSignal,
    Spectrum,
    bandpass,
    first_difference,
    periodogram,
    preprocess,
    rms_envelope,
)
from .synth import SurfaceModel, SynthTruth, bump_template, corpus, generate, random_template

__version__ = "0.1.0"

__all__ = [
    "AudioRecording",
    "ClassificationResult",
    "EnvelopeSignal",
    "EvalReport",
    "ExtractionConfig",
    "PeakSet",
    "SignatureDatabase",
    "Spectrum",
    "SurfaceModel",
    "SynthTruth",
    "VibrationSignature",
    "VibsigError",
    "WarpPath",
    "bandpass",
    "bump_template",
    "classify",
    "combine_median",
    "corpus",
    "cross_validate",
    "detect_peaks",
    "distance_matrix",
    "dtw_distance",
    "dtw_path",
    "estimate_f_hat",
    "extract_patterns",
    "extract_signature",
    "first_difference",
    "generate",
    "load_db",
    "load_signature",
    "load_wav",
    "max_min_normalize",
    "periodogram",
    "preprocess",
    "random_template",
    "rms_envelope",
    "save_db",
    "save_signature",
    "save_wav",
    "select_windows",
    "train",
]
