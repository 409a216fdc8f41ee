"""Raw recording to processed envelope signal.

The working signal downstream of this module is: first-order difference of
the recording, RMS envelope over a short window, then a zero-phase
Butterworth band-pass. Differencing kills constant background, the envelope
averages out high-frequency noise, and the band-pass trims what is left
above the vibration band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio_io import AudioRecording
from .errors import InvalidBand, TooShort


@dataclass(frozen=True)
class EnvelopeSignal:
    """Processed time series plus a record of the steps that produced it."""

    values: np.ndarray
    sample_rate_hz: int
    provenance: dict

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum with bin-center frequencies."""

    freqs_hz: np.ndarray
    power: np.ndarray
    resolution_hz: float


def first_difference(x) -> np.ndarray:
    """out[i] = x[i+1] - x[i]; drops any additive constant."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise TooShort("need at least 2 samples to difference")
    return np.diff(x)


def rms_envelope(x, n: int) -> np.ndarray:
    """Trailing-window RMS: out[i] = sqrt(mean(x[i:i+n]**2)).

    Output length is len(x) - n + 1. Depends on x**2 only, so it is
    invariant to sign flips of the input.
    """
    if n < 1:
        raise ValueError("window length must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    if len(x) < n:
        raise TooShort(f"need at least {n} samples for the RMS window")
    mean_sq = np.convolve(x * x, np.full(n, 1.0 / n), mode="valid")
    return np.sqrt(np.maximum(mean_sq, 0.0))


def bandpass(x, sample_rate_hz: int, low_hz: float, high_hz: float, order: int = 4) -> np.ndarray:
    """Zero-phase Butterworth band-pass (forward then reversed pass).

    Zero-phase filtering keeps peak positions where they are, which the
    extractor depends on. Output length equals input length.
    """
    if not 0 < low_hz < high_hz < sample_rate_hz / 2:
        raise InvalidBand(
            f"band [{low_hz}, {high_hz}] Hz must satisfy "
            f"0 < low < high < {sample_rate_hz / 2} Hz"
        )
    if order < 1:
        raise ValueError("filter order must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    sos = sps.butter(order, [low_hz, high_hz], btype="bandpass", fs=sample_rate_hz, output="sos")
    min_len = 3 * (2 * sos.shape[0] + 1)
    if len(x) <= min_len:
        raise TooShort(f"need more than {min_len} samples for the filter warm-up")
    # Pad on the scale of the slowest pole (the low edge) so edge transients
    # are absorbed by the reflection instead of leaking into the output.
    padlen = min(len(x) - 1, max(min_len, int(3 * sample_rate_hz / low_hz)))
    return sps.sosfiltfilt(sos, x, padlen=padlen)


def preprocess(rec: AudioRecording, cfg) -> EnvelopeSignal:
    """Run the full preprocessing chain on a recording.

    Default order is difference -> RMS envelope -> band-pass; setting
    ``cfg.envelope_first`` swaps the first two steps for experimentation.
    Output length is len(rec) - 1 - (n_rms - 1) either way.
    """
    if cfg.envelope_first:
        steps = ("rms_envelope", "first_difference", "bandpass")
        x = first_difference(rms_envelope(rec.samples, cfg.n_rms))
    else:
        steps = ("first_difference", "rms_envelope", "bandpass")
        x = rms_envelope(first_difference(rec.samples), cfg.n_rms)
    x = bandpass(x, rec.sample_rate_hz, cfg.band_low_hz, cfg.band_high_hz, cfg.filter_order)
    provenance = {
        "steps": steps,
        "n_rms": cfg.n_rms,
        "band_low_hz": cfg.band_low_hz,
        "band_high_hz": cfg.band_high_hz,
        "filter_order": cfg.filter_order,
        "signed": True,  # band-pass removes the envelope's non-negativity
    }
    return EnvelopeSignal(x, rec.sample_rate_hz, provenance)


def periodogram(x, sample_rate_hz: int) -> Spectrum:
    """One-sided periodogram: power[k] = |DFT(x - mean(x))[k]|^2 / len(x).

    The mean is removed so the DC bin cannot mask the vibration peak.
    Bin centers are k * sample_rate_hz / len(x) for k in 0..len(x)//2.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise TooShort("need at least 2 samples for a periodogram")
    centered = x - x.mean()
    spectrum = np.fft.rfft(centered)
    power = (spectrum.real**2 + spectrum.imag**2) / len(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / sample_rate_hz)
    return Spectrum(freqs, power, sample_rate_hz / len(x))
