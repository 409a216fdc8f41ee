"""Vibration-signature extraction.

The extractor walks randomly ordered, disjoint windows of the processed
signal. Per window it max-min normalizes, estimates the pattern repetition
frequency from the periodogram argmax, detects one peak per vibration cycle
with a three-stage filter (prominence, spacing, strength), and slices the
between-peak segments out as candidate patterns. It keeps consuming windows
until enough patterns are banked, then collapses them into one signature by
a pointwise median. The number of windows it had to touch doubles as a
noise indicator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numba import njit

from .errors import (
    DegenerateWindow,
    EmptyInput,
    NonConvergence,
    NoPeaks,
    NoSpectralPeak,
    TooShort,
)
from .preprocess import EnvelopeSignal, periodogram


@dataclass(frozen=True)
class ExtractionConfig:
    """Every tunable of the pipeline, with the shipped defaults.

    ``delta_f_hz`` is the slack on the repetition-frequency estimate used in
    the minimum peak spacing rule; patterns can repeat slightly faster than
    the estimate says, so the spacing floor is sample_rate / (f_hat + slack).
    """

    n_rms: int = 15
    window_len: int = 4800
    m_patterns: int = 100
    minpro: float = 0.65
    delta_f_hz: float = 6.5
    minstr: float = 0.5
    band_low_hz: float = 20.0
    band_high_hz: float = 5500.0
    filter_order: int = 4
    f_search_low_hz: float = 60.0
    f_search_high_hz: float = 400.0
    len_tol_low: float = 0.5
    len_tol_high: float = 1.5
    rng_seed: int = 0
    max_windows: int | None = None
    envelope_first: bool = False

    def __post_init__(self):
        if min(self.n_rms, self.window_len, self.m_patterns, self.filter_order) < 1:
            raise ValueError("counts and orders must be positive")
        if not 0.0 < self.minpro <= 1.0:
            raise ValueError("minpro must be in (0, 1]")
        if self.minstr <= 0.0:
            raise ValueError("minstr must be positive")
        if self.delta_f_hz < 0.0:
            raise ValueError("delta_f_hz must be non-negative")
        if not 0.0 < self.band_low_hz < self.band_high_hz:
            raise ValueError("band edges must satisfy 0 < low < high")
        if not 0.0 < self.f_search_low_hz < self.f_search_high_hz:
            raise ValueError("search band edges must satisfy 0 < low < high")
        if not self.len_tol_low < 1.0 < self.len_tol_high:
            raise ValueError("length tolerance band must bracket 1.0")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if self.max_windows is not None and self.max_windows < 1:
            raise ValueError("max_windows must be positive when set")


@dataclass(frozen=True)
class VibrationSignature:
    """One median-combined pattern representing a surface observation."""

    values: np.ndarray
    sample_rate_hz: int
    f_hat_hz: float
    patterns_used: int
    windows_examined: int
    label: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PeakSet:
    """Accepted peak indices (ascending) within one analysis window."""

    indices: np.ndarray
    prominences: np.ndarray
    window_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "prominences", np.asarray(self.prominences, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.indices)


def select_windows(signal_len: int, window_len: int, seed: int) -> Iterator[int]:
    """Yield the disjoint window start offsets in a seed-determined order.

    The signal is tiled into signal_len // window_len disjoint windows; each
    offset is yielded exactly once (selection without replacement), so
    exhaustion of the iterator means the window supply ran out.
    """
    if signal_len < window_len:
        raise TooShort(f"signal of {signal_len} samples holds no {window_len}-sample window")
    count = signal_len // window_len
    order = np.random.default_rng(seed).permutation(count)
    return (int(idx) * window_len for idx in order)


def max_min_normalize(x) -> np.ndarray:
    """Rescale to min 0, max 1; rejects constant windows."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least 2 samples to normalize")
    lo = x.min()
    hi = x.max()
    if hi <= lo:
        raise DegenerateWindow("constant window")
    return (x - lo) / (hi - lo)


def estimate_f_hat(window, sample_rate_hz: int, cfg: ExtractionConfig) -> float:
    """Estimate the pattern repetition frequency from the periodogram argmax.

    Only bins inside [f_search_low_hz, f_search_high_hz] are considered.
    Raises NoSpectralPeak when the window carries no periodic content there
    (all in-band power below 1e-12 of the total).
    """
    spec = periodogram(window, sample_rate_hz)
    in_band = (spec.freqs_hz >= cfg.f_search_low_hz) & (spec.freqs_hz <= cfg.f_search_high_hz)
    total = float(spec.power.sum())
    if not np.any(in_band) or total <= 0.0:
        raise NoSpectralPeak("no spectral power in the search band")
    masked = np.where(in_band, spec.power, -np.inf)
    k = int(np.argmax(masked))
    if spec.power[k] < 1e-12 * total:
        raise NoSpectralPeak("in-band power is negligible")
    return float(spec.freqs_hz[k])


@njit(cache=True)
def _prominences(x, peaks):
    # Topographic prominence: walk out from the peak on each side until a
    # strictly higher sample or the boundary; the base is the higher of the
    # two interval minima.
    out = np.empty(len(peaks))
    n = len(x)
    for pi in range(len(peaks)):
        p = peaks[pi]
        v = x[p]
        left = v
        i = p - 1
        while i >= 0 and x[i] <= v:
            if x[i] < left:
                left = x[i]
            i -= 1
        right = v
        j = p + 1
        while j < n and x[j] <= v:
            if x[j] < right:
                right = x[j]
            j += 1
        base = left if left > right else right
        out[pi] = v - base
    return out


def detect_peaks(
    window,
    f_hat_hz: float,
    sample_rate_hz: int,
    cfg: ExtractionConfig,
    window_offset: int = 0,
) -> PeakSet:
    """Find one peak per vibration cycle in a max-min normalized window.

    Three stages:
      1. strict local maxima with topographic prominence >= minpro;
      2. minimum spacing of floor(sample_rate / (f_hat + delta_f)) samples,
         enforced greedily in descending peak value order (ties broken by
         lower index) so the tallest peaks win;
      3. drop peaks weaker than minstr times the median surviving peak value.

    Raises NoPeaks when nothing survives; the caller skips the window.
    """
    x = np.asarray(window, dtype=np.float64)
    if f_hat_hz <= 0:
        raise ValueError("f_hat_hz must be positive")
    if len(x) < 3:
        raise NoPeaks("window too short to hold an interior maximum")

    candidates = np.nonzero((x[1:-1] > x[:-2]) & (x[1:-1] > x[2:]))[0] + 1
    if candidates.size == 0:
        raise NoPeaks("no strict local maxima")
    proms = _prominences(x, candidates)
    prominent = proms >= cfg.minpro
    candidates = candidates[prominent]
    proms = proms[prominent]
    if candidates.size == 0:
        raise NoPeaks("no peak clears the prominence threshold")

    min_dist = int(np.floor(sample_rate_hz / (f_hat_hz + cfg.delta_f_hz)))
    order = sorted(range(len(candidates)), key=lambda i: (-x[candidates[i]], candidates[i]))
    kept: list[int] = []
    for i in order:
        idx = int(candidates[i])
        if all(abs(idx - other) >= min_dist for other in kept):
            kept.append(idx)
    kept.sort()

    values = x[kept]
    strong = values >= cfg.minstr * float(np.median(values))
    final = [idx for idx, ok in zip(kept, strong) if ok]
    if not final:
        raise NoPeaks("no peak clears the strength threshold")

    prom_by_index = dict(zip(candidates.tolist(), proms.tolist()))
    return PeakSet(
        indices=np.asarray(final, dtype=np.int64),
        prominences=np.asarray([prom_by_index[i] for i in final]),
        window_offset=window_offset,
    )


def extract_patterns(
    window,
    peaks: PeakSet,
    f_hat_hz: float,
    sample_rate_hz: int,
    cfg: ExtractionConfig,
) -> list[np.ndarray]:
    """Slice the window between consecutive peaks into candidate patterns.

    Each pattern is window[p_i : p_{i+1}] (left-inclusive). Patterns whose
    length falls outside [len_tol_low, len_tol_high] times the nominal cycle
    length sample_rate / f_hat are discarded: they span missed or spurious
    peaks. May return an empty list.
    """
    x = np.asarray(window, dtype=np.float64)
    nominal = sample_rate_hz / f_hat_hz
    lo = cfg.len_tol_low * nominal
    hi = cfg.len_tol_high * nominal
    patterns = []
    idx = peaks.indices
    for a, b in zip(idx[:-1], idx[1:]):
        length = int(b - a)
        if lo <= length <= hi:
            patterns.append(x[a:b].copy())
    return patterns


def combine_median(patterns) -> np.ndarray:
    """Collapse patterns into one by pointwise median.

    The target length is the lower median of the pattern lengths; every
    pattern is linearly resampled to it, then each output point is the lower
    median across patterns. Lower medians keep the result an observed value
    and make even counts deterministic.
    """
    if len(patterns) == 0:
        raise EmptyInput("no patterns to combine")
    lengths = sorted(len(p) for p in patterns)
    target = lengths[(len(lengths) - 1) // 2]
    stack = np.empty((len(patterns), target))
    for row, pattern in enumerate(patterns):
        pattern = np.asarray(pattern, dtype=np.float64)
        if len(pattern) == target:
            stack[row] = pattern
        else:
            stack[row] = np.interp(
                np.linspace(0.0, len(pattern) - 1.0, target),
                np.arange(len(pattern), dtype=np.float64),
                pattern,
            )
    return np.sort(stack, axis=0)[(len(patterns) - 1) // 2]


def extract_signature(
    signal: EnvelopeSignal,
    cfg: ExtractionConfig,
    label: str | None = None,
) -> VibrationSignature:
    """Extract one vibration signature from a processed signal.

    Windows are consumed in the seed-fixed order from select_windows until
    at least cfg.m_patterns patterns are banked. Windows that are constant,
    carry no spectral peak, or yield no acceptable peaks are skipped but
    still counted in windows_examined. The signature's f_hat_hz is the
    median of the estimates from windows that contributed patterns.

    Raises NonConvergence when the window supply (or cfg.max_windows) runs
    out first; the exception carries the pattern and window counts so the
    caller can tell the user how noisy the environment was.
    """
    values = np.asarray(signal.values, dtype=np.float64)
    if len(values) < cfg.window_len:
        raise TooShort(
            f"signal of {len(values)} samples holds no {cfg.window_len}-sample window"
        )

    patterns: list[np.ndarray] = []
    f_hats: list[float] = []
    windows_examined = 0
    for offset in select_windows(len(values), cfg.window_len, cfg.rng_seed):
        windows_examined += 1
        window = values[offset : offset + cfg.window_len]
        try:
            normalized = max_min_normalize(window)
            f_hat = estimate_f_hat(normalized, signal.sample_rate_hz, cfg)
            peaks = detect_peaks(
                normalized, f_hat, signal.sample_rate_hz, cfg, window_offset=offset
            )
            found = extract_patterns(normalized, peaks, f_hat, signal.sample_rate_hz, cfg)
        except (DegenerateWindow, NoSpectralPeak, NoPeaks):
            found = []
        if found:
            patterns.extend(found)
            f_hats.append(f_hat)
        if len(patterns) >= cfg.m_patterns:
            break
        if cfg.max_windows is not None and windows_examined >= cfg.max_windows:
            raise NonConvergence(len(patterns), windows_examined)
    else:
        raise NonConvergence(len(patterns), windows_examined)

    return VibrationSignature(
        values=combine_median(patterns),
        sample_rate_hz=signal.sample_rate_hz,
        f_hat_hz=float(np.median(f_hats)),
        patterns_used=len(patterns),
        windows_examined=windows_examined,
        label=label,
    )
