"""Synthetic vibration recordings with known ground truth.

A surface is modeled by the envelope-domain shape of one vibration cycle
(the template) repeating at a per-cycle jittered frequency. The generator
lays the resampled template instances end to end, adds white noise and
Poisson-timed transient bursts, modulates the train onto an alternating
+1/-1 carrier, and integrates. First-differencing the emitted recording
returns the modulated train exactly, and its RMS envelope is the template
train again, so every pipeline stage can be checked against exact cycle
boundaries without hardware.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio_io import AudioRecording
from .errors import BadModel

_PEAK_TARGET = 0.9  # emitted recordings are scaled to this absolute peak


@dataclass(frozen=True)
class SurfaceModel:
    """One synthetic surface: cycle template and its repetition statistics.

    ``jitter_sigma_hz`` is the per-cycle frequency jitter (truncated to two
    standard deviations so cycle lengths stay bounded); ``noise_sigma`` is
    white-noise amplitude relative to the template peak; ``transient_rate_hz``
    is the mean rate of short loud bursts.
    """

    label: str
    template: np.ndarray
    f_nominal_hz: float
    jitter_sigma_hz: float = 0.0
    noise_sigma: float = 0.0
    transient_rate_hz: float = 0.0
    seed: int = 0

    def __post_init__(self):
        template = np.asarray(self.template, dtype=np.float64)
        if template.ndim != 1 or len(template) < 2:
            raise BadModel("template must hold at least 2 samples")
        if template.max() <= template.min():
            raise BadModel("template must not be constant")
        if self.f_nominal_hz <= 0:
            raise BadModel("f_nominal_hz must be positive")
        if self.jitter_sigma_hz < 0 or self.noise_sigma < 0 or self.transient_rate_hz < 0:
            raise BadModel("jitter, noise and transient rate must be non-negative")
        if self.f_nominal_hz <= 2 * self.jitter_sigma_hz:
            raise BadModel("f_nominal_hz must exceed twice the jitter sigma")
        template.setflags(write=False)
        object.__setattr__(self, "template", template)


@dataclass(frozen=True)
class SynthTruth:
    """Exact generation record: cycle boundaries and the clean template.

    Indices refer to the post-difference domain, i.e. positions in
    first_difference(recording.samples).
    """

    cycle_starts: np.ndarray
    cycle_lengths: np.ndarray
    cycle_freqs_hz: np.ndarray
    template: np.ndarray


def _truncated_normal(rng, sigma, size):
    # Rejection-sampled N(0, sigma) truncated at +/- 2 sigma.
    if sigma == 0.0:
        return np.zeros(size)
    out = rng.normal(0.0, sigma, size)
    bad = np.abs(out) > 2 * sigma
    while np.any(bad):
        out[bad] = rng.normal(0.0, sigma, int(bad.sum()))
        bad = np.abs(out) > 2 * sigma
    return out


def _resample(template, length):
    return np.interp(
        np.linspace(0.0, len(template) - 1.0, length),
        np.arange(len(template), dtype=np.float64),
        template,
    )


def generate(
    model: SurfaceModel, duration_s: float, sample_rate_hz: int = 44100
) -> tuple[AudioRecording, SynthTruth]:
    """Emit one recording of the model plus its exact generation record.

    Deterministic in ``model.seed``. The recording is centered and scaled to
    a 0.9 absolute peak; the pipeline is amplitude-invariant so the scale
    does not affect extraction.
    """
    if duration_s <= 0:
        raise BadModel("duration must be positive")
    rng = np.random.default_rng(model.seed)
    n_total = int(round(duration_s * sample_rate_hz))

    starts = []
    lengths = []
    train = np.zeros(n_total)
    pos = 0
    while pos < n_total:
        f_cycle = model.f_nominal_hz + _truncated_normal(rng, model.jitter_sigma_hz, 1)[0]
        cycle_len = max(2, int(round(sample_rate_hz / f_cycle)))
        instance = _resample(model.template, cycle_len)
        end = min(pos + cycle_len, n_total)
        train[pos:end] = instance[: end - pos]
        starts.append(pos)
        lengths.append(cycle_len)
        pos += cycle_len

    peak = float(np.max(np.abs(model.template)))
    if model.noise_sigma > 0:
        train = train + model.noise_sigma * peak * rng.standard_normal(n_total)
    n_bursts = rng.poisson(model.transient_rate_hz * duration_s)
    for _ in range(n_bursts):
        burst_len = int(rng.integers(40, 160))
        at = int(rng.integers(0, n_total))
        amp = peak * rng.uniform(2.0, 5.0)
        burst = amp * np.hanning(burst_len)
        stop = min(at + burst_len, n_total)
        train[at:stop] += burst[: stop - at]

    # Alternating carrier keeps the integral bounded while the RMS envelope
    # of the difference recovers the train (carrier**2 == 1).
    carrier = np.where(np.arange(n_total) % 2 == 0, 1.0, -1.0)
    raw = np.concatenate(([0.0], np.cumsum(train * carrier)))
    raw -= raw.mean()
    raw *= _PEAK_TARGET / np.max(np.abs(raw))

    lengths = np.asarray(lengths, dtype=np.int64)
    truth = SynthTruth(
        cycle_starts=np.asarray(starts, dtype=np.int64),
        cycle_lengths=lengths,
        cycle_freqs_hz=sample_rate_hz / lengths.astype(np.float64),
        template=model.template.copy(),
    )
    return AudioRecording(raw, sample_rate_hz, source_label=model.label), truth


def corpus(
    models,
    per_class: int,
    duration_s: float,
    sample_rate_hz: int = 44100,
    seed: int = 0,
) -> list[tuple[str, AudioRecording]]:
    """Generate per_class recordings per model with derived per-item seeds."""
    models = list(models)
    labels = [m.label for m in models]
    if len(models) < 2 or len(set(labels)) != len(labels):
        raise BadModel("need at least 2 models with distinct labels")
    out = []
    for class_idx, model in enumerate(models):
        for rec_idx in range(per_class):
            derived = int(
                np.random.SeedSequence([seed, class_idx, rec_idx]).generate_state(1)[0]
            )
            rec, _ = generate(replace(model, seed=derived), duration_s, sample_rate_hz)
            out.append((model.label, rec))
    return out


def bump_template(length: int = 220, bumps=((0.45, 0.4, 1.0),), floor: float = 0.02) -> np.ndarray:
    """Build a cycle template as a sum of raised-cosine bumps.

    Each bump is (center, width, height) in fractions of the cycle (height
    absolute). A small floor keeps the envelope strictly positive.
    """
    t = np.arange(length) / length
    out = np.full(length, floor)
    for center, width, height in bumps:
        phase = (t - center) / width
        mask = np.abs(phase) <= 0.5
        out[mask] += height * 0.5 * (1.0 + np.cos(2.0 * np.pi * phase[mask]))
    return out


def random_template(seed: int, length: int = 220, n_minor: int = 2) -> np.ndarray:
    """Draw a distinct template: one dominant broad bump plus minor ones.

    Redraws until the cycle's fundamental Fourier coefficient beats every
    harmonic by 1.5x; repetition-frequency estimation reads the periodogram
    argmax, so a harmonic-dominant shape would not repeat at the frequency
    the estimator reports.
    """
    rng = np.random.default_rng(seed)
    while True:
        bumps = [(rng.uniform(0.3, 0.6), rng.uniform(0.35, 0.5), 1.0)]
        for _ in range(n_minor):
            bumps.append(
                (rng.uniform(0.05, 0.95), rng.uniform(0.04, 0.12), rng.uniform(0.1, 0.3))
            )
        template = bump_template(length, bumps)
        coeffs = np.abs(np.fft.rfft(template - template.mean()))
        if coeffs[1] >= 1.5 * coeffs[2:].max():
            return template


def load_model(path) -> SurfaceModel:
    """Read a surface model from a key=value file.

    Keys are the SurfaceModel field names; ``template`` is a comma-separated
    float list. Lines starting with '#' and blank lines are ignored.
    """
    fields: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise BadModel(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    try:
        return SurfaceModel(
            label=fields["label"],
            template=np.array([float(v) for v in fields["template"].split(",")]),
            f_nominal_hz=float(fields["f_nominal_hz"]),
            jitter_sigma_hz=float(fields.get("jitter_sigma_hz", 0.0)),
            noise_sigma=float(fields.get("noise_sigma", 0.0)),
            transient_rate_hz=float(fields.get("transient_rate_hz", 0.0)),
            seed=int(fields.get("seed", 0)),
        )
    except KeyError as exc:
        raise BadModel(f"{path}: missing required key {exc}") from None
    except ValueError as exc:
        raise BadModel(f"{path}: {exc}") from None


def save_model(model: SurfaceModel, path) -> None:
    """Write a surface model in the key=value format load_model reads."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"label = {model.label}\n")
        fh.write(f"template = {','.join(repr(float(v)) for v in model.template)}\n")
        fh.write(f"f_nominal_hz = {model.f_nominal_hz!r}\n")
        fh.write(f"jitter_sigma_hz = {model.jitter_sigma_hz!r}\n")
        fh.write(f"noise_sigma = {model.noise_sigma!r}\n")
        fh.write(f"transient_rate_hz = {model.transient_rate_hz!r}\n")
        fh.write(f"seed = {model.seed}\n")
