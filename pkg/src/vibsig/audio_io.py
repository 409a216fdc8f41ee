"""Reading and writing the PCM16 mono WAV files the pipeline works on."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import NotWav, TruncatedData, UnsupportedEncoding

#: Normalization divisor: int16 full scale, symmetric-range convention.
PCM16_FULL_SCALE = 32768.0


@dataclass(frozen=True)
class AudioRecording:
    """Immutable mono sample buffer with its sample rate.

    Samples are float64 in [-1.0, 1.0]; the pipeline default rate is 44100 Hz.
    """

    samples: np.ndarray
    sample_rate_hz: int
    source_label: str | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D buffer")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not np.all(np.isfinite(samples)) or np.max(np.abs(samples)) > 1.0:
            raise ValueError("samples must be finite and lie in [-1.0, 1.0]")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def load_wav(path) -> AudioRecording:
    """Load a RIFF/WAVE file holding 16-bit PCM mono audio.

    Integer samples are mapped to [-1.0, 1.0] by dividing by 32768.

    Raises:
        NotWav: not a RIFF/WAVE container, or fmt/data chunks missing.
        UnsupportedEncoding: non-PCM data, more than one channel, or a
            sample width other than 16 bits.
        TruncatedData: the data chunk declares more bytes than the file holds.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise NotWav(f"{path}: not a RIFF/WAVE container")

    fmt_chunk = None
    data_chunk = None
    offset = 12
    while offset + 8 <= len(blob):
        chunk_id = blob[offset : offset + 4]
        (declared,) = struct.unpack_from("<I", blob, offset + 4)
        body = blob[offset + 8 : offset + 8 + declared]
        if chunk_id == b"fmt " and fmt_chunk is None:
            fmt_chunk = body
        elif chunk_id == b"data" and data_chunk is None:
            if len(body) < declared:
                raise TruncatedData(
                    f"{path}: data chunk declares {declared} bytes, "
                    f"file holds {len(body)}"
                )
            data_chunk = body
        offset += 8 + declared + (declared & 1)  # chunks are word-aligned

    if fmt_chunk is None or data_chunk is None:
        raise NotWav(f"{path}: missing fmt or data chunk")
    if len(fmt_chunk) < 16:
        raise NotWav(f"{path}: fmt chunk too short")

    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from(
        "<HHIIHH", fmt_chunk, 0
    )
    if audio_format != 1:
        raise UnsupportedEncoding(
            f"{path}: only PCM is supported (format tag {audio_format})"
        )
    if channels != 1:
        raise UnsupportedEncoding(f"{path}: only mono is supported ({channels} channels)")
    if bits != 16:
        raise UnsupportedEncoding(f"{path}: only 16-bit samples are supported ({bits}-bit)")
    if len(data_chunk) % 2:
        raise TruncatedData(f"{path}: data chunk is not whole 16-bit samples")
    if not data_chunk:
        raise NotWav(f"{path}: data chunk holds no samples")

    raw = np.frombuffer(data_chunk, dtype="<i2")
    return AudioRecording(
        raw.astype(np.float64) / PCM16_FULL_SCALE,
        int(sample_rate),
        source_label=str(path),
    )


def save_wav(rec: AudioRecording, path) -> None:
    """Write a recording as a canonical PCM16 mono WAV.

    Quantization is one rounding step to int16, so a load/save/load cycle is
    sample-identical and a fresh save is accurate to 1/32768 per sample.
    """
    quantized = np.clip(
        np.rint(rec.samples * PCM16_FULL_SCALE), -32768, 32767
    ).astype("<i2")
    data = quantized.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, rec.sample_rate_hz, rec.sample_rate_hz * 2, 2, 16
    )
    with open(path, "wb") as fh:
        fh.write(header + fmt + b"data" + struct.pack("<I", len(data)) + data)
