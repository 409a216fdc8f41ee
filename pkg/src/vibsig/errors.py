"""Exception types raised across the pipeline."""


class VibsigError(Exception):
    """Base class for all library errors."""


class NotWav(VibsigError):
    """File is not a usable RIFF/WAVE container."""


class UnsupportedEncoding(VibsigError):
    """WAV encoding other than 16-bit PCM mono."""


class TruncatedData(VibsigError):
    """WAV chunk declares more bytes than the file holds."""


class TooShort(VibsigError):
    """Input sequence shorter than the operation requires."""


class InvalidBand(VibsigError):
    """Band-pass edges out of order or outside (0, Nyquist)."""


class DegenerateWindow(VibsigError):
    """Constant analysis window; nothing to normalize."""


class NoSpectralPeak(VibsigError):
    """No periodic content inside the repetition-frequency search band."""


class NoPeaks(VibsigError):
    """Peak detection found nothing that clears the acceptance thresholds."""


class NonConvergence(VibsigError):
    """Window supply exhausted before enough patterns were collected.

    Carries ``patterns_found`` and ``windows_examined`` so callers can report
    how noisy the recording was.
    """

    def __init__(self, patterns_found: int, windows_examined: int):
        super().__init__(
            f"collected {patterns_found} patterns after {windows_examined} "
            "windows; no windows left"
        )
        self.patterns_found = patterns_found
        self.windows_examined = windows_examined


class EmptyInput(VibsigError):
    """Operation needs at least one element."""


class EmptyDatabase(VibsigError):
    """Classification against a database with no entries."""


class MixedSampleRates(VibsigError):
    """Signatures recorded at different sample rates cannot share a database."""


class TooFewSamples(VibsigError):
    """Some class has fewer samples than the requested fold count."""


class BadFoldCount(VibsigError):
    """Cross-validation needs at least 2 folds."""


class BadFormat(VibsigError):
    """Database or signature file is corrupt or truncated."""


class VersionMismatch(VibsigError):
    """Database file written by an incompatible format version."""


class BadModel(VibsigError):
    """Surface model parameters are unusable."""
