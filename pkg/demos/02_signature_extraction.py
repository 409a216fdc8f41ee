"""Extract vibration signatures and read the noise indicator.

The extractor consumes randomly ordered windows until it banks 100 patterns.
On a quiet recording a handful of windows is enough; noise and transient
bursts spoil windows, so the windows-examined count climbs. That count is
the user-facing "is my environment too noisy" signal. Run:

    python3 demos/02_signature_extraction.py
"""

import numpy as np

from vibsig import (
    ExtractionConfig,
    SurfaceModel,
    bump_template,
    extract_signature,
    generate,
    preprocess,
)
from vibsig.errors import NonConvergence

FS = 44100
cfg = ExtractionConfig()
template = bump_template(220, bumps=((0.4, 0.45, 1.0), (0.75, 0.1, 0.25)))

print(f"pipeline: {cfg.m_patterns} patterns from {cfg.window_len}-sample windows, "
      f"peak thresholds minpro={cfg.minpro} minstr={cfg.minstr} delta_f={cfg.delta_f_hz} Hz\n")

scenarios = [
    ("quiet room", dict(noise_sigma=0.0, transient_rate_hz=0.0)),
    ("medium noise", dict(noise_sigma=0.1, transient_rate_hz=2.0)),
    ("loud music", dict(noise_sigma=0.25, transient_rate_hz=8.0)),
]

signatures = {}
for name, level in scenarios:
    model = SurfaceModel(label=name, template=template, f_nominal_hz=200.0,
                         jitter_sigma_hz=3.0, seed=7, **level)
    rec, _ = generate(model, 3.0, FS)
    try:
        sig = extract_signature(preprocess(rec, cfg), cfg, label=name)
        signatures[name] = sig
        print(f"{name:>13}: f_hat {sig.f_hat_hz:6.1f} Hz, {sig.patterns_used} patterns "
              f"from {sig.windows_examined} windows, signature of {len(sig)} samples")
    except NonConvergence as err:
        print(f"{name:>13}: did not converge "
              f"({err.patterns_found} patterns after {err.windows_examined} windows)")

quiet = signatures["quiet room"].values
print("\nsignature stability: correlation of each noisy signature against the quiet one")
for name, sig in signatures.items():
    if name == "quiet room":
        continue
    a = quiet - quiet.mean()
    b = np.interp(np.linspace(0, len(sig) - 1, len(quiet)), np.arange(len(sig)), sig.values)
    b = b - b.mean()
    best = max(float(np.dot(a, np.roll(b, s))) for s in range(len(a)))
    best /= np.linalg.norm(a) * np.linalg.norm(b)
    print(f"  {name:>13}: max correlation {best:.3f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    for name, sig in signatures.items():
        ax.plot(sig.values, label=f"{name} ({sig.windows_examined} windows)")
    ax.set_xlabel("sample")
    ax.set_ylabel("amplitude")
    ax.legend()
    fig.suptitle("median-combined signatures under increasing noise")
    fig.savefig("demos/02_signatures.png", dpi=100)
    print("\nwrote demos/02_signatures.png")
except ImportError:
    pass
