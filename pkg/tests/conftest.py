"""Shared fixtures; the synthetic corpora are session-scoped because the
end-to-end acceptance criteria reuse them."""

import numpy as np
import pytest

from vibsig import (
    ExtractionConfig,
    SurfaceModel,
    corpus,
    extract_signature,
    preprocess,
    random_template,
)

SAMPLE_RATE = 44100


def extract_all(recordings, cfg):
    return [
        (label, extract_signature(preprocess(rec, cfg), cfg, label=label))
        for label, rec in recordings
    ]


@pytest.fixture(scope="session")
def default_config():
    return ExtractionConfig()


@pytest.fixture(scope="session")
def five_class_models():
    freqs = [120.0, 170.0, 220.0, 270.0, 320.0]
    return [
        SurfaceModel(
            label=f"surface{i}",
            template=random_template(seed=100 + i),
            f_nominal_hz=f,
            jitter_sigma_hz=3.0,
            noise_sigma=0.05,
        )
        for i, f in enumerate(freqs)
    ]


@pytest.fixture(scope="session")
def five_class_samples(five_class_models, default_config):
    recordings = corpus(five_class_models, per_class=30, duration_s=3.0,
                        sample_rate_hz=SAMPLE_RATE, seed=0)
    return extract_all(recordings, default_config)


@pytest.fixture(scope="session")
def hard_pair_samples(default_config):
    shared = random_template(seed=42)
    models = [
        SurfaceModel(label="slow", template=shared, f_nominal_hz=180.0,
                     jitter_sigma_hz=3.0, noise_sigma=0.05),
        SurfaceModel(label="fast", template=shared, f_nominal_hz=220.0,
                     jitter_sigma_hz=3.0, noise_sigma=0.05),
    ]
    recordings = corpus(models, per_class=30, duration_s=3.0,
                        sample_rate_hz=SAMPLE_RATE, seed=0)
    return extract_all(recordings, default_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
