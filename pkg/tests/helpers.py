"""Independent oracles and small builders shared by the test suite.

Everything here is deliberately implemented without reusing the library's
optimized code paths, so the tests compare two independent routes.
"""

import numpy as np

from vibsig import dtw_distance


def brute_force_dtw(a, b):
    """Exhaustive enumeration of every monotone warp path; returns min cost.

    Feasible only for short sequences (len <= ~8).
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    n, m = len(a), len(b)
    best = [float("inf")]

    def walk(i, j, acc):
        acc = acc + abs(a[i] - b[j])
        if i == n - 1 and j == m - 1:
            if acc < best[0]:
                best[0] = acc
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc)
        if i + 1 < n:
            walk(i + 1, j, acc)
        if j + 1 < m:
            walk(i, j + 1, acc)

    walk(0, 0, 0.0)
    return best[0]


def sliding_rms(x, n):
    """Loop-based trailing RMS, the direct-formula oracle."""
    x = np.asarray(x, dtype=float)
    out = np.empty(len(x) - n + 1)
    for i in range(len(out)):
        out[i] = np.sqrt(np.mean(x[i : i + n] ** 2))
    return out


def cyclic_ncc(a, b):
    """Max Pearson correlation over circular shifts, after resampling b to len(a).

    Scale- and offset-invariant, so it compares pattern shapes regardless of
    normalization or the band-pass DC removal.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(b) != len(a):
        b = np.interp(np.linspace(0.0, len(b) - 1.0, len(a)), np.arange(len(b)), b)
    a = (a - a.mean()) / (a.std() + 1e-300)
    b = (b - b.mean()) / (b.std() + 1e-300)
    return max(float(np.dot(a, np.roll(b, s))) / len(a) for s in range(len(a)))


def envelope_reference(template, n_rms, cycle_len=None):
    """Envelope-domain shape of one template cycle: tile three cycles, take
    the trailing RMS with an explicit loop, cut the middle cycle."""
    template = np.asarray(template, dtype=float)
    if cycle_len is not None and cycle_len != len(template):
        template = np.interp(
            np.linspace(0.0, len(template) - 1.0, cycle_len),
            np.arange(len(template)),
            template,
        )
    tiled = np.tile(template, 3)
    env = sliding_rms(tiled, n_rms)
    return env[len(template) : 2 * len(template)]


def brute_knn_label(entries, query_values, k):
    """Independent kNN: full sort of every distance, recount votes, same
    tie ladder (votes, then summed distance, then lexicographic label)."""
    scored = sorted(
        ((float(dtw_distance(query_values, sig.values)), label) for label, sig in entries),
        key=lambda t: (t[0], t[1]),
    )
    top = scored[: min(k, len(scored))]
    counts = {}
    for _, label in top:
        counts[label] = counts.get(label, 0) + 1
    best = max(counts.values())
    tied = sorted(label for label, c in counts.items() if c == best)
    if len(tied) > 1:
        sums = {label: sum(d for d, l in top if l == label) for label in tied}
        floor = min(sums.values())
        tied = sorted(label for label in tied if sums[label] == floor)
    return tied[0]


def pulse_train(length, period, first=10, amplitude=1.0):
    """Zero signal with single-sample pulses every `period` samples."""
    x = np.zeros(length)
    positions = np.arange(first, length, period)
    x[positions] = amplitude
    return x, positions
