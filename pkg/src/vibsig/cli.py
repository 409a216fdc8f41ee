"""Command-line front end: extract, train, classify, eval, distmat, synth.

Every command is deterministic given its flags (including --seed): reports
are aggregated in sorted input order regardless of --threads, and JSON/CSV
emission uses stable key ordering.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import synth as synth_mod
from .audio_io import load_wav, save_wav
from .dtw import distance_matrix
from .errors import NonConvergence, VibsigError
from .extraction import ExtractionConfig, extract_signature
from .knn import (
    classify,
    cross_validate,
    load_db,
    load_signature,
    save_db,
    save_signature,
    train,
)
from .preprocess import preprocess

_CONFIG_FIELDS = {f.name: f for f in fields(ExtractionConfig)}

# Parameter override flags shared by the extraction-running commands.
_OVERRIDE_FLAGS = {
    "--window-len": ("window_len", int),
    "--m-patterns": ("m_patterns", int),
    "--minpro": ("minpro", float),
    "--minstr": ("minstr", float),
    "--delta-f": ("delta_f_hz", float),
    "--band-low": ("band_low_hz", float),
    "--band-high": ("band_high_hz", float),
    "--n-rms": ("n_rms", int),
    "--max-windows": ("max_windows", int),
}


def _parse_config_value(name: str, raw: str):
    if name == "max_windows":
        return None if raw.lower() in ("none", "") else int(raw)
    if name == "envelope_first":
        return raw.lower() in ("1", "true", "yes")
    kind = _CONFIG_FIELDS[name].type
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def read_config_file(path) -> dict:
    """Parse key=value lines naming ExtractionConfig fields."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise VibsigError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_FIELDS:
                raise VibsigError(f"{path}:{lineno}: unknown config key {key!r}")
            overrides[key] = _parse_config_value(key, value.strip())
    return overrides


def _build_config(args) -> ExtractionConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for flag, (name, _) in _OVERRIDE_FLAGS.items():
        given = getattr(args, flag.lstrip("-").replace("-", "_"), None)
        if given is not None:
            values[name] = given
    if getattr(args, "seed", None) is not None:
        values["rng_seed"] = args.seed
    return ExtractionConfig(**values)


def _noise_verdict(windows_examined, f_hat_hz, cfg, sample_rate_hz, quiet, moderate):
    cycles_per_window = max(1, int(cfg.window_len * f_hat_hz / sample_rate_hz))
    baseline = max(1, math.ceil(cfg.m_patterns / cycles_per_window))
    ratio = windows_examined / baseline
    if ratio <= quiet:
        return "quiet"
    if ratio <= moderate:
        return "moderate"
    return "noisy"


def _extract_one(path: Path, cfg: ExtractionConfig, args):
    try:
        rec = load_wav(path)
        sig = extract_signature(preprocess(rec, cfg), cfg, label=path.stem)
    except NonConvergence as exc:
        return {
            "path": str(path),
            "ok": False,
            "error": "non-convergence",
            "patterns_found": exc.patterns_found,
            "windows_examined": exc.windows_examined,
        }
    except (VibsigError, OSError, ValueError) as exc:
        return {"path": str(path), "ok": False, "error": str(exc)}
    verdict = _noise_verdict(
        sig.windows_examined, sig.f_hat_hz, cfg, sig.sample_rate_hz,
        args.quiet_ratio, args.moderate_ratio,
    )
    return {
        "path": str(path),
        "ok": True,
        "signature": sig,
        "f_hat_hz": sig.f_hat_hz,
        "patterns_used": sig.patterns_used,
        "windows_examined": sig.windows_examined,
        "verdict": verdict,
    }


def _run_parallel(worker, items, threads):
    if threads <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, items))


def _emit_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def cmd_extract(args) -> int:
    cfg = _build_config(args)
    paths = sorted(Path(p) for p in args.wavs)
    stems = [p.stem for p in paths]
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    results = _run_parallel(lambda p: _extract_one(p, cfg, args), paths, args.threads)
    report = []
    failed = False
    for path, stem, result in zip(paths, stems, results):
        if result["ok"] and stems.count(stem) > 1:
            result = {"path": str(path), "ok": False, "error": f"duplicate stem {stem!r}"}
        if result["ok"]:
            target = (out_dir or path.parent) / f"{stem}.vsig"
            save_signature(result.pop("signature"), target)
            result["signature_file"] = str(target)
        else:
            result.pop("signature", None)
            failed = True
        report.append(result)

    if args.json:
        _emit_json({"command": "extract", "results": report})
    else:
        for item in report:
            if item["ok"]:
                print(
                    f"{item['path']}: f_hat={item['f_hat_hz']:.2f} Hz "
                    f"patterns={item['patterns_used']} "
                    f"windows={item['windows_examined']} [{item['verdict']}] "
                    f"-> {item['signature_file']}"
                )
            else:
                print(f"{item['path']}: FAILED ({item['error']})")
    return 1 if failed else 0


def _parse_labeled_dirs(specs):
    mapping = []
    for spec in specs:
        if "=" not in spec:
            raise VibsigError(f"expected label=dir, got {spec!r}")
        label, _, directory = spec.partition("=")
        mapping.append((label, Path(directory)))
    return sorted(mapping)


def _load_labeled_signatures(mapping, cfg, args):
    jobs = []
    for label, directory in mapping:
        found = sorted(directory.glob("*.vsig")) + sorted(directory.glob("*.wav"))
        if not found:
            raise VibsigError(f"no .vsig or .wav files under {directory}")
        jobs.extend((label, path) for path in found)

    def worker(job):
        label, path = job
        if path.suffix == ".vsig":
            return label, load_signature(path)
        rec = load_wav(path)
        return label, extract_signature(preprocess(rec, cfg), cfg, label=label)

    return _run_parallel(worker, jobs, args.threads)


def cmd_train(args) -> int:
    cfg = _build_config(args)
    samples = _load_labeled_signatures(_parse_labeled_dirs(args.classes), cfg, args)
    db = train(samples, cfg)
    save_db(db, args.out)
    counts = {}
    for label, _ in db.entries:
        counts[label] = counts.get(label, 0) + 1
    if args.json:
        _emit_json({"command": "train", "db": str(args.out), "entries": len(db), "labels": counts})
    else:
        per_label = ", ".join(f"{label}: {n}" for label, n in sorted(counts.items()))
        print(f"{args.out}: {len(db)} entries ({per_label})")
    return 0


def _query_signature(path: Path, db, args):
    if path.suffix == ".vsig":
        return load_signature(path)
    cfg = db.config
    for flag, (name, _) in _OVERRIDE_FLAGS.items():
        given = getattr(args, flag.lstrip("-").replace("-", "_"), None)
        if given is not None and given != getattr(cfg, name):
            print(
                f"warning: --{name.replace('_', '-')}={given} differs from the "
                f"database's {getattr(cfg, name)}; using the database value",
                file=sys.stderr,
            )
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    rec = load_wav(path)
    return extract_signature(preprocess(rec, cfg), cfg, label=path.stem)


def cmd_classify(args) -> int:
    db = load_db(args.db)
    sig = _query_signature(Path(args.query), db, args)
    result = classify(db, sig, k=args.k)
    if args.json:
        _emit_json(
            {
                "command": "classify",
                "predicted_label": result.predicted_label,
                "neighbors": [
                    {"label": label, "distance": dist}
                    for label, dist in zip(result.neighbor_labels, result.neighbor_distances)
                ],
                "votes": result.vote_counts,
            }
        )
    else:
        print(f"predicted: {result.predicted_label}")
        for label, dist in zip(result.neighbor_labels, result.neighbor_distances):
            print(f"  {label}: {dist:.6g}")
    return 0


def cmd_eval(args) -> int:
    cfg = _build_config(args)
    samples = _load_labeled_signatures(_parse_labeled_dirs(args.classes), cfg, args)
    report = cross_validate(samples, folds=args.folds, k=args.k, seed=args.seed or 0, cfg=cfg)
    if args.out_csv:
        with open(args.out_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + list(report.labels))
            for label, row in zip(report.labels, report.confusion):
                writer.writerow([label] + [int(v) for v in row])
    if args.json:
        _emit_json(
            {
                "command": "eval",
                "labels": list(report.labels),
                "confusion": report.confusion.tolist(),
                "tpr": report.per_class_tpr,
                "fpr": report.per_class_fpr,
                "mean_accuracy": report.mean_accuracy,
                "folds": report.folds,
                "undefined_fpr": list(report.undefined_fpr),
            }
        )
    else:
        print(f"mean accuracy: {report.mean_accuracy:.4f} ({report.folds}-fold)")
        for label in report.labels:
            flag = " (fpr undefined)" if label in report.undefined_fpr else ""
            print(
                f"  {label}: tpr={report.per_class_tpr[label]:.4f} "
                f"fpr={report.per_class_fpr[label]:.4f}{flag}"
            )
    return 0


def cmd_distmat(args) -> int:
    sigs = [load_signature(Path(p)) for p in args.signatures]
    labels = [
        sig.label if sig.label else Path(path).stem
        for sig, path in zip(sigs, args.signatures)
    ]
    matrix = distance_matrix(sigs)
    if args.json:
        _emit_json({"command": "distmat", "labels": labels, "matrix": matrix.tolist()})
        return 0
    target = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(target)
        writer.writerow(labels)
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if args.out:
            target.close()
    return 0


def cmd_synth(args) -> int:
    model = synth_mod.load_model(args.model)
    base_seed = args.seed if args.seed is not None else model.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for idx in range(args.count):
        derived = int(np.random.SeedSequence([base_seed, idx]).generate_state(1)[0])
        rec, truth = synth_mod.generate(
            replace(model, seed=derived), args.duration, args.sample_rate
        )
        wav_path = out_dir / f"{model.label}_{idx:03d}.wav"
        truth_path = out_dir / f"{model.label}_{idx:03d}.json"
        save_wav(rec, wav_path)
        with open(truth_path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "label": model.label,
                    "seed": derived,
                    "sample_rate_hz": args.sample_rate,
                    "cycle_starts": truth.cycle_starts.tolist(),
                    "cycle_lengths": truth.cycle_lengths.tolist(),
                    "cycle_freqs_hz": truth.cycle_freqs_hz.tolist(),
                    "template": truth.template.tolist(),
                },
                fh,
                sort_keys=True,
            )
        written.append({"wav": str(wav_path), "truth": str(truth_path)})
    if args.json:
        _emit_json({"command": "synth", "files": written})
    else:
        for item in written:
            print(f"{item['wav']} (+ {item['truth']})")
    return 0


def _add_common(parser, extraction=True):
    parser.add_argument("--seed", type=int, default=None, help="seed for window selection / folds / synthesis")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    parser.add_argument("--threads", type=int, default=1, help="parallel workers for multi-file commands")
    if extraction:
        for flag, (_, kind) in _OVERRIDE_FLAGS.items():
            parser.add_argument(flag, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibsig",
        description="Vibration-signature surface recognition pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract signatures from WAV recordings")
    p.add_argument("wavs", nargs="+", help="PCM16 mono WAV files")
    p.add_argument("--out-dir", default=None,
                   help="where to write .vsig files (default: next to each input)")
    p.add_argument("--quiet-ratio", type=float, default=2.0,
                   help="windows/ideal ratio up to which the verdict is 'quiet'")
    p.add_argument("--moderate-ratio", type=float, default=6.0,
                   help="ratio up to which the verdict is 'moderate'")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="build a signature database from label=dir sets")
    p.add_argument("classes", nargs="+", metavar="label=dir",
                   help="directories of .vsig (or .wav) files per label")
    p.add_argument("--out", required=True, help="database file to write")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify a query WAV or .vsig against a database")
    p.add_argument("query", help="query recording (.wav) or signature (.vsig)")
    p.add_argument("--db", required=True, help="database file from `vibsig train`")
    p.add_argument("--k", type=int, default=5, help="neighbour count (default 5)")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="stratified cross-validation over label=dir sets")
    p.add_argument("classes", nargs="+", metavar="label=dir",
                   help="directories of .vsig (or .wav) files per label")
    p.add_argument("--folds", type=int, default=4)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out-csv", default=None, help="write the confusion matrix here")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distmat", help="pairwise DTW distance matrix as CSV")
    p.add_argument("signatures", nargs="+", help=".vsig files, row order preserved")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_common(p, extraction=False)
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("synth", help="generate synthetic recordings from a model file")
    p.add_argument("--model", required=True, help="key=value surface model file")
    p.add_argument("--count", type=int, default=1, help="recordings to generate")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--duration", type=float, default=3.0, help="seconds per recording")
    p.add_argument("--sample-rate", type=int, default=44100)
    _add_common(p, extraction=False)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (VibsigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
