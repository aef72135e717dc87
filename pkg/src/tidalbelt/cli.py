"""Command-line interface: reproducible batch runs over signal/subject files.

Commands: synth, extract, correlate, fit, detect, stage.  Every command
writes a manifest next to its output echoing all parameters, and rerunning
with the same parameters reproduces analytical outputs byte for byte.

Exit codes: 0 success (warnings allowed), 2 fatal input problem (missing or
malformed files, bad flags, insufficient data), 3 analysis failure
(singular design, degenerate training data, failed cross-validation fold).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .classify import (
    KNN_SCALINGS,
    ObstructionLabel,
    SeverityStage,
    knn_fit,
    knn_predict,
    label_obstruction,
    severity_fit,
    severity_stage,
)
from .errors import (
    DegenerateInputError,
    DegenerateTrainingError,
    FoldFailureError,
    InsufficientDataError,
    InvalidInputError,
    InvalidLabelError,
    InvalidParameterError,
    MissingFeatureError,
    SingularDesignError,
    TidalbeltError,
)
from .evaluation import confusion, loocv, metrics, report_to_dict
from .features import TidalFeatures, extract_features
from .io import (
    FeatureRow,
    RunManifest,
    read_features_csv,
    read_signal_csv,
    read_subjects_csv,
    write_features_csv,
    write_json,
    write_manifest,
    write_signal_csv,
    write_subjects_csv,
)
from .respsignal import detrend, segment_breaths, select_clean_region
from .stats import ols_fit, pearson
from .synthgen import generate_cohort

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ANALYSIS = 3

_INPUT_ERRORS = (
    InvalidParameterError,
    InvalidInputError,
    InsufficientDataError,
    MissingFeatureError,
    FileNotFoundError,
)
_ANALYSIS_ERRORS = (
    SingularDesignError,
    DegenerateTrainingError,
    DegenerateInputError,
    InvalidLabelError,
    FoldFailureError,
)

FIT_TARGETS = ("fev1_fvc", "fev1_l", "fvc_l", "fev1_pct_pred")
CORRELATE_TARGETS = ("fev1_fvc", "fev1_l", "fvc_l")
FEATURE_NAMES = ("fit", "rr", "tv")

FINE_CLASSES = tuple(s.value for s in SeverityStage)
COARSE_CLASSES = ("MildModerate", "SevereVerySevere")
DETECT_CLASSES = (
    ObstructionLabel.OBSTRUCTED.value,
    ObstructionLabel.NORMAL.value,
)


def _warn(msg: str):
    print(f"warning: {msg}", file=sys.stderr)


def _join(
    feature_rows: list[FeatureRow], records
) -> list[tuple[FeatureRow, object]]:
    """Inner join on subject_id, sorted by subject_id; warn on leftovers."""
    by_id = {r.subject_id: r for r in records}
    feat_ids = {f.subject_id for f in feature_rows}
    joined = []
    for f in sorted(feature_rows, key=lambda r: r.subject_id):
        rec = by_id.get(f.subject_id)
        if rec is None:
            _warn(f"subject {f.subject_id!r} has features but no subject row")
            continue
        joined.append((f, rec))
    for sid in sorted(by_id.keys() - feat_ids):
        _warn(f"subject {sid!r} has a subject row but no features")
    return joined


def _features_of_row(row: FeatureRow) -> TidalFeatures:
    return TidalFeatures(
        fit=row.fit, rr=row.rr, tv=row.tv, n_cycles=row.n_cycles
    )


def cmd_synth(args) -> int:
    cohort = generate_cohort(
        n=args.n,
        obstructed_fraction=args.obstructed_fraction,
        seed=args.seed,
        jitter=args.jitter,
        noise_sd=args.noise_sd,
        duration_s=args.duration_s,
        sample_rate_hz=args.sample_rate_hz,
    )
    out_dir = Path(args.out_dir)
    signals_dir = out_dir / "signals"
    signals_dir.mkdir(parents=True, exist_ok=True)
    for i, subj in enumerate(cohort.subjects):
        signal, _ = cohort.signal_for(i)
        write_signal_csv(signals_dir / f"{subj.record.subject_id}.csv", signal)
    write_subjects_csv(out_dir / "subjects.csv", [s.record for s in cohort.subjects])
    manifest = RunManifest(
        command="synth",
        input_paths=(),
        parameters={
            "n": args.n,
            "obstructed_fraction": args.obstructed_fraction,
            "seed": args.seed,
            "jitter": args.jitter,
            "noise_sd": args.noise_sd,
            "duration_s": args.duration_s,
            "sample_rate_hz": args.sample_rate_hz,
            "out_dir": str(out_dir),
        },
    )
    write_json(out_dir / "manifest.json", manifest.to_dict())
    print(f"wrote {len(cohort.subjects)} subjects to {out_dir}")
    return EXIT_OK


def cmd_extract(args) -> int:
    signals_dir = Path(args.signals_dir)
    if not signals_dir.is_dir():
        raise InvalidInputError(f"signals directory {signals_dir} does not exist")
    if not any(signals_dir.glob("*.csv")):
        raise InvalidInputError(f"signals directory {signals_dir} holds no CSV files")
    records = read_subjects_csv(args.subjects_csv)

    known_files = {p.stem for p in signals_dir.glob("*.csv")}
    for stem in sorted(known_files - {r.subject_id for r in records}):
        _warn(f"signal file {stem}.csv has no subject row")

    rows: list[FeatureRow] = []
    failures: list[tuple[str, str]] = []
    for rec in sorted(records, key=lambda r: r.subject_id):
        sig_path = signals_dir / f"{rec.subject_id}.csv"
        try:
            if not sig_path.exists():
                raise InvalidInputError(f"no signal file {sig_path.name}")
            signal = read_signal_csv(sig_path)
            if args.detrend_window_s > 0:
                signal = detrend(signal, args.detrend_window_s)
            cycles = segment_breaths(
                signal,
                min_cycle_s=args.min_cycle_s,
                min_prominence_n=args.min_prominence,
            )
            region = select_clean_region(cycles, signal, min_cycles=args.min_cycles)
            feats = extract_features(region, rec, min_cycles=args.min_cycles)
            rows.append(
                FeatureRow(
                    subject_id=rec.subject_id,
                    fit=feats.fit,
                    rr=feats.rr,
                    tv=feats.tv,
                    n_cycles=feats.n_cycles,
                    quality_score=region.quality_score,
                )
            )
        except TidalbeltError as exc:
            failures.append((rec.subject_id, str(exc)))
            _warn(f"subject {rec.subject_id!r} skipped: {exc}")

    out = Path(args.out)
    errors_path = out.with_name(out.stem + ".errors.csv")
    with open(errors_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject_id", "error"])
        writer.writerows(failures)
    if not rows:
        raise InvalidInputError("no subject produced features; see error sidecar")
    write_features_csv(out, rows)
    write_manifest(
        out,
        RunManifest(
            command="extract",
            input_paths=(str(signals_dir), str(args.subjects_csv)),
            parameters={
                "min_cycles": args.min_cycles,
                "min_cycle_s": args.min_cycle_s,
                "min_prominence": args.min_prominence,
                "detrend_window_s": args.detrend_window_s,
                "out": str(out),
            },
        ),
    )
    print(f"wrote {len(rows)} feature rows to {out} ({len(failures)} failures)")
    return EXIT_OK


def cmd_correlate(args) -> int:
    joined = _join(read_features_csv(args.features_csv), read_subjects_csv(args.subjects_csv))
    cells: dict[str, dict[str, dict]] = {}
    for fname in FEATURE_NAMES:
        cells[fname] = {}
        for tname in CORRELATE_TARGETS:
            pairs = [
                (getattr(f, fname), getattr(rec, tname))
                for f, rec in joined
                if getattr(rec, tname) is not None
            ]
            if len(pairs) < 3:
                raise InsufficientDataError(
                    f"only {len(pairs)} joined rows carry {tname}; need >= 3"
                )
            cell = pearson([p[0] for p in pairs], [p[1] for p in pairs])
            cells[fname][tname] = {
                "r_squared": cell.r_squared,
                "p_value": cell.p_value,
                "n_obs": cell.n_obs,
            }
    doc = {"task": "correlate", "n_joined": len(joined), "cells": cells}
    write_json(args.out, doc)
    write_manifest(
        args.out,
        RunManifest(
            command="correlate",
            input_paths=(str(args.features_csv), str(args.subjects_csv)),
            parameters={"out": str(args.out)},
        ),
    )
    print(f"wrote correlation matrix to {args.out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    predictors = tuple(p.strip() for p in args.predictors.split(",") if p.strip())
    if not predictors:
        raise InvalidParameterError("predictors must name at least one feature")
    bad = [p for p in predictors if p not in FEATURE_NAMES]
    if bad:
        raise InvalidParameterError(
            f"unknown predictor(s) {', '.join(bad)}; choose from {FEATURE_NAMES}"
        )
    joined = _join(read_features_csv(args.features_csv), read_subjects_csv(args.subjects_csv))
    rows = [
        (f, rec) for f, rec in joined if getattr(rec, args.target) is not None
    ]
    skipped = len(joined) - len(rows)
    if skipped:
        _warn(f"{skipped} joined subject(s) missing {args.target}; skipped")
    X = [[getattr(f, p) for p in predictors] for f, _ in rows]
    y = [getattr(rec, args.target) for _, rec in rows]
    model = ols_fit(
        X,
        y,
        names=list(predictors),
        model_name=args.target,
        rmse_denominator=args.rmse_denominator,
    )
    write_json(args.out, model.to_dict())
    write_manifest(
        args.out,
        RunManifest(
            command="fit",
            input_paths=(str(args.features_csv), str(args.subjects_csv)),
            parameters={
                "target": args.target,
                "predictors": ",".join(predictors),
                "rmse_denominator": args.rmse_denominator,
                "out": str(args.out),
            },
        ),
    )
    print(f"wrote {args.target} model to {args.out}")
    return EXIT_OK


def cmd_detect(args) -> int:
    joined = _join(read_features_csv(args.features_csv), read_subjects_csv(args.subjects_csv))
    labeled = []
    for f, rec in joined:
        if rec.fev1_fvc is None:
            _warn(f"subject {rec.subject_id!r} missing fev1_fvc; skipped")
            continue
        labeled.append((f, label_obstruction(rec.fev1_fvc)))
    n = len(labeled)
    if n < 2:
        raise InsufficientDataError(f"need >= 2 labeled subjects, got {n}")
    if args.k > n - 1:
        raise InvalidParameterError(
            f"k={args.k} exceeds the leave-one-out training size {n - 1}"
        )
    if len({lab for _, lab in labeled}) < 2:
        raise DegenerateTrainingError("all subjects share one class after labeling")

    dataset = [(_features_of_row(f), lab) for f, lab in labeled]
    pairs = loocv(
        dataset,
        trainer=lambda train: knn_fit(train, k=args.k, scaling=args.knn_scaling),
        predictor=knn_predict,
    )
    cm = confusion(pairs, DETECT_CLASSES, positive_class=DETECT_CLASSES[0])
    rep = metrics(cm)
    doc = report_to_dict("detect", cm, rep)
    doc["predictions"] = [
        {
            "subject_id": f.subject_id,
            "true": true.value,
            "predicted": pred.value,
        }
        for (f, _), (true, pred) in zip(labeled, pairs)
    ]
    write_json(args.out, doc)
    write_manifest(
        args.out,
        RunManifest(
            command="detect",
            input_paths=(str(args.features_csv), str(args.subjects_csv)),
            parameters={
                "k": args.k,
                "knn_scaling": args.knn_scaling,
                "out": str(args.out),
            },
        ),
    )
    print(f"wrote detection report to {args.out}")
    return EXIT_OK


def cmd_stage(args) -> int:
    joined = _join(read_features_csv(args.features_csv), read_subjects_csv(args.subjects_csv))
    staged = []
    for f, rec in joined:
        if rec.fev1_fvc is None or rec.fev1_pct_pred is None:
            continue
        if label_obstruction(rec.fev1_fvc) is not ObstructionLabel.OBSTRUCTED:
            continue
        staged.append((f, rec))
    if len(staged) < 5:
        raise InsufficientDataError(
            f"need >= 5 obstructed subjects with fev1_pct_pred, got {len(staged)}"
        )

    dataset = [
        (
            (_features_of_row(f), rec.fev1_pct_pred),
            severity_stage(rec.fev1_pct_pred),
        )
        for f, rec in staged
    ]

    def trainer(train):
        return severity_fit(
            [(feats, pct) for (feats, pct), _ in train],
            rmse_denominator=args.rmse_denominator,
        )

    def predictor(model, x):
        feats, _ = x
        est = model.predict({"fit": feats.fit, "rr": feats.rr, "tv": feats.tv})
        return severity_stage(est)

    pairs = loocv(dataset, trainer, predictor)
    fine_cm = confusion(pairs, FINE_CLASSES)
    fine_rep = metrics(fine_cm)
    coarse_pairs = [(t.coarse, p.coarse) for t, p in pairs]
    coarse_cm = confusion(
        coarse_pairs, COARSE_CLASSES, positive_class="SevereVerySevere"
    )
    coarse_rep = metrics(coarse_cm)
    doc = {
        "task": "stage",
        "n": len(staged),
        "fine": report_to_dict("stage_fine", fine_cm, fine_rep),
        "coarse": report_to_dict("stage_coarse", coarse_cm, coarse_rep),
        "predictions": [
            {
                "subject_id": f.subject_id,
                "true": true.value,
                "predicted": pred.value,
            }
            for (f, _), (true, pred) in zip(staged, pairs)
        ],
    }
    write_json(args.out, doc)
    write_manifest(
        args.out,
        RunManifest(
            command="stage",
            input_paths=(str(args.features_csv), str(args.subjects_csv)),
            parameters={
                "rmse_denominator": args.rmse_denominator,
                "out": str(args.out),
            },
        ),
    )
    print(f"wrote staging report to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tidalbelt",
        description="Tidal-breathing analysis of respiration-belt recordings.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--obstructed-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=float, default=0.04)
    p.add_argument("--noise-sd", type=float, default=6.0)
    p.add_argument("--duration-s", type=float, default=60.0)
    p.add_argument("--sample-rate-hz", type=float, default=25.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract tidal features from signals")
    p.add_argument("signals_dir")
    p.add_argument("subjects_csv")
    p.add_argument("--out", required=True)
    p.add_argument("--min-cycles", type=int, default=6)
    p.add_argument("--min-cycle-s", type=float, default=1.5)
    p.add_argument(
        "--min-prominence",
        type=float,
        default=None,
        help="Newtons; default is 10%% of each signal's interquartile range",
    )
    p.add_argument(
        "--detrend-window-s",
        type=float,
        default=20.0,
        help="moving-average detrend window; 0 disables detrending",
    )
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("correlate", help="feature-vs-spirometry correlation matrix")
    p.add_argument("features_csv")
    p.add_argument("subjects_csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("fit", help="fit one spirometric regression")
    p.add_argument("features_csv")
    p.add_argument("subjects_csv")
    p.add_argument("--target", choices=FIT_TARGETS, required=True)
    p.add_argument("--predictors", default="fit,rr,tv")
    p.add_argument("--rmse-denominator", choices=("n", "n-k-1"), default="n")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("detect", help="LOOCV obstruction detection (KNN)")
    p.add_argument("features_csv")
    p.add_argument("subjects_csv")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--knn-scaling", choices=KNN_SCALINGS, default="zscore")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("stage", help="LOOCV severity staging (obstructed only)")
    p.add_argument("features_csv")
    p.add_argument("subjects_csv")
    p.add_argument("--rmse-denominator", choices=("n", "n-k-1"), default="n")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ANALYSIS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TidalbeltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
