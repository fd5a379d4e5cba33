"""Command-line front end: feature dumping, training, classification,
stream detection and evaluation, plus synthetic corpus generation.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import detection, learning, synthetic
from .errors import PavetexError
from .imaging import extract_center_patch, load_frame, to_grayscale
from .manifest import load_annotations, load_manifest
from .texture import FEATURE_DIM, FeatureParams, extract_fs

FMT = "%.17g"


def _params(patch_side, glcm_levels, haralick_window, collage_window, collage_bins):
    return patch_side, FeatureParams(
        glcm_levels=glcm_levels,
        haralick_window=haralick_window,
        collage_window=collage_window,
        collage_bins=collage_bins,
    )


def _feature_options(f):
    for opt in reversed(
        [
            click.option("--patch-side", default=500, show_default=True),
            click.option("--glcm-levels", default=16, show_default=True),
            click.option("--haralick-window", default=11, show_default=True),
            click.option("--collage-window", default=5, show_default=True),
            click.option("--collage-bins", default=16, show_default=True),
        ]
    ):
        f = opt(f)
    return f


def extract_manifest_features(manifest, patch_side, params):
    """(frame ids, feature matrix, labels) for every manifest row."""
    ids, feats, labels = [], [], []
    for row in manifest.rows:
        gray = to_grayscale(load_frame(manifest.resolve(row)))
        patch = extract_center_patch(gray, min(patch_side, min(gray.shape)))
        feats.append(extract_fs(patch, params).fs)
        ids.append(row.frame_path)
        labels.append(row.label)
    return ids, np.array(feats), labels


def read_feature_csv(path):
    ids, feats, labels = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["frame_id"] + [f"f{i:03d}" for i in range(FEATURE_DIM)] + ["label"]
        if header != expected:
            raise PavetexError(f"bad feature CSV header in {path}")
        for rec in reader:
            ids.append(rec[0])
            feats.append([float(v) for v in rec[1:-1]])
            labels.append(rec[-1])
    return ids, np.array(feats), labels


@click.group()
def main():
    """Paving-texture classification and street-entrance detection."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@_feature_options
def features(manifest_path, out_dir, patch_side, glcm_levels, haralick_window, collage_window, collage_bins):
    """Dump the 94-column feature CSV for every frame in a manifest."""
    patch_side, params = _params(patch_side, glcm_levels, haralick_window, collage_window, collage_bins)
    manifest = load_manifest(manifest_path)
    ids, feats, labels = extract_manifest_features(manifest, patch_side, params)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / "features.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id"] + [f"f{i:03d}" for i in range(FEATURE_DIM)] + ["label"])
        for fid, row, label in zip(ids, feats, labels):
            writer.writerow([fid] + [FMT % v for v in row] + [label])
    click.echo(f"wrote {out}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--pca-variance", default=0.95, show_default=True)
@click.option("--svm-c", default=1.0, show_default=True)
@_feature_options
def train(manifest_path, model_path, seed, pca_variance, svm_c,
          patch_side, glcm_levels, haralick_window, collage_window, collage_bins):
    """Train the ECOC material classifier from a labeled manifest."""
    patch_side, params = _params(patch_side, glcm_levels, haralick_window, collage_window, collage_bins)
    manifest = load_manifest(manifest_path)
    _, feats, labels = extract_manifest_features(manifest, patch_side, params)
    present = [c for c in manifest.classes if c in set(labels)]
    model = learning.train_ecoc(
        feats, np.array(labels), classes=present, C=svm_c, seed=seed,
        variance_fraction=pca_variance,
    )
    model.params.update(
        patch_side=patch_side,
        glcm_levels=glcm_levels,
        haralick_window=haralick_window,
        collage_window=collage_window,
        collage_bins=collage_bins,
    )
    model.save(model_path)
    click.echo(f"wrote {model_path}")


def _model_params(model):
    p = model.params
    return p.get("patch_side", 500), FeatureParams(
        glcm_levels=p.get("glcm_levels", 16),
        haralick_window=p.get("haralick_window", 11),
        collage_window=p.get("collage_window", 5),
        collage_bins=p.get("collage_bins", 16),
    )


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True))
@click.option("--features-csv", type=click.Path(exists=True),
              help="Classify from a previously dumped feature CSV instead of frames.")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def classify(manifest_path, features_csv, model_path, out_dir):
    """Per-frame class posteriors for a manifest (or dumped features)."""
    model = learning.EcocModel.load(model_path)
    if features_csv:
        ids, feats, labels = read_feature_csv(features_csv)
    elif manifest_path:
        patch_side, params = _model_params(model)
        manifest = load_manifest(manifest_path)
        ids, feats, labels = extract_manifest_features(manifest, patch_side, params)
    else:
        raise click.UsageError("provide --manifest or --features-csv")
    post = learning.predict_posterior(model, feats)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / "posteriors.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id"] + [f"p_{c}" for c in model.classes] + ["predicted", "label"])
        for fid, p, label in zip(ids, post, labels):
            pred = model.classes[int(np.argmax(p))]
            writer.writerow([fid] + [FMT % v for v in p] + [pred, label])
    click.echo(f"wrote {out}")


def _score_streams(model, manifest, sample_every, patch_side, params):
    scored = {}
    for sid, stream in sorted(manifest.streams().items()):
        sampled = detection.sample_frames(stream, sample_every)
        scored[sid] = detection.score_stream(sampled, model, patch_side, params)
    return scored


def _write_detections(path, scored, accepted_by_stream, matched_by_stream):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["stream_id", "timestamp", "frame_index", "score_difference", "accepted", "matched_entrance"]
        )
        for sid in sorted(scored):
            accepted = accepted_by_stream.get(sid, set())
            matched = matched_by_stream.get(sid, {})
            for ev in scored[sid]:
                writer.writerow(
                    [
                        sid,
                        repr(ev.timestamp),
                        ev.frame_index,
                        FMT % ev.score_difference,
                        int(ev.frame_index in accepted),
                        matched.get(ev.frame_index, ""),
                    ]
                )


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--sample-every", default=1, show_default=True)
@click.option("--guard-seconds", default=2.0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def detect(manifest_path, model_path, threshold, sample_every, guard_seconds, out_dir):
    """Run transition detection over the streams of a manifest."""
    model = learning.EcocModel.load(model_path)
    patch_side, params = _model_params(model)
    manifest = load_manifest(manifest_path)
    scored = _score_streams(model, manifest, sample_every, patch_side, params)
    accepted = {
        sid: {ev.frame_index for ev in detection.apply_guard_zone(evs, threshold, guard_seconds)}
        for sid, evs in scored.items()
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / "detections.csv"
    _write_detections(out, scored, accepted, {})
    click.echo(f"wrote {out}")


@main.command("eval")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--sample-every", default=1, show_default=True)
@click.option("--guard-seconds", default=2.0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def eval_cmd(manifest_path, annotations_path, model_path, threshold, sample_every, guard_seconds, out_dir):
    """Evaluate detection against annotated entrances: ROC sweep + metrics."""
    model = learning.EcocModel.load(model_path)
    patch_side, params = _model_params(model)
    manifest = load_manifest(manifest_path)
    annotations = load_annotations(annotations_path)
    scored = _score_streams(model, manifest, sample_every, patch_side, params)
    empty = detection.GroundTruthAnnotation(())
    pairs = [(scored[sid], annotations.get(sid, empty)) for sid in sorted(scored)]
    roc = detection.threshold_sweep(pairs, guard=guard_seconds)

    tp = fp = fn = 0
    latencies = []
    accepted_by_stream = {}
    matched_by_stream = {}
    for sid in sorted(scored):
        evs = scored[sid]
        gt = annotations.get(sid, empty)
        acc = detection.apply_guard_zone(evs, threshold, guard_seconds)
        metrics = detection.evaluate(acc, gt, [e.timestamp for e in evs])
        tp += metrics.tp
        fp += metrics.fp
        fn += metrics.fn
        latencies.extend(metrics.latencies)
        accepted_by_stream[sid] = {ev.frame_index for ev in acc}
        matched = {}
        entrances = sorted(gt.entrances)
        for ev in acc:
            eligible = [
                (abs(ev.timestamp - e), e) for e in entrances if e - 2.0 <= ev.timestamp <= e + 1.0
            ]
            if eligible:
                matched[ev.frame_index] = repr(min(eligible)[1])
        matched_by_stream[sid] = matched

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "roc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, f, tr in zip(roc.thresholds, roc.fpr, roc.tpr):
            writer.writerow(["%.2f" % t, FMT % f, FMT % tr])
    _write_detections(out_dir / "detections.csv", scored, accepted_by_stream, matched_by_stream)

    bins = np.arange(-2.0, 1.01, 0.5)
    hist, _ = np.histogram(latencies, bins=bins)
    summary = {
        "threshold": threshold,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tpr": 1.0 if tp + fn == 0 else tp / (tp + fn),
        "fpr": roc.fpr[int(np.searchsorted(roc.thresholds, round(threshold, 2)))]
        if 0.0 <= threshold <= 1.0
        else 0.0,
        "auc": roc.auc,
        "latency_bin_edges": bins.tolist(),
        "latency_histogram": hist.tolist(),
    }
    (out_dir / "metrics.json").write_text(json.dumps(summary, indent=1))
    click.echo(f"wrote {out_dir / 'metrics.json'}")


@main.group()
def synth():
    """Generate synthetic corpora and streams."""


@synth.command()
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--count", default=200, show_default=True)
@click.option("--patch-side", default=64, show_default=True)
@click.option("--kinds", default="periodic_grid,band_noise,smooth_with_cracks,tiled",
              show_default=True, help="Comma-separated generator kinds (classes).")
@click.option("--with-transition", is_flag=True, help="Also generate blended transition frames.")
def corpus(out_dir, seed, count, patch_side, kinds, with_transition):
    """Write a labeled classification corpus."""
    kind_list = [k.strip() for k in kinds.split(",") if k.strip()]
    if with_transition:
        kind_list.append("transition")
    specs = [
        synthetic.SyntheticSpec(kind, kind, seed + i, count, patch_side)
        for i, kind in enumerate(kind_list)
    ]
    path = synthetic.generate_synthetic(specs, out_dir)
    click.echo(f"wrote {path}")


@synth.command()
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--streams", "n_streams", default=20, show_default=True)
@click.option("--duration", default=60.0, show_default=True)
@click.option("--fps", default=5.0, show_default=True)
@click.option("--patch-side", default=64, show_default=True)
def streams(out_dir, seed, n_streams, duration, fps, patch_side):
    """Write annotated detection streams."""
    mpath, apath = synthetic.generate_streams(
        out_dir, seed, n_streams, duration=duration, fps=fps, side=patch_side
    )
    click.echo(f"wrote {mpath} and {apath}")


def entry():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(1)
    except PavetexError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    entry()
