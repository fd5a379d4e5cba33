"""Sidewalk-to-street transition detection on frame streams: frame
subsampling, transition scoring, guard-zone suppression, and evaluation
against annotated entrance instants.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .imaging import extract_center_patch, load_frame, to_grayscale
from .learning import EcocModel, RocCurve, _trapezoid_auc, predict_posterior
from .texture import FeatureParams, extract_fs

log = logging.getLogger(__name__)

TRANSITION_CLASS = "transition"


@dataclass(frozen=True)
class StreamFrame:
    frame_index: int
    timestamp: float
    path: str | None = None
    image: np.ndarray | None = None  # optional in-memory grayscale frame


@dataclass
class FrameStream:
    frames: list[StreamFrame]
    fps: float
    stream_id: str = ""


@dataclass(frozen=True)
class DetectionEvent:
    frame_index: int
    timestamp: float
    score_difference: float  # posterior(transition) - posterior(rest), in [-1, 1]


@dataclass(frozen=True)
class GroundTruthAnnotation:
    entrances: tuple[float, ...]
    exits: tuple[float, ...] = ()


@dataclass
class DetectionMetrics:
    tp: int
    fp: int
    fn: int
    tpr: float
    fpr: float
    latencies: list[float] = field(default_factory=list)
    tpr_zero_denominator: bool = False
    fpr_zero_denominator: bool = False


def sample_frames(stream: FrameStream, n: int = 6) -> FrameStream:
    """Keep frames whose frame_index is a multiple of n (5 fps at n=6 from a
    30 fps source), preserving timestamps.
    """
    if n < 1:
        raise InvalidInput("sampling stride must be >= 1")
    if not stream.frames:
        raise InvalidInput("empty stream")
    kept = [f for f in stream.frames if f.frame_index % n == 0]
    return FrameStream(frames=kept, fps=stream.fps, stream_id=stream.stream_id)


def score_stream(
    stream: FrameStream,
    model: EcocModel,
    patch_side: int,
    params: FeatureParams = FeatureParams(),
) -> list[DetectionEvent]:
    """Score every frame of an (already subsampled) stream.

    score_difference = posterior(transition) - posterior(not transition);
    with renormalized posteriors this is 2 * p_transition - 1. Frames that
    fail to decode or extract are skipped and logged.
    """
    if TRANSITION_CLASS not in model.classes:
        raise InvalidInput(f"model has no {TRANSITION_CLASS!r} class")
    ti = model.classes.index(TRANSITION_CLASS)
    events = []
    for frame in stream.frames:
        try:
            if frame.image is not None:
                gray = frame.image
            else:
                gray = to_grayscale(load_frame(frame.path))
            patch = extract_center_patch(gray, patch_side)
            fs = extract_fs(patch, params).fs
            post = predict_posterior(model, fs)
        except Exception:
            log.exception("skipping frame %s of stream %s", frame.frame_index, stream.stream_id)
            continue
        p_t = float(post[ti])
        events.append(
            DetectionEvent(
                frame_index=frame.frame_index,
                timestamp=frame.timestamp,
                score_difference=p_t - (1.0 - p_t),
            )
        )
    return events


def apply_guard_zone(
    events: list[DetectionEvent],
    threshold: float,
    guard: float = 2.0,
) -> list[DetectionEvent]:
    """Threshold then suppress: scanning in time order, accept an event when
    its score_difference >= threshold and no accepted event lies within the
    preceding `guard` seconds. The guard interval is half-open
    (t_accepted, t_accepted + guard], so an event exactly `guard` seconds
    later is still discarded.
    """
    accepted: list[DetectionEvent] = []
    last = None
    for ev in events:
        if ev.score_difference < threshold:
            continue
        if last is not None and ev.timestamp <= last + guard:
            continue
        accepted.append(ev)
        last = ev.timestamp
    return accepted


def evaluate(
    detections: list[DetectionEvent],
    gt: GroundTruthAnnotation,
    sampled_timestamps,
    pre_window: float = 2.0,
    post_window: float = 1.0,
) -> DetectionMetrics:
    """Match accepted detections to entrance windows.

    An entrance is a true positive when at least one detection falls in
    [t - pre_window, t + post_window]; extra detections inside a matched
    window count neither way. Detections outside every window are false
    positives. FPR uses the number of sampled frames outside all windows as
    its denominator. Latency is (earliest in-window detection - entrance).
    Overlapping windows are resolved by assigning each detection to the
    nearest entrance.
    """
    entrances = sorted(gt.entrances)
    sampled = np.asarray(list(sampled_timestamps), dtype=np.float64)

    def in_any_window(t: float) -> bool:
        return any(e - pre_window <= t <= e + post_window for e in entrances)

    matched: dict[int, list[float]] = {}
    fp = 0
    for det in detections:
        eligible = [
            (abs(det.timestamp - e), k)
            for k, e in enumerate(entrances)
            if e - pre_window <= det.timestamp <= e + post_window
        ]
        if not eligible:
            fp += 1
            continue
        _, k = min(eligible)
        matched.setdefault(k, []).append(det.timestamp)

    tp = len(matched)
    fn = len(entrances) - tp
    latencies = [min(ts) - entrances[k] for k, ts in sorted(matched.items())]

    n_neg = int(sum(0 if in_any_window(t) else 1 for t in sampled))
    tpr_zero = len(entrances) == 0
    fpr_zero = n_neg == 0
    tpr = 1.0 if tpr_zero else tp / len(entrances)
    fpr = 0.0 if fpr_zero else fp / n_neg
    return DetectionMetrics(
        tp=tp,
        fp=fp,
        fn=fn,
        tpr=tpr,
        fpr=fpr,
        latencies=latencies,
        tpr_zero_denominator=tpr_zero,
        fpr_zero_denominator=fpr_zero,
    )


SWEEP_THRESHOLDS = np.round(np.arange(0, 101) * 0.01, 2)


def threshold_sweep(
    streams: list[tuple[list[DetectionEvent], GroundTruthAnnotation]],
    guard: float = 2.0,
    pre_window: float = 2.0,
    post_window: float = 1.0,
) -> RocCurve:
    """Guard-zone + evaluation sweep over thresholds 0.00 .. 1.00 step 0.01.

    Accepts one or more (scored events, annotation) stream pairs; counts are
    pooled across streams per threshold. Guard suppression runs per stream.
    """
    tp = np.zeros(len(SWEEP_THRESHOLDS), dtype=np.int64)
    fp = np.zeros_like(tp)
    fn = np.zeros_like(tp)
    neg = np.zeros_like(tp)
    for events, gt in streams:
        times = [e.timestamp for e in events]
        for i, tau in enumerate(SWEEP_THRESHOLDS):
            accepted = apply_guard_zone(events, float(tau), guard)
            m = evaluate(accepted, gt, times, pre_window, post_window)
            tp[i] += m.tp
            fp[i] += m.fp
            fn[i] += m.fn
            n_in = sum(
                1
                for t in times
                if any(e - pre_window <= t <= e + post_window for e in gt.entrances)
            )
            neg[i] += len(times) - n_in
    # acceptance sets shrink with the threshold, so TP must not increase
    assert (np.diff(tp) <= 0).all(), "TP count increased along the sweep"
    with np.errstate(invalid="ignore"):
        tpr = np.where(tp + fn > 0, tp / np.maximum(tp + fn, 1), 1.0)
        fpr = np.where(neg > 0, fp / np.maximum(neg, 1), 0.0)
    return RocCurve(SWEEP_THRESHOLDS.copy(), fpr, tpr, _trapezoid_auc(fpr, tpr))
