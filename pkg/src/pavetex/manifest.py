"""Dataset manifest and annotation files.

A manifest is a plain CSV (frame_path, label, city, stream_id, frame_index,
timestamp, split) with a JSON sidecar of the same stem carrying the declared
class list and source fps. Annotations are a separate CSV of
(stream_id, event_type, timestamp) rows with event_type in
{entrance, exit}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .detection import FrameStream, GroundTruthAnnotation, StreamFrame
from .errors import ManifestError

MANIFEST_COLUMNS = ["frame_path", "label", "city", "stream_id", "frame_index", "timestamp", "split"]
ANNOTATION_COLUMNS = ["stream_id", "event_type", "timestamp"]


@dataclass(frozen=True)
class ManifestRow:
    frame_path: str
    label: str
    city: str
    stream_id: str
    frame_index: int
    timestamp: float
    split: str


@dataclass
class Manifest:
    rows: list[ManifestRow]
    classes: list[str]
    fps: float
    base_dir: Path = field(default_factory=Path)

    def resolve(self, row: ManifestRow) -> Path:
        return self.base_dir / row.frame_path

    def streams(self) -> dict[str, FrameStream]:
        """Group rows into per-stream frame lists, ordered by frame_index."""
        by_stream: dict[str, list[ManifestRow]] = {}
        for row in self.rows:
            by_stream.setdefault(row.stream_id, []).append(row)
        out = {}
        for sid, rows in by_stream.items():
            rows = sorted(rows, key=lambda r: r.frame_index)
            out[sid] = FrameStream(
                frames=[
                    StreamFrame(r.frame_index, r.timestamp, path=str(self.base_dir / r.frame_path))
                    for r in rows
                ],
                fps=self.fps,
                stream_id=sid,
            )
        return out


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def load_manifest(path, check_paths: bool = True) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    side = sidecar_path(path)
    if not side.exists():
        raise ManifestError(f"manifest sidecar not found: {side}")
    meta = json.loads(side.read_text())
    classes = list(meta["classes"])
    fps = float(meta["fps"])

    rows: list[ManifestRow] = []
    seen: set[tuple[str, int]] = set()
    last_ts: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError("empty manifest file") from None
        if header != MANIFEST_COLUMNS:
            raise ManifestError(f"bad header {header}, expected {MANIFEST_COLUMNS}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(MANIFEST_COLUMNS):
                raise ManifestError(f"expected {len(MANIFEST_COLUMNS)} fields, got {len(rec)}", row=lineno)
            frame_path, label, city, stream_id, frame_index, timestamp, split = rec
            if label not in classes:
                raise ManifestError(f"label {label!r} not in declared classes", row=lineno)
            try:
                fi = int(frame_index)
                ts = float(timestamp)
            except ValueError:
                raise ManifestError("malformed frame_index/timestamp", row=lineno) from None
            key = (stream_id, fi)
            if key in seen:
                raise ManifestError(f"duplicate frame_index {fi} in stream {stream_id!r}", row=lineno)
            seen.add(key)
            if stream_id in last_ts and ts < last_ts[stream_id]:
                raise ManifestError(f"timestamps decrease in stream {stream_id!r}", row=lineno)
            last_ts[stream_id] = ts
            if check_paths and not (path.parent / frame_path).exists():
                raise ManifestError(f"frame file missing: {frame_path}", row=lineno)
            rows.append(ManifestRow(frame_path, label, city, stream_id, fi, ts, split))
    return Manifest(rows=rows, classes=classes, fps=fps, base_dir=path.parent)


def save_manifest(manifest: Manifest, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for r in manifest.rows:
            writer.writerow(
                [r.frame_path, r.label, r.city, r.stream_id, r.frame_index, repr(r.timestamp), r.split]
            )
    sidecar_path(path).write_text(
        json.dumps({"version": 1, "classes": manifest.classes, "fps": manifest.fps}, indent=1)
    )


def load_annotations(path) -> dict[str, GroundTruthAnnotation]:
    """Entrance/exit annotations per stream; events must alternate in time,
    starting with an entrance.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"annotations not found: {path}")
    events: dict[str, list[tuple[float, str]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ANNOTATION_COLUMNS:
            raise ManifestError(f"bad header {header}, expected {ANNOTATION_COLUMNS}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise ManifestError("expected 3 fields", row=lineno)
            sid, kind, ts = rec
            if kind not in ("entrance", "exit"):
                raise ManifestError(f"unknown event type {kind!r}", row=lineno)
            try:
                t = float(ts)
            except ValueError:
                raise ManifestError("malformed timestamp", row=lineno) from None
            events.setdefault(sid, []).append((t, kind))
    out = {}
    for sid, evs in events.items():
        evs.sort()
        for i, (_, kind) in enumerate(evs):
            expected = "entrance" if i % 2 == 0 else "exit"
            if kind != expected:
                raise ManifestError(f"stream {sid!r}: events do not alternate entrance/exit")
        out[sid] = GroundTruthAnnotation(
            entrances=tuple(t for t, k in evs if k == "entrance"),
            exits=tuple(t for t, k in evs if k == "exit"),
        )
    return out


def save_annotations(annotations: dict[str, GroundTruthAnnotation], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANNOTATION_COLUMNS)
        for sid in sorted(annotations):
            gt = annotations[sid]
            merged = [(t, "entrance") for t in gt.entrances] + [(t, "exit") for t in gt.exits]
            for t, kind in sorted(merged):
                writer.writerow([sid, kind, repr(t)])
