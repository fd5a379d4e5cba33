"""Seeded synthetic paving textures, classification corpora and detection
streams. Stands in for field data: four material-like generators plus
blended "transition" frames, written as PNG files with manifests.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .detection import GroundTruthAnnotation
from .errors import InvalidInput
from .manifest import Manifest, ManifestRow, save_annotations, save_manifest


def _clip8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def periodic_grid(rng: np.random.Generator, side: int) -> np.ndarray:
    """Crosswalk/tile-like square wave grid with mild noise."""
    period = max(6, side // 8)
    r = np.arange(side)
    stripe_r = ((r // (period // 2)) % 2).astype(np.float64)
    stripe_c = stripe_r.copy()
    grid = np.outer(stripe_r, stripe_c) + np.outer(1 - stripe_r, 1 - stripe_c)
    img = 70.0 + 140.0 * grid + rng.normal(0.0, 6.0, (side, side))
    return _clip8(img)


def band_noise(rng: np.random.Generator, side: int) -> np.ndarray:
    """Asphalt-like band-limited noise: blurred white noise, dark base."""
    noise = rng.normal(0.0, 1.0, (side, side))
    k = np.ones(3) / 3.0
    for _ in range(2):
        noise = np.apply_along_axis(lambda v: np.convolve(v, k, mode="same"), 0, noise)
        noise = np.apply_along_axis(lambda v: np.convolve(v, k, mode="same"), 1, noise)
    img = 60.0 + 40.0 * noise / max(noise.std(), 1e-9)
    return _clip8(img)


def smooth_with_cracks(rng: np.random.Generator, side: int) -> np.ndarray:
    """Concrete-like bright smooth surface with a few dark crack polylines."""
    base = 185.0 + 10.0 * np.linspace(-1, 1, side)[None, :] + rng.normal(0.0, 3.0, (side, side))
    img = base
    for _ in range(max(2, side // 40)):
        r = rng.integers(0, side)
        c = rng.integers(0, side)
        for _ in range(side):
            rr = int(np.clip(r, 1, side - 2))
            cc = int(np.clip(c, 1, side - 2))
            img[rr - 1 : rr + 2, cc] -= 90.0
            r += rng.integers(-1, 2)
            c += 1
            if c >= side:
                break
    return _clip8(img)


def tiled(rng: np.random.Generator, side: int) -> np.ndarray:
    """Brick-like rectangular tiles with grout lines and per-tile brightness."""
    tile = max(8, side // 5)
    img = np.empty((side, side))
    for r0 in range(0, side, tile):
        shift = (r0 // tile % 2) * tile // 2
        for c0 in range(-shift, side, tile):
            level = 120.0 + rng.uniform(-25.0, 25.0)
            img[r0 : r0 + tile, max(c0, 0) : c0 + tile] = level
    grout = np.zeros((side, side), dtype=bool)
    for r0 in range(0, side, tile):
        grout[r0 : r0 + 2, :] = True
    for r0 in range(0, side, tile):
        shift = (r0 // tile % 2) * tile // 2
        for c0 in range(-shift, side, tile):
            if c0 >= 0:
                grout[r0 : r0 + tile, c0 : c0 + 2] = True
    img[grout] = 35.0
    img += rng.normal(0.0, 4.0, (side, side))
    return _clip8(img)


GENERATORS = {
    "periodic_grid": periodic_grid,
    "band_noise": band_noise,
    "smooth_with_cracks": smooth_with_cracks,
    "tiled": tiled,
}

DEFAULT_SIDEWALK = "smooth_with_cracks"
DEFAULT_STREET = "band_noise"


def transition_patch(
    rng: np.random.Generator,
    side: int,
    top_kind: str = DEFAULT_SIDEWALK,
    bottom_kind: str = DEFAULT_STREET,
) -> np.ndarray:
    """Transition frame: two textures split by a dark border band."""
    top = GENERATORS[top_kind](rng, side)
    bottom = GENERATORS[bottom_kind](rng, side)
    split = side // 2 + int(rng.integers(-side // 8, side // 8 + 1))
    img = np.vstack([top[:split], bottom[split:]]).astype(np.float64)
    border = max(2, side // 50)
    img[max(0, split - border) : split + border] *= 0.3
    return _clip8(img)


def generate_patch(kind: str, rng: np.random.Generator, side: int) -> np.ndarray:
    if kind == "transition":
        return transition_patch(rng, side)
    if kind not in GENERATORS:
        raise InvalidInput(f"unknown generator kind {kind!r}")
    return GENERATORS[kind](rng, side)


@dataclass(frozen=True)
class SyntheticSpec:
    class_name: str
    kind: str
    seed: int
    count: int
    side: int


def generate_synthetic(
    specs: list[SyntheticSpec],
    out_dir,
    fps: float = 5.0,
    city: str = "synthetic",
    split: str = "train",
) -> Path:
    """Write seeded PNG frames plus a manifest; returns the manifest path.

    Per-frame rng streams are spawned from (spec seed, frame number), so
    output is byte-identical for a fixed spec and independent of generation
    order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    classes = []
    for spec in specs:
        if spec.class_name not in classes:
            classes.append(spec.class_name)
        for i in range(spec.count):
            rng = np.random.default_rng([spec.seed, i])
            img = generate_patch(spec.kind, rng, spec.side)
            name = f"{spec.class_name}_{i:04d}.png"
            Image.fromarray(img).save(out_dir / name)
            rows.append(
                ManifestRow(
                    frame_path=name,
                    label=spec.class_name,
                    city=city,
                    stream_id=spec.class_name,
                    frame_index=i,
                    timestamp=i / fps,
                    split=split,
                )
            )
    manifest = Manifest(rows=rows, classes=classes, fps=fps, base_dir=out_dir)
    path = out_dir / "manifest.csv"
    save_manifest(manifest, path)
    return path


def generate_streams(
    out_dir,
    seed: int,
    n_streams: int,
    duration: float = 60.0,
    fps: float = 5.0,
    side: int = 64,
    sidewalk_kind: str = DEFAULT_SIDEWALK,
    street_kind: str = DEFAULT_STREET,
    entrances_per_stream: int = 2,
    crossing_duration: float = 4.0,
    city: str = "synthetic",
) -> tuple[Path, Path]:
    """Write detection streams with annotated entrances.

    Frames show the sidewalk texture, switch to a transition border around
    each entrance instant ([t - 1.0, t + 0.4]), then the street texture until
    the exit. Returns (manifest path, annotations path).
    """
    budget = (duration - 10.0) / entrances_per_stream - crossing_duration
    if budget <= 2.0:
        raise InvalidInput(
            f"duration {duration} too short for {entrances_per_stream} entrances"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_frames = int(round(duration * fps))
    rows = []
    annotations: dict[str, GroundTruthAnnotation] = {}
    for s in range(n_streams):
        rng = np.random.default_rng([seed, s])
        entrances = []
        t = 5.0
        for _ in range(entrances_per_stream):
            t += float(rng.uniform(2.0, (duration - 10.0) / entrances_per_stream - crossing_duration))
            entrances.append(round(t, 2))
            t += crossing_duration + 4.0
        exits = [e + crossing_duration for e in entrances]
        sid = f"stream{s:03d}"
        annotations[sid] = GroundTruthAnnotation(tuple(entrances), tuple(exits))
        for i in range(n_frames):
            ts = i / fps
            kind = sidewalk_kind
            is_transition = False
            for e, x in zip(entrances, exits):
                if e - 1.0 <= ts <= e + 0.4:
                    is_transition = True
                elif e + 0.4 < ts <= x:
                    kind = street_kind
            frng = np.random.default_rng([seed, s, i])
            if is_transition:
                img = transition_patch(frng, side, sidewalk_kind, street_kind)
                label = "transition"
            else:
                img = GENERATORS[kind](frng, side)
                label = kind
            name = f"{sid}_{i:05d}.png"
            Image.fromarray(img).save(out_dir / name)
            rows.append(
                ManifestRow(
                    frame_path=name,
                    label=label,
                    city=city,
                    stream_id=sid,
                    frame_index=i,
                    timestamp=ts,
                    split="test",
                )
            )
    classes = sorted({r.label for r in rows} | {"transition"})
    manifest = Manifest(rows=rows, classes=classes, fps=fps, base_dir=out_dir)
    mpath = out_dir / "streams.csv"
    save_manifest(manifest, mpath)
    apath = out_dir / "annotations.csv"
    save_annotations(annotations, apath)
    return mpath, apath
