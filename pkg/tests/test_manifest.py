import numpy as np
import pytest
from PIL import Image

from pavetex.errors import ManifestError
from pavetex.manifest import (
    Manifest,
    ManifestRow,
    load_annotations,
    load_manifest,
    save_annotations,
    save_manifest,
    sidecar_path,
)
from pavetex.detection import GroundTruthAnnotation


def write_frames(tmp_path, names, side=8):
    rng = np.random.default_rng(0)
    for name in names:
        img = rng.integers(0, 256, (side, side)).astype(np.uint8)
        Image.fromarray(img).save(tmp_path / name)


def small_manifest(tmp_path):
    names = ["a0.png", "a1.png", "b0.png"]
    write_frames(tmp_path, names)
    rows = [
        ManifestRow("a0.png", "asphalt", "cityA", "s0", 0, 0.0, "train"),
        ManifestRow("a1.png", "asphalt", "cityA", "s0", 6, 0.2, "train"),
        ManifestRow("b0.png", "concrete", "cityB", "s1", 0, 0.0, "test"),
    ]
    return Manifest(rows=rows, classes=["asphalt", "concrete"], fps=30.0, base_dir=tmp_path)


class TestManifestRoundTrip:
    def test_fields_round_trip(self, tmp_path):
        m = small_manifest(tmp_path)
        path = tmp_path / "manifest.csv"
        save_manifest(m, path)
        loaded = load_manifest(path)
        assert loaded.rows == m.rows
        assert loaded.classes == m.classes
        assert loaded.fps == m.fps

    def test_empty_data_section(self, tmp_path):
        path = tmp_path / "m.csv"
        save_manifest(Manifest([], ["x"], 5.0, tmp_path), path)
        loaded = load_manifest(path)
        assert loaded.rows == []

    def test_timestamp_precision(self, tmp_path):
        names = ["f.png"]
        write_frames(tmp_path, names)
        ts = 1 / 3
        m = Manifest(
            [ManifestRow("f.png", "x", "c", "s", 0, ts, "train")], ["x"], 30.0, tmp_path
        )
        path = tmp_path / "m.csv"
        save_manifest(m, path)
        assert load_manifest(path).rows[0].timestamp == ts


class TestManifestValidation:
    def test_unknown_label_names_row(self, tmp_path):
        m = small_manifest(tmp_path)
        path = tmp_path / "m.csv"
        save_manifest(m, path)
        text = path.read_text().replace("concrete", "granite")
        path.write_text(text)
        with pytest.raises(ManifestError, match="row 4"):
            load_manifest(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("nope,header\n")
        sidecar_path(path).write_text('{"classes": [], "fps": 5.0}')
        with pytest.raises(ManifestError, match="header"):
            load_manifest(path)

    def test_missing_sidecar(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(",".join(
            ["frame_path", "label", "city", "stream_id", "frame_index", "timestamp", "split"]
        ) + "\n")
        with pytest.raises(ManifestError, match="sidecar"):
            load_manifest(path)

    def test_missing_frame_file(self, tmp_path):
        m = small_manifest(tmp_path)
        (tmp_path / "a1.png").unlink()
        path = tmp_path / "m.csv"
        save_manifest(m, path)
        with pytest.raises(ManifestError, match="missing"):
            load_manifest(path)
        assert len(load_manifest(path, check_paths=False).rows) == 3

    def test_duplicate_frame_index(self, tmp_path):
        m = small_manifest(tmp_path)
        m.rows.append(ManifestRow("a0.png", "asphalt", "cityA", "s0", 0, 0.3, "train"))
        path = tmp_path / "m.csv"
        save_manifest(m, path)
        with pytest.raises(ManifestError, match="duplicate"):
            load_manifest(path)

    def test_decreasing_timestamps(self, tmp_path):
        m = small_manifest(tmp_path)
        m.rows[1] = ManifestRow("a1.png", "asphalt", "cityA", "s0", 6, -1.0, "train")
        path = tmp_path / "m.csv"
        save_manifest(m, path)
        with pytest.raises(ManifestError, match="decrease"):
            load_manifest(path)

    def test_streams_grouping(self, tmp_path):
        m = small_manifest(tmp_path)
        streams = m.streams()
        assert sorted(streams) == ["s0", "s1"]
        assert [f.frame_index for f in streams["s0"].frames] == [0, 6]
        assert streams["s0"].fps == 30.0


class TestAnnotations:
    def test_round_trip(self, tmp_path):
        anns = {
            "s0": GroundTruthAnnotation((3.0, 20.0), (7.0, 25.0)),
            "s1": GroundTruthAnnotation((1.5,), (4.0,)),
        }
        path = tmp_path / "ann.csv"
        save_annotations(anns, path)
        assert load_annotations(path) == anns

    def test_alternation_enforced(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text(
            "stream_id,event_type,timestamp\ns0,entrance,1.0\ns0,entrance,2.0\n"
        )
        with pytest.raises(ManifestError, match="alternate"):
            load_annotations(path)

    def test_unknown_event_type(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("stream_id,event_type,timestamp\ns0,arrival,1.0\n")
        with pytest.raises(ManifestError):
            load_annotations(path)
