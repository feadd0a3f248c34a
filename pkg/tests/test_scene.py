import json

import numpy as np
import pytest

from audioscape.audio_io import PcmBuffer, segment, write_segments
from audioscape.clustering import ClusterAssignment
from audioscape.scene import (assemble_scene, export_scene, load_scene,
                              validate_scene)
from audioscape.spatial import cylindrical_map


def make_bundle(tmp_path, n=3, rng=None, names=None):
    rng = rng or np.random.default_rng(0)
    pcm = PcmBuffer(samples=rng.uniform(-0.8, 0.8, n * 1000), sample_rate=1000)
    seg_set = segment(pcm, 1.0, source_id="demo")
    audio_manifest = [(i, f"audio/{rel}") for i, rel in
                      write_segments(seg_set, tmp_path / "audio")]
    coords = rng.standard_normal((n, 2))
    coords[:, 0] = np.linspace(0.0, 1.0, n)  # guarantee a usable x range
    points = cylindrical_map(coords, radius=5.0)
    assignment = ClusterAssignment(labels=np.zeros(n, dtype=int), n_clusters=1,
                                   eps_used=0.5, min_samples=5,
                                   core_flags=np.ones(n, dtype=bool),
                                   names=names or {})
    (tmp_path / "pan.png").write_bytes(b"\x89PNG\r\n\x1a\nstub")
    manifest = assemble_scene(points, assignment, audio_manifest, panorama="pan.png",
                              source_id="demo", radius=5.0, duration_s=1.0,
                              base_dir=tmp_path)
    return manifest, tmp_path / "scene.json"


def test_assemble_three_points(tmp_path):
    manifest, _ = make_bundle(tmp_path)
    assert [p.id for p in manifest.points] == [0, 1, 2]
    assert manifest.colors == {"unexplored": "#FFFFFF", "playing": "#FF0000",
                               "explored": "#00FF00"}
    assert manifest.seam_diagnostic == [0, 2]


def test_assemble_count_mismatch(tmp_path):
    manifest, _ = make_bundle(tmp_path)
    points = cylindrical_map(np.array([[0.0, 0.0], [1.0, 1.0]]), radius=5.0)
    assignment = ClusterAssignment(labels=np.zeros(3, dtype=int), n_clusters=1,
                                   eps_used=0.5, min_samples=5,
                                   core_flags=np.ones(3, dtype=bool))
    with pytest.raises(ValueError, match="count mismatch"):
        assemble_scene(points, assignment, [(i, f"a{i}.wav") for i in range(3)],
                       panorama="p.png", source_id="x", radius=5.0, duration_s=1.0)


def test_assemble_missing_audio(tmp_path):
    points = cylindrical_map(np.array([[0.0, 0.0], [1.0, 1.0]]), radius=5.0)
    assignment = ClusterAssignment(labels=np.zeros(2, dtype=int), n_clusters=1,
                                   eps_used=0.5, min_samples=5,
                                   core_flags=np.ones(2, dtype=bool))
    with pytest.raises(ValueError, match="missing audio"):
        assemble_scene(points, assignment, [(0, "a0.wav"), (1, "a1.wav")],
                       panorama="p.png", source_id="x", radius=5.0, duration_s=1.0,
                       base_dir=tmp_path)


def test_export_deterministic_and_valid(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    export_scene(manifest, scene_path)
    first = scene_path.read_bytes()
    export_scene(manifest, scene_path)
    assert scene_path.read_bytes() == first
    assert validate_scene(scene_path) == []


def test_validate_duplicate_id(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    manifest.points[1].id = 0
    export_scene(manifest, scene_path)
    assert "duplicate_point_id" in validate_scene(scene_path)


def test_validate_radius_corruption(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    export_scene(manifest, scene_path)
    data = json.loads(scene_path.read_text())
    data["points"][0]["position"]["x"] += 0.1
    scene_path.write_text(json.dumps(data))
    assert any(v.startswith("position_radius_mismatch") for v in validate_scene(scene_path))


def test_validate_missing_audio_and_bad_color(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    manifest.colors["playing"] = "red"
    manifest.points[0].audio = "audio/nothere.wav"
    export_scene(manifest, scene_path)
    violations = validate_scene(scene_path)
    assert "invalid_color:playing" in violations
    assert "missing_audio:audio/nothere.wav" in violations


def test_validate_noncontiguous_clusters(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    manifest.points[2].cluster = 2  # skips cluster 1
    export_scene(manifest, scene_path)
    assert "cluster_ids_not_contiguous" in validate_scene(scene_path)


def test_validate_wrong_version(tmp_path):
    manifest, scene_path = make_bundle(tmp_path)
    manifest.version = "0"
    export_scene(manifest, scene_path)
    assert "bad_version:0" in validate_scene(scene_path)


def test_roundtrip_load(tmp_path):
    manifest, scene_path = make_bundle(tmp_path, names={0: "strings"})
    export_scene(manifest, scene_path)
    back = load_scene(scene_path)
    assert back.source_id == "demo"
    assert back.points[0].cluster_name == "strings"
    assert back.seam_diagnostic == manifest.seam_diagnostic
    assert [p.audio for p in back.points] == [p.audio for p in manifest.points]


def test_generated_manifests_always_validate(tmp_path):
    # pipeline-shaped manifests satisfy the validator across random geometry
    for seed in range(6):
        sub = tmp_path / f"case{seed}"
        sub.mkdir()
        manifest, scene_path = make_bundle(sub, n=4 + seed,
                                           rng=np.random.default_rng(seed))
        export_scene(manifest, scene_path)
        assert validate_scene(scene_path) == []
