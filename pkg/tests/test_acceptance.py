"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from audioscape import cli
from audioscape.audio_io import PcmBuffer, write_wav
from audioscape.clustering import ClusterAssignment, assign_noise, dbscan
from audioscape.embedding import _kl_gradient, calibrate_conditionals, kl_divergence, pairwise_sq_dists
from audioscape.features import MfccConfig, mfcc
from audioscape.scene import validate_scene
from audioscape.serialize import read as read_json
from audioscape.spatial import cylindrical_map
from audioscape.trajectory import TrajectoryEvent, TrajectoryLog, compute_stats

from oracles import (dbscan_reference, fd_gradient, mfcc_oracle, nearest_core_oracle,
                     purity, realized_perplexity)
from synth import SR, random_segment, three_timbre_wave
from test_trajectory import golden_log, golden_scene, make_scene


@contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {title}")
        raise
    print(f"[PASS] criterion {number}: {title}")


def write_program(tmp_path, per_class, seed):
    samples, truth = three_timbre_wave(per_class=per_class, duration_s=1.0,
                                       rng=np.random.default_rng(seed))
    wav = tmp_path / "program.wav"
    write_wav(wav, PcmBuffer(samples=samples, sample_rate=SR))
    pan = tmp_path / "pan.png"
    pan.write_bytes(b"\x89PNG\r\n\x1a\nstub")
    return wav, pan, truth


def base_config(wav, pan, out_dir, seed, perplexities):
    return {
        "inputs": [str(wav)],
        "segment_duration_s": 1.0,
        "perplexities": perplexities,
        "learning_rates": [200.0],
        "n_iter": 1000,
        "seed": seed,
        "panorama": str(pan),
        "out_dir": str(out_dir),
    }


def test_criterion_1_synthetic_timbre_recovery(tmp_path):
    with criterion(1, "synthetic timbre recovery (KL < 1, purity >= 0.9 in >= 3/5 seeds, "
                      "< 60 s)"):
        wav, pan, truth = write_program(tmp_path, per_class=30, seed=99)
        started = time.monotonic()
        successes = 0
        for seed in range(5):
            out = tmp_path / f"run{seed}"
            cfg_path = tmp_path / f"cfg{seed}.json"
            cfg_path.write_text(json.dumps(
                base_config(wav, pan, out, seed, [5.0, 10.0, 15.0])))
            assert cli.main(["run", "--config", str(cfg_path)]) == 0
            embedding = read_json(out / "embedding.json")
            clusters = read_json(out / "clusters.json")
            assert embedding["final_kl"] < 1.0
            if purity(clusters["labels"], truth) >= 0.9:
                successes += 1
        elapsed = time.monotonic() - started
        assert successes >= 3, f"purity >= 0.9 in only {successes}/5 seeds"
        assert elapsed < 60.0, f"pipeline took {elapsed:.1f}s"


def test_criterion_2_mfcc_oracle_equivalence():
    with criterion(2, "MFCC matches the brute-force DFT+filterbank+DCT oracle "
                      "within 1e-6 relative on 20 random segments"):
        cfg = MfccConfig.for_sample_rate(SR)
        for seed in range(20):
            seg = random_segment(np.random.default_rng(seed), duration_s=0.3)
            got = mfcc(seg, cfg)
            want = mfcc_oracle(seg.samples, SR, cfg)
            scale = np.max(np.abs(want))
            assert np.max(np.abs(got - want)) / scale < 1e-6


def test_criterion_3_gradient_and_kl_nonnegativity():
    with criterion(3, "analytic t-SNE gradient matches central differences "
                      "(rel err < 1e-4) and KL >= 0 on 100 random pairs"):
        rng = np.random.default_rng(7)
        m = rng.random((20, 20))
        m = m + m.T
        np.fill_diagonal(m, 0.0)
        P = m / m.sum()
        coords = rng.standard_normal((20, 2))
        analytic = _kl_gradient(P, coords)
        numeric = fd_gradient(lambda y: kl_divergence(P, y), coords, h=1e-5)
        rel = np.max(np.abs(analytic - numeric)) / np.max(np.abs(numeric))
        assert rel < 1e-4, f"gradient relative error {rel:.2e}"
        for _ in range(100):
            n = int(rng.integers(3, 15))
            q = rng.random((n, n))
            q = q + q.T
            np.fill_diagonal(q, 0.0)
            assert kl_divergence(q / q.sum(), rng.standard_normal((n, 2))) >= 0.0


def test_criterion_4_perplexity_calibration():
    with criterion(4, "realized per-row perplexity within 1e-4 of targets {5, 15, 30} "
                      "on N=100 random tables"):
        for target in (5.0, 15.0, 30.0):
            for seed in (0, 1):
                rng = np.random.default_rng(seed)
                d2 = pairwise_sq_dists(rng.standard_normal((100, 156)))
                P, converged = calibrate_conditionals(d2, perplexity=target)
                assert converged.all()
                for i in range(100):
                    realized = realized_perplexity(P[i])
                    assert abs(realized - target) <= 1e-4, (
                        f"target {target}, row {i}: realized {realized}")


def test_criterion_5_dbscan_oracle_agreement():
    with criterion(5, "DBSCAN and noise reassignment match the brute-force reference "
                      "exactly on 50 random 200-point instances x 10 eps values"):
        eps_values = np.geomspace(0.05, 2.0, 10)
        for seed in range(50):
            rng = np.random.default_rng(seed)
            coords = rng.standard_normal((200, 2)) * rng.uniform(0.5, 2.0)
            for eps in eps_values:
                labels, core = dbscan(coords, float(eps), min_samples=5)
                ref_labels, ref_core = dbscan_reference(coords, float(eps), 5)
                assert np.array_equal(labels, ref_labels)
                assert np.array_equal(core, ref_core)
                if labels.max() >= 0 and np.any(labels == -1):
                    raw = ClusterAssignment(labels=labels, n_clusters=int(labels.max()) + 1,
                                            eps_used=float(eps), min_samples=5,
                                            core_flags=core)
                    fixed = assign_noise(raw, coords)
                    assert np.array_equal(fixed.labels,
                                          nearest_core_oracle(labels, core, coords))


def test_criterion_6_cylindrical_invariants():
    with criterion(6, "1000 random embeddings: radius within 1e-9, z bit-equals y2d, "
                      "theta order equals x order"):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            n = int(rng.integers(2, 40))
            coords = rng.standard_normal((n, 2)) * rng.uniform(0.1, 50.0)
            if coords[:, 0].max() == coords[:, 0].min():
                continue
            r = float(rng.uniform(0.5, 20.0))
            points = cylindrical_map(coords, radius=r)
            radial = np.hypot([p.x for p in points], [p.y for p in points])
            assert np.max(np.abs(radial - r)) < 1e-9
            for p in points:
                assert p.z == coords[p.segment_index, 1]
            theta = np.array([p.theta for p in points])
            assert np.array_equal(np.argsort(theta, kind="stable"),
                                  np.argsort(coords[:, 0], kind="stable"))


def test_criterion_7_run_determinism(tmp_path):
    with criterion(7, "identical config+seed cmd_run twice: byte-identical "
                      "embedding.json, clusters.json, scene.json"):
        wav, pan, _ = write_program(tmp_path, per_class=4, seed=5)
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            cfg_path = tmp_path / f"{name}.json"
            cfg_path.write_text(json.dumps(base_config(wav, pan, out, 7, [3.0])))
            assert cli.main(["run", "--config", str(cfg_path)]) == 0
            assert validate_scene(out / "scene.json") == []
            outputs.append(out)
        for artifact in ("embedding.json", "clusters.json", "scene.json"):
            assert (outputs[0] / artifact).read_bytes() == \
                (outputs[1] / artifact).read_bytes()


def test_criterion_8_trajectory_conservation():
    with criterion(8, "dwell and transition conservation on random logs; handcrafted "
                      "3-event example matches hand-computed stats"):
        rng = np.random.default_rng(3)
        scene = make_scene(np.linspace(0, 6.0, 12), [0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 1, 2])
        for _ in range(20):
            n_events = int(rng.integers(0, 40))
            events = [TrajectoryEvent(int(rng.integers(0, 12)), float(50 * i),
                                      float(rng.integers(0, 8000)))
                      for i in range(n_events)]
            log = TrajectoryLog(session_id="s", scene_ref="demo", events=events,
                                total_duration_ms=float(50 * n_events))
            stats = compute_stats(log, scene)
            assert sum(stats.dwell_by_cluster.values()) == \
                pytest.approx(sum(e.dwell_ms for e in events))
            assert stats.transition_matrix.sum() == max(n_events - 1, 0)
        stats = compute_stats(golden_log(), golden_scene())
        assert stats.dwell_by_cluster == {0: 5000.0, 1: 1000.0}
        assert stats.transition_matrix.tolist() == [[1, 1], [0, 0]]
        assert stats.within_cluster_ratio == 0.5
        assert stats.coverage == 0.75
        assert stats.revisit_rate == 0.0
        assert stats.angular_monotonicity == 1.0
