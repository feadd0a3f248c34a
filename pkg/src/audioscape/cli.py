"""Command-line pipeline: one bundle directory per run.

`run` executes every stage in order; each stage can also be invoked on its
own and communicates with its neighbors only through the serialized
artifacts in the bundle directory, so stage-wise execution reproduces a
full run byte for byte:

    audio -> segments.json + audio/   (segment)
          -> features.csv             (features)
          -> embedding.json           (embed)
          -> clusters.json            (cluster)
          -> scene.json + panorama    (scene)

Exit codes: 0 ok, 2 embedding quality gate failed, 3 scene validation
failed, 1 anything else.
"""

import argparse
import hashlib
import os
import shutil
import sys
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import serialize
from .audio_io import load_audio, mix_tracks, segment, write_segments
from .clustering import assign_noise, default_eps_grid, eps_sweep
from .embedding import Embedding2D, TsneParams, grid_search
from .features import (MfccConfig, build_table, diversity_check, table_from_csv,
                       table_to_csv)
from .scene import assemble_scene, export_scene, load_scene, validate_scene
from .spatial import cylindrical_map, vertical_fit
from .trajectory import compute_stats, export_stats, parse_log

ARTIFACT_VERSION = 1
ENV_OUT_DIR = "AUDIOSCAPE_OUT_DIR"
DIVERSITY_THRESHOLD = 0.9


class GateFailure(Exception):
    """Embedding quality gate violated under the configured policy."""


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    mix: bool = True
    source_id: str | None = None
    segment_duration_s: float = 10.0
    tail_policy: str = "drop"
    # feature extraction
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 40
    n_coeffs: int = 13
    fmin: float = 0.0
    fmax: float | None = None
    log_floor: float = 1e-10
    delta_width: int = 2
    zscore: bool = False
    # t-SNE sweep
    perplexities: list[float] = field(default_factory=lambda: [5.0, 10.0, 15.0])
    learning_rates: list[float] = field(default_factory=lambda: [200.0])
    runs_per_cell: int = 1
    seed: int = 0
    n_iter: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    init_scale: float = 1e-4
    gate_policy: str = "loose"
    # clustering
    eps_values: list[float] | None = None
    eps_grid_size: int = 40
    min_samples: int = 5
    cluster_names: str | None = None
    # layout and scene
    radius: float = 5.0
    vertical_fit: list[float] | None = None
    panorama: str | None = None
    out_dir: str = "out"

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def load(cls, path):
        data = serialize.read(path)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys {unknown} in {path!r}")
        return cls(**data)

    def mfcc_config(self, sample_rate):
        return MfccConfig.for_sample_rate(
            sample_rate, frame_ms=self.frame_ms, hop_ms=self.hop_ms, fmax=self.fmax,
            n_mels=self.n_mels, n_coeffs=self.n_coeffs, fmin=self.fmin,
            log_floor=self.log_floor, delta_width=self.delta_width,
        )

    def tsne_grid(self):
        return [
            TsneParams(perplexity=float(p), learning_rate=float(lr), n_iter=self.n_iter,
                       early_exaggeration_factor=self.early_exaggeration,
                       exaggeration_iters=self.exaggeration_iters,
                       momentum_early=self.momentum_early, momentum_late=self.momentum_late,
                       seed=self.seed, init_scale=self.init_scale)
            for p in self.perplexities
            for lr in self.learning_rates
        ]

    def validate(self, require_inputs=True):
        if require_inputs:
            if not self.inputs:
                raise ValueError("config has no input audio files")
            for path in self.inputs:
                if not os.path.isfile(path):
                    raise ValueError(f"input audio not found: {path}")
            if len(self.inputs) > 1 and not self.mix:
                raise ValueError("multiple inputs require mix=true")
        if self.tail_policy != "drop":
            raise ValueError(f"unsupported tail_policy {self.tail_policy!r}")
        if self.cluster_names and not os.path.isfile(self.cluster_names):
            raise ValueError(f"cluster_names file not found: {self.cluster_names}")
        if self.segment_duration_s <= 0:
            raise ValueError("segment_duration_s must be positive")
        if self.gate_policy not in ("strict", "loose", "allow-failed"):
            raise ValueError(f"gate_policy must be strict|loose|allow-failed, "
                             f"got {self.gate_policy!r}")
        if self.vertical_fit is not None and len(self.vertical_fit) != 2:
            raise ValueError("vertical_fit must be [z_lo, z_hi] or null")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def _check_version(data, path):
    if data.get("version") != ARTIFACT_VERSION:
        raise ValueError(
            f"{path!r} has artifact version {data.get('version')!r}, "
            f"expected {ARTIFACT_VERSION}"
        )
    return data


def _read_artifact(out_dir, name):
    path = os.path.join(out_dir, name)
    if not os.path.isfile(path):
        raise ValueError(f"missing upstream artifact {path!r}; run the earlier stage first")
    return _check_version(serialize.read(path), path)


def stage_segment(config, out_dir):
    config.validate(require_inputs=True)
    os.makedirs(out_dir, exist_ok=True)
    buffers = [load_audio(p) for p in config.inputs]
    pcm = mix_tracks(buffers) if len(buffers) > 1 else buffers[0]
    source_id = config.source_id or os.path.splitext(os.path.basename(config.inputs[0]))[0]
    seg_set = segment(pcm, config.segment_duration_s, source_id=source_id)
    manifest = write_segments(seg_set, os.path.join(out_dir, "audio"))
    serialize.write({
        "version": ARTIFACT_VERSION,
        "source_id": seg_set.source_id,
        "sample_rate": seg_set.sample_rate,
        "segment_duration_s": seg_set.segment_duration_s,
        "segment_samples": seg_set.segment_samples,
        "n_segments": seg_set.n_segments,
        "tail_policy": config.tail_policy,
        "files": [[i, f"audio/{rel}"] for i, rel in manifest],
    }, os.path.join(out_dir, "segments.json"))
    return seg_set


def _load_segment_set(out_dir):
    info = _read_artifact(out_dir, "segments.json")
    from .audio_io import SegmentSet
    segments = [load_audio(os.path.join(out_dir, rel)) for _, rel in info["files"]]
    return SegmentSet(segments=segments, segment_duration_s=info["segment_duration_s"],
                      source_id=info["source_id"], sample_rate=info["sample_rate"]), info


def stage_features(config, out_dir):
    seg_set, _ = _load_segment_set(out_dir)
    cfg = config.mfcc_config(seg_set.sample_rate)
    table = build_table(seg_set, cfg, zscore=config.zscore)
    similarity = diversity_check(table)
    if similarity > DIVERSITY_THRESHOLD:
        print(f"warning: max pairwise feature similarity {similarity:.4f} exceeds "
              f"{DIVERSITY_THRESHOLD} (near-duplicate segments)", file=sys.stderr)
    table_to_csv(table, os.path.join(out_dir, "features.csv"))
    return table


def stage_embed(config, out_dir):
    table = table_from_csv(os.path.join(out_dir, "features.csv"))
    best = grid_search(table, config.tsne_grid(), runs_per_cell=config.runs_per_cell)
    serialize.write({
        "version": ARTIFACT_VERSION,
        "coords": [[float(x), float(y)] for x, y in best.coords],
        "final_kl": best.final_kl,
        "params": best.params.to_dict(),
        "converged_gate": best.converged_gate,
    }, os.path.join(out_dir, "embedding.json"))
    _enforce_gate(best, config.gate_policy)
    return best


def _enforce_gate(embedding, policy):
    gate, kl = embedding.converged_gate, embedding.final_kl
    if policy == "strict" and gate != "strict":
        raise GateFailure(f"gate policy strict requires KL < 0.5, got {kl:.4f} ({gate})")
    if policy == "loose" and gate == "failed":
        raise GateFailure(f"gate policy loose requires KL < 1.0, got {kl:.4f}")
    if gate != "strict":
        print(f"warning: embedding gate tier is {gate} (KL = {kl:.4f})", file=sys.stderr)


def _load_embedding(out_dir):
    data = _read_artifact(out_dir, "embedding.json")
    params = TsneParams(**data["params"])
    return Embedding2D(coords=np.array(data["coords"], dtype=np.float64),
                       final_kl=float(data["final_kl"]), params=params,
                       converged_gate=data["converged_gate"])


def stage_cluster(config, out_dir):
    emb = _load_embedding(out_dir)
    eps_values = config.eps_values
    if eps_values is None:
        eps_values = default_eps_grid(emb.coords, size=config.eps_grid_size)
    raw = eps_sweep(emb.coords, eps_values, min_samples=config.min_samples)
    if raw.is_all_noise:
        raise ValueError("every eps in the sweep produced zero clusters; "
                         "widen eps_values or lower min_samples")
    names = {}
    if config.cluster_names:
        names = {int(k): str(v) for k, v in serialize.read(config.cluster_names).items()}
    assignment = assign_noise(raw, emb.coords)
    assignment.names.update(names)
    payload = {
        "version": ARTIFACT_VERSION,
        "labels": [int(v) for v in assignment.labels],
        "n_clusters": assignment.n_clusters,
        "eps_used": assignment.eps_used,
        "min_samples": assignment.min_samples,
    }
    if assignment.names:
        payload["names"] = {str(k): v for k, v in assignment.names.items()}
    serialize.write(payload, os.path.join(out_dir, "clusters.json"))
    return assignment


def _load_assignment(out_dir, n_points):
    from .clustering import ClusterAssignment
    data = _read_artifact(out_dir, "clusters.json")
    labels = np.array(data["labels"], dtype=np.int64)
    if len(labels) != n_points:
        raise ValueError(f"clusters.json has {len(labels)} labels for {n_points} points")
    names = {int(k): str(v) for k, v in data.get("names", {}).items()}
    return ClusterAssignment(labels=labels, n_clusters=int(data["n_clusters"]),
                             eps_used=float(data["eps_used"]),
                             min_samples=int(data["min_samples"]),
                             core_flags=np.ones(len(labels), dtype=bool), names=names)


def stage_scene(config, out_dir):
    if not config.panorama:
        raise ValueError("config.panorama is required to assemble a scene")
    if not os.path.isfile(config.panorama):
        raise ValueError(f"panorama image not found: {config.panorama}")
    seg_info = _read_artifact(out_dir, "segments.json")
    emb = _load_embedding(out_dir)
    assignment = _load_assignment(out_dir, len(emb.coords))
    points = cylindrical_map(emb.coords, radius=config.radius)
    if config.vertical_fit is not None:
        points = vertical_fit(points, *config.vertical_fit)
    panorama_name = "panorama" + os.path.splitext(config.panorama)[1]
    dest = os.path.join(out_dir, panorama_name)
    if os.path.abspath(config.panorama) != os.path.abspath(dest):
        shutil.copyfile(config.panorama, dest)
    manifest = assemble_scene(
        points, assignment, [(i, rel) for i, rel in seg_info["files"]],
        panorama=panorama_name, source_id=seg_info["source_id"], radius=config.radius,
        duration_s=seg_info["segment_duration_s"], base_dir=out_dir,
    )
    scene_path = os.path.join(out_dir, "scene.json")
    export_scene(manifest, scene_path)
    violations = validate_scene(scene_path)
    if violations:
        raise ValueError(f"assembled scene failed validation: {violations}")
    return manifest


RUN_STAGES = [
    ("segment", stage_segment),
    ("features", stage_features),
    ("embed", stage_embed),
    ("cluster", stage_cluster),
    ("scene", stage_scene),
]

ARTIFACT_FILES = ["segments.json", "features.csv", "embedding.json", "clusters.json",
                  "scene.json"]


def write_run_manifest(config, out_dir):
    hashes = {}
    for name in ARTIFACT_FILES:
        path = os.path.join(out_dir, name)
        if os.path.isfile(path):
            with open(path, "rb") as fh:
                hashes[name] = hashlib.sha256(fh.read()).hexdigest()
    gates = {}
    emb_path = os.path.join(out_dir, "embedding.json")
    if os.path.isfile(emb_path):
        emb = serialize.read(emb_path)
        gates = {"converged_gate": emb["converged_gate"], "final_kl": emb["final_kl"]}
    feat_path = os.path.join(out_dir, "features.csv")
    if os.path.isfile(feat_path):
        gates["max_pairwise_similarity"] = diversity_check(table_from_csv(feat_path))
    seeds = [cell.seed + run for cell in config.tsne_grid()
             for run in range(config.runs_per_cell)]
    serialize.write({
        "version": ARTIFACT_VERSION,
        "config": config.to_dict(),
        "derived_seeds": sorted(set(seeds)),
        "gate": gates,
        "artifact_hashes": hashes,
    }, os.path.join(out_dir, "run_manifest.json"))


def cmd_run(config):
    config.validate(require_inputs=True)
    if not config.panorama:
        raise ValueError("config.panorama is required for a full run")
    if not os.path.isfile(config.panorama):
        raise ValueError(f"panorama image not found: {config.panorama}")
    out_dir = config.out_dir
    gate_error = None
    for name, stage in RUN_STAGES:
        try:
            stage(config, out_dir)
        except GateFailure as exc:
            # record the failure but finish writing the manifest below
            gate_error = exc
            break
        except Exception as exc:
            raise RuntimeError(f"stage {name}: {exc}") from exc
    write_run_manifest(config, out_dir)
    if gate_error is not None:
        raise gate_error
    return out_dir


def _config_from_args(args):
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    overrides = {}
    simple = ["mix", "source_id", "segment_duration_s", "seed", "runs_per_cell", "n_iter",
              "gate_policy", "min_samples", "cluster_names", "radius", "panorama", "zscore",
              "eps_grid_size"]
    for name in simple:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "inputs", None):
        overrides["inputs"] = list(args.inputs)
    for name in ("perplexities", "learning_rates", "eps_values", "vertical_fit"):
        raw = getattr(args, name, None)
        if raw is not None:
            overrides[name] = [float(v) for v in raw.split(",")]
    out_dir = getattr(args, "out", None) or os.environ.get(ENV_OUT_DIR)
    if out_dir:
        overrides["out_dir"] = out_dir
    return replace(config, **overrides)


def _add_common_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--out", help=f"bundle directory (default: ${ENV_OUT_DIR} or ./out)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="audioscape",
        description="Segment a recording, embed it by sound similarity, and export "
                    "a navigable 3D soundscape bundle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the full pipeline")
    seg = sub.add_parser("segment", help="cut input audio into equal segments")
    feat = sub.add_parser("features", help="compute the per-segment feature table")
    emb = sub.add_parser("embed", help="run the t-SNE parameter sweep")
    clus = sub.add_parser("cluster", help="cluster the embedding with DBSCAN")
    scn = sub.add_parser("scene", help="assemble and export scene.json")
    for p in (run, seg, feat, emb, clus, scn):
        _add_common_flags(p)
    for p in (run, seg):
        p.add_argument("--input", dest="inputs", action="append",
                       help="input WAV (repeat for multiple tracks)")
        p.add_argument("--mix", dest="mix", action="store_true", default=None)
        p.add_argument("--source-id", dest="source_id")
        p.add_argument("--segment-duration", dest="segment_duration_s", type=float)
    for p in (run, emb):
        p.add_argument("--perplexities", help="comma-separated perplexity grid")
        p.add_argument("--learning-rates", dest="learning_rates",
                       help="comma-separated learning-rate grid")
        p.add_argument("--runs-per-cell", dest="runs_per_cell", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--n-iter", dest="n_iter", type=int)
        p.add_argument("--gate", dest="gate_policy",
                       choices=["strict", "loose", "allow-failed"])
    for p in (run, clus):
        p.add_argument("--eps-values", dest="eps_values",
                       help="comma-separated ascending eps list (default: auto grid)")
        p.add_argument("--min-samples", dest="min_samples", type=int)
        p.add_argument("--cluster-names", dest="cluster_names",
                       help="JSON file mapping cluster id to display name")
    for p in (run, scn):
        p.add_argument("--radius", type=float)
        p.add_argument("--vertical-fit", dest="vertical_fit",
                       help="z_lo,z_hi elevation range (default: off)")
        p.add_argument("--panorama", help="panorama image for the scene backdrop")

    ana = sub.add_parser("analyze", help="compute trajectory statistics")
    ana.add_argument("--scene", required=True, help="scene.json of the explored bundle")
    ana.add_argument("--log", required=True, help="trajectory.json exported by the viewer")
    ana.add_argument("--out", required=True, help="directory for stats.json and CSVs")

    val = sub.add_parser("validate", help="validate a scene.json bundle")
    val.add_argument("scene", help="path to scene.json")
    return parser


def _dispatch(args):
    if args.command == "validate":
        violations = validate_scene(args.scene)
        for v in violations:
            print(v, file=sys.stderr)
        if violations:
            return 3
        print("scene is valid")
        return 0

    if args.command == "analyze":
        scene = load_scene(args.scene)
        log = parse_log(args.log, scene)
        if log.scene_ref != scene.source_id:
            print(f"warning: log scene_ref {log.scene_ref!r} != scene source_id "
                  f"{scene.source_id!r}", file=sys.stderr)
        stats = compute_stats(log, scene)
        path = export_stats(stats, args.out)
        print(f"wrote {path}")
        return 0

    config = _config_from_args(args)
    out_dir = config.out_dir
    if args.command == "run":
        cmd_run(config)
        print(f"bundle written to {out_dir}")
        return 0

    stage = dict(RUN_STAGES)[args.command]
    os.makedirs(out_dir, exist_ok=True)
    try:
        stage(config, out_dir)
    finally:
        if args.command in ("embed", "cluster", "scene"):
            write_run_manifest(config, out_dir)
    print(f"stage {args.command} done in {out_dir}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except GateFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
