"""audioscape: turn a long recording into a navigable 3D soundscape.

Pipeline: equal-length segmentation -> MFCC+delta features -> exact t-SNE
-> DBSCAN with eps sweep -> cylindrical layout -> scene manifest, plus
analytics over viewer exploration logs.
"""

from .audio_io import PcmBuffer, SegmentSet, load_audio, mix_tracks, segment, write_segments
from .clustering import (ClusterAssignment, DensityClusterer, assign_noise, dbscan,
                         default_eps_grid, eps_sweep)
from .embedding import (Embedding2D, TsneEmbedding, TsneParams, calibrate_conditionals,
                        grid_search, kl_divergence, pairwise_sq_dists, symmetrize,
                        tsne_optimize, tsne_run)
from .features import (FeatureTable, MfccConfig, MfccFeaturizer, SegmentFeatures,
                       aggregate_and_flatten, build_table, deltas, diversity_check,
                       feature_stack, mfcc)
from .scene import SceneManifest, ScenePoint, assemble_scene, export_scene, load_scene, validate_scene
from .spatial import CylindricalProjector, Point3D, cylindrical_map, seam_pair, vertical_fit
from .trajectory import TrajectoryLog, TrajectoryStats, compute_stats, export_stats, parse_log

__version__ = "0.1.0"

__all__ = [
    "PcmBuffer", "SegmentSet", "load_audio", "mix_tracks", "segment", "write_segments",
    "MfccConfig", "MfccFeaturizer", "SegmentFeatures", "FeatureTable",
    "mfcc", "deltas", "feature_stack", "aggregate_and_flatten", "build_table",
    "diversity_check",
    "TsneParams", "Embedding2D", "TsneEmbedding", "pairwise_sq_dists",
    "calibrate_conditionals", "symmetrize", "kl_divergence", "tsne_optimize",
    "tsne_run", "grid_search",
    "ClusterAssignment", "DensityClusterer", "dbscan", "default_eps_grid",
    "eps_sweep", "assign_noise",
    "Point3D", "CylindricalProjector", "cylindrical_map", "seam_pair", "vertical_fit",
    "SceneManifest", "ScenePoint", "assemble_scene", "export_scene", "load_scene",
    "validate_scene",
    "TrajectoryLog", "TrajectoryStats", "compute_stats", "export_stats", "parse_log",
    "__version__",
]
