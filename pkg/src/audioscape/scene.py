"""Scene manifest: the wire format binding 3D points to audio and clusters.

A scene bundle is a directory holding `scene.json`, the per-segment WAV
files (conventionally under `audio/`), and the panorama image. All asset
paths in the manifest are relative to the manifest's directory so bundles
stay portable. Coordinates are stored in the pipeline's own convention
(z = elevation); renderers apply their own axis remapping.
"""

import math
import os
import re
from dataclasses import dataclass, field

from . import serialize

SCENE_VERSION = "1"
DEFAULT_COLORS = {"unexplored": "#FFFFFF", "playing": "#FF0000", "explored": "#00FF00"}
_HEX_COLOR = re.compile(r"^#[0-9A-Fa-f]{6}$")
# loose enough to absorb the 9-significant-digit float serialization,
# tight enough to catch any real corruption of a coordinate
RADIUS_TOLERANCE = 1e-5


@dataclass
class ScenePoint:
    id: int
    x: float
    y: float
    z: float
    audio: str
    cluster: int
    duration_s: float
    cluster_name: str | None = None

    def to_dict(self):
        d = {
            "id": self.id,
            "position": {"x": self.x, "y": self.y, "z": self.z},
            "audio": self.audio,
            "cluster": self.cluster,
            "duration_s": self.duration_s,
        }
        if self.cluster_name is not None:
            d["cluster_name"] = self.cluster_name
        return d


@dataclass
class SceneManifest:
    source_id: str
    radius: float
    panorama: str
    points: list[ScenePoint]
    colors: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))
    seam_diagnostic: list[int] | None = None
    version: str = SCENE_VERSION

    def to_dict(self):
        d = {
            "version": self.version,
            "source_id": self.source_id,
            "radius": self.radius,
            "panorama": self.panorama,
            "colors": dict(self.colors),
            "points": [p.to_dict() for p in self.points],
        }
        if self.seam_diagnostic is not None:
            d["seam_diagnostic"] = list(self.seam_diagnostic)
        return d


def assemble_scene(points3d, assignment, audio_manifest, panorama, source_id,
                   radius, duration_s, colors=None, base_dir=None):
    """Bind mapped points, cluster labels, and segment audio into a manifest.

    Args:
        points3d: list of spatial.Point3D in segment order
        assignment: ClusterAssignment with non-negative labels
        audio_manifest: list of (segment index, relative WAV path)
        panorama: relative path of the backdrop image
        source_id / radius / duration_s: provenance and geometry metadata
        colors: optional override of the three interaction-state colors
        base_dir: when given, every referenced audio file must exist under it

    Raises ValueError on any count mismatch or missing audio file.
    """
    n = len(points3d)
    if assignment.n_points != n or len(audio_manifest) != n:
        raise ValueError(
            f"count mismatch: {n} points, {assignment.n_points} labels, "
            f"{len(audio_manifest)} audio files"
        )
    if assignment.n_noise:
        raise ValueError("assignment still contains noise labels; run assign_noise first")
    audio_by_index = {idx: rel for idx, rel in audio_manifest}
    if base_dir is not None:
        for idx, rel in audio_manifest:
            if not os.path.isfile(os.path.join(base_dir, rel)):
                raise ValueError(f"missing audio file for segment {idx}: {rel}")
    points = []
    for p in points3d:
        label = int(assignment.labels[p.segment_index])
        points.append(ScenePoint(
            id=p.segment_index, x=p.x, y=p.y, z=p.z,
            audio=audio_by_index[p.segment_index],
            cluster=label,
            cluster_name=assignment.names.get(label),
            duration_s=float(duration_s),
        ))
    from .spatial import seam_pair
    seam = list(seam_pair(points3d))
    return SceneManifest(source_id=source_id, radius=float(radius), panorama=panorama,
                         points=points, colors=dict(colors or DEFAULT_COLORS),
                         seam_diagnostic=seam)


def export_scene(manifest, path):
    """Write the manifest as canonical JSON (byte-reproducible)."""
    serialize.write(manifest.to_dict(), path)


def validate_scene(path):
    """Check a scene.json against every manifest invariant.

    Returns a list of violation codes (empty = valid) instead of raising,
    so callers can report all problems at once. Asset paths are resolved
    relative to the manifest's directory.
    """
    violations = []
    try:
        data = serialize.read(path)
    except Exception as exc:
        return [f"unreadable_manifest:{exc}"]
    base = os.path.dirname(os.path.abspath(path))

    for key in ("version", "source_id", "radius", "panorama", "colors", "points"):
        if key not in data:
            violations.append(f"missing_field:{key}")
    if violations:
        return violations
    if data["version"] != SCENE_VERSION:
        violations.append(f"bad_version:{data['version']}")
    if not isinstance(data["radius"], (int, float)) or data["radius"] <= 0:
        violations.append("bad_radius")

    colors = data["colors"]
    for key in ("unexplored", "playing", "explored"):
        if key not in colors or not _HEX_COLOR.match(str(colors[key])):
            violations.append(f"invalid_color:{key}")

    points = data["points"]
    if not isinstance(points, list) or not points:
        violations.append("no_points")
        return violations

    ids = []
    clusters = []
    radius = float(data["radius"]) if isinstance(data["radius"], (int, float)) else 0.0
    for p in points:
        missing = [k for k in ("id", "position", "audio", "cluster", "duration_s") if k not in p]
        if missing:
            violations.append(f"point_missing_field:{','.join(missing)}")
            continue
        ids.append(p["id"])
        clusters.append(p["cluster"])
        pos = p["position"]
        if not all(k in pos for k in ("x", "y", "z")):
            violations.append(f"point_missing_field:position_xyz (id {p['id']})")
            continue
        horizontal = math.hypot(float(pos["x"]), float(pos["y"]))
        if radius > 0 and abs(horizontal - radius) > RADIUS_TOLERANCE * max(1.0, radius):
            violations.append(f"position_radius_mismatch:{p['id']}")
        if not isinstance(p["duration_s"], (int, float)) or p["duration_s"] <= 0:
            violations.append(f"duration_nonpositive:{p['id']}")
        if not os.path.isfile(os.path.join(base, str(p["audio"]))):
            violations.append(f"missing_audio:{p['audio']}")

    if len(set(ids)) != len(ids):
        violations.append("duplicate_point_id")
    elif sorted(ids) != list(range(len(points))):
        violations.append("point_id_range")
    if clusters:
        if any((not isinstance(c, int)) or c < 0 for c in clusters):
            violations.append("cluster_id_invalid")
        elif sorted(set(clusters)) != list(range(max(clusters) + 1)):
            violations.append("cluster_ids_not_contiguous")

    if not os.path.isfile(os.path.join(base, str(data["panorama"]))):
        violations.append(f"missing_panorama:{data['panorama']}")

    if "seam_diagnostic" in data:
        seam = data["seam_diagnostic"]
        if not (isinstance(seam, list) and len(seam) == 2 and all(s in ids for s in seam)):
            violations.append("bad_seam_diagnostic")
    return violations


def load_scene(path):
    """Parse a previously exported scene.json back into a SceneManifest."""
    violations = validate_scene(path)
    if violations:
        raise ValueError(f"invalid scene manifest {path!r}: {violations}")
    data = serialize.read(path)
    points = [
        ScenePoint(id=int(p["id"]), x=float(p["position"]["x"]), y=float(p["position"]["y"]),
                   z=float(p["position"]["z"]), audio=str(p["audio"]), cluster=int(p["cluster"]),
                   duration_s=float(p["duration_s"]), cluster_name=p.get("cluster_name"))
        for p in data["points"]
    ]
    return SceneManifest(source_id=data["source_id"], radius=float(data["radius"]),
                         panorama=data["panorama"], points=points, colors=data["colors"],
                         seam_diagnostic=data.get("seam_diagnostic"), version=data["version"])
