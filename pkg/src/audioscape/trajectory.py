"""Exploration-log parsing and the analytics computed over one session.

A trajectory log is the viewer's record of which audio points a user
engaged and for how long. Dwell is measured from playback start to
playback end or pointer exit, whichever comes first; that rule lives in
the viewer, this module just consumes the resulting events.

trajectory.json schema:

    {
      "session_id": str,
      "scene_ref": str,            # source_id of the scene explored
      "events": [{"point_id": int, "t_start_ms": num, "dwell_ms": num}, ...],
      "total_duration_ms": num
    }

Events must be ordered by t_start_ms and reference existing point ids.
"""

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import serialize


@dataclass
class TrajectoryEvent:
    point_id: int
    t_start_ms: float
    dwell_ms: float


@dataclass
class TrajectoryLog:
    session_id: str
    scene_ref: str
    events: list[TrajectoryEvent]
    total_duration_ms: float


@dataclass
class TrajectoryStats:
    """Session analytics. dwell_by_cluster covers every scene cluster, with
    zeros for unvisited ones; transition_matrix is K x K in cluster order."""

    coverage: float
    dwell_by_cluster: dict[int, float]
    transition_matrix: np.ndarray
    within_cluster_ratio: float
    revisit_rate: float
    angular_monotonicity: float
    n_events: int = 0

    def to_dict(self):
        return {
            "coverage": self.coverage,
            "dwell_by_cluster": {str(k): v for k, v in sorted(self.dwell_by_cluster.items())},
            "transition_matrix": [[int(c) for c in row] for row in self.transition_matrix],
            "within_cluster_ratio": self.within_cluster_ratio,
            "revisit_rate": self.revisit_rate,
            "angular_monotonicity": self.angular_monotonicity,
            "n_events": self.n_events,
        }


def _check_number(value, name, minimum=None):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ValueError(f"trajectory field {name} must be a finite number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValueError(f"trajectory field {name} must be >= {minimum}, got {value}")
    return float(value)


def parse_log(path, scene):
    """Read and validate a trajectory.json against its scene.

    Unknown point ids, unordered events, or negative dwells are schema
    errors; the offending values are named in the exception.
    """
    try:
        data = serialize.read(path)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed trajectory JSON in {path!r}: {exc}") from exc
    for key in ("session_id", "scene_ref", "events", "total_duration_ms"):
        if key not in data:
            raise ValueError(f"trajectory log missing field {key!r}")
    if not isinstance(data["events"], list):
        raise ValueError("trajectory events must be a list")

    known_ids = {p.id for p in scene.points}
    events = []
    for i, ev in enumerate(data["events"]):
        for key in ("point_id", "t_start_ms", "dwell_ms"):
            if key not in ev:
                raise ValueError(f"event {i} missing field {key!r}")
        if not isinstance(ev["point_id"], int) or isinstance(ev["point_id"], bool):
            raise ValueError(f"event {i} point_id must be an integer")
        events.append(TrajectoryEvent(
            point_id=ev["point_id"],
            t_start_ms=_check_number(ev["t_start_ms"], f"events[{i}].t_start_ms", minimum=0.0),
            dwell_ms=_check_number(ev["dwell_ms"], f"events[{i}].dwell_ms", minimum=0.0),
        ))
    unknown = sorted({e.point_id for e in events} - known_ids)
    if unknown:
        raise ValueError(f"trajectory references unknown point ids {unknown}")
    starts = [e.t_start_ms for e in events]
    if starts != sorted(starts):
        raise ValueError("trajectory events are not ordered by t_start_ms")
    return TrajectoryLog(
        session_id=str(data["session_id"]),
        scene_ref=str(data["scene_ref"]),
        events=events,
        total_duration_ms=_check_number(data["total_duration_ms"], "total_duration_ms",
                                        minimum=0.0),
    )


def _wrapped_step(a, b):
    """Angular step b - a, wrapped into (-pi, pi] across the seam."""
    step = b - a
    if step > math.pi:
        step -= 2.0 * math.pi
    elif step < -math.pi:
        step += 2.0 * math.pi
    return step


def compute_stats(log, scene, assignment=None):
    """Compute TrajectoryStats for a validated log.

    Cluster labels come from the assignment when given, otherwise from the
    scene's own point clusters. Angles are recovered from the stored
    positions. With fewer than two events there are no steps, so the
    transition matrix is all zero and angular_monotonicity is 0.
    """
    if assignment is not None:
        labels = {p.id: int(assignment.labels[p.id]) for p in scene.points}
    else:
        labels = {p.id: p.cluster for p in scene.points}
    n_clusters = max(labels.values()) + 1
    theta = {p.id: math.atan2(p.y, p.x) % (2.0 * math.pi) for p in scene.points}

    visits = [e.point_id for e in log.events]
    unique = set(visits)
    coverage = len(unique) / len(scene.points)
    dwell = {c: 0.0 for c in range(n_clusters)}
    for e in log.events:
        dwell[labels[e.point_id]] += e.dwell_ms

    transitions = np.zeros((n_clusters, n_clusters), dtype=np.int64)
    for prev, nxt in zip(visits, visits[1:]):
        transitions[labels[prev], labels[nxt]] += 1
    total_steps = transitions.sum()
    within = float(np.trace(transitions) / total_steps) if total_steps else 0.0
    revisit = (len(visits) - len(unique)) / len(visits) if visits else 0.0

    steps = [_wrapped_step(theta[a], theta[b]) for a, b in zip(visits, visits[1:])]
    if steps:
        positive = sum(1 for s in steps if s > 0)
        negative = sum(1 for s in steps if s < 0)
        modal = 1.0 if positive >= negative else -1.0
        monotone = sum(1 for s in steps if math.copysign(1.0, s) == modal and s != 0)
        monotonicity = monotone / len(steps)
    else:
        monotonicity = 0.0

    return TrajectoryStats(
        coverage=coverage,
        dwell_by_cluster=dwell,
        transition_matrix=transitions,
        within_cluster_ratio=within,
        revisit_rate=revisit,
        angular_monotonicity=monotonicity,
        n_events=len(log.events),
    )


def export_stats(stats, out_dir):
    """Write stats.json, dwell.csv, and transitions.csv into out_dir.

    Formatting is deterministic. For a session with no events the CSVs
    contain only their header rows.
    """
    os.makedirs(out_dir, exist_ok=True)
    serialize.write(stats.to_dict(), os.path.join(out_dir, "stats.json"))

    dwell_lines = ["cluster,dwell_ms"]
    k = stats.transition_matrix.shape[0]
    if stats.n_events:
        for cluster in range(k):
            dwell_lines.append(f"{cluster},{format(stats.dwell_by_cluster[cluster], '.9g')}")
    _write_lines(os.path.join(out_dir, "dwell.csv"), dwell_lines)

    trans_lines = ["from_cluster," + ",".join(f"to_{c}" for c in range(k))]
    if stats.n_events:
        for i in range(k):
            row = ",".join(str(int(v)) for v in stats.transition_matrix[i])
            trans_lines.append(f"{i},{row}")
    _write_lines(os.path.join(out_dir, "transitions.csv"), trans_lines)
    return os.path.join(out_dir, "stats.json")


def _write_lines(path, lines):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
