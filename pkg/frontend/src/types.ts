/** Wire types shared with the pipeline: scene manifests in, trajectory logs out. */

export interface Position {
  x: number;
  y: number;
  z: number;
}

export interface ScenePoint {
  id: number;
  position: Position;
  audio: string;
  cluster: number;
  cluster_name?: string;
  duration_s: number;
}

export interface SceneColors {
  unexplored: string;
  playing: string;
  explored: string;
}

export interface SceneManifest {
  version: string;
  source_id: string;
  radius: number;
  panorama: string;
  colors: SceneColors;
  points: ScenePoint[];
  seam_diagnostic?: [number, number];
}

export interface TrajectoryEvent {
  point_id: number;
  t_start_ms: number;
  dwell_ms: number;
}

export interface TrajectoryLog {
  session_id: string;
  scene_ref: string;
  events: TrajectoryEvent[];
  total_duration_ms: number;
}

const SCENE_VERSION = '1';
const HEX_COLOR = /^#[0-9A-Fa-f]{6}$/;
// matches the exporter's radius check: absorbs 9-digit float serialization
const RADIUS_TOLERANCE = 1e-5;

function isNumber(v: unknown): v is number {
  return typeof v === 'number' && Number.isFinite(v);
}

/**
 * Validate a fetched scene manifest against the schema rules that apply
 * client-side (asset existence is checked by the browser when it fetches).
 * Returns violation codes; an empty list means the scene is usable.
 */
export function validateScene(data: unknown): string[] {
  const violations: string[] = [];
  if (typeof data !== 'object' || data === null) {
    return ['not_an_object'];
  }
  const scene = data as Record<string, unknown>;
  for (const key of ['version', 'source_id', 'radius', 'panorama', 'colors', 'points']) {
    if (!(key in scene)) {
      violations.push(`missing_field:${key}`);
    }
  }
  if (violations.length > 0) {
    return violations;
  }
  if (scene.version !== SCENE_VERSION) {
    violations.push(`bad_version:${scene.version}`);
  }
  if (!isNumber(scene.radius) || scene.radius <= 0) {
    violations.push('bad_radius');
  }
  const colors = scene.colors as Record<string, unknown>;
  for (const key of ['unexplored', 'playing', 'explored']) {
    if (typeof colors?.[key] !== 'string' || !HEX_COLOR.test(colors[key] as string)) {
      violations.push(`invalid_color:${key}`);
    }
  }
  const points = scene.points;
  if (!Array.isArray(points) || points.length === 0) {
    violations.push('no_points');
    return violations;
  }
  const ids: number[] = [];
  const clusters: number[] = [];
  const radius = isNumber(scene.radius) ? scene.radius : 0;
  for (const raw of points) {
    const p = raw as Record<string, unknown>;
    const missing = ['id', 'position', 'audio', 'cluster', 'duration_s']
      .filter((k) => !(k in p));
    if (missing.length > 0) {
      violations.push(`point_missing_field:${missing.join(',')}`);
      continue;
    }
    ids.push(p.id as number);
    clusters.push(p.cluster as number);
    const pos = p.position as Record<string, unknown>;
    if (!isNumber(pos?.x) || !isNumber(pos?.y) || !isNumber(pos?.z)) {
      violations.push(`point_missing_field:position_xyz (id ${p.id})`);
      continue;
    }
    if (radius > 0) {
      const horizontal = Math.hypot(pos.x as number, pos.y as number);
      if (Math.abs(horizontal - radius) > RADIUS_TOLERANCE * Math.max(1, radius)) {
        violations.push(`position_radius_mismatch:${p.id}`);
      }
    }
    if (!isNumber(p.duration_s) || (p.duration_s as number) <= 0) {
      violations.push(`duration_nonpositive:${p.id}`);
    }
  }
  if (new Set(ids).size !== ids.length) {
    violations.push('duplicate_point_id');
  } else {
    const sorted = [...ids].sort((a, b) => a - b);
    if (!sorted.every((v, i) => v === i)) {
      violations.push('point_id_range');
    }
  }
  if (clusters.some((c) => !Number.isInteger(c) || c < 0)) {
    violations.push('cluster_id_invalid');
  } else if (clusters.length > 0) {
    const seen = new Set(clusters);
    const max = Math.max(...clusters);
    for (let c = 0; c <= max; c++) {
      if (!seen.has(c)) {
        violations.push('cluster_ids_not_contiguous');
        break;
      }
    }
  }
  return violations;
}

export function parseScene(data: unknown): SceneManifest {
  const violations = validateScene(data);
  if (violations.length > 0) {
    throw new Error(`invalid scene manifest: ${violations.join(', ')}`);
  }
  return data as SceneManifest;
}
