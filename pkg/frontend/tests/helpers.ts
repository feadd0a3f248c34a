import type { SceneManifest } from '../src/types.js';

export const COLORS = { unexplored: '#FFFFFF', playing: '#FF0000', explored: '#00FF00' };

/** n points on a radius-5 circle at theta = 0, 1, 2, ... radians. */
export function circleScene(n: number, clusters: number[], durationS = 1.0): SceneManifest {
  return {
    version: '1',
    source_id: 'demo',
    radius: 5.0,
    panorama: 'pan.png',
    colors: COLORS,
    points: Array.from({ length: n }, (_, i) => ({
      id: i,
      position: { x: 5 * Math.cos(i), y: 5 * Math.sin(i), z: 0 },
      audio: `audio/a_${String(i).padStart(4, '0')}.wav`,
      cluster: clusters[i],
      duration_s: durationS,
    })),
  };
}

/** Deterministic PRNG (mulberry32) for property-style tests. */
export function prng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
