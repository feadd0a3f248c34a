/** Scene manifests store z as elevation (right-handed, z-up). three.js is
 * right-handed y-up, so we rotate the frame: up becomes y, and the old y
 * axis becomes -z. Handedness is preserved. */

import type { Position } from './types.js';

export function sceneToRenderer(p: Position): [number, number, number] {
  return [p.x, p.z, -p.y];
}
