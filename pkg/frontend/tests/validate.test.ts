import { describe, expect, it } from 'vitest';
import { parseScene, validateScene } from '../src/types.js';
import { circleScene } from './helpers.js';

describe('validateScene', () => {
  it('accepts a pipeline-shaped manifest', () => {
    expect(validateScene(circleScene(5, [0, 0, 1, 1, 1]))).toEqual([]);
  });

  it('flags missing top-level fields', () => {
    const { radius, ...rest } = circleScene(3, [0, 0, 0]) as never as Record<string, unknown>;
    expect(validateScene(rest)).toContain('missing_field:radius');
  });

  it('flags bad colors, duplicate ids, and off-cylinder points', () => {
    const scene = circleScene(4, [0, 0, 1, 1]);
    scene.colors = { ...scene.colors, playing: 'red' };
    scene.points[1].id = 0;
    scene.points[2].position.x += 0.5;
    const violations = validateScene(scene);
    expect(violations).toContain('invalid_color:playing');
    expect(violations).toContain('duplicate_point_id');
    expect(violations).toContain('position_radius_mismatch:2');
  });

  it('flags non-contiguous cluster ids and wrong versions', () => {
    const scene = circleScene(3, [0, 0, 2]);
    expect(validateScene(scene)).toContain('cluster_ids_not_contiguous');
    const wrong = { ...circleScene(3, [0, 0, 0]), version: '9' };
    expect(validateScene(wrong)).toContain('bad_version:9');
  });

  it('parseScene throws with the violation list', () => {
    expect(() => parseScene({})).toThrow(/missing_field/);
    expect(() => parseScene(circleScene(3, [0, 0, 0]))).not.toThrow();
  });
});
