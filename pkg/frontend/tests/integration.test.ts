// Cross-component check: a scripted viewer session produces a trajectory
// log that the pipeline's own `analyze` command accepts and reduces to the
// hand-computed statistics. Requires the Python package to be installed
// (`pip install -e ..` from the repository root).

import { execFileSync } from 'node:child_process';
import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';
import { ExplorationSession } from '../src/session.js';
import { circleScene } from './helpers.js';

function writeSceneBundle(dir: string): string {
  const scene = circleScene(6, [0, 0, 0, 1, 1, 1]);
  mkdirSync(join(dir, 'audio'), { recursive: true });
  for (const point of scene.points) {
    writeFileSync(join(dir, point.audio), '');
  }
  writeFileSync(join(dir, 'pan.png'), '');
  const scenePath = join(dir, 'scene.json');
  writeFileSync(scenePath, JSON.stringify(scene, null, 2));
  return scenePath;
}

function runAnalyze(scenePath: string, logPath: string, outDir: string): void {
  execFileSync('audioscape', ['analyze', '--scene', scenePath, '--log', logPath,
                              '--out', outDir],
               { stdio: ['ignore', 'pipe', 'pipe'] });
}

describe('viewer log consumed by the pipeline analytics', () => {
  it('scripted session matches the golden stats through `audioscape analyze`', () => {
    const dir = mkdtempSync(join(tmpdir(), 'viewer-int-'));
    const scenePath = writeSceneBundle(dir);

    const session = new ExplorationSession(circleScene(6, [0, 0, 0, 1, 1, 1]), 'p1', 0);
    session.pointerEnter(2, 0);
    session.playbackComplete(1000);
    session.pointerEnter(5, 1500);
    session.pointerExit(1900);
    session.pointerEnter(2, 2200);
    const log = session.export(2800);
    expect(log.events.map((e) => e.point_id)).toEqual([2, 5, 2]);

    const logPath = join(dir, 'trajectory.json');
    writeFileSync(logPath, JSON.stringify(log, null, 2));
    const outDir = join(dir, 'stats');
    // analyze validates the log against the scene schema before computing
    runAnalyze(scenePath, logPath, outDir);

    const stats = JSON.parse(readFileSync(join(outDir, 'stats.json'), 'utf-8'));
    expect(stats.n_events).toBe(3);
    expect(stats.dwell_by_cluster).toEqual({ '0': 1600.0, '1': 400.0 });
    expect(stats.transition_matrix).toEqual([[0, 1], [1, 0]]);
    expect(stats.within_cluster_ratio).toBe(0.0);
    expect(stats.coverage).toBeCloseTo(2 / 6, 8);
    expect(stats.revisit_rate).toBeCloseTo(1 / 3, 8);
    // steps theta=2 -> 5 -> 2: one forward, one backward; tie resolves forward
    expect(stats.angular_monotonicity).toBe(0.5);

    const dwellCsv = readFileSync(join(outDir, 'dwell.csv'), 'utf-8');
    expect(dwellCsv).toBe('cluster,dwell_ms\n0,1600\n1,400\n');
  });

  it('a log with an unknown id is rejected by the pipeline', () => {
    const dir = mkdtempSync(join(tmpdir(), 'viewer-rej-'));
    const scenePath = writeSceneBundle(dir);
    const logPath = join(dir, 'trajectory.json');
    writeFileSync(logPath, JSON.stringify({
      session_id: 'x', scene_ref: 'demo',
      events: [{ point_id: 42, t_start_ms: 0, dwell_ms: 10 }],
      total_duration_ms: 10,
    }));
    expect(() => runAnalyze(scenePath, logPath, join(dir, 'stats')))
      .toThrow(/Command failed|non-zero/i);
  });
});
