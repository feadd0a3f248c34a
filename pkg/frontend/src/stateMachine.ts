/** Per-point interaction state: unexplored -> playing -> explored, with
 * replay allowed (explored -> playing). A point never returns to
 * unexplored once touched. */

import type { SceneColors } from './types.js';

export type PointState = 'unexplored' | 'playing' | 'explored';

export type PointAction = 'start' | 'stop';

const TRANSITIONS: Record<PointState, Partial<Record<PointAction, PointState>>> = {
  unexplored: { start: 'playing' },
  playing: { stop: 'explored' },
  explored: { start: 'playing' },
};

export function transition(state: PointState, action: PointAction): PointState {
  const next = TRANSITIONS[state][action];
  if (next === undefined) {
    throw new Error(`undefined transition: ${state} + ${action}`);
  }
  return next;
}

export function colorFor(state: PointState, colors: SceneColors): string {
  return colors[state];
}

/** Tracks the state of every point in a scene. */
export class PointStates {
  private readonly states = new Map<number, PointState>();

  constructor(pointIds: Iterable<number>) {
    for (const id of pointIds) {
      this.states.set(id, 'unexplored');
    }
  }

  get(id: number): PointState {
    const state = this.states.get(id);
    if (state === undefined) {
      throw new Error(`unknown point id ${id}`);
    }
    return state;
  }

  apply(id: number, action: PointAction): PointState {
    const next = transition(this.get(id), action);
    this.states.set(id, next);
    return next;
  }

  snapshot(): Map<number, PointState> {
    return new Map(this.states);
  }
}
