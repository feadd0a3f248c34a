/** Exploration session: drives the point state machine from pointer and
 * playback signals and records the trajectory log.
 *
 * Dwell rule (shared with the analytics side): an event's dwell runs from
 * playback start until playback completes or the pointer leaves the
 * point, whichever happens first. Pointing at a new point implicitly
 * leaves the previous one. Exporting the log finalizes any still-active
 * playback at the export timestamp.
 */

import { PointStates, type PointState } from './stateMachine.js';
import type { SceneManifest, TrajectoryEvent, TrajectoryLog } from './types.js';

interface ActivePlayback {
  pointId: number;
  startMs: number;
  finalized: boolean;
}

export interface PlaybackHooks {
  /** Start (or restart) the audio of a point. */
  play?(pointId: number): void;
  /** Stop the audio of a point before its natural end. */
  stop?(pointId: number): void;
  /** A point changed color state. */
  stateChanged?(pointId: number, state: PointState): void;
}

export class ExplorationSession {
  readonly states: PointStates;
  private readonly events: TrajectoryEvent[] = [];
  private active: ActivePlayback | null = null;
  private readonly startedMs: number;

  constructor(
    private readonly scene: SceneManifest,
    private readonly sessionId: string,
    nowMs = 0,
    private readonly hooks: PlaybackHooks = {},
  ) {
    this.states = new PointStates(scene.points.map((p) => p.id));
    this.startedMs = nowMs;
  }

  /** The pointer ray acquired a point: begin playback there. */
  pointerEnter(pointId: number, nowMs: number): void {
    if (this.active !== null && this.active.pointId === pointId
        && !this.active.finalized) {
      return; // already playing this point
    }
    this.leaveActive(nowMs);
    this.states.apply(pointId, 'start');
    this.hooks.stateChanged?.(pointId, 'playing');
    this.hooks.play?.(pointId);
    this.active = { pointId, startMs: nowMs, finalized: false };
  }

  /** The pointer ray left whatever point it was on. */
  pointerExit(nowMs: number): void {
    this.leaveActive(nowMs);
    this.active = null;
  }

  /** The audio element of the active point played to its end. */
  playbackComplete(nowMs: number): void {
    if (this.active === null || this.active.finalized) {
      return;
    }
    this.finalize(nowMs, false);
    // the pointer may still rest on the point; nothing replays until it
    // leaves and comes back
  }

  /** Finalize and export the trajectory log. */
  export(nowMs: number): TrajectoryLog {
    this.leaveActive(nowMs);
    this.active = null;
    return {
      session_id: this.sessionId,
      scene_ref: this.scene.source_id,
      events: [...this.events],
      total_duration_ms: nowMs - this.startedMs,
    };
  }

  private leaveActive(nowMs: number): void {
    if (this.active !== null && !this.active.finalized) {
      this.finalize(nowMs, true);
    }
  }

  private finalize(nowMs: number, stoppedEarly: boolean): void {
    const active = this.active!;
    active.finalized = true;
    if (stoppedEarly) {
      this.hooks.stop?.(active.pointId);
    }
    this.states.apply(active.pointId, 'stop');
    this.hooks.stateChanged?.(active.pointId, 'explored');
    this.events.push({
      point_id: active.pointId,
      t_start_ms: active.startMs - this.startedMs,
      dwell_ms: Math.max(0, nowMs - active.startMs),
    });
  }
}
