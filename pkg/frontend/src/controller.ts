/** Client-side turn-taking state machine.
 *
 * Mirrors the server contract so illegal moves are blocked before any
 * network round trip: an action opens a rationale slot and starts a
 * pause countdown; the next action is allowed only after the rationale
 * is in and the countdown has elapsed. Redo is offered only when the
 * pending action repeats the previous committed one.
 */

import type { ActionName, ActionResult, Phase, RecordView, SessionInfo } from "./types.js";
import { SessionClient } from "./client.js";

export class TurnError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TurnError";
  }
}

export type Clock = () => number;

export class TurnController {
  phase: Phase = "tutorial";
  state: SessionInfo["state"] | null = null;
  pendingAction: ActionName | null = null;
  lastOutcome: ActionResult["outcome"] | null = null;
  committed: RecordView[] = [];
  private pauseUntil = 0;

  constructor(
    private readonly client: SessionClient,
    private readonly clock: Clock = () => Date.now() / 1000,
  ) {}

  async start(): Promise<SessionInfo> {
    const info = await this.client.start();
    this.phase = info.phase;
    this.state = info.state;
    return info;
  }

  async advancePhase(phase: Phase): Promise<void> {
    if (this.pendingAction !== null) {
      throw new TurnError("finish the pending rationale first");
    }
    await this.client.advancePhase(phase);
    this.phase = phase;
  }

  pauseRemaining(): number {
    return Math.max(0, this.pauseUntil - this.clock());
  }

  canAct(): boolean {
    return (
      this.phase === "collecting" &&
      this.pendingAction === null &&
      this.pauseRemaining() === 0 &&
      this.state !== null &&
      this.state.status === "running"
    );
  }

  async takeAction(action: ActionName): Promise<ActionResult> {
    if (this.phase !== "collecting") {
      throw new TurnError("actions are only allowed while collecting");
    }
    if (this.pendingAction !== null) {
      throw new TurnError("a rationale is still pending");
    }
    if (this.pauseRemaining() > 0) {
      throw new TurnError("the think-aloud pause has not elapsed");
    }
    const result = await this.client.takeAction(action);
    this.pendingAction = action;
    this.state = result.state;
    this.lastOutcome = result.outcome;
    this.pauseUntil = this.clock() + result.pause_seconds;
    return result;
  }

  /** Redo is only meaningful when the pending action repeats the last one. */
  canRedo(): boolean {
    return (
      this.pendingAction !== null &&
      this.committed.length > 0 &&
      this.committed[this.committed.length - 1].action === this.pendingAction
    );
  }

  async submitRationale(text: string): Promise<RecordView> {
    if (this.pendingAction === null) {
      throw new TurnError("no action awaiting a rationale");
    }
    if (!text.trim()) {
      throw new TurnError("rationale must be non-empty");
    }
    const { record } = await this.client.submitRationale(text.trim());
    this.committed.push(record);
    this.pendingAction = null;
    return record;
  }

  async redo(): Promise<RecordView> {
    if (!this.canRedo()) {
      throw new TurnError("redo only applies to a repeated action");
    }
    const { record } = await this.client.redo();
    this.committed.push(record);
    this.pendingAction = null;
    return record;
  }

  async editRecord(recordId: string, text: string): Promise<RecordView> {
    if (this.phase !== "review") {
      throw new TurnError("edits are only allowed in the review phase");
    }
    if (!text.trim()) {
      throw new TurnError("rationale must be non-empty");
    }
    const { record } = await this.client.editRecord(recordId, text.trim());
    const i = this.committed.findIndex((r) => r.id === recordId);
    if (i >= 0) this.committed[i] = record;
    return record;
  }
}
