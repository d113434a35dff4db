/** Shared wire types for the collection service API. */

export type ActionName = "up" | "down" | "left" | "right";

export type Phase = "tutorial" | "collecting" | "review" | "done";

export interface GameStateView {
  grid: string;
  board: string;
  frog: [number, number];
  lives: number;
  tick: number;
  status: "running" | "won" | "lost";
  width: number;
  height: number;
}

export interface StepOutcomeView {
  reward: number;
  event: string;
  terminal: boolean;
}

export interface SessionInfo {
  id: string;
  state: GameStateView;
  phase: Phase;
}

export interface ActionResult {
  state: GameStateView;
  outcome: StepOutcomeView;
  pause_seconds: number;
}

export interface RecordView {
  id: string;
  grid: string;
  frog: [number, number];
  lives: number;
  tick: number;
  action: ActionName;
  rationale: string;
  participant: string | null;
  redo_of: string | null;
  edited: boolean;
  ts: number;
  board?: string;
}
