/** Browser entry point: wires the turn controller to the DOM.
 *
 * Layout expected in index.html: #board, #hud, #rationale (textarea),
 * #submit, #redo, #records, #phase, #status-line.
 */

import { SessionClient } from "./client.js";
import { TurnController, TurnError } from "./controller.js";
import { renderBoard, renderHud, renderRecordList } from "./render.js";
import type { ActionName, Phase } from "./types.js";

const KEY_ACTIONS: Record<string, ActionName> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function bootstrap(baseUrl: string): TurnController {
  const controller = new TurnController(new SessionClient(baseUrl));
  const board = el<HTMLDivElement>("board");
  const hud = el<HTMLDivElement>("hud");
  const rationale = el<HTMLTextAreaElement>("rationale");
  const submit = el<HTMLButtonElement>("submit");
  const redo = el<HTMLButtonElement>("redo");
  const recordList = el<HTMLDivElement>("records");
  const phaseButton = el<HTMLButtonElement>("phase");
  const statusLine = el<HTMLDivElement>("status-line");

  const NEXT_PHASE: Record<string, Phase> = {
    tutorial: "collecting",
    collecting: "review",
    review: "done",
  };

  function refresh(): void {
    if (controller.state) {
      board.innerHTML = renderBoard(controller.state.grid, controller.state.width);
      hud.innerHTML = renderHud(controller.state, controller.pauseRemaining());
    }
    recordList.innerHTML = renderRecordList(controller.committed);
    const pending = controller.pendingAction !== null;
    rationale.disabled = !pending;
    submit.disabled = !pending;
    redo.hidden = !controller.canRedo();
    phaseButton.textContent = `continue to ${NEXT_PHASE[controller.phase] ?? "end"}`;
    phaseButton.disabled = pending || controller.phase === "done";
  }

  function report(err: unknown): void {
    statusLine.textContent = err instanceof Error ? err.message : String(err);
  }

  document.addEventListener("keydown", async (event) => {
    const action = KEY_ACTIONS[event.key];
    if (!action || document.activeElement === rationale) return;
    event.preventDefault();
    try {
      await controller.takeAction(action);
      rationale.focus();
    } catch (err) {
      if (!(err instanceof TurnError)) throw err;
      report(err);
    }
    refresh();
  });

  submit.addEventListener("click", async () => {
    try {
      await controller.submitRationale(rationale.value);
      rationale.value = "";
      statusLine.textContent = "";
    } catch (err) {
      report(err);
    }
    refresh();
  });

  redo.addEventListener("click", async () => {
    try {
      await controller.redo();
      rationale.value = "";
    } catch (err) {
      report(err);
    }
    refresh();
  });

  phaseButton.addEventListener("click", async () => {
    const next = NEXT_PHASE[controller.phase];
    if (!next) return;
    try {
      await controller.advancePhase(next);
    } catch (err) {
      report(err);
    }
    refresh();
  });

  recordList.addEventListener("dblclick", async (event) => {
    const item = (event.target as HTMLElement).closest("[data-record-id]");
    if (!item || controller.phase !== "review") return;
    const current = controller.committed.find(
      (r) => r.id === item.getAttribute("data-record-id"),
    );
    const text = window.prompt("Edit rationale:", current?.rationale ?? "");
    if (text === null) return;
    try {
      await controller.editRecord(item.getAttribute("data-record-id")!, text);
    } catch (err) {
      report(err);
    }
    refresh();
  });

  window.setInterval(refresh, 500); // keeps the pause countdown ticking

  controller.start().then(refresh, report);
  return controller;
}
