/** Pure HTML-string renderers (keeps the DOM layer trivial to test). */

import type { GameStateView, RecordView } from "./types.js";

const CELL_CLASS: Record<string, string> = {
  ".": "empty",
  C: "car",
  L: "log",
  W: "water",
  M: "median",
  G: "goal",
  F: "frog",
  "#": "oob",
};

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBoard(grid: string, width: number): string {
  const rows: string[] = [];
  for (let start = 0; start < grid.length; start += width) {
    const cells = [...grid.slice(start, start + width)]
      .map((sym) => {
        const cls = CELL_CLASS[sym] ?? "unknown";
        return `<td class="cell ${cls}">${escapeHtml(sym)}</td>`;
      })
      .join("");
    rows.push(`<tr>${cells}</tr>`);
  }
  return `<table class="board">${rows.join("")}</table>`;
}

export function renderHud(state: GameStateView, pauseRemaining: number): string {
  const pause =
    pauseRemaining > 0
      ? `<span class="pause">think aloud: ${Math.ceil(pauseRemaining)}s</span>`
      : "";
  return (
    `<span class="lives">lives: ${state.lives}</span> ` +
    `<span class="tick">turn: ${state.tick}</span> ` +
    `<span class="status">${escapeHtml(state.status)}</span> ${pause}`
  );
}

export function renderRecordList(records: RecordView[]): string {
  const items = records
    .map((rec) => {
      const flags = [
        rec.redo_of ? "redo" : "",
        rec.edited ? "edited" : "",
      ]
        .filter(Boolean)
        .join(", ");
      return (
        `<li data-record-id="${escapeHtml(rec.id)}">` +
        `<b>${escapeHtml(rec.action)}</b>: ${escapeHtml(rec.rationale)}` +
        (flags ? ` <i>(${flags})</i>` : "") +
        `</li>`
      );
    })
    .join("");
  return `<ol class="records">${items}</ol>`;
}
