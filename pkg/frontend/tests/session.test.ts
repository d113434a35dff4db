/** Scripted end-to-end collection session against the real service:
 * five explained moves (one via redo), a review-phase edit, and an
 * export that must be valid JSONL.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import { TurnController } from "../src/controller.js";
import { startServer, type TestServer } from "./server.js";

let server: TestServer;

beforeAll(async () => {
  server = await startServer(8731);
}, 30_000);

afterAll(() => server.stop());

describe("scripted collection session", () => {
  it("records five explained moves, one redo and one edit, then exports valid JSONL", async () => {
    let now = 0;
    const controller = new TurnController(
      new SessionClient(server.baseUrl),
      () => now,
    );
    const info = await controller.start();
    expect(info.phase).toBe("tutorial");
    await controller.advancePhase("collecting");

    const tick = () => {
      now += 10; // let the think-aloud pause elapse
    };

    await controller.takeAction("left");
    expect(controller.pauseRemaining()).toBe(10);
    await controller.submitRationale("stepping aside to line up with a gap");
    tick();

    await controller.takeAction("right");
    await controller.submitRationale("moving back toward the middle");
    tick();

    // same action again: the redo button becomes available and recycles
    // the previous rationale
    await controller.takeAction("right");
    expect(controller.canRedo()).toBe(true);
    const redone = await controller.redo();
    expect(redone.redo_of).toBe(controller.committed[1].id);
    expect(redone.rationale).toBe("moving back toward the middle");
    tick();

    await controller.takeAction("left");
    expect(controller.canRedo()).toBe(false);
    await controller.submitRationale("drifting left again");
    tick();

    await controller.takeAction("right");
    await controller.submitRationale("waiting here for the log to come around");
    tick();

    expect(controller.committed).toHaveLength(5);

    await controller.advancePhase("review");
    const edited = await controller.editRecord(
      controller.committed[0].id,
      "stepping aside so the next car misses me",
    );
    expect(edited.edited).toBe(true);

    const jsonl = await new SessionClient(server.baseUrl, info.id).exportJsonl();
    const lines = jsonl.trim().split("\n");
    expect(lines).toHaveLength(5);
    const parsed = lines.map((line) => JSON.parse(line));
    for (const rec of parsed) {
      expect(typeof rec.id).toBe("string");
      expect(typeof rec.grid).toBe("string");
      expect(rec.frog).toHaveLength(2);
      expect(["up", "down", "left", "right"]).toContain(rec.action);
      expect(rec.rationale.length).toBeGreaterThan(0);
    }
    expect(parsed.filter((r) => r.redo_of !== null)).toHaveLength(1);
    expect(parsed.filter((r) => r.edited)).toHaveLength(1);
    expect(parsed[0].rationale).toBe("stepping aside so the next car misses me");
  });

  it("enforces the pause countdown between turns", async () => {
    let now = 0;
    const controller = new TurnController(
      new SessionClient(server.baseUrl),
      () => now,
    );
    await controller.start();
    await controller.advancePhase("collecting");
    await controller.takeAction("left");
    await controller.submitRationale("first move");
    expect(controller.canAct()).toBe(false);
    await expect(controller.takeAction("right")).rejects.toThrow(/pause/);
    now += 10;
    expect(controller.canAct()).toBe(true);
    await controller.takeAction("right");
  });
});
