// Revision-token discipline against a scripted fake server.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { EditorStore } from "../src/store.js";
import type { BetaResponse, DocumentObj, GradeResponse } from "../src/types.js";

function demoDoc(): DocumentObj {
  return {
    wall: {
      width_m: 3,
      height_m: 4.5,
      panels: [{ y0: 0, y1: 4.5, angle_deg: 90 }],
      holds: [
        { id: "a", x: 1.5, y: 0.5, type: "jug", difficulty: 0.2, roles: ["hand"], orientation_deg: 0 },
        { id: "f", x: 1.5, y: 1.6, type: "jug", difficulty: 0.2, roles: ["hand"], orientation_deg: 0 },
      ],
    },
    routes: [{
      name: "work",
      hold_ids: ["a", "f"],
      start_hold_ids: ["a"],
      finish_hold_id: "f",
      grade: null,
      style_tags: [],
    }],
  };
}

function betaResponse(tag: number): BetaResponse {
  return {
    beta: { states: [], moves: [], total_cost: tag },
    success_probability: 0.5,
  };
}

function gradeResponse(grade: string): GradeResponse {
  return {
    grade,
    scores: [{
      grade,
      p_route_given_set: 0.5,
      p_set_given_route: 0.5,
      conjunction: 0.25,
      qualifiers: 100,
      ascenders: 100,
      flags: [],
    }],
  };
}

type Deferred = {
  resolve(res: Response): void;
  reject(err: unknown): void;
  promise: Promise<Response>;
};

function deferred(): Deferred {
  let resolve!: (res: Response) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<Response>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { resolve, reject, promise };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("EditorStore revision tokens", () => {
  let calls: { path: string; body: unknown; gate: Deferred }[];
  let store: EditorStore;

  function fakeFetch(path: string, init?: RequestInit): Promise<Response> {
    const gate = deferred();
    calls.push({ path, body: init?.body ? JSON.parse(init.body as string) : undefined, gate });
    return gate.promise;
  }

  beforeEach(() => {
    vi.useFakeTimers();
    calls = [];
    store = new EditorStore(new ApiClient("", fakeFetch), 200);
  });

  afterEach(() => {
    store.dispose();
    vi.useRealTimers();
  });

  async function settle(): Promise<void> {
    // let queued promise continuations run
    for (let i = 0; i < 10; i++) await Promise.resolve();
  }

  async function loadDocument(): Promise<void> {
    const loading = store.load();
    await settle();
    calls.shift()!.gate.resolve(jsonResponse(demoDoc()));
    await settle();
    // initial overlay pair
    const beta = calls.shift()!;
    const grade = calls.shift()!;
    beta.gate.resolve(jsonResponse(betaResponse(0)));
    grade.gate.resolve(jsonResponse(gradeResponse("5.8")));
    await loading;
    await settle();
  }

  it("applies edits optimistically and debounces the commit", async () => {
    await loadDocument();
    expect(store.snapshot().overlayFresh).toBe(true);
    store.moveHold("a", 1.0, 0.6);
    store.moveHold("a", 1.1, 0.7);
    expect(store.snapshot().dirty).toBe(true);
    expect(store.snapshot().doc!.wall.holds[0].x).toBe(1.1);
    expect(calls).toHaveLength(0); // debounce pending
    vi.advanceTimersByTime(199);
    expect(calls).toHaveLength(0);
    vi.advanceTimersByTime(1);
    await settle();
    expect(calls[0].path).toBe("/api/wall");
  });

  it("discards stale overlays: latest revision wins", async () => {
    await loadDocument();
    const rev1 = store.snapshot().revision;

    // first edit commits and its overlay pair goes out
    store.moveHold("a", 1.0, 0.6);
    vi.advanceTimersByTime(200);
    await settle();
    calls.shift()!.gate.resolve(jsonResponse(demoDoc())); // PUT ok
    await settle();
    const slowBeta = calls.shift()!;
    const slowGrade = calls.shift()!;

    // second edit while the first overlay pair is still in flight
    store.moveHold("a", 1.2, 0.8);
    vi.advanceTimersByTime(200);
    await settle();
    calls.shift()!.gate.resolve(jsonResponse(demoDoc())); // PUT ok
    await settle();

    // now the SLOW first-pair responses arrive: they must be discarded
    slowBeta.gate.resolve(jsonResponse(betaResponse(111)));
    slowGrade.gate.resolve(jsonResponse(gradeResponse("5.1")));
    await settle();
    const snapAfterStale = store.snapshot();
    expect(snapAfterStale.overlay?.beta?.beta.total_cost).not.toBe(111);
    expect(snapAfterStale.overlayFresh).toBe(false);

    // the store chases the newest committed revision with a fresh pair
    const freshBeta = calls.shift()!;
    const freshGrade = calls.shift()!;
    freshBeta.gate.resolve(jsonResponse(betaResponse(222)));
    freshGrade.gate.resolve(jsonResponse(gradeResponse("5.9")));
    await settle();
    const snap = store.snapshot();
    expect(snap.overlayFresh).toBe(true);
    expect(snap.overlay!.beta!.beta.total_cost).toBe(222);
    expect(snap.overlay!.grade!.grade).toBe("5.9");
    expect(snap.overlay!.revision).toBe(snap.revision);
    expect(snap.revision).toBeGreaterThan(rev1);
  });

  it("keeps at most one overlay pair in flight", async () => {
    await loadDocument();
    void store.refreshOverlays();
    await settle();
    void store.refreshOverlays();
    await settle();
    // only one beta+grade pair went out
    expect(calls).toHaveLength(2);
    expect(calls.map((c) => c.path).sort()).toEqual(["/api/beta", "/api/grade"]);
  });

  it("surfaces 422 issue lists from a rejected commit", async () => {
    await loadDocument();
    store.markFinish("a");
    vi.advanceTimersByTime(200);
    await settle();
    calls.shift()!.gate.resolve(jsonResponse({
      code: "INVALID_ROUTE",
      detail: [{ route: "work", code: "FINISH_NOT_HANDHOLD", message: "finish hold has no hand role" }],
    }, 422));
    await settle();
    const snap = store.snapshot();
    expect(snap.issues).toHaveLength(1);
    expect(snap.issues[0].code).toBe("FINISH_NOT_HANDHOLD");
    expect(snap.overlay).toBeNull();
    expect(calls).toHaveLength(0); // no overlay pair for a rejected document
  });

  it("flags offline on network failure and keeps edits queued", async () => {
    await loadDocument();
    store.moveHold("a", 0.5, 0.5);
    vi.advanceTimersByTime(200);
    await settle();
    calls.shift()!.gate.reject(new TypeError("network down"));
    await settle();
    const snap = store.snapshot();
    expect(snap.offline).toBe(true);
    expect(snap.dirty).toBe(true);

    // connectivity returns: the next commit drains the queued edit
    store.moveHold("a", 0.6, 0.6);
    vi.advanceTimersByTime(200);
    await settle();
    const put = calls.shift()!;
    expect(put.path).toBe("/api/wall");
    put.gate.resolve(jsonResponse(demoDoc()));
    await settle();
    expect(store.snapshot().offline).toBe(false);
    expect(store.snapshot().dirty).toBe(false);
  });
});
