// End-to-end smoke against a live engine service: edit, beta overlay, grade
// badge. Spawns the Python service on a scratch corpus; requires the primary
// package to be installed (pip install -e ..).

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, mkdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { EditorStore } from "../src/store.js";

const PORT = 8991;
const BASE = `http://127.0.0.1:${PORT}`;

function ladderDoc(name: string, diff: number, grade: string | null): string {
  const lines = ["WALL 3.000 4.500", "PANEL 0.000 4.500 90.000"];
  for (let i = 0; i < 6; i++) {
    lines.push(`HOLD ${name}_${i} 1.500 ${(0.4 + i * 0.55).toFixed(3)} jug ${diff.toFixed(3)} hand 0.000`);
  }
  lines.push(`ROUTE ${name}`, `START ${name}_0`, `FINISH ${name}_5`,
    "USE " + Array.from({ length: 6 }, (_, i) => `${name}_${i}`).join(" "));
  if (grade) lines.push(`GRADE ${grade}`);
  return lines.join("\n") + "\n";
}

let server: ChildProcess | null = null;

async function waitForServer(): Promise<boolean> {
  for (let i = 0; i < 200; i++) {
    try {
      const res = await fetch(`${BASE}/api/wall`);
      if (res.ok) return true;
    } catch {
      // still starting
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  return false;
}

const pythonOk = spawnSync("python3", ["-c", "import crux"], { encoding: "utf-8" }).status === 0;

describe.skipIf(!pythonOk)("live service smoke", () => {
  beforeAll(async () => {
    const dir = mkdtempSync(join(tmpdir(), "crux-e2e-"));
    const corpus = join(dir, "corpus");
    mkdirSync(corpus);
    const grades: Array<[number, string]> = [[0.2, "5.8"], [0.55, "5.10a"], [0.9, "5.12a"]];
    grades.forEach(([diff, grade], k) => {
      for (let j = 0; j < 2; j++) {
        writeFileSync(join(corpus, `c${k}${j}.crux`), ladderDoc(`c${k}${j}`, diff + 0.01 * j, grade));
      }
    });
    writeFileSync(join(corpus, "wall.crux"), ladderDoc("work", 0.5, null));
    const pop = join(dir, "pop.json");
    writeFileSync(pop, JSON.stringify({
      size: 150, ability_mean: 1.35, ability_std: 0.5, seed: 42,
    }));
    server = spawn("python3", ["-m", "crux.cli", "serve", "--port", String(PORT),
      "--corpus", corpus, "--population", pop], { stdio: "ignore" });
    expect(await waitForServer()).toBe(true);
  }, 120_000);

  afterAll(() => {
    server?.kill();
  });

  it("edit -> beta overlay -> grade badge", async () => {
    const api = new ApiClient(BASE);
    const store = new EditorStore(api, 10);
    await store.load();
    let snap = store.snapshot();
    expect(snap.doc?.routes[0]?.name).toBe("work");
    expect(snap.overlayFresh).toBe(true);
    expect(snap.overlay?.beta?.beta.moves.length).toBeGreaterThan(0);
    const firstGrade = snap.overlay?.grade?.grade;
    expect(firstGrade).toBeTruthy();

    // drag a mid hold and commit: a fresh overlay must arrive for the new revision
    store.moveHold("work_2", 1.2, 1.5);
    await store.flush();
    for (let i = 0; i < 100 && !store.snapshot().overlayFresh; i++) {
      await new Promise((r) => setTimeout(r, 100));
    }
    snap = store.snapshot();
    expect(snap.dirty).toBe(false);
    expect(snap.overlayFresh).toBe(true);
    expect(snap.overlay!.revision).toBe(snap.revision);
    expect(snap.overlay?.grade?.grade).toBeTruthy();
    expect(snap.overlay?.grade?.scores.length).toBe(3);
    store.dispose();
  }, 120_000);

  it("generation job runs to completion and can be adopted", async () => {
    const api = new ApiClient(BASE);
    const store = new EditorStore(api, 10, 100);
    await store.load();
    await store.startGeneration({
      target_grade: "5.10a",
      max_iterations: 30,
      seed: 1,
      hold_budget: 6,
      in_loop_population: 40,
    });
    for (let i = 0; i < 600 && !["done", "failed", "cancelled"].includes(store.snapshot().job?.status ?? ""); i++) {
      await new Promise((r) => setTimeout(r, 200));
    }
    const job = store.snapshot().job;
    expect(job?.status).toBe("done");
    expect(job?.result?.report.iterations).toBe(30);
    await store.adoptJobResult();
    for (let i = 0; i < 100 && !store.snapshot().overlayFresh; i++) {
      await new Promise((r) => setTimeout(r, 100));
    }
    const snap = store.snapshot();
    expect(snap.doc?.routes[0]?.name).toBe("generated");
    expect(snap.overlayFresh).toBe(true);
    store.dispose();
  }, 180_000);
});
