// Workbench bootstrap: canvas editor + audit table + generation panel.

import { ApiClient } from "./api.js";
import { WallCanvas } from "./canvas.js";
import { EditorStore } from "./store.js";
import type { EditorSnapshot } from "./store.js";
import type { HoldObj } from "./types.js";

const GRADE_NUMBERS = Array.from({ length: 9 }, (_, i) => `5.${i + 1}`);
const GRADE_LETTERS = Array.from({ length: 6 }, (_, i) => i + 10)
  .flatMap((n) => ["a", "b", "c", "d"].map((c) => `5.${n}${c}`));
const ALL_GRADES = [...GRADE_NUMBERS, ...GRADE_LETTERS];
const HOLD_TYPES = ["jug", "crimp", "sloper", "pinch", "pocket", "foothold", "volume"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function nextHoldId(holds: HoldObj[]): string {
  let n = 0;
  for (const h of holds) {
    const m = /^u(\d+)$/.exec(h.id);
    if (m) n = Math.max(n, parseInt(m[1], 10) + 1);
  }
  return `u${String(n).padStart(3, "0")}`;
}

function renderAudit(snapshot: EditorSnapshot): string {
  const grade = snapshot.overlay?.grade;
  if (!grade || !snapshot.overlayFresh) return "";
  const max = Math.max(...grade.scores.map((s) => s.conjunction), 1e-9);
  return grade.scores
    .map((s) => {
      const width = Math.round((s.conjunction / max) * 100);
      const flags = s.flags.length ? ` <span class="flags">${s.flags.join(",")}</span>` : "";
      return `<div class="audit-row${s.grade === grade.grade ? " best" : ""}">
        <span class="audit-grade">${s.grade}</span>
        <span class="bar"><span class="fill" style="width:${width}%"></span></span>
        <span class="audit-num">${s.conjunction.toFixed(3)}</span>${flags}
      </div>`;
    })
    .join("");
}

function renderSparkline(canvas: HTMLCanvasElement, trace: number[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (trace.length < 2) return;
  const lo = Math.min(...trace);
  const hi = Math.max(...trace);
  const span = hi - lo || 1;
  ctx.beginPath();
  trace.forEach((v, i) => {
    const x = (i / (trace.length - 1)) * (canvas.width - 4) + 2;
    const y = canvas.height - 3 - ((v - lo) / span) * (canvas.height - 6);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 1.5;
  ctx.stroke();
}

export function boot(): void {
  const api = new ApiClient("");
  const store = new EditorStore(api);
  const canvas = new WallCanvas(el<HTMLCanvasElement>("wall"), {
    onSelect: (id) => store.selectHold(id),
    onDrag: (id, x, y) => store.moveHold(id, x, y),
    onDragEnd: () => void store.flush(),
    onAddAt: (x, y) => {
      const doc = store.snapshot().doc;
      if (!doc) return;
      store.addHold({
        id: nextHoldId(doc.wall.holds),
        x, y,
        type: "jug",
        difficulty: 0.3,
        roles: ["hand", "foot"],
        orientation_deg: 0,
      });
    },
  });

  const gradeSelect = el<HTMLSelectElement>("target-grade");
  for (const g of ALL_GRADES) {
    const opt = document.createElement("option");
    opt.value = g;
    opt.textContent = g;
    if (g === "5.10a") opt.selected = true;
    gradeSelect.appendChild(opt);
  }
  const typeSelect = el<HTMLSelectElement>("hold-type");
  for (const t of HOLD_TYPES) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    typeSelect.appendChild(opt);
  }

  el<HTMLButtonElement>("mark-start").onclick = () => {
    const id = store.snapshot().selectedHoldId;
    if (id) store.markStart(id);
  };
  el<HTMLButtonElement>("mark-finish").onclick = () => {
    const id = store.snapshot().selectedHoldId;
    if (id) store.markFinish(id);
  };
  el<HTMLButtonElement>("delete-hold").onclick = () => {
    const id = store.snapshot().selectedHoldId;
    if (id) store.deleteHold(id);
  };
  typeSelect.onchange = () => {
    const id = store.snapshot().selectedHoldId;
    if (id) store.setHoldField(id, "type", typeSelect.value);
  };
  const diffInput = el<HTMLInputElement>("hold-difficulty");
  diffInput.oninput = () => {
    const id = store.snapshot().selectedHoldId;
    if (id) store.setHoldField(id, "difficulty", parseFloat(diffInput.value));
  };

  el<HTMLButtonElement>("vary").onclick = async () => {
    const route = store.workingRoute();
    if (!route) return;
    const intensity = parseFloat(el<HTMLInputElement>("vary-intensity").value);
    const seed = Math.floor(Math.random() * 1e9);
    const varied = await api.vary(route, intensity, seed);
    const accept = window.confirm(`Adopt variation (intensity ${intensity}, seed ${seed})?`);
    if (accept) {
      store.applyEdit((doc) => {
        doc.wall = varied.wall;
        doc.routes[0] = varied.route;
        return doc;
      });
      void store.flush();
    }
  };

  el<HTMLButtonElement>("gen-start").onclick = () => {
    void store.startGeneration({
      target_grade: gradeSelect.value,
      max_iterations: parseInt(el<HTMLInputElement>("gen-iterations").value, 10),
      seed: parseInt(el<HTMLInputElement>("gen-seed").value, 10),
      hold_budget: 12,
      in_loop_population: 128,
    });
  };
  el<HTMLButtonElement>("gen-cancel").onclick = () => void store.cancelGeneration();
  el<HTMLButtonElement>("gen-adopt").onclick = () => void store.adoptJobResult();

  store.subscribe((snapshot) => {
    canvas.render(snapshot);
    el("offline-banner").style.display = snapshot.offline ? "block" : "none";

    const badge = el("grade-badge");
    const grade = snapshot.overlay?.grade;
    if (snapshot.overlay?.locked) {
      badge.textContent = "LOCKED";
    } else if (grade && snapshot.overlayFresh) {
      badge.textContent = grade.grade;
    } else {
      badge.textContent = snapshot.dirty ? "…" : "—";
    }

    const betaInfo = el("beta-info");
    const beta = snapshot.overlay?.beta;
    if (snapshot.overlay?.unreachable) {
      betaInfo.textContent = "UNREACHABLE as set";
    } else if (beta && snapshot.overlayFresh) {
      betaInfo.textContent =
        `${beta.beta.moves.length} moves, cost ${beta.beta.total_cost.toFixed(3)}, ` +
        `p=${beta.success_probability.toFixed(3)}`;
    } else {
      betaInfo.textContent = "";
    }

    el("audit-table").innerHTML = renderAudit(snapshot);
    el("issues").innerHTML = snapshot.issues
      .map((i) => `<li>${i.code}: ${i.message}</li>`)
      .join("");

    const job = snapshot.job;
    el("gen-status").textContent = job
      ? `${job.status} @ ${job.progress.iteration}` +
        (job.progress.best_objective !== null
          ? ` (best ${job.progress.best_objective.toFixed(3)})`
          : "")
      : "";
    el<HTMLButtonElement>("gen-adopt").disabled = !(job?.result);
    renderSparkline(el<HTMLCanvasElement>("gen-trace"), snapshot.jobTrace);
    if (job?.result?.report) {
      el("gen-result").textContent =
        `achieved ${job.result.report.achieved_grade ?? "?"} ` +
        `margin ${job.result.report.necessitation_margin.toFixed(2)}`;
    }

    const selected = snapshot.selectedHoldId;
    const hold = snapshot.doc?.wall.holds.find((h) => h.id === selected);
    el("selection-info").textContent = hold
      ? `${hold.id} (${hold.type}, d=${hold.difficulty.toFixed(2)})`
      : "nothing selected";
    if (hold) {
      typeSelect.value = hold.type;
      diffInput.value = String(hold.difficulty);
    }
  });

  void store.load();
}

if (typeof document !== "undefined" && document.getElementById("wall")) {
  boot();
}
