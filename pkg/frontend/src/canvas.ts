// Wall rendering and pointer interaction. Pure display: hold positions come
// from the store, overlay arrows and numbers come verbatim from the server.

import type { EditorSnapshot } from "./store.js";
import type { BetaObj, HoldObj, WallObj } from "./types.js";

const LIMB_COLORS: Record<string, string> = {
  LH: "#d62728",
  RH: "#1f77b4",
  LF: "#2ca02c",
  RF: "#ff7f0e",
};

const TYPE_COLORS: Record<string, string> = {
  jug: "#4caf50",
  crimp: "#e53935",
  sloper: "#8e24aa",
  pinch: "#fb8c00",
  pocket: "#3949ab",
  foothold: "#6d4c41",
  volume: "#00897b",
};

export interface CanvasCallbacks {
  onSelect(id: string | null): void;
  onDrag(id: string, x: number, y: number): void;
  onDragEnd(): void;
  onAddAt(x: number, y: number): void;
}

export class WallCanvas {
  private dragging: string | null = null;
  private snapshot: EditorSnapshot | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly callbacks: CanvasCallbacks,
  ) {
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", () => this.pointerUp());
    canvas.addEventListener("dblclick", (e) => this.doubleClick(e));
  }

  private wall(): WallObj | null {
    return this.snapshot?.doc?.wall ?? null;
  }

  private scale(): number {
    const wall = this.wall();
    if (!wall) return 1;
    return Math.min(this.canvas.width / wall.width_m, this.canvas.height / wall.height_m);
  }

  private toPixels(x: number, y: number): [number, number] {
    const s = this.scale();
    const wall = this.wall()!;
    return [x * s, (wall.height_m - y) * s];
  }

  private toMeters(px: number, py: number): [number, number] {
    const s = this.scale();
    const wall = this.wall()!;
    return [px / s, wall.height_m - py / s];
  }

  private holdAt(px: number, py: number): HoldObj | null {
    const wall = this.wall();
    if (!wall) return null;
    for (const hold of [...wall.holds].reverse()) {
      const [hx, hy] = this.toPixels(hold.x, hold.y);
      if ((hx - px) ** 2 + (hy - py) ** 2 <= 12 ** 2) return hold;
    }
    return null;
  }

  private eventPoint(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [
      ((e.clientX - rect.left) / rect.width) * this.canvas.width,
      ((e.clientY - rect.top) / rect.height) * this.canvas.height,
    ];
  }

  private pointerDown(e: PointerEvent): void {
    const [px, py] = this.eventPoint(e);
    const hold = this.holdAt(px, py);
    this.callbacks.onSelect(hold?.id ?? null);
    if (hold) {
      this.dragging = hold.id;
      this.canvas.setPointerCapture(e.pointerId);
    }
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.dragging || !this.wall()) return;
    const [px, py] = this.eventPoint(e);
    const [x, y] = this.toMeters(px, py);
    const wall = this.wall()!;
    this.callbacks.onDrag(
      this.dragging,
      Math.min(Math.max(x, 0), wall.width_m),
      Math.min(Math.max(y, 0), wall.height_m),
    );
  }

  private pointerUp(): void {
    if (this.dragging) {
      this.dragging = null;
      this.callbacks.onDragEnd();
    }
  }

  private doubleClick(e: MouseEvent): void {
    const [px, py] = this.eventPoint(e);
    if (this.holdAt(px, py)) return;
    const [x, y] = this.toMeters(px, py);
    this.callbacks.onAddAt(x, y);
  }

  render(snapshot: EditorSnapshot): void {
    this.snapshot = snapshot;
    const ctx = this.canvas.getContext("2d");
    const wall = this.wall();
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (!wall) return;
    const s = this.scale();

    // panels, shaded by steepness
    for (const p of wall.panels) {
      const over = Math.max(0, p.angle_deg - 90) / 90;
      const shade = Math.round(245 - over * 60);
      ctx.fillStyle = `rgb(${shade},${shade},${shade + 5})`;
      const [, yTop] = this.toPixels(0, p.y1);
      ctx.fillRect(0, yTop, wall.width_m * s, (p.y1 - p.y0) * s);
      ctx.strokeStyle = "#ccc";
      ctx.strokeRect(0, yTop, wall.width_m * s, (p.y1 - p.y0) * s);
    }

    const route = snapshot.doc?.routes[0] ?? null;
    const inRoute = new Set(route?.hold_ids ?? []);

    // beta arrows under the holds
    const beta = snapshot.overlay?.beta?.beta ?? null;
    if (beta && snapshot.overlayFresh) {
      this.renderBeta(ctx, wall, beta);
    }

    for (const hold of wall.holds) {
      const [hx, hy] = this.toPixels(hold.x, hold.y);
      ctx.beginPath();
      ctx.arc(hx, hy, 9, 0, 2 * Math.PI);
      ctx.fillStyle = TYPE_COLORS[hold.type] ?? "#777";
      ctx.globalAlpha = inRoute.has(hold.id) ? 1.0 : 0.35;
      ctx.fill();
      ctx.globalAlpha = 1.0;
      // difficulty ring
      ctx.beginPath();
      ctx.arc(hx, hy, 11, -Math.PI / 2, -Math.PI / 2 + 2 * Math.PI * hold.difficulty);
      ctx.strokeStyle = "#222";
      ctx.lineWidth = 2;
      ctx.stroke();
      if (snapshot.selectedHoldId === hold.id) {
        ctx.beginPath();
        ctx.arc(hx, hy, 14, 0, 2 * Math.PI);
        ctx.strokeStyle = "#000";
        ctx.setLineDash([4, 3]);
        ctx.stroke();
        ctx.setLineDash([]);
      }
      if (route) {
        if (route.start_hold_ids.includes(hold.id)) {
          this.label(ctx, hx, hy + 24, "START");
        }
        if (route.finish_hold_id === hold.id) {
          this.label(ctx, hx, hy - 18, "FINISH");
        }
      }
    }
  }

  private renderBeta(ctx: CanvasRenderingContext2D, wall: WallObj, beta: BetaObj): void {
    const byId = new Map(wall.holds.map((h) => [h.id, h]));
    let step = 0;
    for (const move of beta.moves) {
      step += 1;
      const to = byId.get(move.to_hold);
      const from = byId.get(move.from_hold);
      if (!to) continue;
      const [tx, ty] = this.toPixels(to.x, to.y);
      if (!from) {
        // FREE placement: mark the destination only
        ctx.beginPath();
        ctx.arc(tx, ty, 15, 0, 2 * Math.PI);
        ctx.strokeStyle = LIMB_COLORS[move.limb];
        ctx.lineWidth = 1.5;
        ctx.stroke();
        continue;
      }
      const [fx, fy] = this.toPixels(from.x, from.y);
      ctx.beginPath();
      ctx.moveTo(fx, fy);
      const mx = (fx + tx) / 2 + (move.limb.endsWith("H") ? 12 : -12);
      ctx.quadraticCurveTo(mx, (fy + ty) / 2, tx, ty);
      ctx.strokeStyle = LIMB_COLORS[move.limb];
      ctx.lineWidth = 2.5;
      ctx.globalAlpha = 0.85;
      ctx.stroke();
      ctx.globalAlpha = 1.0;
      const angle = Math.atan2(ty - fy, tx - fx);
      ctx.beginPath();
      ctx.moveTo(tx, ty);
      ctx.lineTo(tx - 9 * Math.cos(angle - 0.4), ty - 9 * Math.sin(angle - 0.4));
      ctx.lineTo(tx - 9 * Math.cos(angle + 0.4), ty - 9 * Math.sin(angle + 0.4));
      ctx.fillStyle = LIMB_COLORS[move.limb];
      ctx.fill();
      this.label(ctx, (fx + tx) / 2 + 14, (fy + ty) / 2, String(step));
    }
  }

  private label(ctx: CanvasRenderingContext2D, x: number, y: number, text: string): void {
    ctx.font = "10px sans-serif";
    ctx.fillStyle = "#111";
    ctx.textAlign = "center";
    ctx.fillText(text, x, y);
  }
}
