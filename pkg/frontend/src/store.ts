// Editor state with revision-token discipline.
//
// Every local edit bumps `revision` and optimistically mutates the document;
// commits are debounced PUTs. Beta/grade overlays are requested as one pair,
// tagged with the revision current at request time, and discarded if the
// document has moved on by the time they land (latest wins). At most one
// overlay pair is in flight. No grading or planning arithmetic lives here:
// overlays only ever hold verbatim server responses.

import { ApiClient, ApiError } from "./api.js";
import type {
  BetaResponse,
  DocumentObj,
  GradeResponse,
  HoldObj,
  JobStatus,
  RouteObj,
  ValidationIssue,
} from "./types.js";

export interface OverlayState {
  revision: number;
  beta: BetaResponse | null;
  grade: GradeResponse | null;
  unreachable: boolean;
  locked: boolean;
}

export interface EditorSnapshot {
  doc: DocumentObj | null;
  revision: number;
  committedRevision: number;
  dirty: boolean;
  selectedHoldId: string | null;
  overlay: OverlayState | null;
  overlayFresh: boolean;
  issues: ValidationIssue[];
  offline: boolean;
  job: JobStatus | null;
  jobTrace: number[];
}

type Listener = (snapshot: EditorSnapshot) => void;

export class EditorStore {
  private doc: DocumentObj | null = null;
  private revision = 0;
  private committedRevision = 0;
  private selected: string | null = null;
  private overlay: OverlayState | null = null;
  private issues: ValidationIssue[] = [];
  private offline = false;
  private job: JobStatus | null = null;
  private jobTrace: number[] = [];

  private listeners = new Set<Listener>();
  private commitTimer: ReturnType<typeof setTimeout> | null = null;
  private committing = false;
  private overlayInFlight: number | null = null;
  private jobTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly debounceMs = 200,
    private readonly jobPollMs = 250,
  ) {}

  // ----- state access -----

  snapshot(): EditorSnapshot {
    return {
      doc: this.doc,
      revision: this.revision,
      committedRevision: this.committedRevision,
      dirty: this.revision !== this.committedRevision,
      selectedHoldId: this.selected,
      overlay: this.overlay,
      overlayFresh: this.overlay !== null && this.overlay.revision === this.revision,
      issues: this.issues,
      offline: this.offline,
      job: this.job,
      jobTrace: this.jobTrace,
    };
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const fn of this.listeners) fn(snap);
  }

  workingRoute(): RouteObj | null {
    return this.doc?.routes[0] ?? null;
  }

  // ----- loading -----

  async load(): Promise<void> {
    try {
      this.doc = await this.api.getWall();
      this.revision += 1;
      this.committedRevision = this.revision;
      this.offline = false;
      this.emit();
      await this.refreshOverlays();
    } catch {
      this.offline = true;
      this.emit();
    }
  }

  // ----- editing -----

  selectHold(id: string | null): void {
    this.selected = id;
    this.emit();
  }

  /** Optimistically apply a document mutation and schedule a commit. */
  applyEdit(mutate: (doc: DocumentObj) => DocumentObj): void {
    if (!this.doc) return;
    this.doc = mutate(structuredClone(this.doc));
    this.revision += 1;
    this.issues = [];
    this.emit();
    this.scheduleCommit();
  }

  moveHold(id: string, x: number, y: number): void {
    this.applyEdit((doc) => {
      const hold = doc.wall.holds.find((h) => h.id === id);
      if (hold) {
        hold.x = x;
        hold.y = y;
      }
      return doc;
    });
  }

  addHold(hold: HoldObj): void {
    this.applyEdit((doc) => {
      doc.wall.holds.push(hold);
      if (doc.routes[0] && !doc.routes[0].hold_ids.includes(hold.id)) {
        doc.routes[0].hold_ids.push(hold.id);
      }
      return doc;
    });
  }

  deleteHold(id: string): void {
    if (this.selected === id) this.selected = null;
    this.applyEdit((doc) => {
      doc.wall.holds = doc.wall.holds.filter((h) => h.id !== id);
      for (const r of doc.routes) {
        r.hold_ids = r.hold_ids.filter((h) => h !== id);
        r.start_hold_ids = r.start_hold_ids.filter((h) => h !== id);
      }
      return doc;
    });
  }

  setHoldField(id: string, field: "type" | "difficulty" | "orientation_deg", value: string | number): void {
    this.applyEdit((doc) => {
      const hold = doc.wall.holds.find((h) => h.id === id);
      if (hold) (hold as unknown as Record<string, unknown>)[field] = value;
      return doc;
    });
  }

  markStart(id: string, second = false): void {
    this.applyEdit((doc) => {
      const route = doc.routes[0];
      if (!route) return doc;
      route.start_hold_ids = second && route.start_hold_ids.length === 1
        ? [route.start_hold_ids[0], id]
        : [id];
      if (!route.hold_ids.includes(id)) route.hold_ids.push(id);
      return doc;
    });
  }

  markFinish(id: string): void {
    this.applyEdit((doc) => {
      const route = doc.routes[0];
      if (!route) return doc;
      route.finish_hold_id = id;
      if (!route.hold_ids.includes(id)) route.hold_ids.push(id);
      return doc;
    });
  }

  // ----- committing -----

  private scheduleCommit(): void {
    if (this.commitTimer !== null) clearTimeout(this.commitTimer);
    this.commitTimer = setTimeout(() => {
      this.commitTimer = null;
      void this.commit();
    }, this.debounceMs);
  }

  /** Force any pending debounced commit to run now (used by tests and unload). */
  async flush(): Promise<void> {
    if (this.commitTimer !== null) {
      clearTimeout(this.commitTimer);
      this.commitTimer = null;
    }
    await this.commit();
  }

  private async commit(): Promise<void> {
    if (!this.doc || this.committing) return;
    if (this.revision === this.committedRevision) return;
    this.committing = true;
    const rev = this.revision;
    try {
      await this.api.putWall(this.doc);
      this.committedRevision = rev;
      this.offline = false;
      this.issues = [];
    } catch (err) {
      if (err instanceof ApiError) {
        // semantic rejection: surface issues, drop any overlay claim
        this.issues = err.issues.length ? err.issues : [{ code: err.code, message: err.message }];
        this.committedRevision = rev; // server saw and rejected this revision
        this.overlay = null;
      } else {
        this.offline = true; // edits stay queued; retry on the next commit
      }
      this.committing = false;
      this.emit();
      if (this.revision !== rev) this.scheduleCommit();
      return;
    }
    this.committing = false;
    this.emit();
    if (this.revision !== rev) {
      this.scheduleCommit();
    } else if (this.issues.length === 0) {
      await this.refreshOverlays();
    }
  }

  // ----- overlays (beta + grade pair, latest-wins) -----

  async refreshOverlays(): Promise<void> {
    if (this.overlayInFlight !== null) return; // one pair at a time
    const route = this.workingRoute();
    if (!this.doc || !route) return;
    const rev = this.revision;
    this.overlayInFlight = rev;
    let beta: BetaResponse | null = null;
    let grade: GradeResponse | null = null;
    let unreachable = false;
    let locked = false;
    let failed = false;
    const [betaRes, gradeRes] = await Promise.allSettled([
      this.api.planBeta(route),
      this.api.gradeRoute(route),
    ]);
    if (betaRes.status === "fulfilled") {
      beta = betaRes.value;
    } else if (betaRes.reason instanceof ApiError) {
      unreachable = betaRes.reason.code === "UNREACHABLE";
      if (betaRes.reason.issues.length) this.issues = betaRes.reason.issues;
    } else {
      failed = true;
    }
    if (gradeRes.status === "fulfilled") {
      grade = gradeRes.value;
    } else if (gradeRes.reason instanceof ApiError) {
      locked = gradeRes.reason.code === "LOCKED";
    } else {
      failed = true;
    }
    this.overlayInFlight = null;
    if (failed) {
      this.offline = true;
      this.emit();
      return;
    }
    this.offline = false;
    if (rev !== this.revision) {
      // stale pair: discard, and chase the newest revision if it is committed
      if (this.revision === this.committedRevision) void this.refreshOverlays();
      return;
    }
    this.overlay = { revision: rev, beta, grade, unreachable, locked };
    this.emit();
  }

  // ----- generation jobs -----

  async startGeneration(config: Record<string, unknown>): Promise<void> {
    const { job_id } = await this.api.generate(config);
    this.jobTrace = [];
    this.job = { id: job_id, status: "queued", progress: { iteration: 0, best_objective: null }, result: null, error: null };
    this.emit();
    this.pollJob(job_id);
  }

  private pollJob(id: string): void {
    if (this.jobTimer !== null) clearTimeout(this.jobTimer);
    this.jobTimer = setTimeout(async () => {
      this.jobTimer = null;
      try {
        const status = await this.api.job(id);
        this.job = status;
        if (status.progress.best_objective !== null) {
          this.jobTrace.push(status.progress.best_objective);
        }
        this.emit();
        if (status.status === "queued" || status.status === "running") {
          this.pollJob(id);
        }
      } catch {
        this.offline = true;
        this.emit();
      }
    }, this.jobPollMs);
  }

  async cancelGeneration(): Promise<void> {
    if (!this.job) return;
    this.job = await this.api.cancelJob(this.job.id);
    this.emit();
    this.pollJob(this.job.id);
  }

  /** Replace the working document with a finished job's result and re-grade. */
  async adoptJobResult(): Promise<void> {
    const result = this.job?.result;
    if (!result) return;
    this.doc = structuredClone(result.document);
    this.revision += 1;
    this.selected = null;
    this.issues = [];
    this.emit();
    await this.flush();
  }

  dispose(): void {
    if (this.commitTimer !== null) clearTimeout(this.commitTimer);
    if (this.jobTimer !== null) clearTimeout(this.jobTimer);
  }
}
