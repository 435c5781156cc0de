// Thin typed client over the engine's HTTP interface.

import type {
  BetaResponse,
  DocumentObj,
  GradeResponse,
  JobStatus,
  RouteObj,
  ValidationIssue,
  VaryResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly issues: ValidationIssue[] = [],
  ) {
    super(`${status} ${code}`);
  }
}

async function parseError(res: Response): Promise<ApiError> {
  let code = "ERROR";
  let issues: ValidationIssue[] = [];
  try {
    const body = await res.json();
    code = body.code ?? code;
    const detail = body.detail;
    if (Array.isArray(detail)) {
      issues = detail.map((d: unknown) =>
        typeof d === "string" ? { code, message: d } : (d as ValidationIssue),
      );
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(res.status, code, issues);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      throw await parseError(res);
    }
    return (await res.json()) as T;
  }

  getWall(): Promise<DocumentObj> {
    return this.request("GET", "/api/wall");
  }

  putWall(doc: DocumentObj): Promise<DocumentObj> {
    return this.request("PUT", "/api/wall", doc);
  }

  planBeta(route: RouteObj): Promise<BetaResponse> {
    return this.request("POST", "/api/beta", { route });
  }

  gradeRoute(route: RouteObj, seed = 0): Promise<GradeResponse> {
    return this.request("POST", "/api/grade", { route, seed });
  }

  vary(route: RouteObj, intensity: number, seed: number): Promise<VaryResponse> {
    return this.request("POST", "/api/vary", { route, intensity, seed });
  }

  generate(config: Record<string, unknown>): Promise<{ job_id: string }> {
    return this.request("POST", "/api/generate", config);
  }

  job(id: string): Promise<JobStatus> {
    return this.request("GET", `/api/jobs/${id}`);
  }

  cancelJob(id: string): Promise<JobStatus> {
    return this.request("POST", `/api/jobs/${id}/cancel`);
  }

  recordAscent(routeName: string): Promise<{ route_name: string; exposure_count: number; grade_locked: boolean }> {
    return this.request("POST", "/api/ascents", { route_name: routeName });
  }
}
