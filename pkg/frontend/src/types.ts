// Wire types mirroring the service's JSON schemas. The client never computes
// grades, betas, or rewards; it only displays what these carry.

export interface PanelObj {
  y0: number;
  y1: number;
  angle_deg: number;
}

export interface HoldObj {
  id: string;
  x: number;
  y: number;
  type: string;
  difficulty: number;
  roles: string[];
  orientation_deg: number;
}

export interface WallObj {
  width_m: number;
  height_m: number;
  panels: PanelObj[];
  holds: HoldObj[];
}

export interface RouteObj {
  name: string;
  hold_ids: string[];
  start_hold_ids: string[];
  finish_hold_id: string;
  grade: string | null;
  style_tags: string[];
}

export interface DocumentObj {
  wall: WallObj;
  routes: RouteObj[];
}

export interface BodyStateObj {
  lh: string;
  rh: string;
  lf: string;
  rf: string;
}

export interface MoveObj {
  limb: "LH" | "RH" | "LF" | "RF";
  from_hold: string;
  to_hold: string;
  distance: number;
  move_type: string;
  cost: number;
  success_probability: number;
}

export interface BetaObj {
  states: BodyStateObj[];
  moves: MoveObj[];
  total_cost: number;
}

export interface BetaResponse {
  beta: BetaObj;
  success_probability: number;
}

export interface MembershipScoreObj {
  grade: string;
  p_route_given_set: number;
  p_set_given_route: number;
  conjunction: number;
  qualifiers: number;
  ascenders: number;
  flags: string[];
}

export interface GradeResponse {
  grade: string;
  scores: MembershipScoreObj[];
}

export interface ValidationIssue {
  route?: string;
  code: string;
  message: string;
  hold_id?: string | null;
}

export interface JobProgress {
  iteration: number;
  best_objective: number | null;
}

export interface GenerationReportObj {
  iterations: number;
  best_objective: number;
  objective_trace: number[];
  achieved_grade: string | null;
  achieved_reward: number;
  necessitation_margin: number;
  achieved_grade_in_loop: string | null;
  seed: number;
}

export interface JobResult {
  document: DocumentObj;
  route: RouteObj;
  beta: BetaObj | null;
  report: GenerationReportObj;
}

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "done" | "failed" | "cancelled";
  progress: JobProgress;
  result: JobResult | null;
  error: string | null;
}

export interface VaryResponse {
  route: RouteObj;
  wall: WallObj;
}
