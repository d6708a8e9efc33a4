// JSON shapes served by the planning backend (schema_version 1).

export interface TierInfo {
  id: string;
  goal: string;
  above: string[];
}

export interface OutcomeView {
  successor: string[];
  explained_by: string[];
  degrade_to: string | null;
}

export interface ActionView {
  name: string;
  outcomes: OutcomeView[];
}

export interface EventDoc {
  event: 'step' | 'degrade' | 'goal' | 'stuck' | 'cap';
  tier: string;
  state: string[];
  action?: string;
  successor?: string[];
  explained_by?: string[];
  degrade_to?: string;
  note?: string;
}

export interface Snapshot {
  schema_version: number;
  session: string;
  problem: string;
  ground_truth: string;
  step: number;
  finished: boolean;
  terminal: string | null;
  tier: string;
  goal: string;
  tiers: TierInfo[];
  state: string[];
  actions: ActionView[];
  events: EventDoc[];
}

export interface ChooseResponse {
  schema_version: number;
  events: EventDoc[];
  snapshot: Snapshot;
}

export interface UploadResponse {
  schema_version: number;
  problem: string;
  tiers: string[];
  valid: boolean;
  report: { ok: boolean; findings: { code: string; message: string }[] };
}

export interface CompileResponse {
  schema_version: number;
  problem: string;
  operators: number;
  atoms: number;
  bookkeeping_atoms: number;
  unfair: string[];
}

export interface SolveStatus {
  schema_version: number;
  problem: string;
  status: 'unsolved' | 'solving' | 'solved' | 'unsolvable' | 'error';
  policy_states?: number;
  poll?: string;
}

export interface GraphNode {
  id: string;
  atoms: string[];
  goal: boolean;
  initial: boolean;
}

export interface GraphEdge {
  from: string;
  op: string;
  to: string;
  fairness: 'fair' | 'unfair';
  provenance?: { role: string; tier?: string; source?: string; target?: string };
}

export interface PolicyGraph {
  schema_version: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface ProblemBundle {
  manifest: Record<string, unknown>;
  files: Record<string, string>;
}
