// Wire types mirrored from the service's documented REST/SSE surface.

export interface WorkOrderInfo {
  order_id: string;
  mode: string;
  kind: string;
  state: string;
  sla_deadline: string;
  assignee: string;
}

export interface FlagInfo {
  kind: string;
  severity: string;
  step: string;
}

export interface InstanceSummary {
  instance_id: string;
  case_id: string;
  domain: string;
  mode: string;
  status: string;
  tier: string | null;
  disposition: string | null;
  record_label: string;
  steps: number;
  flags: FlagInfo[];
  hitl_state: string | null;
  work_order: WorkOrderInfo | null;
  ledger_entries: number;
  qa_sampled?: boolean;
}

export interface LedgerRecord {
  index: number;
  entry_type: string;
  content: Record<string, unknown>;
  prior_hash: string;
  hash: string;
}

export interface InstanceDetail extends InstanceSummary {
  ledger: LedgerRecord[];
}

export interface ChainVerification {
  chain_valid: boolean;
  first_broken_index: number | null;
  entries_checked: number;
}

export interface TraceEvent {
  id: number;
  event: string;
  data: { sequence: number; payload: Record<string, unknown> };
}

export interface StepEpistemic {
  mechanical: Record<string, string>;
  judgment: Record<string, string>;
  flags: Array<{
    kind: string;
    severity: string;
    penalty: string;
    source_steps: string[];
    note: string;
  }>;
  overall: string;
  warranted: boolean;
}

export interface StepPayload {
  step_name: string;
  primitive: string;
  confidence: string;
  payload: Record<string, unknown>;
  epistemic: StepEpistemic;
}

export type ActionResult =
  | { ok: true; summary: InstanceSummary }
  | { ok: false; status: number; message: string };
