// Mirrors of the workbench service's JSON vocabulary. The UI never derives
// domain state client-side; these shapes are exactly what the API returns.

export type StepIdValue =
  | "identify_examples"
  | "extract_solutions"
  | "define_problems"
  | "distill_patterns"
  | "identify_affordances"
  | "relate_affordances"
  | "refine"
  | "consolidate";

export const STEP_ORDER: readonly StepIdValue[] = [
  "identify_examples",
  "extract_solutions",
  "define_problems",
  "distill_patterns",
  "identify_affordances",
  "relate_affordances",
  "refine",
  "consolidate",
];

export type StepStatusValue = "pending" | "awaiting_review" | "approved" | "stale";

export type OriginValue = "ai" | "human" | "mixed";

export type ComponentValue = "llm" | "database" | "external_tool" | "other";

export interface Provenance {
  origin: OriginValue;
  model_id: string | null;
  edited_at: string;
}

export interface KnownUse {
  id: string;
  name: string;
  narrative: string;
}

export interface CandidateSolution {
  name: string;
  description: string;
  provenance: Provenance;
}

export interface ProblemStatement {
  solution_name: string;
  text: string;
  provenance: Provenance;
}

export interface KnownUseRef {
  known_use_id: string;
  note: string;
}

export interface ResultingContextEdge {
  target: string;
  rationale: string;
}

export type PatternStatusValue = "draft" | "refined" | "consolidated" | "dropped";

export interface Pattern {
  name: string;
  context: string;
  problem: string;
  forces: string;
  solution_statement: string;
  solution_detail: string;
  known_uses: KnownUseRef[];
  resulting_context: ResultingContextEdge[];
  resulting_context_none: boolean;
  affordance_refs: string[];
  status: PatternStatusValue;
  provenance: Record<string, Provenance>;
}

export interface Affordance {
  id: string;
  component: ComponentValue;
  name: string;
  description: string;
}

export interface MatrixNote {
  affordance_id: string;
  pattern: string;
  note: string;
}

export interface Matrix {
  rows: string[];
  cols: string[];
  cells: boolean[][];
  notes: MatrixNote[];
}

export interface Diagnostic {
  severity: "warning" | "error";
  message: string;
  line: number | null;
  end_line: number | null;
}

export interface StoryEntry {
  pattern_name: string;
  narrative: string;
}

export interface Story {
  known_use_id: string;
  entries: StoryEntry[];
}

export interface TranscriptMessage {
  role: "user" | "assistant";
  content: string;
  step_tag: StepIdValue | null;
  timestamp: string;
}

export interface Transcript {
  model_id: string;
  params: { temperature: number; max_output_tokens: number };
  messages: TranscriptMessage[];
}

export interface RenameEntry {
  old_name: string;
  new_name: string;
  reason: string;
  renamed_at: string;
}

export interface AuditEvent {
  at: string;
  actor: string;
  action: string;
  detail: string;
}

export interface SessionDoc {
  id: string;
  created_at: string;
  known_uses: KnownUse[];
  solutions: CandidateSolution[];
  problems: ProblemStatement[];
  patterns: Pattern[];
  registry: Affordance[];
  matrix: Matrix;
  stories: Story[];
  missing_suggestions: string[];
  process_summary: string;
  step_status: Record<StepIdValue, StepStatusValue>;
  step_diagnostics: Record<string, Diagnostic[]>;
  rename_map: RenameEntry[];
  transcript: Transcript;
  audit_log: AuditEvent[];
}

// One row of the step board: raw AI output beside its parsed artifacts,
// exactly as GET /sessions/{id}/steps reports it.
export interface StepView {
  step: StepIdValue;
  status: StepStatusValue;
  raw_response: string | null;
  artifacts: Record<string, unknown>;
  diagnostics: Diagnostic[];
}

export interface ValidationIssue {
  severity: "warning" | "error";
  message: string;
  pattern: string | null;
}

export interface ValidationReport {
  ok: boolean;
  issues: ValidationIssue[];
}

export interface RenderedDocument {
  kind: string;
  body: string;
}

export function livePatterns(session: SessionDoc): Pattern[] {
  return session.patterns.filter((p) => p.status !== "dropped");
}
