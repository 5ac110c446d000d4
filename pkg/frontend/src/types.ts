/** JSON shapes served by the engine. Mirrors the wire format only; no
 * engine logic is duplicated client-side. */

export interface ScopeEvidence {
  name: string
  component: string
  score: number
}

export interface ScopeDecision {
  inScope: boolean
  strategy: string
  evidence: ScopeEvidence[]
  verdictText?: string
}

export interface RetrievedDoc {
  source: string
  entryName: string
  score: string // already formatted to 4 decimals by the service
}

export interface DraftRecord {
  stage: string
  documentName: string | null
  text: string
}

export interface PipelineAnswer {
  schemaVersion: number
  question: string
  route: 'tmk' | 'ragFallback'
  answerText: string
  scope: ScopeDecision
  verbosity: number | null
  retrieved: RetrievedDoc[]
  ragHits: { docName: string; score: string }[]
  drafts: DraftRecord[]
  warnings: string[]
}

export interface GoalInvocation {
  goalReference: string
  type: 'operation' | 'goal'
  actualArguments: string[]
}

export interface FsmState {
  name: string
  goalInvocation: GoalInvocation
}

export interface FsmTransition {
  sourceState: string
  targetState: string
  dataCondition: string
}

export interface Organizer {
  startState: string
  successState: string
  failureState: string
  states: FsmState[]
  transitions: FsmTransition[]
}

export interface MechanismJson {
  name: string
  description?: string
  inputParameters: string[]
  outputParameters: string[]
  organizer: Organizer
}

export interface GuardEvaluation {
  sourceState: string
  targetState: string
  exprText: string
  value: boolean | null
}

export interface TraceStep {
  stateName: string
  invocation: string
  guardEvaluations: GuardEvaluation[]
  envSnapshot: Record<string, unknown>
  nestedTraces: unknown[]
  warnings: string[]
}

export interface ExecutionTrace {
  schemaVersion: number
  mechanism: string
  steps: TraceStep[]
  outcome: 'Success' | 'Failure' | 'Stuck' | 'LimitExceeded'
  terminalState: string | null
  reason: string | null
  outputs: Record<string, unknown>
}

export interface ServiceErrorBody {
  schemaVersion: number
  code: string
  message: string
  stage: string
}

export interface ModelSummary {
  modelId: string
  skillName: string
  tasks: number
  mechanisms: number
  warnings: number
}

export interface ChatEntry {
  question: string
  answer: PipelineAnswer | null
  error: ServiceErrorBody | null
}
