/**
 * View-model types mirroring the annotation service's JSON payloads.
 *
 * Candidate provenance is not represented anywhere: the service never sends
 * it to annotator-facing endpoints, so the client cannot leak it.
 */

export type LabelValue = 'Correct' | 'Incorrect'

export type RoundName = 'One' | 'Two' | 'Finalized'

export interface CandidateView {
  candidate_id: string
  sql: string
}

export interface PeerNote {
  label: string
  explanation: string
}

export interface SchemaColumn {
  name: string
  affinity: string
  primary_key: boolean
}

export interface SchemaForeignKey {
  columns: string[]
  ref_table: string
  ref_columns: string[]
}

export interface SchemaTable {
  name: string
  columns: SchemaColumn[]
  foreign_keys: SchemaForeignKey[]
}

export interface SchemaView {
  database_id?: string
  tables?: SchemaTable[]
}

export interface TaskView {
  task_id: string
  example_id: string
  question: string
  schema: SchemaView
  round: RoundName
  candidates: CandidateView[]
  own_labels: Record<string, string>
  disagreement_candidates: string[]
  peer_explanations: Record<string, PeerNote[]>
}

export interface QueueItem {
  task_id: string
  example_id: string
  labeled: number
  total: number
  disagreement: boolean
}

export interface LabelAck {
  status: string
  history_length: number
}

export interface ResultGrid {
  columns: string[]
  rows: unknown[][]
}

export interface ApiError {
  code: string
  message: string
  category?: string | null
}

export interface AccuracyReport {
  accuracies: Record<string, number | null>
  resolved_counts: Record<string, number>
  inconsistent_count: number
  task_count: number
}
