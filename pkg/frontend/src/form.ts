/**
 * Label form state: validation and submission with optimistic update.
 *
 * The round-two rule lives here so the form blocks invalid submissions
 * before they reach the service: relabeling a flagged (inconsistent)
 * candidate requires a non-empty explanation.
 */

import type { AnnotationClient } from './api.js'
import { ServiceError } from './api.js'
import type { LabelValue, TaskView } from './types.js'

export interface LabelFormState {
  sessionId: string
  taskId: string
  candidateId: string
  label: LabelValue | null
  explanation: string
  round: string
  isDisagreement: boolean
}

export type Validation = { ok: true } | { ok: false; reason: string }

export function formStateFor(
  sessionId: string,
  view: TaskView,
  candidateId: string,
): LabelFormState {
  return {
    sessionId,
    taskId: view.task_id,
    candidateId,
    label: null,
    explanation: '',
    round: view.round,
    isDisagreement: view.disagreement_candidates.includes(candidateId),
  }
}

export function validateLabelForm(state: LabelFormState): Validation {
  if (state.label === null) {
    return { ok: false, reason: 'choose Correct or Incorrect' }
  }
  if (state.round === 'Two' && state.isDisagreement && state.explanation.trim() === '') {
    return { ok: false, reason: 'an explanation is required when relabeling an inconsistent candidate' }
  }
  return { ok: true }
}

export interface SubmitOutcome {
  submitted: boolean
  /** label shown in the UI after reconciliation (optimistic, then confirmed) */
  displayedLabel: string | null
  historyLength: number | null
  error: string | null
}

/**
 * Optimistically reflect the chosen label, then reconcile with the service
 * acknowledgment; on rejection the previous label is restored and the error
 * surfaces inline.
 */
export async function submitLabelForm(
  client: AnnotationClient,
  state: LabelFormState,
  current: string | null,
  onRender: (displayedLabel: string | null, error: string | null) => void,
): Promise<SubmitOutcome> {
  const validation = validateLabelForm(state)
  if (!validation.ok) {
    onRender(current, validation.reason)
    return { submitted: false, displayedLabel: current, historyLength: null, error: validation.reason }
  }
  const chosen = state.label as LabelValue
  onRender(chosen, null) // optimistic
  try {
    const ack = await client.submitLabel(
      state.sessionId,
      state.taskId,
      state.candidateId,
      chosen,
      state.explanation.trim() === '' ? undefined : state.explanation,
    )
    onRender(chosen, null)
    return { submitted: true, displayedLabel: chosen, historyLength: ack.history_length, error: null }
  } catch (err) {
    const message = err instanceof ServiceError ? err.message : String(err)
    onRender(current, message) // roll back
    return { submitted: false, displayedLabel: current, historyLength: null, error: message }
  }
}
