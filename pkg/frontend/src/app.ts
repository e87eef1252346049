/**
 * Browser bootstrap: wires the client, queue, task panel, label form, and
 * sandbox panel into the DOM. Configuration comes from query parameters:
 * ?base=<service url>&session=<id>&annotator=<id>&token=<bearer token>.
 *
 * All state lives in the service; every render re-fetches, so a refresh
 * reconstructs the exact same view.
 */

import { AnnotationClient, ServiceError, fetchTransport } from './api.js'
import { formStateFor, submitLabelForm } from './form.js'
import {
  renderErrorBanner,
  renderResultGrid,
  renderTask,
  renderTaskQueue,
} from './render.js'
import type { LabelValue, TaskView } from './types.js'

interface AppConfig {
  base: string
  session: string
  annotator: string
  token: string
}

function configFromLocation(): AppConfig {
  const params = new URLSearchParams(window.location.search)
  return {
    base: params.get('base') ?? 'http://127.0.0.1:8040',
    session: params.get('session') ?? '',
    annotator: params.get('annotator') ?? '',
    token: params.get('token') ?? '',
  }
}

export async function mount(root: HTMLElement, config = configFromLocation()): Promise<void> {
  const client = new AnnotationClient({
    transport: fetchTransport(config.base),
    annotator: config.annotator,
    token: config.token,
  })
  root.innerHTML =
    '<nav id="queue"></nav><main id="task"></main><aside id="sandbox">' +
    '<textarea id="sandbox-sql" placeholder="SELECT ..."></textarea>' +
    '<input id="sandbox-instance" placeholder="instance id" />' +
    '<button id="sandbox-run">Run</button><div id="sandbox-result"></div></aside>'
  const queueEl = root.querySelector('#queue') as HTMLElement
  const taskEl = root.querySelector('#task') as HTMLElement

  async function refreshQueue(): Promise<void> {
    try {
      const items = await client.taskQueue(config.session)
      queueEl.innerHTML = renderTaskQueue(items)
      queueEl.querySelectorAll('[data-task]').forEach((li) => {
        li.addEventListener('click', () => {
          void openTask((li as HTMLElement).dataset.task as string)
        })
      })
    } catch (err) {
      queueEl.innerHTML = renderErrorBanner(serviceErrorPayload(err))
      bindRetry(queueEl, refreshQueue)
    }
  }

  async function openTask(taskId: string): Promise<void> {
    let view: TaskView
    try {
      view = await client.taskView(taskId)
    } catch (err) {
      taskEl.innerHTML = renderErrorBanner(serviceErrorPayload(err))
      bindRetry(taskEl, () => openTask(taskId))
      return
    }
    taskEl.innerHTML = renderTask(view) + labelControls(view)
    taskEl.querySelectorAll('[data-submit]').forEach((button) => {
      button.addEventListener('click', async () => {
        const el = button as HTMLElement
        const candidateId = el.dataset.submit as string
        const label = (
          taskEl.querySelector(`input[name="label-${candidateId}"]:checked`) as HTMLInputElement | null
        )?.value as LabelValue | undefined
        const explanation =
          (taskEl.querySelector(`#explanation-${candidateId}`) as HTMLTextAreaElement | null)
            ?.value ?? ''
        const state = formStateFor(config.session, view, candidateId)
        state.label = label ?? null
        state.explanation = explanation
        await submitLabelForm(client, state, view.own_labels[candidateId] ?? null, (shown, error) => {
          const slot = taskEl.querySelector(`[data-feedback="${candidateId}"]`) as HTMLElement | null
          if (slot) {
            slot.textContent = error ? `blocked: ${error}` : `label: ${shown ?? 'none'}`
          }
        })
        await refreshQueue()
        await openTask(taskId) // reconcile from the service, never from local state
      })
    })
  }

  const runButton = root.querySelector('#sandbox-run') as HTMLButtonElement
  runButton.addEventListener('click', async () => {
    const sql = (root.querySelector('#sandbox-sql') as HTMLTextAreaElement).value
    const instance = (root.querySelector('#sandbox-instance') as HTMLInputElement).value
    const out = root.querySelector('#sandbox-result') as HTMLElement
    try {
      out.innerHTML = renderResultGrid(await client.sandboxExecute(sql, instance))
    } catch (err) {
      out.innerHTML = renderErrorBanner(serviceErrorPayload(err))
    }
  })

  await refreshQueue()
}

function labelControls(view: TaskView): string {
  return view.candidates
    .map((c) => {
      const id = c.candidate_id
      const needsExplanation =
        view.round === 'Two' && view.disagreement_candidates.includes(id)
      const explanation = needsExplanation
        ? `<textarea id="explanation-${id}" placeholder="explanation (required)"></textarea>`
        : `<textarea id="explanation-${id}" placeholder="explanation (optional)"></textarea>`
      return (
        `<form class="label-form" data-candidate-form="${id}">` +
        `<label><input type="radio" name="label-${id}" value="Correct" />Correct</label>` +
        `<label><input type="radio" name="label-${id}" value="Incorrect" />Incorrect</label>` +
        `${explanation}<button type="button" data-submit="${id}">Save</button>` +
        `<span data-feedback="${id}"></span></form>`
      )
    })
    .join('')
}

function serviceErrorPayload(err: unknown): { code: string; message: string; category?: string | null } {
  if (err instanceof ServiceError) {
    return { code: err.code, message: err.message, category: err.category }
  }
  return { code: 'network', message: String(err) }
}

function bindRetry(el: HTMLElement, action: () => Promise<void> | void): void {
  el.querySelector('.retry')?.addEventListener('click', () => {
    void action()
  })
}

declare global {
  interface Window {
    annotationUi?: { mount: typeof mount }
  }
}

if (typeof window !== 'undefined') {
  window.annotationUi = { mount }
}
