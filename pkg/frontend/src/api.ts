/**
 * Typed client for the annotation service HTTP/JSON API.
 *
 * The transport is injectable so component tests can run against an
 * in-memory fixture service; the browser build uses `fetchTransport`.
 */

import type {
  AccuracyReport,
  ApiError,
  LabelAck,
  LabelValue,
  QueueItem,
  ResultGrid,
  TaskView,
} from './types.js'

export interface HttpRequest {
  method: 'GET' | 'POST'
  path: string
  headers: Record<string, string>
  body?: unknown
}

export interface HttpResponse {
  status: number
  body: unknown
}

export type Transport = (req: HttpRequest) => Promise<HttpResponse>

export class ServiceError extends Error {
  readonly code: string
  readonly status: number
  readonly category: string | null

  constructor(status: number, payload: ApiError) {
    super(payload.message)
    this.code = payload.code
    this.status = status
    this.category = payload.category ?? null
  }
}

export function fetchTransport(baseUrl: string): Transport {
  return async (req) => {
    const res = await fetch(`${baseUrl}${req.path}`, {
      method: req.method,
      headers: { 'content-type': 'application/json', ...req.headers },
      body: req.body === undefined ? undefined : JSON.stringify(req.body),
    })
    return { status: res.status, body: await res.json() }
  }
}

export interface ClientConfig {
  transport: Transport
  annotator: string
  token: string
}

export class AnnotationClient {
  private readonly transport: Transport
  private readonly annotator: string
  private readonly token: string

  constructor(config: ClientConfig) {
    this.transport = config.transport
    this.annotator = config.annotator
    this.token = config.token
  }

  private headers(): Record<string, string> {
    return { authorization: `Bearer ${this.token}` }
  }

  private withAnnotator(path: string): string {
    const sep = path.includes('?') ? '&' : '?'
    return `${path}${sep}annotator=${encodeURIComponent(this.annotator)}`
  }

  private async call<T>(req: HttpRequest): Promise<T> {
    const res = await this.transport(req)
    if (res.status >= 400) {
      throw new ServiceError(res.status, res.body as ApiError)
    }
    return res.body as T
  }

  async taskQueue(sessionId: string): Promise<QueueItem[]> {
    const body = await this.call<{ tasks: QueueItem[] }>({
      method: 'GET',
      path: this.withAnnotator(`/sessions/${sessionId}/tasks`),
      headers: this.headers(),
    })
    return body.tasks
  }

  async taskView(taskId: string): Promise<TaskView> {
    return this.call<TaskView>({
      method: 'GET',
      path: this.withAnnotator(`/tasks/${taskId}`),
      headers: this.headers(),
    })
  }

  async submitLabel(
    sessionId: string,
    taskId: string,
    candidateId: string,
    label: LabelValue,
    explanation?: string,
  ): Promise<LabelAck> {
    return this.call<LabelAck>({
      method: 'POST',
      path: this.withAnnotator('/labels'),
      headers: this.headers(),
      body: {
        session_id: sessionId,
        task_id: taskId,
        candidate_id: candidateId,
        label,
        explanation: explanation ?? null,
      },
    })
  }

  async advance(sessionId: string): Promise<string[]> {
    const body = await this.call<{ disagreements: string[] }>({
      method: 'POST',
      path: this.withAnnotator(`/sessions/${sessionId}/advance`),
      headers: this.headers(),
    })
    return body.disagreements
  }

  async finalize(sessionId: string, skipUnresolved = false): Promise<AccuracyReport> {
    return this.call<AccuracyReport>({
      method: 'POST',
      path: this.withAnnotator(`/sessions/${sessionId}/finalize`),
      headers: this.headers(),
      body: { skip_unresolved: skipUnresolved },
    })
  }

  async report(sessionId: string): Promise<AccuracyReport> {
    return this.call<AccuracyReport>({
      method: 'GET',
      path: this.withAnnotator(`/sessions/${sessionId}/report`),
      headers: this.headers(),
    })
  }

  async sandboxExecute(sql: string, instanceId: string): Promise<ResultGrid> {
    return this.call<ResultGrid>({
      method: 'POST',
      path: '/sandbox/execute',
      headers: this.headers(),
      body: { sql, instance_id: instanceId },
    })
  }

  async sandboxInstances(): Promise<string[]> {
    const body = await this.call<{ instances: string[] }>({
      method: 'GET',
      path: '/sandbox/instances',
      headers: this.headers(),
    })
    return body.instances
  }
}
