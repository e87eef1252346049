/**
 * Pure render functions: view models in, HTML strings out.
 *
 * Candidates render side by side in a shared scroll row so near-identical
 * queries line up; all dynamic text passes through `escapeHtml`.
 */

import type { ApiError, QueueItem, ResultGrid, SchemaView, TaskView } from './types.js'

export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;')
}

export function renderTaskQueue(items: QueueItem[]): string {
  if (items.length === 0) {
    return '<div class="queue-empty">No tasks in this session.</div>'
  }
  const done = items.filter((t) => t.labeled >= t.total).length
  const rows = items
    .map((t) => {
      const badge = t.disagreement
        ? '<span class="badge badge-disagreement">needs review</span>'
        : ''
      const state = t.labeled >= t.total ? 'complete' : 'open'
      return (
        `<li class="queue-item queue-${state}" data-task="${escapeHtml(t.task_id)}">` +
        `<span class="queue-example">${escapeHtml(t.example_id)}</span>` +
        `<span class="queue-progress">${t.labeled}/${t.total}</span>${badge}</li>`
      )
    })
    .join('')
  return (
    `<div class="queue-summary">progress ${done}/${items.length}</div>` +
    `<ul class="task-queue">${rows}</ul>`
  )
}

export function renderSchemaTree(schema: SchemaView): string {
  const tables = schema.tables ?? []
  const body = tables
    .map((t) => {
      const cols = t.columns
        .map((c) => {
          const pk = c.primary_key ? ' <span class="pk">pk</span>' : ''
          return `<li class="schema-col">${escapeHtml(c.name)} <em>${escapeHtml(c.affinity)}</em>${pk}</li>`
        })
        .join('')
      const fks = (t.foreign_keys ?? [])
        .map(
          (fk) =>
            `<li class="schema-fk">${escapeHtml(fk.columns.join(', '))} &rarr; ` +
            `${escapeHtml(fk.ref_table)}(${escapeHtml(fk.ref_columns.join(', '))})</li>`,
        )
        .join('')
      return (
        `<li class="schema-table"><strong>${escapeHtml(t.name)}</strong>` +
        `<ul>${cols}${fks}</ul></li>`
      )
    })
    .join('')
  return `<ul class="schema-tree">${body}</ul>`
}

export function renderRoundBanner(view: TaskView): string {
  if (view.round === 'Finalized') {
    return '<div class="round-banner round-final">Session finalized; labels are read-only.</div>'
  }
  if (view.round === 'Two') {
    return (
      '<div class="round-banner round-two">Round two: revisit the flagged candidates; ' +
      'an explanation is required with each relabel.</div>'
    )
  }
  return '<div class="round-banner round-one">Round one: label every candidate.</div>'
}

export function renderTask(view: TaskView): string {
  const disagreement = new Set(view.disagreement_candidates)
  const cards = view.candidates
    .map((c) => {
      const own = view.own_labels[c.candidate_id]
      const ownHtml = own
        ? `<div class="own-label">your label: ${escapeHtml(own)}</div>`
        : '<div class="own-label own-label-missing">not labeled yet</div>'
      const flagged = disagreement.has(c.candidate_id)
      const peer = (view.peer_explanations[c.candidate_id] ?? [])
        .map(
          (note) =>
            `<div class="peer-note"><span class="peer-label">${escapeHtml(note.label)}</span>` +
            `<blockquote>${escapeHtml(note.explanation)}</blockquote></div>`,
        )
        .join('')
      const peerHtml =
        flagged && peer
          ? `<div class="peer-explanations"><h4>Peer explanation</h4>${peer}</div>`
          : ''
      const flagHtml = flagged
        ? '<span class="badge badge-disagreement">inconsistent</span>'
        : ''
      return (
        `<article class="candidate-card" data-candidate="${escapeHtml(c.candidate_id)}">` +
        `<header>Candidate ${escapeHtml(c.candidate_id)} ${flagHtml}</header>` +
        `<pre class="sql">${escapeHtml(c.sql)}</pre>${ownHtml}${peerHtml}</article>`
      )
    })
    .join('')
  return (
    `<section class="task" data-task="${escapeHtml(view.task_id)}">` +
    renderRoundBanner(view) +
    `<h2 class="question">${escapeHtml(view.question)}</h2>` +
    `<div class="schema-panel">${renderSchemaTree(view.schema)}</div>` +
    `<div class="candidate-row">${cards}</div></section>`
  )
}

export function renderResultGrid(grid: ResultGrid): string {
  if (grid.rows.length === 0) {
    return '<div class="grid-empty">0 rows</div>'
  }
  const head = grid.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join('')
  const body = grid.rows
    .map(
      (row) =>
        `<tr>${row
          .map((cell) => `<td>${cell === null ? '<em>null</em>' : escapeHtml(cell)}</td>`)
          .join('')}</tr>`,
    )
    .join('')
  return (
    `<table class="result-grid"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<div class="grid-count">${grid.rows.length} row${grid.rows.length === 1 ? '' : 's'}</div>`
  )
}

export function renderErrorBanner(err: ApiError): string {
  const category = err.category
    ? `<span class="error-category">${escapeHtml(err.category)}</span>`
    : ''
  return (
    `<div class="error-banner" role="alert">` +
    `<span class="error-code">${escapeHtml(err.code)}</span>${category}` +
    `<span class="error-message">${escapeHtml(err.message)}</span>` +
    `<button class="retry">Retry</button></div>`
  )
}
