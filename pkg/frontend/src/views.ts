/** Pure view functions: server JSON in, HTML string out.  Keeping these
 * free of DOM access makes every screen snapshot-testable headlessly. */

import type {
  ChatEntry, DraftRecord, PipelineAnswer, ServiceErrorBody,
} from './types.js'

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

/** Inverse of escapeHtml; used by tests to confirm that guard strings
 * survive rendering byte-identical. */
export function unescapeHtml(text: string): string {
  return text
    .replace(/&quot;/g, '"')
    .replace(/&gt;/g, '>')
    .replace(/&lt;/g, '<')
    .replace(/&amp;/g, '&')
}

/** Lines present in `next` but not in `prev`, in order: what a pipeline
 * stage contributed on top of the stage before it. */
export function diffDraftLines(prev: string, next: string): string[] {
  const seen = new Set(prev.split('\n'))
  return next.split('\n').filter((line) => !seen.has(line))
}

export function renderAnswerBubble(answer: PipelineAnswer): string {
  const tag = answer.route === 'tmk' ? '' : ' <span class="tag">fallback</span>'
  const lines = answer.answerText
    .split('\n')
    .map((line) => `<p>${escapeHtml(line)}</p>`)
    .join('')
  return `<div class="bubble answer route-${answer.route}">${lines}${tag}</div>`
}

export function renderErrorBubble(error: ServiceErrorBody): string {
  return (
    `<div class="bubble error" data-stage="${escapeHtml(error.stage)}">` +
    `<span class="stage">${escapeHtml(error.stage)}</span> ` +
    `${escapeHtml(error.code)}: ${escapeHtml(error.message)} ` +
    `<button class="retry">retry</button></div>`
  )
}

function renderDraftSection(drafts: DraftRecord[]): string {
  const rows: string[] = []
  for (let i = 0; i < drafts.length; i += 1) {
    const draft = drafts[i]
    const added = i === 0
      ? draft.text.split('\n')
      : diffDraftLines(drafts[i - 1].text, draft.text)
    const removed = i === 0
      ? []
      : diffDraftLines(draft.text, drafts[i - 1].text)
    const label = draft.documentName
      ? `${draft.stage} &middot; ${escapeHtml(draft.documentName)}`
      : draft.stage
    rows.push(
      `<details class="draft stage-${draft.stage}"><summary>${label}` +
      ` (+${added.length} / -${removed.length})</summary>` +
      added.map((l) => `<ins>${escapeHtml(l)}</ins>`).join('') +
      removed.map((l) => `<del>${escapeHtml(l)}</del>`).join('') +
      `</details>`,
    )
  }
  return rows.join('')
}

export function renderProvenanceDrawer(answer: PipelineAnswer): string {
  const scope = answer.scope
  const evidence = scope.evidence
    .map((e) =>
      `<li>${escapeHtml(e.name)} <small>${escapeHtml(e.component)}` +
      `</small> <code>${e.score.toFixed(4)}</code></li>`)
    .join('')
  const retrieved = answer.retrieved
    .map((doc) =>
      `<li>${escapeHtml(doc.source)}/${escapeHtml(doc.entryName)} ` +
      `<code>${escapeHtml(doc.score)}</code></li>`)
    .join('')
  const ragHits = answer.ragHits
    .map((hit) =>
      `<li>${escapeHtml(hit.docName)} <code>${escapeHtml(hit.score)}` +
      `</code></li>`)
    .join('')
  return (
    `<aside class="provenance">` +
    `<section class="scope">` +
    `<h3>Scope: ${scope.inScope ? 'in scope' : 'out of scope'} ` +
    `<small>${escapeHtml(scope.strategy)}</small></h3>` +
    `<ul>${evidence}</ul></section>` +
    `<section class="verbosity"><h3>Verbosity k = ` +
    `${answer.verbosity ?? '&mdash;'}</h3></section>` +
    `<section class="retrieved"><h3>Retrieved documents ` +
    `(${answer.retrieved.length})</h3><ol>${retrieved}</ol></section>` +
    (ragHits
      ? `<section class="rag"><h3>Fallback chunks</h3><ol>${ragHits}</ol>` +
        `</section>`
      : '') +
    `<section class="drafts"><h3>Stage drafts</h3>` +
    `${renderDraftSection(answer.drafts)}</section>` +
    `</aside>`
  )
}

export function renderChat(history: ChatEntry[]): string {
  return history
    .map((entry) => {
      const question =
        `<div class="bubble question">${escapeHtml(entry.question)}</div>`
      if (entry.error) {
        return question + renderErrorBubble(entry.error)
      }
      if (entry.answer) {
        return question + renderAnswerBubble(entry.answer)
      }
      return question + '<div class="bubble pending">&hellip;</div>'
    })
    .join('')
}
