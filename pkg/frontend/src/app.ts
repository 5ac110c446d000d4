/** Imperative shell: wires the pure views to the DOM and the service.
 * Everything rendered comes straight from server JSON. */

import { ServiceError, askQuestion, executeMechanism, getModel,
  listModels } from './api.js'
import { renderTraceView } from './graph.js'
import { renderChat, renderProvenanceDrawer } from './views.js'
import type {
  ChatEntry, MechanismJson, PipelineAnswer, ServiceErrorBody,
} from './types.js'

interface AppState {
  models: string[]
  activeModel: string | null
  chatHistory: ChatEntry[]
  selectedAnswer: PipelineAnswer | null
}

const state: AppState = {
  models: [],
  activeModel: null,
  chatHistory: [],
  selectedAnswer: null,
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing #${id}`)
  return node as T
}

function redraw(): void {
  el('chat').innerHTML = renderChat(state.chatHistory)
  el('drawer').innerHTML = state.selectedAnswer
    ? renderProvenanceDrawer(state.selectedAnswer)
    : '<p class="empty">Ask a question to see its provenance.</p>'
}

async function submitQuestion(question: string): Promise<void> {
  if (!state.activeModel) return
  const entry: ChatEntry = { question, answer: null, error: null }
  state.chatHistory.push(entry)
  redraw()
  try {
    entry.answer = await askQuestion(state.activeModel, question)
    state.selectedAnswer = entry.answer
  } catch (err) {
    entry.error = err instanceof ServiceError
      ? err.body
      : ({ schemaVersion: 1, code: 'unknown', message: String(err),
           stage: 'client' } as ServiceErrorBody)
  }
  redraw()
}

async function showTrace(mechanism: string, args: unknown[]):
    Promise<void> {
  if (!state.activeModel) return
  const detail = await getModel(state.activeModel)
  const mechanisms = (detail.model['Mechanism'] ?? []) as MechanismJson[]
  const found = mechanisms.find((m) => m.name === mechanism)
  if (!found) return
  const trace = await executeMechanism(state.activeModel, mechanism, args)
  el('trace').innerHTML = renderTraceView(found.organizer, trace)
}

async function boot(): Promise<void> {
  const listing = await listModels()
  state.models = listing.models.map((m) => m.modelId)
  state.activeModel = state.models[0] ?? null
  const picker = el<HTMLSelectElement>('model-picker')
  picker.innerHTML = state.models
    .map((id) => `<option value="${id}">${id}</option>`)
    .join('')
  picker.addEventListener('change', () => {
    state.activeModel = picker.value
  })
  const form = el<HTMLFormElement>('ask-form')
  const input = el<HTMLInputElement>('question')
  form.addEventListener('submit', (event) => {
    event.preventDefault()
    const question = input.value.trim()
    if (question) {
      input.value = ''
      void submitQuestion(question)
    }
  })
  const traceForm = el<HTMLFormElement>('trace-form')
  const mechInput = el<HTMLInputElement>('mechanism')
  const argsInput = el<HTMLInputElement>('trace-args')
  traceForm.addEventListener('submit', (event) => {
    event.preventDefault()
    const mechanism = mechInput.value.trim()
    if (!mechanism) return
    let args: unknown[] = []
    if (argsInput.value.trim()) {
      args = JSON.parse(argsInput.value) as unknown[]
    }
    void showTrace(mechanism, args)
  })
  redraw()
}

void boot()
