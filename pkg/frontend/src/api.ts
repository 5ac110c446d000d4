import type {
  ExecutionTrace, ModelSummary, PipelineAnswer, ServiceErrorBody,
} from './types.js'

export class ServiceError extends Error {
  body: ServiceErrorBody

  constructor(body: ServiceErrorBody) {
    super(body.message)
    this.body = body
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response
  try {
    response = await fetch(path, init)
  } catch (err) {
    throw new ServiceError({
      schemaVersion: 1,
      code: 'network-error',
      message: String(err),
      stage: 'transport',
    })
  }
  const body = await response.json()
  if (!response.ok) {
    throw new ServiceError(body as ServiceErrorBody)
  }
  return body as T
}

export function listModels(): Promise<{ models: ModelSummary[] }> {
  return request('/models')
}

export function askQuestion(
  modelId: string,
  question: string,
): Promise<PipelineAnswer> {
  return request('/ask', {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ modelId, question }),
  })
}

export function executeMechanism(
  modelId: string,
  mechanism: string,
  args: unknown[],
): Promise<ExecutionTrace> {
  return request(`/models/${encodeURIComponent(modelId)}/execute`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ mechanism, args }),
  })
}

export function getModel(
  modelId: string,
): Promise<{ modelId: string; model: Record<string, unknown> }> {
  return request(`/models/${encodeURIComponent(modelId)}`)
}
