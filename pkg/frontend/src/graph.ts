/** FSM graph layout and SVG rendering, pure functions over the model
 * and trace JSON.  Layout is layered left-to-right by BFS depth from the
 * start state; the failure state is pinned to the rightmost column so
 * dashed failure arcs always point the same way. */

import { escapeHtml } from './views.js'
import type {
  ExecutionTrace, FsmTransition, Organizer,
} from './types.js'

export interface NodePosition {
  name: string
  column: number
  row: number
  x: number
  y: number
}

export interface GraphLayout {
  nodes: NodePosition[]
  width: number
  height: number
}

const COLUMN_WIDTH = 180
const ROW_HEIGHT = 90
const MARGIN = 60
const NODE_RADIUS = 26

export function layoutGraph(organizer: Organizer): GraphLayout {
  const depth = new Map<string, number>([[organizer.startState, 0]])
  const queue = [organizer.startState]
  while (queue.length > 0) {
    const current = queue.shift() as string
    for (const t of organizer.transitions) {
      if (t.sourceState === current && !depth.has(t.targetState)) {
        depth.set(t.targetState, (depth.get(current) as number) + 1)
        queue.push(t.targetState)
      }
    }
  }
  let maxDepth = 0
  for (const state of organizer.states) {
    if (state.name === organizer.failureState) continue
    if (!depth.has(state.name)) depth.set(state.name, 0)
    maxDepth = Math.max(maxDepth, depth.get(state.name) as number)
  }
  // the failure state sits alone in the rightmost column
  depth.set(organizer.failureState, maxDepth + 1)

  const rowsUsed = new Map<number, number>()
  const nodes: NodePosition[] = organizer.states.map((state) => {
    const column = depth.get(state.name) as number
    const row = rowsUsed.get(column) ?? 0
    rowsUsed.set(column, row + 1)
    return {
      name: state.name,
      column,
      row,
      x: MARGIN + column * COLUMN_WIDTH,
      y: MARGIN + row * ROW_HEIGHT,
    }
  })
  const maxRow = Math.max(...nodes.map((n) => n.row))
  return {
    nodes,
    width: MARGIN * 2 + (maxDepth + 1) * COLUMN_WIDTH,
    height: MARGIN * 2 + maxRow * ROW_HEIGHT,
  }
}

function guardValueFor(
  trace: ExecutionTrace | null,
  transition: FsmTransition,
): boolean | null {
  if (!trace) return null
  for (const step of trace.steps) {
    for (const evaluation of step.guardEvaluations) {
      if (
        evaluation.sourceState === transition.sourceState &&
        evaluation.targetState === transition.targetState
      ) {
        return evaluation.value
      }
    }
  }
  return null
}

function executedStates(trace: ExecutionTrace | null): Set<string> {
  const visited = new Set<string>()
  if (trace) {
    for (const step of trace.steps) visited.add(step.stateName)
    if (trace.terminalState) visited.add(trace.terminalState)
  }
  return visited
}

/** Render the mechanism graph as an SVG string.  Solid arcs are success
 * transitions, dashed arcs lead to the failure state; states on the
 * executed path carry the `highlighted` class.  Guard strings are
 * emitted verbatim (HTML-escaped only). */
export function renderTraceView(
  organizer: Organizer,
  trace: ExecutionTrace | null,
): string {
  const layout = layoutGraph(organizer)
  const byName = new Map(layout.nodes.map((n) => [n.name, n]))
  const visited = executedStates(trace)
  const invocationByState = new Map(
    organizer.states.map((s) => [s.name, s.goalInvocation]),
  )

  const edges = organizer.transitions.map((t) => {
    const from = byName.get(t.sourceState)
    const to = byName.get(t.targetState)
    if (!from || !to) return ''
    const failure = t.targetState === organizer.failureState
    const executed = visited.has(t.sourceState) && visited.has(t.targetState)
    const value = guardValueFor(trace, t)
    const classes = [
      'edge',
      failure ? 'failure' : 'success',
      executed && value === true ? 'taken' : '',
    ].filter(Boolean).join(' ')
    const dash = failure ? ' stroke-dasharray="6 4"' : ''
    const valueAttr = value === null ? '' : ` data-guard-value="${value}"`
    return (
      `<g class="${classes}" data-guard="${escapeHtml(t.dataCondition)}"` +
      `${valueAttr}>` +
      `<line x1="${from.x}" y1="${from.y}" x2="${to.x}" y2="${to.y}"` +
      `${dash} marker-end="url(#arrow)"/>` +
      `<title>${escapeHtml(t.dataCondition)}` +
      `${value === null ? '' : ` = ${value}`}</title></g>`
    )
  })

  const nodes = layout.nodes.map((n) => {
    const invocation = invocationByState.get(n.name)
    const kind = invocation ? invocation.type : 'operation'
    const classes = [
      'node',
      `kind-${kind}`,
      visited.has(n.name) ? 'highlighted' : '',
      n.name === organizer.failureState ? 'failure-state' : '',
      trace && trace.outcome === 'Stuck' &&
        trace.steps.length > 0 &&
        trace.steps[trace.steps.length - 1].stateName === n.name
        ? 'stuck'
        : '',
    ].filter(Boolean).join(' ')
    const label = invocation ? invocation.goalReference : ''
    return (
      `<g class="${classes}" data-state="${escapeHtml(n.name)}">` +
      `<circle cx="${n.x}" cy="${n.y}" r="${NODE_RADIUS}"/>` +
      `<text x="${n.x}" y="${n.y - NODE_RADIUS - 8}" class="state-name">` +
      `${escapeHtml(n.name)}</text>` +
      `<text x="${n.x}" y="${n.y + NODE_RADIUS + 16}" class="invocation">` +
      `${escapeHtml(label)}</text></g>`
    )
  })

  const reason = trace && trace.reason
    ? `<text x="${MARGIN}" y="${layout.height + 24}" class="reason">` +
      `${escapeHtml(trace.reason)}</text>`
    : ''
  return (
    `<svg class="fsm" viewBox="0 0 ${layout.width} ` +
    `${layout.height + 40}" xmlns="http://www.w3.org/2000/svg">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" ` +
    `markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>` +
    `${edges.join('')}${nodes.join('')}${reason}</svg>`
  )
}
