/** DOM rendering for the session console. All displayed numbers are copied
 * verbatim from server responses (the chart scales pixel positions, but every
 * data point carries its raw server value in data attributes and labels). */
import type { SignalView } from './api'
import type { SessionView } from './state'
import { canAdvance, canDecide, canGiveFeedback } from './state'

const CHART_WIDTH = 560
const CHART_HEIGHT = 160

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v)
  if (text !== undefined) node.textContent = text
  return node
}

function agentCard(agent: string, signal: SignalView | null): HTMLElement {
  const card = el('div', { class: 'agent-card', 'data-agent': agent })
  card.appendChild(el('h3', {}, agent))
  if (signal === null) {
    card.appendChild(el('p', { class: 'abstained' }, 'abstained'))
    return card
  }
  card.appendChild(el('p', { class: 'trend', 'data-trend': signal.trend }, signal.trend))
  card.appendChild(
    el(
      'p',
      { class: 'confidence' },
      signal.confidence === null ? 'confidence: –' : `confidence: ${signal.confidence}`,
    ),
  )
  card.appendChild(el('p', { class: 'rationale' }, signal.rationale))
  const retrieved = signal.provenance.some((p) => p.startsWith('retrieval:'))
  card.appendChild(
    el('p', { class: 'retrieval', 'data-retrieved': String(retrieved) },
      retrieved ? 'web context used' : 'no retrieval'),
  )
  return card
}

function equityChart(points: [string, number][]): SVGSVGElement {
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg')
  svg.setAttribute('class', 'equity-chart')
  svg.setAttribute('viewBox', `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`)
  if (points.length === 0) return svg
  const values = points.map(([, v]) => v)
  const lo = Math.min(...values)
  const hi = Math.max(...values)
  const span = hi - lo || 1
  const step = points.length > 1 ? CHART_WIDTH / (points.length - 1) : 0
  const coords: string[] = []
  points.forEach(([date, value], i) => {
    const x = i * step
    const y = CHART_HEIGHT - ((value - lo) / span) * CHART_HEIGHT
    coords.push(`${x},${y}`)
    const dot = document.createElementNS('http://www.w3.org/2000/svg', 'circle')
    dot.setAttribute('class', 'equity-point')
    dot.setAttribute('cx', String(x))
    dot.setAttribute('cy', String(y))
    dot.setAttribute('r', '3')
    // raw server values travel with the point; labels show them verbatim
    dot.setAttribute('data-date', date)
    dot.setAttribute('data-equity', String(value))
    svg.appendChild(dot)
  })
  const line = document.createElementNS('http://www.w3.org/2000/svg', 'polyline')
  line.setAttribute('points', coords.join(' '))
  line.setAttribute('fill', 'none')
  svg.insertBefore(line, svg.firstChild)
  return svg
}

export function render(root: HTMLElement, view: SessionView): void {
  root.textContent = ''

  if (view.error) {
    const banner = el('div', { class: 'error-banner', role: 'alert' })
    banner.appendChild(el('span', {}, `${view.error.code}: ${view.error.message}`))
    banner.appendChild(el('button', { class: 'retry', type: 'button' }, 'Retry'))
    root.appendChild(banner)
  }

  const header = el('div', { class: 'session-header' })
  header.appendChild(el('span', { class: 'cursor' }, view.cursor ?? 'no session'))
  const badge = el('span', { class: 'profile-badge' },
    view.profile ? view.profile.kind : 'set a preference')
  if (!view.profile) badge.classList.add('highlight')
  header.appendChild(badge)
  root.appendChild(header)

  const form = el('form', { class: 'preference-form' })
  form.appendChild(el('input', { name: 'preference', placeholder: 'risk preference' }))
  form.appendChild(el('button', { type: 'submit' }, 'Set preference'))
  root.appendChild(form)

  const agents = el('div', { class: 'agent-cards' })
  const signals = view.signals?.signals ?? {}
  for (const agent of ['time', 'news', 'statement']) {
    agents.appendChild(agentCard(agent, signals[agent] ?? null))
  }
  root.appendChild(agents)

  const panel = el('div', { class: 'decision-panel' })
  const decideBtn = el('button', { class: 'decide', type: 'button' }, 'Decide')
  decideBtn.disabled = !canDecide(view)
  panel.appendChild(decideBtn)
  if (view.decision) {
    panel.appendChild(el('p', { class: 'prediction' }, view.decision.prediction))
    panel.appendChild(el('p', { class: 'action' }, view.decision.action))
    panel.appendChild(el('p', { class: 'score' }, `score: ${view.decision.score}`))
    panel.appendChild(el('p', { class: 'decision-rationale' }, view.decision.rationale))
    const agreeBtn = el('button', { class: 'agree', type: 'button' }, 'Agree')
    const disagreeBtn = el('button', { class: 'disagree', type: 'button' }, 'Disagree')
    agreeBtn.disabled = disagreeBtn.disabled = !canGiveFeedback(view)
    panel.appendChild(agreeBtn)
    panel.appendChild(disagreeBtn)
  }
  const advanceBtn = el('button', { class: 'advance', type: 'button' }, 'Advance')
  advanceBtn.disabled = !canAdvance(view)
  panel.appendChild(advanceBtn)
  root.appendChild(panel)

  const weights = el('div', { class: 'weights-panel' })
  for (const [agent, w] of Object.entries(view.weights ?? {})) {
    weights.appendChild(
      el('span', { class: 'weight', 'data-agent': agent, 'data-weight': String(w) },
        `${agent}: ${w}`),
    )
  }
  root.appendChild(weights)

  root.appendChild(equityChart(view.equityPoints))
}
