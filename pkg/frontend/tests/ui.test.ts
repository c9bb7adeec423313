import { beforeEach, describe, expect, it, vi } from 'vitest'

import { mount, SessionConsole } from '../src/app'
import { FakeServer } from './fake-server'

function numbersIn(value: unknown, out: Set<string>): void {
  if (typeof value === 'number') out.add(String(value))
  else if (Array.isArray(value)) value.forEach((v) => numbersIn(v, out))
  else if (value && typeof value === 'object') {
    Object.values(value).forEach((v) => numbersIn(v, out))
  }
}

/** Every numeric value served by the (intercepted) API, as rendered strings. */
function servedNumbers(server: FakeServer): Set<string> {
  const out = new Set<string>()
  server.served.forEach((body) => numbersIn(body, out))
  return out
}

/** Every number the UI displays: weights, equity points, score, confidence. */
function renderedNumbers(root: HTMLElement): string[] {
  const out: string[] = []
  root.querySelectorAll('.weight').forEach((n) => out.push(n.getAttribute('data-weight')!))
  root.querySelectorAll('.equity-point').forEach((n) => out.push(n.getAttribute('data-equity')!))
  const score = root.querySelector('.score')?.textContent
  if (score) out.push(score.replace('score: ', ''))
  root.querySelectorAll('.confidence').forEach((n) => {
    const text = n.textContent!.replace('confidence: ', '')
    if (text !== '–') out.push(text)
  })
  return out
}

describe('console ui loop', () => {
  let server: FakeServer
  let root: HTMLElement
  let app: SessionConsole

  beforeEach(async () => {
    server = new FakeServer()
    vi.stubGlobal('fetch', server.fetch)
    document.body.innerHTML = '<div id="root"></div>'
    root = document.getElementById('root')!
    app = mount(root)
    await app.start('ACME', '2024-01-02')
  })

  it('fresh session: decision disabled, preference form highlighted', () => {
    const decide = root.querySelector<HTMLButtonElement>('button.decide')!
    expect(decide.disabled).toBe(true)
    expect(root.querySelector('.profile-badge')!.classList.contains('highlight')).toBe(true)
    expect(root.querySelector('.preference-form')).not.toBeNull()
  })

  it('conservative preference unlocks deciding and shows agent cards', async () => {
    await app.setPreference('conservative')
    expect(root.querySelector('.profile-badge')!.textContent).toBe('Cons')
    expect(root.querySelector<HTMLButtonElement>('button.decide')!.disabled).toBe(false)
    const cards = root.querySelectorAll('.agent-card')
    expect(cards.length).toBe(3)
    const news = root.querySelector('[data-agent=news]')!
    expect(news.querySelector('.retrieval')!.getAttribute('data-retrieved')).toBe('true')
    const time = root.querySelector('[data-agent=time]')!
    expect(time.querySelector('.retrieval')!.getAttribute('data-retrieved')).toBe('false')
  })

  it('decide renders the decision panel from the response body', async () => {
    await app.setPreference('conservative')
    await app.decide()
    expect(root.querySelector('.prediction')!.textContent).toBe('Up')
    expect(root.querySelector('.action')!.textContent).toBe('Buy')
    expect(root.querySelector('.score')!.textContent).toBe('score: 1.07032')
    expect(root.querySelector<HTMLButtonElement>('button.advance')!.disabled).toBe(false)
  })

  it('disagree feedback re-renders the weights panel per the server body', async () => {
    await app.setPreference('conservative')
    await app.decide()
    const before = Array.from(root.querySelectorAll('.weight')).map(
      (n) => n.getAttribute('data-weight'),
    )
    expect(before).toEqual(['1', '1', '1'])
    root.querySelector<HTMLButtonElement>('button.disagree')!.click()
    await vi.waitFor(() => {
      const weights = Object.fromEntries(
        Array.from(root.querySelectorAll('.weight')).map((n) => [
          n.getAttribute('data-agent'),
          Number(n.getAttribute('data-weight')),
        ]),
      )
      expect(weights).toEqual({ time: 0.9, news: 1.1, statement: 0.9 })
    })
  })

  it('advance extends the equity chart by exactly one server point', async () => {
    await app.setPreference('conservative')
    await app.decide()
    expect(root.querySelectorAll('.equity-point').length).toBe(1)
    await app.advance()
    const points = root.querySelectorAll('.equity-point')
    expect(points.length).toBe(2)
    expect(points[1]!.getAttribute('data-date')).toBe('2024-01-03')
    expect(points[1]!.getAttribute('data-equity')).toBe(String(100495.04950495049))
  })

  it('decide before preference surfaces the 403 inline with retry', async () => {
    await app.decide()
    const banner = root.querySelector('.error-banner')!
    expect(banner.textContent).toContain('no_preference')
    expect(banner.querySelector('button.retry')).not.toBeNull()
    // retry after fixing the precondition succeeds
    await app.setPreference('conservative')
    await app.retry()
    expect(root.querySelector('.error-banner')).toBeNull()
    expect(root.querySelector('.prediction')!.textContent).toBe('Up')
  })

  it('full loop: every rendered number is server-originated', async () => {
    await app.setPreference('conservative')
    await app.decide()
    await app.feedback('disagree')
    await app.advance()
    await app.decide()
    await app.advance()
    const served = servedNumbers(server)
    const rendered = renderedNumbers(root)
    expect(rendered.length).toBeGreaterThan(4)
    for (const value of rendered) {
      expect(served, `rendered number ${value} not served by the API`).toContain(value)
    }
    expect(root.querySelectorAll('.equity-point').length).toBe(3)
  })

  it('never issues overlapping mutations', async () => {
    await app.setPreference('conservative')
    const first = app.decide()
    const second = app.decide() // ignored while the first is in flight
    await Promise.all([first, second])
    const decides = server.requests.filter((r) => r.path.endsWith('/decide'))
    expect(decides.length).toBe(1)
  })
})
